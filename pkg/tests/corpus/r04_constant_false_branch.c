/* Debug scaffolding left disabled: the branch condition is the
 * constant 0, so the dump never happens.
 *
 * Planted bug: dump_state() can never execute.
 * Expected: reach, 1 error, "unreachable code".
 */

void init_subsystem(void) {
    if (0) {
        dump_state();
    }
    start_engine();
}
