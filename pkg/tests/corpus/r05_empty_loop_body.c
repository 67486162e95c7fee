/* Event drain. The semicolon after the while header empties the loop
 * body: it spins on has_events without ever draining one.
 *
 * Planted bug: `while (...);` with the real body below it.
 * Expected: reach, 1 warning, "superfluous semicolon".
 */

void drain_events(struct dev *d) {
    while (has_events(d));
    finish(d);
}
