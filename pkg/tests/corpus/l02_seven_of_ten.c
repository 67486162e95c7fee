/* Hit counter. Seven increments hold the stats mutex, the three
 * resets at the bottom do not: exactly at the 70% report threshold.
 *
 * Planted bug: the three unlocked writes to s->hits.
 * Expected: lockstat, 3 errors (one per unlocked site), "variable
 * s->hits accessed without lock &stat_mux held; &stat_mux held at
 * 7 of 10 accesses".
 */

void update_counters(struct stats *s) {
    mutex_lock(&stat_mux);
    s->hits = s->hits + 1;
    s->hits = s->hits + 1;
    s->hits = s->hits + 1;
    s->hits = s->hits + 1;
    s->hits = s->hits + 1;
    s->hits = s->hits + 1;
    s->hits = s->hits + 1;
    mutex_unlock(&stat_mux);
    s->hits = s->hits + 1;
    s->hits = s->hits + 1;
    s->hits = 0;
}
