/* Table resizing spread over two functions: the statistics pool the
 * sites together. Ten of twelve size updates hold the table mutex.
 *
 * Planted bug: one unlocked write to t->size in each function.
 * Expected: lockstat, 2 errors, "variable t->size accessed without
 * lock &table_mux held; &table_mux held at 10 of 12 accesses".
 */

void grow(struct table *t) {
    mutex_lock(&table_mux);
    t->size = t->size + 1;
    t->size = t->size + 1;
    t->size = t->size + 1;
    t->size = t->size + 1;
    t->size = t->size + 1;
    t->size = t->size + 1;
    mutex_unlock(&table_mux);
    t->size = t->size + 2;
}

void shrink(struct table *t) {
    mutex_lock(&table_mux);
    t->size = t->size - 1;
    t->size = t->size - 1;
    t->size = t->size - 1;
    t->size = t->size - 1;
    mutex_unlock(&table_mux);
    t->size = 0;
}
