/* Two spawned workers share the network and logging mutexes but nest
 * them in opposite orders. main itself takes no locks; the entry
 * points come from the pthread_create calls.
 *
 * Planted bug: net_worker orders net_mux before log_mux, log_worker
 * the other way around.
 * Expected: thread, 1 error, "circular lock dependency:
 *   log_mux <- net_mux <- log_mux".
 */

void net_worker(void) {
    mutex_lock(&net_mux);
    mutex_lock(&log_mux);
    log_packet();
    mutex_unlock(&log_mux);
    mutex_unlock(&net_mux);
}

void log_worker(void) {
    mutex_lock(&log_mux);
    mutex_lock(&net_mux);
    flush_pending();
    mutex_unlock(&net_mux);
    mutex_unlock(&log_mux);
}

int main(void) {
    pthread_create(&t1, 0, net_worker, 0);
    pthread_create(&t2, 0, log_worker, 0);
    return 0;
}
