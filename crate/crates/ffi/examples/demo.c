#include <stdio.h>
#include "herdsim.h"

int main(void) {
    HsSimulation *sim = NULL;
    if (hs_simulation_new("{\"num_agents\": 1000}", 1, 0, &sim) != HS_STATUS_OK) {
        fprintf(stderr, "%s\n", hs_last_error_message());
        return 1;
    }
    uint64_t switches = 0;
    if (hs_simulation_step(sim, 2500, &switches) != HS_STATUS_OK) {
        fprintf(stderr, "%s\n", hs_last_error_message());
        hs_simulation_free(sim);
        return 1;
    }
    HsMarketState state;
    hs_simulation_state(sim, &state);
    printf("step %llu price %.6f baseline %.6f sigma %.4f switches %llu\n",
           (unsigned long long)state.step, state.price, state.baseline_log_price,
           state.sigma, (unsigned long long)switches);
    hs_simulation_free(sim);
    return 0;
}
