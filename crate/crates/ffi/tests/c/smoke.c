#include <math.h>
#include <stdio.h>

#include "genbound.h"

int main(void) {
    const double probs[] = {0.3, 0.7};
    const int64_t numerators[] = {0, 1, 1, 0, 1, 1};
    GbDistribution *mu = NULL;
    GbLossTable *loss = NULL;
    GbKernel *kernel = NULL;
    double mi = -1.0;
    GbRiskSummary summary;

    if (gb_distribution_new(probs, 2, &mu) != GB_STATUS_OK) return 1;
    if (gb_loss_table_new(numerators, 3, 2, 1, 0, 1, &loss) != GB_STATUS_OK) return 2;
    if (gb_kernel_gibbs(loss, 2, 2.0, NULL, 0, &kernel) != GB_STATUS_OK) return 3;
    if (gb_io_mutual_information(mu, 2, kernel, &mi) != GB_STATUS_OK) return 4;
    if (gb_exact_risk_summary(mu, 2, kernel, loss, &summary) != GB_STATUS_OK) return 5;
    if (fabs(summary.gen_error) > gb_mi_gen_bound(gb_loss_table_sigma(loss), 2, mi) + 1e-9) return 6;

    GbKernel *bad = NULL;
    if (gb_kernel_erm(loss, 40, GB_TIE_RULE_LOWEST_INDEX, &bad) != GB_STATUS_CAPACITY) return 7;
    if (gb_last_error_message() == NULL) return 8;

    printf("%.17g\n", mi);
    gb_kernel_free(kernel);
    gb_loss_table_free(loss);
    gb_distribution_free(mu);
    return 0;
}
