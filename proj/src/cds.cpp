#include "crcva/cds.hpp"

#include <algorithm>
#include <cmath>

#include "crcva/errors.hpp"

namespace crcva {

CdsSchedule CdsSchedule::regular(double maturity, int frequency, double start) {
    if (!(maturity > start) || frequency <= 0)
        throw DomainError("cds schedule: maturity must follow start and frequency be positive");
    const double period = 1.0 / frequency;
    CdsSchedule schedule;
    schedule.start = start;
    // Roll back from maturity; a stub shorter than 1% of a period is merged.
    const auto n = static_cast<long>(std::ceil((maturity - start) / period - 1e-2));
    for (long i = n - 1; i >= 0; --i) {
        const double t = maturity - static_cast<double>(i) * period;
        if (t > start + 1e-12) schedule.payment_times.push_back(t);
    }
    return schedule;
}

double cds_model_price(const HazardCurve& hazard, const ZeroCurve& curve, double spread,
                       double lgd, const CdsSchedule& schedule, double max_step) {
    if (schedule.payment_times.empty()) return 0.0;

    const auto nodes = hazard.tenors();
    double premium = 0.0;
    double accrual = 0.0;
    double protection = 0.0;
    double period_start = schedule.start;

    for (const double pay : schedule.payment_times) {
        premium += (pay - period_start) * curve.discount_factor(pay) *
                   hazard.survival_probability(pay);

        // Sub-buckets split at hazard nodes so each has a constant hazard.
        std::vector<double> cuts{period_start};
        for (const double node : nodes)
            if (node > period_start && node < pay) cuts.push_back(node);
        cuts.push_back(pay);

        double q_prev = hazard.survival_probability(period_start);
        for (std::size_t c = 1; c < cuts.size(); ++c) {
            const double a = cuts[c - 1];
            const double b = cuts[c];
            const int n = std::max(1, static_cast<int>(std::ceil((b - a) / max_step - 1e-9)));
            const double h = (b - a) / n;
            for (int s = 1; s <= n; ++s) {
                const double u = s == n ? b : a + s * h;
                const double q = hazard.survival_probability(u);
                const double mid = u - 0.5 * h;
                const double default_prob = q_prev - q;
                const double df = curve.discount_factor(mid);
                accrual += (mid - period_start) * df * default_prob;
                protection += df * default_prob;
                q_prev = q;
            }
        }
        period_start = pay;
    }
    return spread * (premium + accrual) - lgd * protection;
}

double cds_par_spread(const HazardCurve& hazard, const ZeroCurve& curve, double lgd,
                      const CdsSchedule& schedule, double max_step) {
    // Value is affine in the spread.
    const double v0 = cds_model_price(hazard, curve, 0.0, lgd, schedule, max_step);
    const double v1 = cds_model_price(hazard, curve, 1.0, lgd, schedule, max_step);
    return -v0 / (v1 - v0);
}

}  // namespace crcva
