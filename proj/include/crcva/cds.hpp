#pragma once

#include <vector>

#include "crcva/market_data.hpp"

namespace crcva {

/// Premium schedule T_a < T_{a+1} < ... < T_b.
struct CdsSchedule {
    double start = 0.0;
    std::vector<double> payment_times;

    /// Regular schedule rolled back from maturity, short first period if needed.
    static CdsSchedule regular(double maturity, int frequency, double start = 0.0);
};

/// Receiver CDS value per unit notional (protection seller view):
/// premium coupons plus accrual-on-default, minus LGD times the protection leg.
///
/// Default integrals are discretized on sub-buckets no longer than
/// `max_step`, splitting at hazard-curve nodes; discounting and accrual are
/// taken at each sub-bucket midpoint.
double cds_model_price(const HazardCurve& hazard, const ZeroCurve& curve, double spread,
                       double lgd, const CdsSchedule& schedule, double max_step = 1.0 / 52.0);

/// Spread that sets cds_model_price to zero.
double cds_par_spread(const HazardCurve& hazard, const ZeroCurve& curve, double lgd,
                      const CdsSchedule& schedule, double max_step = 1.0 / 52.0);

}  // namespace crcva
