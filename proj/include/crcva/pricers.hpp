#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crcva/market_data.hpp"
#include "crcva/oil_model.hpp"

namespace crcva {

/// Payer buys the commodity at the fixed strike; receiver sells it.
enum class Side { Payer, Receiver };

std::string_view to_string(Side side);
/// Accepts "payer" / "receiver" (case-insensitive); throws ConfigError otherwise.
Side parse_side(std::string_view text);
inline double side_sign(Side side) { return side == Side::Payer ? 1.0 : -1.0; }

struct ForwardContract {
    double maturity = 1.0;
    double strike = 0.0;
    Side side = Side::Payer;
    double notional = 1.0;

    std::vector<std::string> validate() const;
};

struct CommoditySwap {
    std::vector<double> payment_times;
    std::vector<double> notionals;  // alpha_i, barrels per period
    double strike = 0.0;
    Side side = Side::Payer;

    /// `periods_per_year` regular payments up to `maturity`, each on `notional` barrels.
    static CommoditySwap regular(double maturity, int periods_per_year, double strike, Side side,
                                 double notional = 1.0);

    std::vector<std::string> validate() const;
    double final_maturity() const { return payment_times.back(); }
};

/// D(t,T) (F(t,T) - K) times notional, negated for the receiver; t = state.t.
double forward_value(const ForwardContract& c, const OilModel& model, const OilState& state,
                     const ZeroCurve& curve);

/// Variance of ln F(T_j, T) seen from t (exercise at T_j on the forward maturing at T).
double forward_log_variance(const OilParams& p, double t, double T, double exercise);

/// E_t[D(t,T_j) (Fwdp(T_j,T;K))^+] for the payer side, E_t[D(t,T_j) (Fwdr(T_j,T;K))^+]
/// for the receiver side. Closed form in the lognormal forward; intrinsic value when the
/// variance vanishes.
double option_on_forward(const OilModel& model, const OilState& state, double T, double exercise,
                         double strike, const ZeroCurve& curve, Side side = Side::Payer);

/// Sum of forward values over payments strictly after state.t.
double swap_value(const CommoditySwap& s, const OilModel& model, const OilState& state,
                  const ZeroCurve& curve);

/// Sum alpha_i D(t,T_i) over payments strictly after state.t.
double swap_annuity(const CommoditySwap& s, const ZeroCurve& curve, double t = 0.0);

/// Strike that sets the swap value to zero.
double fair_strike(const CommoditySwap& s, const OilModel& model, const OilState& state,
                   const ZeroCurve& curve);

/// K * sum alpha_i D(0,T_i).
double fixed_leg_value(const CommoditySwap& s, const ZeroCurve& curve);

/// Q(T_{j-1} < tau <= T_j) for consecutive grid times, starting from T_0 = 0.
std::vector<double> bucket_default_probabilities(const HazardCurve& market,
                                                 std::span<const double> grid);

/// LGD sum_j Q(T_{j-1} < tau <= T_j) E[D(0,T_j) (NPV(T_j))^+] for a forward under
/// independence; buckets are the grid times up to and including the maturity.
double cva_forward_independent(const ForwardContract& c, const OilModel& model,
                               const ZeroCurve& curve, std::span<const double> grid,
                               const HazardCurve& market, double lgd);

/// E[D(0,T_j) (NPV_j)^+] where NPV_j is the swap value at T_j of the payments after
/// T_j (side-adjusted). Conditioning on x(T_j) leaves a lognormal in L(T_j), so the
/// inner expectation is a Black price; the outer one is a Gauss-Kronrod integral.
double swap_exposure_option(const CommoditySwap& s, const OilModel& model, double exercise,
                            const ZeroCurve& curve);

/// Independence CVA for a swap with buckets on its payment grid.
double cva_swap_independent(const CommoditySwap& s, const OilModel& model,
                            const ZeroCurve& curve, const HazardCurve& market, double lgd);

/// LGD sum_j E[D(0,T_j) (NPV_j)^+]: the adjustment with every bucket weight set to
/// one, an upper bound for any intensity model and correlation.
double cva_swap_upper_bound(const CommoditySwap& s, const OilModel& model,
                            const ZeroCurve& curve, double lgd);

/// Strike shift whose default-free value change equals the adjustment:
/// payer K - cva/annuity, receiver K + cva/annuity.
double adjusted_strike(double strike, double cva, double annuity, Side side);

}  // namespace crcva
