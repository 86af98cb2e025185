#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crcva/market_data.hpp"
#include "crcva/ncx2.hpp"

namespace crcva {

/// CIR intensity dy = kappa (mu - y) dt + nu sqrt(y) dZ_y.
struct CirParams {
    double y0 = 0.0560;
    double kappa = 0.6331;
    double mu = 0.0293;
    double nu = 0.5945;

    std::vector<std::string> validate() const;
    /// 2 kappa mu - nu^2; negative when the origin is attainable.
    double feller_indicator() const { return 2.0 * kappa * mu - nu * nu; }
    CirParams with_vol_multiplier(double multiplier) const;
};

/// E[exp(-int_0^t y ds)] for the time-homogeneous CIR process started at y0.
double cir_zcb_price(const CirParams& p, double t);

/// Cumulative deterministic shift Psi(t) = int_0^t psi; linear between grid nodes.
class CreditShift {
public:
    CreditShift() = default;
    CreditShift(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;
    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const CreditShift&, const CreditShift&) = default;

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

struct CreditShiftOptions {
    /// Reject fits whose Psi decreases (psi < 0) anywhere on the grid.
    bool require_positive_psi = true;
    double tolerance = 1e-14;
};

/// Psi(t_i) = ln P^CIR(0,t_i) - ln Q_market(tau > t_i) on the grid; t = 0 is added
/// when absent. Throws CalibrationError naming the first interval on which Psi
/// decreases when positivity is required.
CreditShift fit_credit_shift(const CirParams& p, const HazardCurve& market,
                             std::span<const double> grid, const CreditShiftOptions& options = {});

/// Model survival exp(-Psi(t)) P^CIR(0,t).
double model_survival_probability(const CirParams& p, const CreditShift& shift, double t);

/// Calibrated CIR++ intensity model.
struct CreditModel {
    CirParams params;
    CreditShift shift;
};

/// Exact CIR transition y(t+dt) | y(t): c times a noncentral chi-square with
/// 4 kappa mu / nu^2 degrees of freedom and noncentrality y e^{-kappa dt} / c,
/// where c = nu^2 (1 - e^{-kappa dt}) / (4 kappa). Driven by one standard normal
/// through the probability integral transform, so the map is monotone in the draw.
class CirTransition {
public:
    CirTransition(const CirParams& p, double dt);

    double operator()(double y, double z) const;

    double mean(double y) const { return theta_ + (y - theta_) * decay_; }
    double variance(double y) const;
    double dt() const noexcept { return dt_; }

private:
    double theta_;
    double kappa_;
    double nu_;
    double dt_;
    double decay_;
    double scale_;  // c
    std::optional<NoncentralChiSquareSampler> sampler_;
};

/// One exact CIR step from y driven by the standard normal z.
double evolve_cir(const CirParams& p, double y, double dt, double z);

/// Full-truncation Euler step, kept as a cross-check scheme. Works on the
/// unfloored state; the intensity is max(state, 0).
double evolve_cir_euler(const CirParams& p, double state, double dt, double z);

/// Lambda(t_i) = Psi(t_i) + trapezoidal integral of y up to t_i.
std::vector<double> cumulative_intensity(std::span<const double> times, std::span<const double> y,
                                         const CreditShift& shift);

/// First time Lambda reaches xi, linearly interpolated inside the bracketing
/// step; empty when xi exceeds Lambda at the last grid time.
std::optional<double> sample_default_time(std::span<const double> times,
                                          std::span<const double> cumulative, double xi);

}  // namespace crcva
