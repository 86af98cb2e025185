#pragma once

#include <span>
#include <string>
#include <vector>

#include "crcva/market_data.hpp"

namespace crcva {

/// Two-factor spot model ln S = x + L + phi with
///   dx = -k_x x dt + sigma_x dZ_x,  dL = mu_L dt + sigma_L dZ_L,  dZ_x dZ_L = rho_xL dt.
struct OilParams {
    double k_x = 0.7170;
    double sigma_x = 0.3522;
    double sigma_L = 0.19;
    double rho_xL = -0.0392;
    double mu_L = 0.0;

    std::vector<std::string> validate() const;
    /// Instantaneous volatility of d ln S.
    double spot_vol() const;
    OilParams with_vol_multiplier(double multiplier) const;
};

struct OilState {
    double x = 0.0;
    double L = 0.0;
    double t = 0.0;
};

/// Conditional law of (x(t), L(t)) given (x(s), L(s)) for elapsed time dt = t - s.
struct OilTransition {
    double decay = 1.0;   // e^{-k_x dt}, multiplies x(s)
    double drift_L = 0.0; // mu_L dt, added to L(s)
    double var_x = 0.0;
    double var_L = 0.0;
    double cov_xL = 0.0;

    /// Variance of x(t) + L(t).
    double log_spot_variance() const { return var_x + var_L + 2.0 * cov_xL; }
};

OilTransition transition_moments(const OilParams& p, double s, double t);

/// Exact Gaussian step. `z_x` and `z_L` must be independent standard normals;
/// the step covariance is applied here through its Cholesky factor.
OilState evolve_oil_state(const OilParams& p, const OilState& state, double dt, double z_x,
                          double z_L);

/// Variance of ln S(T) seen from t.
double log_spot_variance(const OilParams& p, double t, double T);

/// Deterministic shift phi(T); linear between nodes, flat outside.
class OilShift {
public:
    OilShift() = default;
    OilShift(std::vector<double> maturities, std::vector<double> values);

    static OilShift zero() { return OilShift({1.0}, {0.0}); }

    double operator()(double T) const;
    std::span<const double> maturities() const noexcept { return maturities_; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const OilShift&, const OilShift&) = default;

private:
    std::vector<double> maturities_;
    std::vector<double> values_;
};

/// Calibrated oil model: parameters, shift and the initial factor state.
struct OilModel {
    OilParams params;
    OilShift shift;
    double x0 = 0.0;
    double L0 = 0.0;

    OilState initial_state() const { return {x0, L0, 0.0}; }
};

double forward_price(const OilParams& p, const OilShift& shift, const OilState& state, double T);
inline double forward_price(const OilModel& m, const OilState& state, double T) {
    return forward_price(m.params, m.shift, state, T);
}

OilShift calibrate_shift(const OilParams& p, const ForwardCurveQuotes& fwd, double x0, double L0);

/// Builds the calibrated model, defaulting x0 = 0 and L0 = ln(first quote).
OilModel calibrate_oil_model(const OilParams& p, const ForwardCurveQuotes& fwd);

struct GibsonSchwartzParams {
    double k_q;
    double alpha;
    double sigma_S;
    double sigma_q;
    double rho_qS;
    double r;
};

OilParams map_gibson_schwartz(const GibsonSchwartzParams& g);

/// sqrt(Vbar(0,T,T)/T): Black vol of an option on the future expiring with it.
double model_atm_vol(const OilParams& p, double T);

struct OilCalibrationResult {
    OilParams params;
    double objective = 0.0;
    int iterations = 0;
};

struct OilCalibrationOptions {
    int max_iterations = 500;
    double tolerance = 1e-10;
};

/// Least-squares fit of (k_x, sigma_x, sigma_L, rho_xL) to ATM vols, mu_L held
/// at its initial value. Levenberg-Marquardt with a finite-difference Jacobian
/// on an unconstrained reparametrisation.
OilCalibrationResult calibrate_oil_params(const AtmVolQuotes& quotes, const OilParams& init,
                                          const OilCalibrationOptions& options = {});

/// Sum of squared ATM-vol residuals.
double atm_vol_objective(const OilParams& p, const AtmVolQuotes& quotes);

}  // namespace crcva
