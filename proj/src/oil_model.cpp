#include "crcva/oil_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "crcva/errors.hpp"

namespace crcva {

std::vector<std::string> OilParams::validate() const {
    std::vector<std::string> problems;
    if (!(k_x > 0.0)) problems.emplace_back("oil params: k_x must be positive");
    if (!(sigma_x >= 0.0)) problems.emplace_back("oil params: sigma_x must be nonnegative");
    if (!(sigma_L >= 0.0)) problems.emplace_back("oil params: sigma_L must be nonnegative");
    if (!(std::abs(rho_xL) <= 1.0)) problems.emplace_back("oil params: |rho_xL| must be <= 1");
    if (!std::isfinite(mu_L)) problems.emplace_back("oil params: mu_L must be finite");
    return problems;
}

double OilParams::spot_vol() const {
    return std::sqrt(std::max(
        0.0, sigma_x * sigma_x + sigma_L * sigma_L + 2.0 * rho_xL * sigma_x * sigma_L));
}

OilParams OilParams::with_vol_multiplier(double multiplier) const {
    OilParams out = *this;
    out.sigma_x *= multiplier;
    out.sigma_L *= multiplier;
    return out;
}

OilTransition transition_moments(const OilParams& p, double s, double t) {
    if (t < s) throw DomainError("transition_moments: t < s");
    const double dt = t - s;
    OilTransition tr;
    tr.decay = std::exp(-p.k_x * dt);
    tr.drift_L = p.mu_L * dt;
    // -expm1 keeps precision for small k_x dt.
    tr.var_x = p.sigma_x * p.sigma_x / (2.0 * p.k_x) * -std::expm1(-2.0 * p.k_x * dt);
    tr.var_L = p.sigma_L * p.sigma_L * dt;
    tr.cov_xL = p.rho_xL * p.sigma_x * p.sigma_L / p.k_x * -std::expm1(-p.k_x * dt);
    return tr;
}

OilState evolve_oil_state(const OilParams& p, const OilState& state, double dt, double z_x,
                          double z_L) {
    if (dt < 0.0) throw DomainError("evolve_oil_state: negative dt");
    const auto tr = transition_moments(p, 0.0, dt);
    const double sx = std::sqrt(tr.var_x);
    double a = 0.0;
    double b = std::sqrt(tr.var_L);
    if (sx > 0.0) {
        a = tr.cov_xL / sx;
        b = std::sqrt(std::max(0.0, tr.var_L - a * a));
    }
    return {state.x * tr.decay + sx * z_x, state.L + tr.drift_L + a * z_x + b * z_L,
            state.t + dt};
}

double log_spot_variance(const OilParams& p, double t, double T) {
    return transition_moments(p, t, T).log_spot_variance();
}

OilShift::OilShift(std::vector<double> maturities, std::vector<double> values)
    : maturities_(std::move(maturities)), values_(std::move(values)) {
    if (maturities_.empty() || maturities_.size() != values_.size())
        throw ConfigError("oil shift: maturities and values must be nonempty and equal in length");
    for (std::size_t i = 1; i < maturities_.size(); ++i)
        if (!(maturities_[i] > maturities_[i - 1]))
            throw ConfigError("oil shift: maturities must be strictly increasing");
}

double OilShift::operator()(double T) const {
    if (T <= maturities_.front()) return values_.front();
    if (T >= maturities_.back()) return values_.back();
    auto hi = std::upper_bound(maturities_.begin(), maturities_.end(), T);
    const auto i = static_cast<std::size_t>(hi - maturities_.begin());
    const double w = (T - maturities_[i - 1]) / (maturities_[i] - maturities_[i - 1]);
    return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

double forward_price(const OilParams& p, const OilShift& shift, const OilState& state, double T) {
    if (T < state.t) throw DomainError("forward_price: maturity precedes observation time");
    const double tau = T - state.t;
    return std::exp(state.x * std::exp(-p.k_x * tau) + state.L + p.mu_L * tau + shift(T) +
                    0.5 * log_spot_variance(p, state.t, T));
}

OilShift calibrate_shift(const OilParams& p, const ForwardCurveQuotes& fwd, double x0, double L0) {
    if (auto problems = fwd.validate(); !problems.empty()) throw ConfigError(std::move(problems));
    if (auto problems = p.validate(); !problems.empty()) throw ConfigError(std::move(problems));
    std::vector<double> maturities;
    std::vector<double> values;
    for (const auto& node : fwd.nodes) {
        const double T = node.maturity;
        maturities.push_back(T);
        values.push_back(std::log(node.price) - x0 * std::exp(-p.k_x * T) - L0 - p.mu_L * T -
                         0.5 * log_spot_variance(p, 0.0, T));
    }
    return OilShift(std::move(maturities), std::move(values));
}

OilModel calibrate_oil_model(const OilParams& p, const ForwardCurveQuotes& fwd) {
    if (fwd.nodes.empty()) throw ConfigError("forward curve: no nodes");
    OilModel model;
    model.params = p;
    model.x0 = 0.0;
    model.L0 = std::log(fwd.nodes.front().price);
    model.shift = calibrate_shift(p, fwd, model.x0, model.L0);
    return model;
}

OilParams map_gibson_schwartz(const GibsonSchwartzParams& g) {
    if (!(g.k_q > 0.0)) throw DomainError("gibson-schwartz: k_q must be positive");
    if (!(g.sigma_S >= 0.0 && g.sigma_q >= 0.0))
        throw DomainError("gibson-schwartz: volatilities must be nonnegative");
    if (!(std::abs(g.rho_qS) <= 1.0)) throw DomainError("gibson-schwartz: |rho_qS| must be <= 1");

    const double sq = g.sigma_q / g.k_q;
    const double var_L = g.sigma_S * g.sigma_S + sq * sq - 2.0 * g.rho_qS * g.sigma_S * sq;
    if (var_L < -1e-15) throw DomainError("gibson-schwartz: negative sigma_L^2");

    OilParams p;
    p.k_x = g.k_q;
    p.mu_L = g.r - g.alpha - 0.5 * g.sigma_S * g.sigma_S;
    p.sigma_x = sq;
    p.sigma_L = std::sqrt(std::max(0.0, var_L));
    const double numerator = g.sigma_S * g.rho_qS - sq;
    if (p.sigma_L == 0.0) {
        if (std::abs(numerator) > 1e-15)
            throw DomainError("gibson-schwartz: sigma_L = 0 with nonzero correlation numerator");
        p.rho_xL = 0.0;
    } else {
        p.rho_xL = std::clamp(numerator / p.sigma_L, -1.0, 1.0);
    }
    return p;
}

double model_atm_vol(const OilParams& p, double T) {
    if (!(T > 0.0)) throw DomainError("model_atm_vol: expiry must be positive");
    return std::sqrt(log_spot_variance(p, 0.0, T) / T);
}

double atm_vol_objective(const OilParams& p, const AtmVolQuotes& quotes) {
    double sum = 0.0;
    for (const auto& q : quotes.nodes) {
        const double r = model_atm_vol(p, q.expiry) - q.vol;
        sum += r * r;
    }
    return sum;
}

namespace {

// Unconstrained coordinates: k_x = e^a, sigma_x = b^2, sigma_L = d^2, rho = sin(c).
using Theta = Eigen::Vector4d;

OilParams from_theta(const Theta& th, double mu_L) {
    OilParams p;
    p.k_x = std::exp(th[0]);
    p.sigma_x = th[1] * th[1];
    p.sigma_L = th[2] * th[2];
    p.rho_xL = std::sin(th[3]);
    p.mu_L = mu_L;
    return p;
}

Theta to_theta(const OilParams& p) {
    return {std::log(p.k_x), std::sqrt(p.sigma_x), std::sqrt(p.sigma_L),
            std::asin(std::clamp(p.rho_xL, -1.0, 1.0))};
}

Eigen::VectorXd residuals(const Theta& th, double mu_L, const AtmVolQuotes& quotes) {
    const OilParams p = from_theta(th, mu_L);
    Eigen::VectorXd r(static_cast<Eigen::Index>(quotes.nodes.size()));
    for (std::size_t i = 0; i < quotes.nodes.size(); ++i)
        r[static_cast<Eigen::Index>(i)] =
            model_atm_vol(p, quotes.nodes[i].expiry) - quotes.nodes[i].vol;
    return r;
}

std::string describe(const OilParams& p) {
    std::ostringstream os;
    os.precision(10);
    os << "k_x=" << p.k_x << " sigma_x=" << p.sigma_x << " sigma_L=" << p.sigma_L
       << " rho_xL=" << p.rho_xL;
    return os.str();
}

}  // namespace

OilCalibrationResult calibrate_oil_params(const AtmVolQuotes& quotes, const OilParams& init,
                                          const OilCalibrationOptions& options) {
    if (auto problems = quotes.validate(); !problems.empty()) throw ConfigError(std::move(problems));
    if (quotes.nodes.size() < 4)
        throw ConfigError("atm vols: at least 4 quotes are needed to fit 4 parameters");
    if (auto problems = init.validate(); !problems.empty()) throw ConfigError(std::move(problems));

    Theta theta = to_theta(init);
    // Keep the start off the sigma = 0 / |rho| = 1 stationary points of the map.
    for (int i : {1, 2})
        if (std::abs(theta[i]) < 1e-3) theta[i] = 1e-3;
    theta[3] = std::clamp(theta[3], -1.5, 1.5);

    const double mu_L = init.mu_L;
    Eigen::VectorXd r = residuals(theta, mu_L, quotes);
    double f = r.squaredNorm();
    double lambda = 1e-3;
    const auto m = r.size();

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        Eigen::MatrixXd J(m, 4);
        for (int j = 0; j < 4; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(theta[j]));
            Theta up = theta;
            Theta dn = theta;
            up[j] += h;
            dn[j] -= h;
            J.col(j) = (residuals(up, mu_L, quotes) - residuals(dn, mu_L, quotes)) / (2.0 * h);
        }
        const Eigen::Matrix4d JtJ = J.transpose() * J;
        const Eigen::Vector4d g = J.transpose() * r;

        bool accepted = false;
        Theta step = Theta::Zero();
        double f_new = f;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::Matrix4d A = JtJ;
            for (int j = 0; j < 4; ++j) A(j, j) += lambda * std::max(JtJ(j, j), 1e-12);
            step = A.ldlt().solve(-g);
            const Theta candidate = theta + step;
            const Eigen::VectorXd r_new = residuals(candidate, mu_L, quotes);
            f_new = r_new.squaredNorm();
            if (std::isfinite(f_new) && f_new <= f) {
                theta = candidate;
                r = r_new;
                accepted = true;
                lambda = std::max(lambda / 3.0, 1e-12);
            } else {
                lambda *= 4.0;
            }
        }

        const double improvement = f - f_new;
        const bool small_step = step.norm() < options.tolerance * (theta.norm() + options.tolerance);
        const bool small_gain = !accepted || improvement <= options.tolerance * std::max(f, 1e-300);
        if (accepted) f = f_new;
        if (f < 1e-28 || (small_step && small_gain) || (!accepted && lambda > 1e12)) {
            return {from_theta(theta, mu_L), f, iter};
        }
    }
    throw CalibrationError("oil vol calibration did not converge; best so far: " +
                           describe(from_theta(theta, mu_L)));
}

}  // namespace crcva
