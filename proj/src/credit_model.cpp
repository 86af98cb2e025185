#include "crcva/credit_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crcva/errors.hpp"

namespace crcva {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Above this many degrees of freedom the transition is treated as Gaussian
// with the exact mean and variance (skewness below 1%).
constexpr double kGaussianDof = 1e5;

}  // namespace

std::vector<std::string> CirParams::validate() const {
    std::vector<std::string> problems;
    if (!(kappa > 0.0)) problems.emplace_back("cir params: kappa must be positive");
    if (!(mu > 0.0)) problems.emplace_back("cir params: mu must be positive");
    if (!(nu > 0.0)) problems.emplace_back("cir params: nu must be positive");
    if (!(y0 >= 0.0)) problems.emplace_back("cir params: y0 must be nonnegative");
    return problems;
}

CirParams CirParams::with_vol_multiplier(double multiplier) const {
    CirParams out = *this;
    out.nu *= multiplier;
    return out;
}

double cir_zcb_price(const CirParams& p, double t) {
    if (t < 0.0) throw DomainError("cir_zcb_price: negative time");
    if (t == 0.0) return 1.0;
    const double h = std::sqrt(p.kappa * p.kappa + 2.0 * p.nu * p.nu);
    const double kh = p.kappa + h;
    const double eps = 2.0 * p.nu * p.nu / kh;  // h - kappa, without cancellation
    const double decay = std::exp(-h * t);
    // ln A / (2 kappa mu / nu^2), rearranged so every term is O(nu^2).
    const double log_a_unit =
        std::log1p(eps / kh) - 0.5 * eps * t - std::log1p(eps * decay / kh);
    const double log_a = 2.0 * p.kappa * p.mu / (p.nu * p.nu) * log_a_unit;
    const double b = -2.0 * std::expm1(-h * t) / (kh + eps * decay);
    return std::exp(log_a - b * p.y0);
}

CreditShift::CreditShift(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size())
        throw ConfigError("credit shift: times and values must be nonempty and equal in length");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw ConfigError("credit shift: times must be strictly increasing");
}

double CreditShift::operator()(double t) const {
    if (times_.size() == 1) return values_.front();
    std::size_t i;
    if (t <= times_.front()) i = 1;
    else if (t >= times_.back()) i = times_.size() - 1;
    else i = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) -
                                      times_.begin());
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

CreditShift fit_credit_shift(const CirParams& p, const HazardCurve& market,
                             std::span<const double> grid, const CreditShiftOptions& options) {
    if (auto problems = p.validate(); !problems.empty()) throw ConfigError(std::move(problems));
    std::vector<double> times;
    times.reserve(grid.size() + 1);
    if (grid.empty() || grid.front() > 0.0) times.push_back(0.0);
    for (double t : grid) {
        if (t < 0.0) throw DomainError("fit_credit_shift: negative grid time");
        if (!times.empty() && !(t > times.back()))
            throw ConfigError("fit_credit_shift: grid must be strictly increasing");
        times.push_back(t);
    }

    std::vector<double> values;
    values.reserve(times.size());
    for (double t : times)
        values.push_back(std::log(cir_zcb_price(p, t)) + market.cumulative_hazard(t));

    if (options.require_positive_psi) {
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (values[i] < values[i - 1] - options.tolerance)
                throw CalibrationError("negative psi: cumulative shift decreases on [" +
                                       fmt(times[i - 1]) + ", " + fmt(times[i]) + "]");
        }
    }
    return CreditShift(std::move(times), std::move(values));
}

double model_survival_probability(const CirParams& p, const CreditShift& shift, double t) {
    return std::exp(-shift(t)) * cir_zcb_price(p, t);
}

CirTransition::CirTransition(const CirParams& p, double dt)
    : theta_(p.mu), kappa_(p.kappa), nu_(p.nu), dt_(dt), decay_(std::exp(-p.kappa * dt)) {
    if (!(dt > 0.0)) throw DomainError("cir transition: dt must be positive");
    if (auto problems = p.validate(); !problems.empty()) throw ConfigError(std::move(problems));
    scale_ = p.nu * p.nu * -std::expm1(-p.kappa * dt) / (4.0 * p.kappa);
    const double dof = 4.0 * p.kappa * p.mu / (p.nu * p.nu);
    if (dof < kGaussianDof) {
        const double ncp_cap = std::clamp(0.5 * decay_ / scale_, 25.0, 400.0);
        sampler_.emplace(dof, ncp_cap);
    }
}

double CirTransition::variance(double y) const {
    const double one_minus = -std::expm1(-kappa_ * dt_);
    return y * nu_ * nu_ * decay_ * one_minus / kappa_ +
           theta_ * nu_ * nu_ * one_minus * one_minus / (2.0 * kappa_);
}

double CirTransition::operator()(double y, double z) const {
    if (!sampler_) return std::max(0.0, mean(y) + std::sqrt(variance(y)) * z);
    const double ncp = std::max(y, 0.0) * decay_ / scale_;
    return scale_ * sampler_->quantile_from_normal(ncp, z);
}

double evolve_cir(const CirParams& p, double y, double dt, double z) {
    if (y < 0.0) throw DomainError("evolve_cir: negative intensity");
    if (!(dt > 0.0)) throw DomainError("evolve_cir: dt must be positive");
    if (auto problems = p.validate(); !problems.empty()) throw ConfigError(std::move(problems));
    const double scale = p.nu * p.nu * -std::expm1(-p.kappa * dt) / (4.0 * p.kappa);
    const double decay = std::exp(-p.kappa * dt);
    const double dof = 4.0 * p.kappa * p.mu / (p.nu * p.nu);
    if (dof >= kGaussianDof) {
        const double one_minus = -std::expm1(-p.kappa * dt);
        const double var = y * p.nu * p.nu * decay * one_minus / p.kappa +
                           p.mu * p.nu * p.nu * one_minus * one_minus / (2.0 * p.kappa);
        return std::max(0.0, p.mu + (y - p.mu) * decay + std::sqrt(var) * z);
    }
    return scale * NoncentralChiSquare(dof, y * decay / scale).quantile_from_normal(z);
}

double evolve_cir_euler(const CirParams& p, double state, double dt, double z) {
    const double y = std::max(state, 0.0);
    return state + p.kappa * (p.mu - y) * dt + p.nu * std::sqrt(y * dt) * z;
}

std::vector<double> cumulative_intensity(std::span<const double> times, std::span<const double> y,
                                         const CreditShift& shift) {
    if (times.size() != y.size())
        throw DomainError("cumulative_intensity: times and y differ in length");
    std::vector<double> out(times.size());
    double integral = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) {
            if (times[i] < times[i - 1])
                throw DomainError("cumulative_intensity: times must be sorted");
            integral += 0.5 * (y[i - 1] + y[i]) * (times[i] - times[i - 1]);
        }
        out[i] = shift(times[i]) + integral;
    }
    return out;
}

std::optional<double> sample_default_time(std::span<const double> times,
                                          std::span<const double> cumulative, double xi) {
    if (times.size() != cumulative.size() || times.empty())
        throw DomainError("sample_default_time: grid and cumulative intensity mismatch");
    if (xi <= cumulative[0]) return times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (cumulative[i] >= xi) {
            const double w = (xi - cumulative[i - 1]) / (cumulative[i] - cumulative[i - 1]);
            return times[i - 1] + w * (times[i] - times[i - 1]);
        }
    }
    return std::nullopt;
}

}  // namespace crcva
