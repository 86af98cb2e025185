#include "crcva/pricers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "crcva/errors.hpp"

namespace crcva {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

/// Undiscounted Black price of a call (or put) on a lognormal with mean `fwd`
/// and log-variance `var`.
double black(double fwd, double strike, double var, bool call) {
    if (!(var > 0.0) || !(strike > 0.0) || !(fwd > 0.0)) {
        const double intrinsic = call ? fwd - strike : strike - fwd;
        return std::max(intrinsic, 0.0);
    }
    const double sd = std::sqrt(var);
    const double d1 = (std::log(fwd / strike) + 0.5 * var) / sd;
    const double d2 = d1 - sd;
    if (call) return fwd * normal_cdf(d1) - strike * normal_cdf(d2);
    return strike * normal_cdf(-d2) - fwd * normal_cdf(-d1);
}

void require_valid(const std::vector<std::string>& problems) {
    if (!problems.empty()) throw ConfigError(problems);
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::Payer ? "payer" : "receiver"; }

Side parse_side(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "payer") return Side::Payer;
    if (lower == "receiver") return Side::Receiver;
    throw ConfigError("side: expected payer or receiver, got '" + std::string(text) + "'");
}

std::vector<std::string> ForwardContract::validate() const {
    std::vector<std::string> problems;
    if (!(maturity > 0.0)) problems.emplace_back("forward contract: maturity must be positive");
    if (!(notional > 0.0)) problems.emplace_back("forward contract: notional must be positive");
    if (!std::isfinite(strike)) problems.emplace_back("forward contract: strike must be finite");
    return problems;
}

CommoditySwap CommoditySwap::regular(double maturity, int periods_per_year, double strike,
                                     Side side, double notional) {
    if (!(maturity > 0.0) || periods_per_year <= 0)
        throw ConfigError("swap: maturity and payment frequency must be positive");
    const auto n = static_cast<int>(std::lround(maturity * periods_per_year));
    if (n < 1) throw ConfigError("swap: maturity shorter than one period");
    CommoditySwap s;
    s.strike = strike;
    s.side = side;
    for (int i = 1; i <= n; ++i) {
        s.payment_times.push_back(static_cast<double>(i) / periods_per_year);
        s.notionals.push_back(notional);
    }
    return s;
}

std::vector<std::string> CommoditySwap::validate() const {
    std::vector<std::string> problems;
    if (payment_times.empty()) problems.emplace_back("swap: no payment times");
    if (payment_times.size() != notionals.size())
        problems.emplace_back("swap: payment times and notionals differ in length");
    for (std::size_t i = 0; i < payment_times.size(); ++i) {
        if (!(payment_times[i] > 0.0))
            problems.emplace_back("swap: payment_times[" + std::to_string(i) + "] must be positive");
        if (i > 0 && !(payment_times[i] > payment_times[i - 1]))
            problems.emplace_back("swap: payment times must be strictly increasing at index " +
                                  std::to_string(i));
    }
    for (std::size_t i = 0; i < notionals.size(); ++i)
        if (!(notionals[i] > 0.0))
            problems.emplace_back("swap: notionals[" + std::to_string(i) + "] must be positive");
    if (!std::isfinite(strike)) problems.emplace_back("swap: strike must be finite");
    return problems;
}

double forward_value(const ForwardContract& c, const OilModel& model, const OilState& state,
                     const ZeroCurve& curve) {
    require_valid(c.validate());
    if (state.t > c.maturity) throw DomainError("forward_value: valuation after maturity");
    const double fwd = forward_price(model, state, c.maturity);
    return side_sign(c.side) * c.notional * curve.discount_factor(state.t, c.maturity) *
           (fwd - c.strike);
}

double forward_log_variance(const OilParams& p, double t, double T, double exercise) {
    if (!(t <= exercise && exercise <= T))
        throw DomainError("forward_log_variance: need t <= exercise <= T");
    const auto tr = transition_moments(p, t, exercise);
    const double d = std::exp(-p.k_x * (T - exercise));
    return d * d * tr.var_x + tr.var_L + 2.0 * d * tr.cov_xL;
}

double option_on_forward(const OilModel& model, const OilState& state, double T, double exercise,
                         double strike, const ZeroCurve& curve, Side side) {
    if (strike < 0.0) throw DomainError("option_on_forward: negative strike");
    const double var = forward_log_variance(model.params, state.t, T, exercise);
    const double fwd = forward_price(model, state, T);
    return curve.discount_factor(state.t, T) * black(fwd, strike, var, side == Side::Payer);
}

double swap_value(const CommoditySwap& s, const OilModel& model, const OilState& state,
                  const ZeroCurve& curve) {
    require_valid(s.validate());
    double value = 0.0;
    for (std::size_t i = 0; i < s.payment_times.size(); ++i) {
        const double T = s.payment_times[i];
        if (T <= state.t) continue;
        value += s.notionals[i] * curve.discount_factor(state.t, T) *
                 (forward_price(model, state, T) - s.strike);
    }
    return side_sign(s.side) * value;
}

double swap_annuity(const CommoditySwap& s, const ZeroCurve& curve, double t) {
    require_valid(s.validate());
    double annuity = 0.0;
    for (std::size_t i = 0; i < s.payment_times.size(); ++i)
        if (s.payment_times[i] > t)
            annuity += s.notionals[i] * curve.discount_factor(t, s.payment_times[i]);
    return annuity;
}

double fair_strike(const CommoditySwap& s, const OilModel& model, const OilState& state,
                   const ZeroCurve& curve) {
    require_valid(s.validate());
    double weighted = 0.0;
    double annuity = 0.0;
    for (std::size_t i = 0; i < s.payment_times.size(); ++i) {
        const double T = s.payment_times[i];
        if (T <= state.t) continue;
        const double w = s.notionals[i] * curve.discount_factor(state.t, T);
        weighted += w * forward_price(model, state, T);
        annuity += w;
    }
    if (!(annuity > 0.0)) throw DomainError("fair_strike: no remaining payments");
    return weighted / annuity;
}

double fixed_leg_value(const CommoditySwap& s, const ZeroCurve& curve) {
    return s.strike * swap_annuity(s, curve, 0.0);
}

std::vector<double> bucket_default_probabilities(const HazardCurve& market,
                                                 std::span<const double> grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    double previous_t = 0.0;
    double previous_q = 1.0;
    for (double t : grid) {
        if (t < previous_t) throw DomainError("bucket grid must be nondecreasing from 0");
        const double q = market.survival_probability(t);
        out.push_back(previous_q - q);
        previous_t = t;
        previous_q = q;
    }
    return out;
}

double cva_forward_independent(const ForwardContract& c, const OilModel& model,
                               const ZeroCurve& curve, std::span<const double> grid,
                               const HazardCurve& market, double lgd) {
    require_valid(c.validate());
    if (!(lgd >= 0.0 && lgd <= 1.0)) throw DomainError("lgd must lie in [0,1]");
    constexpr double kTol = 1e-10;
    std::vector<double> buckets;
    for (double t : grid)
        if (t > 0.0 && t <= c.maturity + kTol) buckets.push_back(std::min(t, c.maturity));
    if (buckets.empty() || buckets.back() < c.maturity - kTol)
        throw ConfigError("cva_forward_independent: bucket grid does not reach the maturity");
    const auto probabilities = bucket_default_probabilities(market, buckets);
    const OilState state = model.initial_state();
    double cva = 0.0;
    for (std::size_t j = 0; j < buckets.size(); ++j)
        cva += probabilities[j] *
               option_on_forward(model, state, c.maturity, buckets[j], c.strike, curve, c.side);
    return lgd * c.notional * cva;
}

double swap_exposure_option(const CommoditySwap& s, const OilModel& model, double exercise,
                            const ZeroCurve& curve) {
    require_valid(s.validate());
    if (exercise < 0.0) throw DomainError("swap_exposure_option: negative exercise time");
    const OilParams& p = model.params;

    std::vector<double> slope;      // e^{-k_x (T_i - T_j)}
    std::vector<double> intercept;  // ln(alpha_i D(T_j,T_i)) + mu_L dT + phi(T_i) + V/2
    double fixed = 0.0;
    for (std::size_t i = 0; i < s.payment_times.size(); ++i) {
        const double T = s.payment_times[i];
        if (T <= exercise) continue;
        const double w = s.notionals[i] * curve.discount_factor(exercise, T);
        slope.push_back(std::exp(-p.k_x * (T - exercise)));
        intercept.push_back(std::log(w) + p.mu_L * (T - exercise) + model.shift(T) +
                            0.5 * log_spot_variance(p, exercise, T));
        fixed += w * s.strike;
    }
    if (slope.empty()) return 0.0;

    const auto tr = transition_moments(p, 0.0, exercise);
    const double mean_x = model.x0 * tr.decay;
    const double mean_L = model.L0 + tr.drift_L;
    const double sd_x = std::sqrt(tr.var_x);
    const double beta = tr.var_x > 0.0 ? tr.cov_xL / tr.var_x : 0.0;
    const double var_L = std::max(0.0, tr.var_L - beta * tr.cov_xL);
    const bool call = s.side == Side::Payer;

    auto conditional = [&](double z) {
        const double x = mean_x + sd_x * z;
        double floating = 0.0;
        for (std::size_t i = 0; i < slope.size(); ++i)
            floating += std::exp(slope[i] * x + intercept[i]);
        const double m = mean_L + beta * (x - mean_x);
        return black(floating * std::exp(m + 0.5 * var_L), fixed, var_L, call);
    };

    double expectation;
    if (sd_x == 0.0) {
        expectation = conditional(0.0);
    } else {
        constexpr double kInvSqrt2Pi = 0.3989422804014327;
        auto integrand = [&](double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z) * conditional(z); };
        expectation = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, -12.0, 12.0, 15, 1e-13);
    }
    return curve.discount_factor(exercise) * expectation;
}

double cva_swap_independent(const CommoditySwap& s, const OilModel& model,
                            const ZeroCurve& curve, const HazardCurve& market, double lgd) {
    require_valid(s.validate());
    if (!(lgd >= 0.0 && lgd <= 1.0)) throw DomainError("lgd must lie in [0,1]");
    const auto probabilities = bucket_default_probabilities(market, s.payment_times);
    double cva = 0.0;
    for (std::size_t j = 0; j < s.payment_times.size(); ++j)
        if (probabilities[j] != 0.0)
            cva += probabilities[j] * swap_exposure_option(s, model, s.payment_times[j], curve);
    return lgd * cva;
}

double cva_swap_upper_bound(const CommoditySwap& s, const OilModel& model,
                            const ZeroCurve& curve, double lgd) {
    require_valid(s.validate());
    double bound = 0.0;
    for (double t : s.payment_times) bound += swap_exposure_option(s, model, t, curve);
    return lgd * bound;
}

double adjusted_strike(double strike, double cva, double annuity, Side side) {
    if (!(annuity > 0.0)) throw DomainError("adjusted_strike: annuity must be positive");
    return strike - side_sign(side) * cva / annuity;
}

}  // namespace crcva
