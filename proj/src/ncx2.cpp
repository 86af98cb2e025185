#include "crcva/ncx2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "crcva/errors.hpp"

namespace crcva {

namespace {

using FastPolicy =
    boost::math::policies::policy<boost::math::policies::promote_double<false>>;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

}  // namespace

NoncentralChiSquare::NoncentralChiSquare(double dof, double ncp)
    : dof_(dof), ncp_(ncp), half_ncp_(0.5 * ncp), a0_(0.5 * dof) {
    if (!(dof > 0.0) || !(ncp >= 0.0) || !std::isfinite(ncp))
        throw DomainError("noncentral chi-square: need dof > 0 and finite ncp >= 0");
    const double lower = half_ncp_ - 8.5 * std::sqrt(half_ncp_) - 5.0;
    j0_ = lower > 0.0 ? static_cast<long>(std::floor(lower)) : 0;
    const double j0 = static_cast<double>(j0_);
    log_w0_ = half_ncp_ > 0.0 ? -half_ncp_ + j0 * std::log(half_ncp_) - std::lgamma(j0 + 1.0)
                              : 0.0;
    lgamma_a_ = std::lgamma(a0_ + j0 + 1.0);
}

NoncentralChiSquare::Eval NoncentralChiSquare::evaluate(double x) const {
    if (!(x > 0.0)) return {0.0, 0.0};
    const double z = 0.5 * x;
    const double log_z = std::log(z);
    double a = a0_ + static_cast<double>(j0_);
    double p = boost::math::gamma_p(a, z, FastPolicy());
    // g = z^a e^-z / Gamma(a + 1)
    double g = std::exp(a * log_z - z - lgamma_a_);
    double w = std::exp(log_w0_);

    double cdf = 0.0;
    double dcdf = 0.0;
    double d2cdf = 0.0;
    for (long j = j0_;; ++j) {
        cdf += w * p;
        dcdf += w * g * a;
        d2cdf += w * g * a * (a - z);
        p -= g;
        if (p < 0.0) p = 0.0;
        g *= z / (a + 1.0);
        a += 1.0;
        const double next = static_cast<double>(j + 1);
        w *= half_ncp_ / next;
        if (next > half_ncp_) {
            // Both P(a,z) and the Poisson weights decrease from here on.
            const double tail = w / (1.0 - half_ncp_ / (next + 1.0));
            if (tail * p < 1e-17 * cdf && tail * g * a < 1e-13 * dcdf) break;
            if (w == 0.0 || tail < 1e-300) break;
        }
    }
    return {std::min(cdf, 1.0), dcdf, d2cdf};
}

double NoncentralChiSquare::cdf(double x) const { return evaluate(x).cdf; }

double NoncentralChiSquare::pdf(double x) const {
    if (!(x > 0.0)) return 0.0;
    return evaluate(x).dcdf_dlogx / x;
}

double NoncentralChiSquare::initial_guess(double z, double u) const {
    // Pearson: X ~ b * chi2_f with matching first two moments.
    const double k = dof_;
    const double lam = ncp_;
    const double b = (k + 2.0 * lam) / (k + lam);
    const double f = (k + lam) * (k + lam) / (k + 2.0 * lam);
    const double c = 2.0 / (9.0 * f);
    const double base = 1.0 - c + z * std::sqrt(c);
    double guess = base > 0.0 ? f * base * base * base : 0.0;
    // Left-tail power law F(x) ~ (x/2)^{f/2} / Gamma(f/2 + 1).
    const double tail = 2.0 * std::exp((std::log(u) + std::lgamma(0.5 * f + 1.0)) * 2.0 / f);
    if (!(guess > 0.0) || (z < 0.0 && tail < guess && f < 2.0)) guess = tail;
    guess *= b;
    if (!(guess > 0.0) || !std::isfinite(guess)) guess = mean();
    return guess;
}

double NoncentralChiSquare::solve(double u, double guess) const {
    double s = std::log(guess);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        const Eval e = evaluate(std::exp(s));
        const double r = e.cdf - u;
        if (r == 0.0) break;
        if (r < 0.0) lo = s;
        else hi = s;

        double next;
        if (e.dcdf_dlogx > 0.0) {
            // Halley step in log x.
            const double newton = -r / e.dcdf_dlogx;
            const double denom = 1.0 + 0.5 * newton * e.d2cdf_dlogx2 / e.dcdf_dlogx;
            const double step =
                std::clamp(denom > 0.5 ? newton / denom : newton, -2.0, 2.0);
            next = s + step;
            // Cubic convergence: the remaining error is far below tolerance.
            if (std::abs(step) < 1e-4 && next > lo && next < hi) {
                s = next;
                break;
            }
        } else {
            next = r < 0.0 ? s + 2.0 : s - 2.0;
        }
        if (!(next > lo && next < hi)) {
            if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
            else next = r < 0.0 ? s + 2.0 : s - 2.0;
        }
        if (std::abs(next - s) < 1e-13 * std::max(1.0, std::abs(s))) {
            s = next;
            break;
        }
        s = next;
        if (std::isfinite(lo) && std::isfinite(hi) && hi - lo < 1e-14 * std::max(1.0, std::abs(s)))
            break;
    }
    return std::exp(s);
}

double NoncentralChiSquare::quantile_from_normal(double z) const {
    z = std::clamp(z, -7.5, 7.5);
    const double u = normal_cdf(z);
    return solve(u, initial_guess(z, u));
}

double NoncentralChiSquare::quantile_from_normal(double z, double guess) const {
    z = std::clamp(z, -7.5, 7.5);
    const double u = normal_cdf(z);
    if (!(guess > 0.0) || !std::isfinite(guess)) guess = initial_guess(z, u);
    return solve(u, guess);
}

double NoncentralChiSquare::quantile(double u) const {
    if (!(u > 0.0)) return 0.0;
    if (!(u < 1.0)) return std::numeric_limits<double>::infinity();
    // Normal score for the starting point only.
    const double z = -M_SQRT2 * boost::math::erfc_inv(2.0 * u);
    return solve(u, initial_guess(std::clamp(z, -7.5, 7.5), u));
}

namespace {

constexpr double kTableZMax = 7.5;
constexpr double kTableStep = 0.04;

}  // namespace

NoncentralChiSquareSampler::NoncentralChiSquareSampler(double dof, double max_ncp)
    : dof_(dof), v_max_(std::sqrt(std::max(max_ncp, 1.0))) {
    if (!(dof > 0.0)) throw DomainError("noncentral chi-square sampler: dof must be positive");
    nv_ = static_cast<int>(std::ceil(v_max_ / kTableStep)) + 1;
    nz_ = static_cast<int>(std::lround(2.0 * kTableZMax / kTableStep)) + 1;
    v_max_ = (nv_ - 1) * kTableStep;
    log_q_.resize(static_cast<std::size_t>(nv_) * static_cast<std::size_t>(nz_));
    for (int i = 0; i < nv_; ++i) {
        const double v = i * kTableStep;
        const NoncentralChiSquare law(dof_, v * v);
        double guess = 0.0;
        for (int k = 0; k < nz_; ++k) {
            const double z = -kTableZMax + k * kTableStep;
            const double q = law.quantile_from_normal(z, guess);
            log_q_[static_cast<std::size_t>(i) * nz_ + k] = std::log(q);
            guess = q;
        }
    }
}

double NoncentralChiSquareSampler::table_guess(double v, double z) const {
    const double fv = v / kTableStep;
    const double fz = (z + kTableZMax) / kTableStep;
    const int i = std::min(static_cast<int>(fv), nv_ - 2);
    const int k = std::min(static_cast<int>(fz), nz_ - 2);
    const double wv = fv - i;
    const double wz = fz - k;
    const double* row0 = &log_q_[static_cast<std::size_t>(i) * nz_ + k];
    const double* row1 = row0 + nz_;
    const double lo = row0[0] + wz * (row0[1] - row0[0]);
    const double hi = row1[0] + wz * (row1[1] - row1[0]);
    return std::exp(lo + wv * (hi - lo));
}

double NoncentralChiSquareSampler::quantile_from_normal(double ncp, double z) const {
    z = std::clamp(z, -kTableZMax, kTableZMax);
    const NoncentralChiSquare law(dof_, ncp);
    const double v = std::sqrt(ncp);
    const double guess = v < v_max_ ? table_guess(v, z) : 0.0;
    return law.quantile_from_normal(z, guess);
}

}  // namespace crcva
