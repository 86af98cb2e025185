#pragma once

#include <vector>

namespace crcva {

/// Noncentral chi-square law with `dof` degrees of freedom and noncentrality `ncp`.
///
/// The CDF is the Poisson(ncp/2) mixture of central chi-square CDFs, summed
/// with the upward recurrence P(a+1,z) = P(a,z) - z^a e^-z / Gamma(a+1) so that
/// only one incomplete-gamma evaluation is needed per call. Poisson terms more
/// than ~8.5 standard deviations below the mean are skipped.
class NoncentralChiSquare {
public:
    NoncentralChiSquare(double dof, double ncp);

    double cdf(double x) const;
    double pdf(double x) const;

    /// Inverse CDF at u = Phi(z). The normal score seeds Newton's method through
    /// a Pearson/Wilson-Hilferty approximation; z is clamped to [-7.5, 7.5].
    double quantile_from_normal(double z) const;
    double quantile(double u) const;
    /// As above with a caller-supplied starting point.
    double quantile_from_normal(double z, double guess) const;

    double mean() const { return dof_ + ncp_; }
    double variance() const { return 2.0 * (dof_ + 2.0 * ncp_); }

private:
    struct Eval {
        double cdf;
        double dcdf_dlogx;    // x * pdf(x)
        double d2cdf_dlogx2;
    };
    Eval evaluate(double x) const;
    double solve(double u, double guess) const;
    double initial_guess(double z, double u) const;

    double dof_;
    double ncp_;
    double half_ncp_;
    double a0_;
    long j0_;
    double log_w0_;       // log Poisson weight at j0
    double lgamma_a_;     // lgamma(a0 + j0 + 1)
};

/// Inverse CDF for a fixed number of degrees of freedom and varying
/// noncentrality, as needed by an exact CIR step on a fixed time grid.
///
/// ln(quantile) is tabulated on a uniform (sqrt(ncp), z) lattice and
/// interpolated bilinearly to seed the solver, which then typically needs a
/// single Halley update. Noncentralities above `max_ncp` fall back to the
/// moment-matched starting point.
class NoncentralChiSquareSampler {
public:
    explicit NoncentralChiSquareSampler(double dof, double max_ncp = 200.0);

    double quantile_from_normal(double ncp, double z) const;

    double dof() const noexcept { return dof_; }

private:
    double table_guess(double v, double z) const;

    double dof_;
    double v_max_;
    int nv_;
    int nz_;
    std::vector<double> log_q_;  // row-major [v][z]
};

}  // namespace crcva
