#pragma once

#include <span>
#include <string>
#include <vector>

namespace crcva {

/// Continuously-compounded zero rate at a tenor (years).
struct ZeroCurveNode {
    double tenor;
    double zero_rate;
};

/// Deterministic discount curve.
///
/// Zero rates are interpolated linearly between nodes and held flat outside
/// the node range, so D(0,t) = exp(-z(t) t).
class ZeroCurve {
public:
    explicit ZeroCurve(std::vector<ZeroCurveNode> nodes);

    static ZeroCurve flat(double rate);

    double zero_rate(double t) const;
    double discount_factor(double t) const;
    /// D(t,T) = D(0,T) / D(0,t).
    double discount_factor(double t, double T) const;

    std::span<const ZeroCurveNode> nodes() const noexcept { return nodes_; }

private:
    std::vector<ZeroCurveNode> nodes_;
};

/// Running-spread CDS quotes for one reference name.
struct CdsQuoteSet {
    std::vector<double> maturities;  // years
    std::vector<double> spreads;     // decimal per year (1bp = 1e-4)
    double recovery = 0.4;
    int payment_frequency = 4;

    /// All invariant violations, empty when valid.
    std::vector<std::string> validate() const;
};

/// Market default curve with piecewise-constant hazard rates.
///
/// Stored as cumulative hazard at the bucket ends; Lambda(0) = 0 and Lambda is
/// piecewise linear. Beyond the last tenor the last hazard rate is extended.
class HazardCurve {
public:
    HazardCurve() = default;
    HazardCurve(std::vector<double> tenors, std::vector<double> hazard_rates);

    static HazardCurve flat(double hazard_rate);

    double cumulative_hazard(double t) const;
    double survival_probability(double t) const;
    double hazard_rate(double t) const;

    std::span<const double> tenors() const noexcept { return tenors_; }
    std::span<const double> hazard_rates() const noexcept { return rates_; }

private:
    std::vector<double> tenors_;
    std::vector<double> rates_;
    std::vector<double> cumulative_;
};

struct ForwardQuote {
    double maturity;
    double price;  // USD/barrel
};

struct ForwardCurveQuotes {
    std::vector<ForwardQuote> nodes;
    std::vector<std::string> validate() const;
};

struct AtmVolQuote {
    double expiry;
    double vol;
};

struct AtmVolQuotes {
    std::vector<AtmVolQuote> nodes;
    std::vector<std::string> validate() const;
};

double discount_factor(const ZeroCurve& curve, double t);
double survival_probability(const HazardCurve& curve, double t);

/// Bootstraps piecewise-constant hazards so that each quoted CDS reprices to zero.
/// Throws CalibrationError naming the maturity whose bucket has no root in
/// [0, hazard_cap] (including quote sets that would need a negative hazard).
HazardCurve strip_hazard_curve(const CdsQuoteSet& quotes, const ZeroCurve& curve,
                               double hazard_cap = 10.0);

}  // namespace crcva
