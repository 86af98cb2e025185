#include "crcva/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "crcva/cds.hpp"
#include "crcva/errors.hpp"

namespace crcva {

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

ZeroCurve::ZeroCurve(std::vector<ZeroCurveNode> nodes) : nodes_(std::move(nodes)) {
    std::vector<std::string> problems;
    if (nodes_.empty()) problems.emplace_back("zero curve has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!(nodes_[i].tenor > 0.0))
            problems.push_back("zero curve tenor[" + std::to_string(i) + "] must be positive");
        if (i > 0 && !(nodes_[i].tenor > nodes_[i - 1].tenor))
            problems.push_back("zero curve tenors must be strictly increasing at index " +
                               std::to_string(i));
        if (!std::isfinite(nodes_[i].zero_rate))
            problems.push_back("zero curve rate[" + std::to_string(i) + "] is not finite");
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

ZeroCurve ZeroCurve::flat(double rate) { return ZeroCurve({{1.0, rate}}); }

double ZeroCurve::zero_rate(double t) const {
    if (t <= nodes_.front().tenor) return nodes_.front().zero_rate;
    if (t >= nodes_.back().tenor) return nodes_.back().zero_rate;
    auto hi = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                               [](double v, const ZeroCurveNode& n) { return v < n.tenor; });
    auto lo = hi - 1;
    const double w = (t - lo->tenor) / (hi->tenor - lo->tenor);
    return lo->zero_rate + w * (hi->zero_rate - lo->zero_rate);
}

double ZeroCurve::discount_factor(double t) const {
    if (t < 0.0) throw DomainError("discount_factor: negative time " + fmt_double(t));
    if (t == 0.0) return 1.0;
    return std::exp(-zero_rate(t) * t);
}

double ZeroCurve::discount_factor(double t, double T) const {
    return discount_factor(T) / discount_factor(t);
}

double discount_factor(const ZeroCurve& curve, double t) { return curve.discount_factor(t); }

std::vector<std::string> CdsQuoteSet::validate() const {
    std::vector<std::string> problems;
    if (maturities.empty()) problems.emplace_back("cds quotes: no maturities");
    if (maturities.size() != spreads.size())
        problems.emplace_back("cds quotes: maturities and spreads differ in length");
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        if (!(maturities[i] > 0.0))
            problems.push_back("cds quotes: maturity[" + std::to_string(i) + "] must be positive");
        if (i > 0 && !(maturities[i] > maturities[i - 1]))
            problems.push_back("cds quotes: maturities must be strictly increasing at index " +
                               std::to_string(i));
    }
    for (std::size_t i = 0; i < spreads.size(); ++i) {
        if (!(spreads[i] >= 0.0) || !std::isfinite(spreads[i]))
            problems.push_back("cds quotes: spread[" + std::to_string(i) + "] = " +
                               fmt_double(spreads[i] * 1e4) + "bp must be nonnegative");
    }
    if (!(recovery >= 0.0 && recovery < 1.0))
        problems.push_back("cds quotes: recovery " + fmt_double(recovery) + " outside [0,1)");
    if (payment_frequency <= 0)
        problems.emplace_back("cds quotes: payment_frequency must be positive");
    return problems;
}

HazardCurve::HazardCurve(std::vector<double> tenors, std::vector<double> hazard_rates)
    : tenors_(std::move(tenors)), rates_(std::move(hazard_rates)) {
    if (tenors_.empty() || tenors_.size() != rates_.size())
        throw ConfigError("hazard curve: tenors and rates must be nonempty and equal in length");
    cumulative_.reserve(tenors_.size());
    double prev_t = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < tenors_.size(); ++i) {
        if (!(tenors_[i] > prev_t))
            throw ConfigError("hazard curve: tenors must be positive and strictly increasing");
        if (!(rates_[i] >= 0.0))
            throw ConfigError("hazard curve: negative hazard rate in bucket ending " +
                              fmt_double(tenors_[i]));
        acc += rates_[i] * (tenors_[i] - prev_t);
        cumulative_.push_back(acc);
        prev_t = tenors_[i];
    }
}

HazardCurve HazardCurve::flat(double hazard_rate) { return HazardCurve({1.0}, {hazard_rate}); }

double HazardCurve::cumulative_hazard(double t) const {
    if (t < 0.0) throw DomainError("cumulative_hazard: negative time " + fmt_double(t));
    if (tenors_.empty()) return 0.0;
    auto it = std::lower_bound(tenors_.begin(), tenors_.end(), t);
    if (it == tenors_.end())
        return cumulative_.back() + rates_.back() * (t - tenors_.back());
    const auto i = static_cast<std::size_t>(it - tenors_.begin());
    const double start = i == 0 ? 0.0 : tenors_[i - 1];
    const double base = i == 0 ? 0.0 : cumulative_[i - 1];
    return base + rates_[i] * (t - start);
}

double HazardCurve::survival_probability(double t) const {
    return std::exp(-cumulative_hazard(t));
}

double HazardCurve::hazard_rate(double t) const {
    if (tenors_.empty()) return 0.0;
    auto it = std::lower_bound(tenors_.begin(), tenors_.end(), t);
    if (it == tenors_.end()) return rates_.back();
    return rates_[static_cast<std::size_t>(it - tenors_.begin())];
}

double survival_probability(const HazardCurve& curve, double t) {
    return curve.survival_probability(t);
}

std::vector<std::string> ForwardCurveQuotes::validate() const {
    std::vector<std::string> problems;
    if (nodes.empty()) problems.emplace_back("forward curve: no nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i].price > 0.0))
            problems.push_back("forward curve: price[" + std::to_string(i) + "] must be positive");
        if (!(nodes[i].maturity > 0.0))
            problems.push_back("forward curve: maturity[" + std::to_string(i) +
                               "] must be positive");
        if (i > 0 && !(nodes[i].maturity > nodes[i - 1].maturity))
            problems.push_back("forward curve: maturities must be strictly increasing at index " +
                               std::to_string(i));
    }
    return problems;
}

std::vector<std::string> AtmVolQuotes::validate() const {
    std::vector<std::string> problems;
    if (nodes.empty()) problems.emplace_back("atm vols: no nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i].vol > 0.0))
            problems.push_back("atm vols: vol[" + std::to_string(i) + "] must be positive");
        if (!(nodes[i].expiry > 0.0))
            problems.push_back("atm vols: expiry[" + std::to_string(i) + "] must be positive");
        if (i > 0 && !(nodes[i].expiry > nodes[i - 1].expiry))
            problems.push_back("atm vols: expiries must be strictly increasing at index " +
                               std::to_string(i));
    }
    return problems;
}

HazardCurve strip_hazard_curve(const CdsQuoteSet& quotes, const ZeroCurve& curve,
                               double hazard_cap) {
    if (auto problems = quotes.validate(); !problems.empty()) throw ConfigError(std::move(problems));

    const double lgd = 1.0 - quotes.recovery;
    std::vector<double> tenors;
    std::vector<double> rates;

    for (std::size_t k = 0; k < quotes.maturities.size(); ++k) {
        const double maturity = quotes.maturities[k];
        const double spread = quotes.spreads[k];
        const auto schedule = CdsSchedule::regular(maturity, quotes.payment_frequency);

        tenors.push_back(maturity);
        rates.push_back(0.0);
        auto value_at = [&](double h) {
            rates.back() = h;
            return cds_model_price(HazardCurve(tenors, rates), curve, spread, lgd, schedule);
        };

        const double at_zero = value_at(0.0);
        if (at_zero == 0.0) continue;
        if (at_zero < 0.0)
            throw CalibrationError("cds bootstrap: quote at maturity " + fmt_double(maturity) +
                                   " implies a negative hazard rate (arbitrageable quotes)");
        const double at_cap = value_at(hazard_cap);
        if (at_cap > 0.0)
            throw CalibrationError("cds bootstrap: no hazard root in (0, " +
                                   fmt_double(hazard_cap) + "] at maturity " +
                                   fmt_double(maturity));

        boost::uintmax_t max_iter = 200;
        auto [lo, hi] = boost::math::tools::toms748_solve(
            value_at, 0.0, hazard_cap, at_zero, at_cap,
            boost::math::tools::eps_tolerance<double>(52), max_iter);
        const double v_lo = value_at(lo);
        const double v_hi = value_at(hi);
        rates.back() = std::abs(v_lo) <= std::abs(v_hi) ? lo : hi;
        if (std::min(std::abs(v_lo), std::abs(v_hi)) > 1e-12)
            throw CalibrationError("cds bootstrap: root finding did not reach tolerance at maturity " +
                                   fmt_double(maturity));
    }
    return HazardCurve(std::move(tenors), std::move(rates));
}

}  // namespace crcva
