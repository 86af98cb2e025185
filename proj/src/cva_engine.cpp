#include "crcva/cva_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "crcva/errors.hpp"

namespace crcva {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Lower Cholesky factor of a symmetric PSD 3x3 matrix. Pivots that vanish
/// (degenerate directions) yield zero columns; returns false if the matrix is
/// not PSD within `tol`.
bool cholesky3(const std::array<double, 9>& a, std::array<double, 9>& l, double tol = 1e-12) {
    l.fill(0.0);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[3 * i + j];
            for (int k = 0; k < j; ++k) sum -= l[3 * i + k] * l[3 * j + k];
            if (i == j) {
                const double scale = std::max(1.0, std::abs(a[3 * i + i]));
                if (sum < -tol * scale) return false;
                l[3 * i + i] = sum > tol * scale ? std::sqrt(sum) : 0.0;
            } else {
                const double pivot = l[3 * j + j];
                if (pivot > 0.0) {
                    l[3 * i + j] = sum / pivot;
                } else if (std::abs(sum) > 1e-9 * std::max(1.0, std::abs(a[3 * i + i]))) {
                    return false;
                }
            }
        }
    }
    return true;
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t find_time(std::span<const double> times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
    if (it == times.end() || std::abs(*it - t) > 1e-9)
        throw ConfigError("payment date " + fmt(t) + " is not on the simulation grid");
    return static_cast<std::size_t>(it - times.begin());
}

/// Closed-form residual payer NPV at each bucket date as a function of (x, L).
struct ExposureProfile {
    struct Bucket {
        std::size_t time_index;
        double discount;  // D(0, T_j)
        std::vector<double> slope;
        std::vector<double> intercept;
        double fixed;
    };
    std::vector<Bucket> buckets;
    double sign = 1.0;
    double annuity = 0.0;
    double strike = 0.0;

    double payer_npv(const Bucket& b, double x, double L) const {
        double floating = 0.0;
        for (std::size_t i = 0; i < b.slope.size(); ++i)
            floating += std::exp(b.slope[i] * x + b.intercept[i]);
        return std::exp(L) * floating - b.fixed;
    }
    double exposure(const Bucket& b, double x, double L) const {
        if (b.slope.empty()) return 0.0;
        return std::max(sign * payer_npv(b, x, L), 0.0);
    }
};

ExposureProfile::Bucket make_bucket(std::size_t index, double Tj, std::span<const double> pay,
                                    std::span<const double> notionals, double strike,
                                    const OilModel& oil, const ZeroCurve& curve, bool inclusive) {
    ExposureProfile::Bucket b{index, curve.discount_factor(Tj), {}, {}, 0.0};
    const OilParams& p = oil.params;
    for (std::size_t i = 0; i < pay.size(); ++i) {
        const double T = pay[i];
        if (inclusive ? T < Tj - 1e-12 : T <= Tj + 1e-12) continue;
        const double tau = std::max(T - Tj, 0.0);
        const double w = notionals[i] * curve.discount_factor(Tj, std::max(T, Tj));
        b.slope.push_back(std::exp(-p.k_x * tau));
        b.intercept.push_back(std::log(w) + p.mu_L * tau + oil.shift(T) +
                              0.5 * log_spot_variance(p, Tj, Tj + tau));
        b.fixed += w * strike;
    }
    return b;
}

ExposureProfile make_profile(const Product& product, std::span<const double> times,
                             const OilModel& oil, const ZeroCurve& curve) {
    ExposureProfile profile;
    if (const auto* swap = std::get_if<CommoditySwap>(&product)) {
        if (auto problems = swap->validate(); !problems.empty()) throw ConfigError(problems);
        profile.sign = side_sign(swap->side);
        profile.strike = swap->strike;
        profile.annuity = swap_annuity(*swap, curve);
        for (double Tj : swap->payment_times)
            profile.buckets.push_back(make_bucket(find_time(times, Tj), Tj, swap->payment_times,
                                                  swap->notionals, swap->strike, oil, curve,
                                                  false));
    } else {
        const auto& fwd = std::get<ForwardContract>(product);
        if (auto problems = fwd.validate(); !problems.empty()) throw ConfigError(problems);
        profile.sign = side_sign(fwd.side);
        profile.strike = fwd.strike;
        profile.annuity = fwd.notional * curve.discount_factor(fwd.maturity);
        const std::size_t last = find_time(times, fwd.maturity);
        const double pay[] = {fwd.maturity};
        const double notional[] = {fwd.notional};
        // Buckets are the grid dates in (0, T]; substeps are not buckets, so use the
        // simulation grid restricted to bucket dates through the caller's config.
        for (std::size_t k = 1; k <= last; ++k)
            profile.buckets.push_back(
                make_bucket(k, times[k], pay, notional, fwd.strike, oil, curve, true));
    }
    return profile;
}

/// Drops forward buckets that fall on substeps rather than bucket dates.
void restrict_to_bucket_dates(ExposureProfile& profile, std::span<const double> times,
                              const std::vector<double>& grid) {
    std::vector<ExposureProfile::Bucket> kept;
    for (auto& b : profile.buckets) {
        const double t = times[b.time_index];
        const auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-9);
        if (it != grid.end() && std::abs(*it - t) <= 1e-9) kept.push_back(std::move(b));
    }
    profile.buckets = std::move(kept);
}

struct SampleValue {
    double intensity;
    double indicator;
};

SampleValue evaluate_sample(std::span<const PathView> paths, const ExposureProfile& profile) {
    double intensity = 0.0;
    double indicator = 0.0;
    for (const auto& path : paths) {
        std::optional<double> tau = sample_default_time(path.times, path.Lambda, path.xi);
        double previous_survival = 1.0;
        double previous_time = 0.0;
        for (const auto& b : profile.buckets) {
            const double survival = std::exp(-path.Lambda[b.time_index]);
            const double Tj = path.times[b.time_index];
            const bool defaulted_here = tau && *tau > previous_time && *tau <= Tj;
            const double weight = previous_survival - survival;
            if (weight != 0.0 || defaulted_here) {
                const double e = b.discount * profile.exposure(b, path.x[b.time_index],
                                                                path.L[b.time_index]);
                intensity += weight * e;
                if (defaulted_here) indicator += e;
            }
            previous_survival = survival;
            previous_time = Tj;
        }
    }
    const double n = static_cast<double>(paths.size());
    return {intensity / n, indicator / n};
}

void summarize(const std::vector<double>& values, double& mean, double& std_error) {
    const double n = static_cast<double>(values.size());
    mean = pairwise_sum(values) / n;
    if (values.size() < 2) {
        std_error = 0.0;
        return;
    }
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
}

CvaResult finish(const ExposureProfile& profile, const SimulationConfig& config,
                 const std::vector<double>& intensity, const std::vector<double>& indicator,
                 std::size_t paths, Side side) {
    CvaResult r;
    summarize(intensity, r.intensity_cva, r.intensity_std_error);
    summarize(indicator, r.indicator_cva, r.indicator_std_error);
    r.intensity_cva *= config.lgd;
    r.intensity_std_error *= config.lgd;
    r.indicator_cva *= config.lgd;
    r.indicator_std_error *= config.lgd;
    if (config.estimator == Estimator::IntensityWeighted) {
        r.cva = r.intensity_cva;
        r.std_error = r.intensity_std_error;
    } else {
        r.cva = r.indicator_cva;
        r.std_error = r.indicator_std_error;
    }
    r.annuity = profile.annuity;
    r.fixed_leg = profile.strike * profile.annuity;
    r.cva_pct_of_fixed_leg = r.fixed_leg != 0.0 ? 100.0 * r.cva / r.fixed_leg : 0.0;
    r.adjusted_strike = adjusted_strike(profile.strike, r.cva, profile.annuity, side);
    r.paths = paths;
    r.scenario.side = side;
    return r;
}

Side product_side(const Product& product) {
    return std::visit([](const auto& p) { return p.side; }, product);
}

}  // namespace

CorrelationRange feasible_market_correlation(const OilParams& p) {
    const double spot = p.spot_vol();
    const double total = p.sigma_x + p.sigma_L;
    if (!(spot > 0.0)) return {-1.0, 1.0};
    const double rho1_max = std::min(1.0, std::sqrt(std::max(0.0, (1.0 + p.rho_xL) / 2.0)));
    const double bound = std::min(1.0, rho1_max * total / spot);
    return {-bound, bound};
}

CorrelationSpec map_market_correlation(double rho_bar, const OilParams& p) {
    if (!(std::abs(rho_bar) <= 1.0))
        throw ConfigError("market correlation " + fmt(rho_bar) + " outside [-1, 1]");
    const double total = p.sigma_x + p.sigma_L;
    if (!(total > 0.0)) throw ConfigError("market correlation: sigma_x + sigma_L must be positive");

    CorrelationSpec spec;
    spec.market_correlation = rho_bar;
    spec.rho1 = rho_bar * p.spot_vol() / total;
    spec.matrix = {1.0, p.rho_xL, spec.rho1, p.rho_xL, 1.0, spec.rho1, spec.rho1, spec.rho1, 1.0};
    const auto range = feasible_market_correlation(p);
    if (std::abs(spec.rho1) > 1.0 || !cholesky3(spec.matrix, spec.cholesky))
        throw ConfigError("market correlation " + fmt(rho_bar) +
                          " gives an infeasible driver correlation matrix; feasible range [" +
                          fmt(range.lower) + ", " + fmt(range.upper) + "]");
    return spec;
}

std::vector<double> SimulationConfig::monthly_grid(double horizon) {
    std::vector<double> grid;
    const auto n = static_cast<int>(std::lround(horizon * 12.0));
    for (int i = 1; i <= n; ++i) grid.push_back(i / 12.0);
    return grid;
}

std::vector<std::string> SimulationConfig::validate() const {
    std::vector<std::string> problems;
    if (paths < 1) problems.emplace_back("simulation: paths must be >= 1");
    if (grid.empty()) problems.emplace_back("simulation: grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > (i == 0 ? 0.0 : grid[i - 1]))) {
            problems.emplace_back("simulation: grid must be strictly increasing from 0 (index " +
                                  std::to_string(i) + ")");
            break;
        }
    }
    if (steps_per_bucket < 1) problems.emplace_back("simulation: steps_per_bucket must be >= 1");
    if (!(lgd >= 0.0 && lgd <= 1.0)) problems.emplace_back("simulation: lgd must lie in [0, 1]");
    if (threads < 1) problems.emplace_back("simulation: threads must be >= 1");
    return problems;
}

std::vector<double> SimulationConfig::simulation_times() const {
    std::vector<double> times{0.0};
    double previous = 0.0;
    for (double g : grid) {
        for (int s = 1; s < steps_per_bucket; ++s)
            times.push_back(previous + (g - previous) * s / steps_per_bucket);
        times.push_back(g);
        previous = g;
    }
    return times;
}

PathView JointPathEnsemble::path(std::size_t i) const {
    const std::size_t n = times.size();
    const std::size_t offset = i * n;
    return {times,
            std::span<const double>(x).subspan(offset, n),
            std::span<const double>(L).subspan(offset, n),
            std::span<const double>(y).subspan(offset, n),
            std::span<const double>(Lambda).subspan(offset, n),
            xi[i]};
}

JointPathSimulator::JointPathSimulator(const SimulationConfig& config, const OilModel& oil,
                                       const CreditModel& credit, const CorrelationSpec& corr)
    : times_(config.simulation_times()),
      cir_params_(credit.params),
      scheme_(config.cir_scheme),
      start_(oil.initial_state()),
      seed_(config.seed),
      antithetic_(config.antithetic) {
    if (auto problems = config.validate(); !problems.empty()) throw ConfigError(problems);
    if (auto problems = oil.params.validate(); !problems.empty()) throw ConfigError(problems);
    if (auto problems = credit.params.validate(); !problems.empty()) throw ConfigError(problems);
    if (credit.shift.times().empty()) throw ConfigError("credit model has no fitted shift");
    samples_ = antithetic_ ? (config.paths + 1) / 2 : config.paths;

    const OilParams& p = oil.params;
    const double rho1 = corr.rho1;
    std::map<long long, std::size_t> cir_index;
    for (std::size_t i = 1; i < times_.size(); ++i) {
        const double dt = times_[i] - times_[i - 1];
        const auto tr = transition_moments(p, 0.0, dt);
        const double sdt = std::sqrt(dt);
        const double cov_xy = p.sigma_x * rho1 * -std::expm1(-p.k_x * dt) / (p.k_x * sdt);
        const double cov_Ly = p.sigma_L * rho1 * sdt;
        const std::array<double, 9> cov{tr.var_x, tr.cov_xL, cov_xy, tr.cov_xL, tr.var_L,
                                         cov_Ly,   cov_xy,    cov_Ly, 1.0};
        Step step{tr.decay, tr.drift_L, {}, 0, dt};
        if (!cholesky3(cov, step.chol, 1e-10))
            throw SimulationError("joint step covariance is not positive semidefinite");
        const long long key = std::llround(dt * 1e12);
        auto it = cir_index.find(key);
        if (it == cir_index.end()) {
            if (scheme_ == CirScheme::Exact) cir_.emplace_back(cir_params_, dt);
            it = cir_index.emplace(key, cir_index.size()).first;
        }
        step.cir = it->second;
        steps_.push_back(step);
    }
    psi_.reserve(times_.size());
    for (double t : times_) psi_.push_back(credit.shift(t));
}

JointPathSimulator::Buffer JointPathSimulator::make_buffer() const {
    const std::size_t n = times_.size() * paths_per_sample();
    Buffer b;
    b.x.resize(n);
    b.L.resize(n);
    b.y.resize(n);
    b.Lambda.resize(n);
    b.state.resize(times_.size());
    b.z.resize(3 * steps_.size());
    return b;
}

std::vector<PathView> JointPathSimulator::simulate(std::size_t k, Buffer& buffer) const {
    const std::size_t n = times_.size();
    if (buffer.x.size() != n * paths_per_sample()) buffer = make_buffer();

    std::mt19937_64 rng(splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(k))));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    for (double& z : buffer.z) z = normal(rng);
    const double u = 1.0 - uniform(rng);  // (0, 1]
    buffer.xi[0] = -std::log(u);
    buffer.xi[1] = -std::log1p(-u);  // antithetic partner, 1 - u

    std::vector<PathView> views;
    for (std::size_t p = 0; p < paths_per_sample(); ++p) {
        const double sign = p == 0 ? 1.0 : -1.0;
        double* x = buffer.x.data() + p * n;
        double* L = buffer.L.data() + p * n;
        double* y = buffer.y.data() + p * n;
        double* Lambda = buffer.Lambda.data() + p * n;
        x[0] = start_.x;
        L[0] = start_.L;
        y[0] = cir_params_.y0;
        double state = cir_params_.y0;
        double integral = 0.0;
        Lambda[0] = psi_[0];
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            const Step& s = steps_[i];
            const double n0 = sign * buffer.z[3 * i];
            const double n1 = sign * buffer.z[3 * i + 1];
            const double n2 = sign * buffer.z[3 * i + 2];
            const auto& c = s.chol;
            const double eps_x = c[0] * n0;
            const double eps_L = c[3] * n0 + c[4] * n1;
            const double g = c[6] * n0 + c[7] * n1 + c[8] * n2;
            x[i + 1] = x[i] * s.decay + eps_x;
            L[i + 1] = L[i] + s.drift_L + eps_L;
            if (scheme_ == CirScheme::Exact) {
                state = cir_[s.cir](state, g);
            } else {
                state = evolve_cir_euler(cir_params_, state, s.dt, g);
            }
            y[i + 1] = std::max(state, 0.0);
            integral += 0.5 * (y[i] + y[i + 1]) * s.dt;
            Lambda[i + 1] = psi_[i + 1] + integral;
        }
        views.push_back({times_, {x, n}, {L, n}, {y, n}, {Lambda, n}, buffer.xi[p]});
    }
    return views;
}

void simulate_joint_paths(const SimulationConfig& config, const OilModel& oil,
                          const CreditModel& credit, const CorrelationSpec& corr,
                          const PathVisitor& visitor) {
    const JointPathSimulator sim(config, oil, credit, corr);
    auto buffer = sim.make_buffer();
    for (std::size_t k = 0; k < sim.samples(); ++k) {
        const auto views = sim.simulate(k, buffer);
        visitor(k, views);
    }
}

JointPathEnsemble simulate_joint_paths(const SimulationConfig& config, const OilModel& oil,
                                       const CreditModel& credit, const CorrelationSpec& corr) {
    const JointPathSimulator sim(config, oil, credit, corr);
    JointPathEnsemble e;
    e.times.assign(sim.times().begin(), sim.times().end());
    e.antithetic = config.antithetic;
    e.paths = sim.samples() * sim.paths_per_sample();
    const std::size_t total = e.paths * e.times.size();
    e.x.reserve(total);
    e.L.reserve(total);
    e.y.reserve(total);
    e.Lambda.reserve(total);
    e.xi.reserve(e.paths);
    auto buffer = sim.make_buffer();
    for (std::size_t k = 0; k < sim.samples(); ++k) {
        for (const auto& v : sim.simulate(k, buffer)) {
            e.x.insert(e.x.end(), v.x.begin(), v.x.end());
            e.L.insert(e.L.end(), v.L.begin(), v.L.end());
            e.y.insert(e.y.end(), v.y.begin(), v.y.end());
            e.Lambda.insert(e.Lambda.end(), v.Lambda.begin(), v.Lambda.end());
            e.xi.push_back(v.xi);
        }
    }
    return e;
}

CvaResult cva_bucketed(const Product& product, const JointPathEnsemble& ensemble,
                       const SimulationConfig& config, const OilModel& oil,
                       const ZeroCurve& curve) {
    if (auto problems = config.validate(); !problems.empty()) throw ConfigError(problems);
    if (ensemble.paths == 0) throw SimulationError("empty path ensemble");
    auto profile = make_profile(product, ensemble.times, oil, curve);
    restrict_to_bucket_dates(profile, ensemble.times, config.grid);
    const std::size_t per_sample = ensemble.antithetic ? 2 : 1;
    const std::size_t samples = ensemble.paths / per_sample;
    std::vector<double> intensity(samples);
    std::vector<double> indicator(samples);
    std::vector<PathView> views(per_sample);
    for (std::size_t k = 0; k < samples; ++k) {
        for (std::size_t p = 0; p < per_sample; ++p) views[p] = ensemble.path(k * per_sample + p);
        const auto v = evaluate_sample(views, profile);
        intensity[k] = v.intensity;
        indicator[k] = v.indicator;
    }
    return finish(profile, config, intensity, indicator, samples * per_sample,
                  product_side(product));
}

CvaResult run_cva(const Product& product, const SimulationConfig& config, const OilModel& oil,
                  const CreditModel& credit, const CorrelationSpec& corr, const ZeroCurve& curve) {
    const JointPathSimulator sim(config, oil, credit, corr);
    auto profile = make_profile(product, sim.times(), oil, curve);
    restrict_to_bucket_dates(profile, sim.times(), config.grid);

    const std::size_t samples = sim.samples();
    std::vector<double> intensity(samples);
    std::vector<double> indicator(samples);
    auto work = [&](std::size_t begin, std::size_t end) {
        auto buffer = sim.make_buffer();
        for (std::size_t k = begin; k < end; ++k) {
            const auto views = sim.simulate(k, buffer);
            const auto v = evaluate_sample(views, profile);
            intensity[k] = v.intensity;
            indicator[k] = v.indicator;
        }
    };
    const std::size_t threads = std::min<std::size_t>(config.threads, samples);
    if (threads <= 1) {
        work(0, samples);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (samples + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(samples, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return finish(profile, config, intensity, indicator, samples * sim.paths_per_sample(),
                  product_side(product));
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace crcva
