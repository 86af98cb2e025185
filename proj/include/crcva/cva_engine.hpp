#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crcva/credit_model.hpp"
#include "crcva/market_data.hpp"
#include "crcva/oil_model.hpp"
#include "crcva/pricers.hpp"

namespace crcva {

/// Driver correlations for (Z_x, Z_L, Z_y) with rho_xy = rho_Ly = rho1.
struct CorrelationSpec {
    double market_correlation = 0.0;  // corr(d lambda, d S)
    double rho1 = 0.0;
    std::array<double, 9> matrix{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major 3x3
    std::array<double, 9> cholesky{1, 0, 0, 0, 1, 0, 0, 0, 1};  // lower triangular
};

struct CorrelationRange {
    double lower;
    double upper;
};

/// Market correlations for which rho1 and the 3x3 driver matrix are admissible.
CorrelationRange feasible_market_correlation(const OilParams& p);

/// rho1 = rho_bar sqrt(sigma_x^2 + sigma_L^2 + 2 rho_xL sigma_x sigma_L) / (sigma_x + sigma_L).
/// Throws ConfigError, quoting the feasible range, when |rho1| > 1 or the matrix is not PSD.
CorrelationSpec map_market_correlation(double rho_bar, const OilParams& p);

enum class Estimator { IntensityWeighted, Indicator };
enum class CirScheme { Exact, FullTruncationEuler };

struct SimulationConfig {
    std::size_t paths = 200000;
    /// Bucket dates (strictly increasing, positive); the simulation grid adds 0 and
    /// `steps_per_bucket - 1` equally spaced substeps inside each bucket.
    std::vector<double> grid = monthly_grid(5.0);
    int steps_per_bucket = 1;
    std::uint64_t seed = 20090301;
    Estimator estimator = Estimator::IntensityWeighted;
    bool antithetic = true;
    double lgd = 0.6;
    CirScheme cir_scheme = CirScheme::Exact;
    unsigned threads = 1;

    static std::vector<double> monthly_grid(double horizon);
    std::vector<std::string> validate() const;
    /// 0, the substeps and the bucket dates.
    std::vector<double> simulation_times() const;
};

/// One simulated path on the simulation grid. `y` is the (floored) CIR intensity
/// and `Lambda` = Psi + trapezoidal integral of y. `xi` is the path's unit
/// exponential default trigger.
struct PathView {
    std::span<const double> times;
    std::span<const double> x;
    std::span<const double> L;
    std::span<const double> y;
    std::span<const double> Lambda;
    double xi = 0.0;
};

struct JointPathEnsemble {
    std::vector<double> times;
    std::size_t paths = 0;
    bool antithetic = false;
    std::vector<double> x;  // row-major [path][time]
    std::vector<double> L;
    std::vector<double> y;
    std::vector<double> Lambda;
    std::vector<double> xi;

    PathView path(std::size_t i) const;
    friend bool operator==(const JointPathEnsemble&, const JointPathEnsemble&) = default;
};

/// Correlated joint simulation of (x, L, y). Paths are generated in samples of one
/// path, or two antithetic paths; every sample draws from its own generator keyed by
/// (seed, sample index), so results do not depend on evaluation order.
class JointPathSimulator {
public:
    JointPathSimulator(const SimulationConfig& config, const OilModel& oil,
                       const CreditModel& credit, const CorrelationSpec& corr);

    std::size_t samples() const noexcept { return samples_; }
    std::size_t paths_per_sample() const noexcept { return antithetic_ ? 2 : 1; }
    std::span<const double> times() const noexcept { return times_; }

    struct Buffer {
        std::vector<double> x, L, y, Lambda, state, z;
        std::array<double, 2> xi{};
    };
    Buffer make_buffer() const;
    /// Simulates sample `k` into `buffer` and returns views on its paths.
    std::vector<PathView> simulate(std::size_t k, Buffer& buffer) const;

private:
    struct Step {
        double decay;
        double drift_L;
        std::array<double, 9> chol;  // factor of cov(eps_x, eps_L, dZ_y / sqrt(dt))
        std::size_t cir;             // index into cir_
        double dt;
    };

    std::vector<double> times_;
    std::vector<Step> steps_;
    std::vector<CirTransition> cir_;
    std::vector<double> psi_;
    CirParams cir_params_;
    CirScheme scheme_;
    OilState start_;
    std::uint64_t seed_;
    std::size_t samples_;
    bool antithetic_;
};

using PathVisitor = std::function<void(std::size_t sample, std::span<const PathView> paths)>;

/// Streams every sample, in order, to `visitor`.
void simulate_joint_paths(const SimulationConfig& config, const OilModel& oil,
                          const CreditModel& credit, const CorrelationSpec& corr,
                          const PathVisitor& visitor);

/// Stores the full ensemble (memory grows as paths x grid points).
JointPathEnsemble simulate_joint_paths(const SimulationConfig& config, const OilModel& oil,
                                       const CreditModel& credit, const CorrelationSpec& corr);

struct ScenarioInfo {
    std::string scenario_id = "base";
    double rho_bar = 0.0;
    double oil_vol_mult = 1.0;
    double cir_vol_mult = 1.0;
    Side side = Side::Payer;
};

struct CvaResult {
    ScenarioInfo scenario;
    double cva = 0.0;
    double std_error = 0.0;
    double cva_pct_of_fixed_leg = 0.0;
    double adjusted_strike = 0.0;
    double intensity_cva = 0.0;
    double intensity_std_error = 0.0;
    double indicator_cva = 0.0;
    double indicator_std_error = 0.0;
    double fixed_leg = 0.0;
    double annuity = 0.0;
    std::size_t paths = 0;
};

using Product = std::variant<ForwardContract, CommoditySwap>;

/// Bucketed adjustment on a stored ensemble. The buckets are the swap payment dates,
/// or for a forward the grid dates up to its maturity; each must be on the grid.
CvaResult cva_bucketed(const Product& product, const JointPathEnsemble& ensemble,
                       const SimulationConfig& config, const OilModel& oil,
                       const ZeroCurve& curve);

/// Same estimator computed while streaming paths; honours `config.threads`. Results
/// are bit-identical for any thread count.
CvaResult run_cva(const Product& product, const SimulationConfig& config, const OilModel& oil,
                  const CreditModel& credit, const CorrelationSpec& corr, const ZeroCurve& curve);

/// Sum with pairwise splitting; deterministic for a given input order.
double pairwise_sum(std::span<const double> values);

}  // namespace crcva
