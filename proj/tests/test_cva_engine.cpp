#include <doctest.h>

#include <cmath>

#include "crcva/cva_engine.hpp"
#include "crcva/errors.hpp"
#include "crcva/pricers.hpp"
#include "crcva/sweep.hpp"
#include "test_support.hpp"

using namespace crcva;

namespace {

const ScenarioInputs& inputs() {
    static const ScenarioInputs in = test::case_inputs();
    return in;
}

SimulationConfig small_config(std::size_t paths) {
    SimulationConfig c = inputs().simulation;
    c.paths = paths;
    return c;
}

double sample_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ma = test::moments(a);
    const auto mb = test::moments(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma.mean) * (b[i] - mb.mean);
    return s / static_cast<double>(a.size() - 1) / std::sqrt(ma.var * mb.var);
}

}  // namespace

TEST_SUITE("cva_engine") {

TEST_CASE("market correlation mapping") {
    const OilParams p;
    CHECK(map_market_correlation(0.0, p).rho1 == 0.0);
    CHECK(map_market_correlation(0.689, p).rho1 == doctest::Approx(0.5001304200871299).epsilon(1e-14));
    CHECK(map_market_correlation(-0.689, p).rho1 == doctest::Approx(-0.5001304200871299).epsilon(1e-14));

    OilParams single = p;
    single.sigma_x = 0.0;
    CHECK(map_market_correlation(0.5, single).rho1 == doctest::Approx(0.5));

    const auto spec = map_market_correlation(0.689, p);
    CHECK(spec.matrix[1] == p.rho_xL);
    CHECK(spec.matrix[2] == spec.matrix[6]);
    // The factor reproduces the matrix.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += spec.cholesky[3 * i + k] * spec.cholesky[3 * j + k];
            CHECK(s == doctest::Approx(spec.matrix[3 * i + j]).epsilon(1e-14));
        }

    const auto range = feasible_market_correlation(p);
    CHECK(range.upper == doctest::Approx(-range.lower));
    CHECK(range.upper > 0.689);
    CHECK(range.upper <= 1.0);
    OilParams wide = p;
    wide.rho_xL = -0.9;
    const auto narrow = feasible_market_correlation(wide);
    CHECK_THROWS_WITH_AS(map_market_correlation(0.99, wide), doctest::Contains("feasible range"), ConfigError);
    CHECK_NOTHROW(map_market_correlation(0.99 * narrow.upper, wide));
    CHECK_THROWS_AS(map_market_correlation(1.2, p), ConfigError);
}

TEST_CASE("simulation configuration") {
    SimulationConfig c;
    CHECK(c.validate().empty());
    CHECK(c.grid.size() == 60);
    CHECK(c.simulation_times().front() == 0.0);
    c.steps_per_bucket = 3;
    CHECK(c.simulation_times().size() == 181);
    c.paths = 0;
    c.lgd = 1.5;
    c.grid = {0.5, 0.25};
    CHECK(c.validate().size() >= 3);
}

TEST_CASE("joint paths: nonnegative intensity and deterministic seeds") {
    const OilModel oil = scenario_oil_model(inputs(), 1.0);
    const CreditModel credit = scenario_credit_model(inputs(), Side::Payer, 1.0);
    SimulationConfig cfg = small_config(2000);
    const auto corr = map_market_correlation(0.689, oil.params);
    const auto a = simulate_joint_paths(cfg, oil, credit, corr);
    const auto b = simulate_joint_paths(cfg, oil, credit, corr);
    CHECK(a == b);
    for (double y : a.y) CHECK(y >= 0.0);
    for (std::size_t i = 0; i < a.paths; ++i) {
        const PathView p = a.path(i);
        CHECK(p.Lambda[0] == 0.0);
        CHECK(p.xi > 0.0);
    }
    cfg.seed += 1;
    CHECK_FALSE(simulate_joint_paths(cfg, oil, credit, corr) == a);

    SimulationConfig euler = small_config(2000);
    euler.cir_scheme = CirScheme::FullTruncationEuler;
    for (double y : simulate_joint_paths(euler, oil, credit, corr).y) CHECK(y >= 0.0);
}

TEST_CASE("joint paths: instantaneous correlation of intensity and spot") {
    const OilModel oil = scenario_oil_model(inputs(), 1.0);
    ScenarioInputs fine = inputs();
    fine.simulation.grid = {1e-4};
    fine.shift_options.require_positive_psi = false;
    const CreditModel credit = scenario_credit_model(fine, Side::Payer, 1.0);
    SimulationConfig cfg = fine.simulation;
    cfg.paths = 200'000;
    cfg.antithetic = false;
    for (double rho_bar : {0.0, 0.689}) {
        CAPTURE(rho_bar);
        const auto ens = simulate_joint_paths(cfg, oil, credit, map_market_correlation(rho_bar, oil.params));
        std::vector<double> dlog_s, dy;
        for (std::size_t i = 0; i < ens.paths; ++i) {
            const PathView p = ens.path(i);
            dlog_s.push_back(p.x[1] + p.L[1] - p.x[0] - p.L[0]);
            dy.push_back(p.y[1] - p.y[0]);
        }
        const double r = sample_correlation(dlog_s, dy);
        const double se = (1.0 - rho_bar * rho_bar) / std::sqrt(static_cast<double>(ens.paths));
        CHECK(test::within_se(r, rho_bar, se));
    }
}

TEST_CASE("bucketed CVA: zero loss given default") {
    const OilModel oil = scenario_oil_model(inputs(), 1.0);
    const CreditModel credit = scenario_credit_model(inputs(), Side::Payer, 1.0);
    SimulationConfig cfg = small_config(2000);
    cfg.lgd = 0.0;
    const auto ens = simulate_joint_paths(cfg, oil, credit, map_market_correlation(0.3, oil.params));
    const auto r = cva_bucketed(inputs().swap, ens, cfg, oil, inputs().curve);
    CHECK(r.cva == 0.0);
    CHECK(r.std_error == 0.0);
    CHECK(r.adjusted_strike == inputs().swap.strike);
}

TEST_CASE("bucketed CVA: stored ensemble and streaming agree exactly") {
    const OilModel oil = scenario_oil_model(inputs(), 1.0);
    const CreditModel credit = scenario_credit_model(inputs(), Side::Receiver, 1.0);
    const SimulationConfig cfg = small_config(4000);
    const auto corr = map_market_correlation(-0.276, oil.params);
    CommoditySwap swap = inputs().swap;
    swap.side = Side::Receiver;
    const auto ens = simulate_joint_paths(cfg, oil, credit, corr);
    const auto a = cva_bucketed(swap, ens, cfg, oil, inputs().curve);
    const auto b = run_cva(swap, cfg, oil, credit, corr, inputs().curve);
    CHECK(a.cva == b.cva);
    CHECK(a.std_error == b.std_error);
    CHECK(a.indicator_cva == b.indicator_cva);
}

TEST_CASE("bucketed CVA: bit-identical for any thread count") {
    const OilModel oil = scenario_oil_model(inputs(), 1.0);
    const CreditModel credit = scenario_credit_model(inputs(), Side::Payer, 1.0);
    SimulationConfig cfg = small_config(6000);
    const auto corr = map_market_correlation(0.689, oil.params);
    const auto one = run_cva(inputs().swap, cfg, oil, credit, corr, inputs().curve);
    cfg.threads = 3;
    const auto three = run_cva(inputs().swap, cfg, oil, credit, corr, inputs().curve);
    CHECK(one.cva == three.cva);
    CHECK(one.std_error == three.std_error);
    CHECK(one.indicator_cva == three.indicator_cva);
}

TEST_CASE("bucketed CVA: payment dates must lie on the grid") {
    const OilModel oil = scenario_oil_model(inputs(), 1.0);
    SimulationConfig cfg = small_config(100);
    cfg.grid = {1.0, 2.0, 3.0, 4.0, 5.0};
    ScenarioInputs coarse = inputs();
    coarse.simulation = cfg;
    const CreditModel coarse_credit = scenario_credit_model(coarse, Side::Payer, 1.0);
    CHECK_THROWS_WITH_AS(run_cva(inputs().swap, cfg, oil, coarse_credit, map_market_correlation(0, oil.params),
                                 inputs().curve),
                         doctest::Contains("not on the simulation grid"), ConfigError);
}

TEST_CASE("bucketed CVA at zero correlation matches the independence formulas") {
    const OilModel oil = scenario_oil_model(inputs(), 1.0);
    const SimulationConfig cfg = small_config(100'000);
    const auto corr = map_market_correlation(0.0, oil.params);
    SUBCASE("five-year forward") {
        const CreditModel credit = scenario_credit_model(inputs(), Side::Payer, 1.0);
        const ForwardContract fwd{5.0, 126.0, Side::Payer, 1.0};
        const auto r = run_cva(fwd, cfg, oil, credit, corr, inputs().curve);
        const double exact = cva_forward_independent(fwd, oil, inputs().curve, cfg.grid,
                                                     inputs().hazard_for(Side::Payer), cfg.lgd);
        CHECK(test::within_se(r.cva, exact, r.std_error));
    }
    for (Side side : {Side::Payer, Side::Receiver}) {
        CAPTURE(to_string(side));
        const CreditModel credit = scenario_credit_model(inputs(), side, 1.0);
        CommoditySwap swap = inputs().swap;
        swap.side = side;
        const auto r = run_cva(swap, cfg, oil, credit, corr, inputs().curve);
        const double exact =
            cva_swap_independent(swap, oil, inputs().curve, inputs().hazard_for(side), cfg.lgd);
        CHECK(test::within_se(r.cva, exact, r.std_error));
        // Estimator agreement.
        CHECK(test::within_se(r.intensity_cva, r.indicator_cva,
                              std::hypot(r.intensity_std_error, r.indicator_std_error)));
        CHECK(r.cva <= cva_swap_upper_bound(swap, oil, inputs().curve, cfg.lgd));
        CHECK(r.adjusted_strike == doctest::Approx(adjusted_strike(126.0, r.cva, r.annuity, side)));
        CHECK(r.cva_pct_of_fixed_leg == doctest::Approx(100.0 * r.cva / r.fixed_leg));
    }
}

TEST_CASE("payer swap CVA against the reference base cell" * doctest::may_fail()) {
    // Reference: 63.42 USD at zero correlation with base vols. Recovery, grid, path
    // count and the forward curve behind that figure are not available.
    const CvaResult r = run_scenario(inputs(), ScenarioInfo{"", 0.0, 1.0, 1.0, Side::Payer});
    CHECK(std::abs(r.cva - 63.42) <= std::max(0.15 * 63.42, 3.0 * r.std_error));
}

TEST_CASE("sweeps") {
    SUBCASE("empty grid") {
        SweepSpec spec;
        CHECK(run_sweep(spec, inputs()).empty());
    }
    SUBCASE("layout of the credit-volatility table") {
        SweepSpec spec{{-0.689, -0.276, -0.138, 0.0, 0.138, 0.276, 0.689}, {1.0}, {0.05, 0.5, 1.0}, {Side::Payer}};
        const auto cells = spec.scenarios();
        CHECK(cells.size() == 21);
        CHECK(cells.front().scenario_id == "payer_rho-0.689_oil1_cir0.05");
        CHECK(cells.back().scenario_id == "payer_rho+0.689_oil1_cir1");
    }
    SUBCASE("oil-vol multipliers map to the reported spot vols") {
        const double reported[] = {0.033, 0.1642, 0.3285, 0.657};
        const double mults[] = {0.1, 0.5, 1.0, 2.0};
        for (int i = 0; i < 4; ++i) CHECK(std::abs(mults[i] * 0.3285 - reported[i]) < 0.0005);
        // Multipliers scale both factor vols, hence the spot vol, proportionally.
        for (double m : mults)
            CHECK(OilParams{}.with_vol_multiplier(m).spot_vol() == doctest::Approx(m * OilParams{}.spot_vol()));
    }
    SUBCASE("a failed recalibration aborts only its cell") {
        ScenarioInputs strict = inputs();
        strict.shift_options.require_positive_psi = true;
        strict.simulation.paths = 200;
        SweepSpec spec{{0.0}, {1.0}, {0.05, 1.0}, {Side::Payer}};
        const auto cells = run_sweep(spec, strict);
        REQUIRE(cells.size() == 2);
        CHECK_FALSE(cells[0].result.has_value());
        CHECK(cells[0].error.find("negative psi") != std::string::npos);
        CHECK(cells[1].result.has_value());
    }
    SUBCASE("recalibrated credit keeps the market survival at the CDS maturities") {
        for (Side side : {Side::Payer, Side::Receiver})
            for (double m : {0.05, 0.5, 1.0}) {
                const CreditModel c = scenario_credit_model(inputs(), side, m);
                const HazardCurve& h = inputs().hazard_for(side);
                for (double t : h.tenors())
                    CHECK(std::abs(model_survival_probability(c.params, c.shift, t) -
                                   h.survival_probability(t)) <= 1e-10);
            }
    }
    SUBCASE("recalibrated oil keeps the forward curve") {
        for (double m : {0.1, 2.0}) {
            const OilModel o = scenario_oil_model(inputs(), m);
            for (const auto& n : inputs().forwards.nodes)
                CHECK(std::abs(forward_price(o, o.initial_state(), n.maturity) / n.price - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("pairwise summation") {
    std::vector<double> v(1001, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(100.1).epsilon(1e-14));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

}  // TEST_SUITE
