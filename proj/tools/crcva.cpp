// Command-line front end: calibrate, price, cva, sweep, report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "crcva/config.hpp"
#include "crcva/cva_engine.hpp"
#include "crcva/errors.hpp"
#include "crcva/pricers.hpp"
#include "crcva/report.hpp"
#include "crcva/sweep.hpp"

namespace fs = std::filesystem;
using namespace crcva;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kCalibrationError = 3, kSimulationError = 4 };

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> lgd;
    std::optional<std::string> side;
    std::optional<double> rho_bar;
    std::optional<double> oil_vol_mult;
    std::optional<double> cir_vol_mult;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::string results;
};

void apply_overrides(RunConfig& c, const Flags& f) {
    if (f.seed) c.simulation.seed = *f.seed;
    if (f.paths) c.simulation.paths = *f.paths;
    if (f.lgd) c.simulation.lgd = *f.lgd;
    if (f.side) {
        c.scenario.side = parse_side(*f.side);
        c.sweep.sides = {c.scenario.side};
    }
    if (f.rho_bar) c.scenario.rho_bar = *f.rho_bar;
    if (f.oil_vol_mult) c.scenario.oil_vol_mult = *f.oil_vol_mult;
    if (f.cir_vol_mult) c.scenario.cir_vol_mult = *f.cir_vol_mult;
    if (f.threads) c.simulation.threads = *f.threads;
    if (f.out) c.output_dir = *f.out;
    std::vector<std::string> problems = c.simulation.validate();
    if (!(std::abs(c.scenario.rho_bar) <= 1.0)) problems.emplace_back("--rho-bar must lie in [-1, 1]");
    if (!(c.scenario.oil_vol_mult > 0.0)) problems.emplace_back("--oil-vol-mult must be positive");
    if (!(c.scenario.cir_vol_mult > 0.0)) problems.emplace_back("--cir-vol-mult must be positive");
    if (!problems.empty()) throw ConfigError(problems);
}

LoadedConfig load(const Flags& f) {
    if (f.config.empty()) throw ConfigError("--config is required");
    LoadedConfig loaded = load_market_config(f.config);
    apply_overrides(loaded.config, f);
    for (const auto& note : loaded.market.provenance) std::cerr << "note: " << note << "\n";
    for (const auto& note : loaded.config.notes) std::cerr << "note: " << note << "\n";
    return loaded;
}

fs::path output_dir(const RunConfig& c) {
    fs::path dir(c.output_dir);
    fs::create_directories(dir);
    return dir;
}

ReportOptions report_options(const RunConfig& c, double fixed_leg) {
    ReportOptions o;
    o.fixed_leg = fixed_leg;
    o.payer_counterparty_nu = c.payer_counterparty_cir.nu;
    o.receiver_counterparty_nu = c.receiver_counterparty_cir.nu;
    return o;
}

int cmd_calibrate(const Flags& f) {
    const auto loaded = load(f);
    std::optional<OilCalibrationResult> fit;
    const ScenarioInputs in = make_scenario_inputs(loaded.config, loaded.market, &fit);
    const CalibratedState state = calibrate_state(in, fit);
    const fs::path dir = output_dir(loaded.config);
    std::ofstream(dir / "calibrated_state.json") << serialize_calibrated_state(state);
    std::ofstream(dir / "run_config.json") << serialize_run_config(loaded.config);

    std::cout << std::setprecision(6);
    const auto& p = state.oil.params;
    std::cout << "oil: k_x=" << p.k_x << " sigma_x=" << p.sigma_x << " sigma_L=" << p.sigma_L
              << " rho_xL=" << p.rho_xL << " mu_L=" << p.mu_L << " spot_vol=" << p.spot_vol() << "\n";
    if (fit) std::cout << "oil fit: objective=" << fit->objective << " iterations=" << fit->iterations << "\n";
    for (Side side : {Side::Payer, Side::Receiver}) {
        const HazardCurve& h = in.hazard_for(side);
        std::cout << to_string(side) << " counterparty hazards:";
        for (std::size_t i = 0; i < h.tenors().size(); ++i)
            std::cout << " " << h.tenors()[i] << "y=" << h.hazard_rates()[i];
        std::cout << "\n  feller indicator 2*kappa*mu - nu^2 = " << in.cir_for(side).feller_indicator()
                  << "\n";
    }
    std::cout << "strike=" << state.strike << " fair_strike=" << state.fair_strike
              << " annuity=" << state.annuity << " fixed_leg=" << state.fixed_leg << "\n";
    std::cout << "wrote " << (dir / "calibrated_state.json").string() << "\n";
    return kOk;
}

int cmd_price(const Flags& f) {
    const auto loaded = load(f);
    const ScenarioInputs in = make_scenario_inputs(loaded.config, loaded.market);
    const OilModel oil = scenario_oil_model(in, loaded.config.scenario.oil_vol_mult);
    CommoditySwap swap = in.swap;
    swap.side = loaded.config.scenario.side;
    const OilState s0 = oil.initial_state();
    const fs::path dir = output_dir(loaded.config);
    std::ofstream csv(dir / "prices.csv");
    csv << "maturity_years,forward_usd,discount_factor,forward_value_usd\n" << std::setprecision(12);
    for (std::size_t i = 0; i < swap.payment_times.size(); ++i) {
        const double T = swap.payment_times[i];
        const ForwardContract c{T, swap.strike, swap.side, swap.notionals[i]};
        csv << T << ',' << forward_price(oil, s0, T) << ',' << in.curve.discount_factor(T) << ','
            << forward_value(c, oil, s0, in.curve) << "\n";
    }
    std::cout << std::fixed << std::setprecision(6);
    std::cout << "side=" << to_string(swap.side) << " strike=" << swap.strike << "\n"
              << "swap_value=" << swap_value(swap, oil, s0, in.curve) << "\n"
              << "fair_strike=" << fair_strike(swap, oil, s0, in.curve) << "\n"
              << "annuity=" << swap_annuity(swap, in.curve) << "\n"
              << "fixed_leg=" << fixed_leg_value(swap, in.curve) << "\n";
    return kOk;
}

int cmd_cva(const Flags& f) {
    const auto loaded = load(f);
    const RunConfig& c = loaded.config;
    const ScenarioInputs in = make_scenario_inputs(c, loaded.market);
    ScenarioInfo info = c.scenario;
    info.scenario_id = scenario_id(info);
    const CvaResult r = run_scenario(in, info);

    const OilModel oil = scenario_oil_model(in, info.oil_vol_mult);
    CommoditySwap swap = in.swap;
    swap.side = info.side;
    const double independent =
        cva_swap_independent(swap, oil, in.curve, in.hazard_for(info.side), c.simulation.lgd);
    const double bound = cva_swap_upper_bound(swap, oil, in.curve, c.simulation.lgd);

    const fs::path dir = output_dir(c);
    std::ofstream csv(dir / "cva.csv");
    write_results_csv(csv, std::span(&r, 1));

    std::cout << std::fixed << std::setprecision(4);
    std::cout << "scenario " << r.scenario.scenario_id << " (" << r.paths << " paths, seed "
              << c.simulation.seed << ")\n"
              << "cva_usd=" << r.cva << " std_error=" << r.std_error << "\n"
              << "intensity_estimator=" << r.intensity_cva << " +- " << r.intensity_std_error << "\n"
              << "indicator_estimator=" << r.indicator_cva << " +- " << r.indicator_std_error << "\n"
              << "cva_pct_of_fixed_leg=" << r.cva_pct_of_fixed_leg << "\n"
              << "adjusted_strike=" << r.adjusted_strike << "\n"
              << "independence_cva=" << independent << " (zero-correlation closed form)\n"
              << "upper_bound=" << bound << "\n";
    return kOk;
}

int cmd_sweep(const Flags& f) {
    const auto loaded = load(f);
    const RunConfig& c = loaded.config;
    const ScenarioInputs in = make_scenario_inputs(c, loaded.market);
    std::vector<CvaResult> results;
    std::size_t failed = 0;
    const auto cells = run_sweep(c.sweep, in, [&](const SweepCell& cell) {
        if (cell.result) {
            std::cerr << cell.scenario.scenario_id << ": cva=" << std::fixed << std::setprecision(4)
                      << cell.result->cva << " +- " << cell.result->std_error << "\n";
        } else {
            std::cerr << cell.scenario.scenario_id << ": FAILED: " << cell.error << "\n";
        }
    });
    for (const auto& cell : cells) {
        if (cell.result) results.push_back(*cell.result);
        else ++failed;
    }
    const fs::path dir = output_dir(c);
    const double fixed_leg = fixed_leg_value(in.swap, in.curve);
    write_report_files(dir, results, report_options(c, fixed_leg), in.oil_params);
    std::cout << render_report(results, report_options(c, fixed_leg));
    if (failed) std::cerr << failed << " cell(s) failed; see messages above\n";
    return failed == cells.size() && !cells.empty() ? kCalibrationError : kOk;
}

int cmd_report(const Flags& f) {
    const auto loaded = load(f);
    const RunConfig& c = loaded.config;
    const ScenarioInputs in = make_scenario_inputs(c, loaded.market);
    const fs::path dir = output_dir(c);
    const fs::path source = f.results.empty() ? dir / "results.csv" : fs::path(f.results);
    std::ifstream csv(source);
    if (!csv) throw ConfigError("cannot read results file '" + source.string() + "'");
    const auto results = read_results_csv(csv);
    if (results.empty()) throw ConfigError("results file '" + source.string() + "' has no rows");
    const double fixed_leg = fixed_leg_value(in.swap, in.curve);
    const std::string text = render_report(results, report_options(c, fixed_leg));
    std::ofstream(dir / "report.txt") << text;
    std::vector<double> mults;
    for (const auto& r : results) mults.push_back(r.scenario.oil_vol_mult);
    std::sort(mults.begin(), mults.end());
    mults.erase(std::unique(mults.begin(), mults.end()), mults.end());
    std::vector<double> expiries;
    for (int i = 1; i <= 60; ++i) expiries.push_back(i / 12.0);
    std::ofstream(dir / "vol_term_structure.csv") << vol_term_structure_csv(in.oil_params, mults, expiries);
    std::cout << text;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credit valuation adjustment engine for commodity forwards and swaps"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags flags;
    app.add_option("--config", flags.config, "Run configuration (JSON)");
    app.add_option("--seed", flags.seed, "Random seed (default from config)");
    app.add_option("--paths", flags.paths, "Monte Carlo path count");
    app.add_option("--lgd", flags.lgd, "Loss given default");
    app.add_option("--side", flags.side, "payer or receiver");
    app.add_option("--rho-bar", flags.rho_bar, "Market correlation between intensity and spot");
    app.add_option("--oil-vol-mult", flags.oil_vol_mult, "Multiplier on sigma_x and sigma_L");
    app.add_option("--cir-vol-mult", flags.cir_vol_mult, "Multiplier on the intensity volatility");
    app.add_option("--out", flags.out, "Output directory");
    app.add_option("--threads", flags.threads, "Worker threads for path simulation");

    auto* calibrate = app.add_subcommand("calibrate", "Calibrate oil and credit models, write calibrated state");
    auto* price = app.add_subcommand("price", "Default-free swap valuation");
    auto* cva = app.add_subcommand("cva", "CVA for a single scenario");
    auto* sweep = app.add_subcommand("sweep", "CVA over the configured scenario grid");
    auto* report = app.add_subcommand("report", "Render report tables from a results CSV");
    report->add_option("--results", flags.results, "Results CSV (default OUT/results.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (calibrate->parsed()) return cmd_calibrate(flags);
        if (price->parsed()) return cmd_price(flags);
        if (cva->parsed()) return cmd_cva(flags);
        if (sweep->parsed()) return cmd_sweep(flags);
        if (report->parsed()) return cmd_report(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error:\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
        return kConfigError;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration failure: " << e.what() << "\n";
        return kCalibrationError;
    } catch (const SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kSimulationError;
    } catch (const std::exception& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kSimulationError;
    }
    return kConfigError;
}
