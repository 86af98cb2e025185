#include "crcva/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crcva/errors.hpp"

namespace crcva {

namespace {

std::string compact(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

OilModel scenario_oil_model(const ScenarioInputs& in, double oil_vol_mult) {
    if (!(oil_vol_mult > 0.0)) throw ConfigError("oil vol multiplier must be positive");
    if (in.forwards.nodes.empty()) throw ConfigError("forward curve: no nodes");
    OilModel model;
    model.params = in.oil_params.with_vol_multiplier(oil_vol_mult);
    model.x0 = in.x0;
    model.L0 = in.L0 ? *in.L0 : std::log(in.forwards.nodes.front().price);
    model.shift = calibrate_shift(model.params, in.forwards, model.x0, model.L0);
    return model;
}

CreditModel scenario_credit_model(const ScenarioInputs& in, Side side, double cir_vol_mult) {
    if (!(cir_vol_mult > 0.0)) throw ConfigError("cir vol multiplier must be positive");
    CreditModel model;
    model.params = in.cir_for(side).with_vol_multiplier(cir_vol_mult);
    const HazardCurve& hazard = in.hazard_for(side);

    std::vector<double> grid = in.simulation.simulation_times();
    grid.insert(grid.end(), hazard.tenors().begin(), hazard.tenors().end());
    std::sort(grid.begin(), grid.end());
    std::vector<double> merged;
    for (double t : grid)
        if (merged.empty() || t > merged.back() + 1e-12) merged.push_back(t);
    model.shift = fit_credit_shift(model.params, hazard, merged, in.shift_options);
    return model;
}

std::string scenario_id(const ScenarioInfo& info) {
    std::ostringstream os;
    os << to_string(info.side) << "_rho" << (info.rho_bar >= 0.0 ? "+" : "")
       << compact(info.rho_bar) << "_oil" << compact(info.oil_vol_mult) << "_cir"
       << compact(info.cir_vol_mult);
    return os.str();
}

CvaResult run_scenario(const ScenarioInputs& in, const ScenarioInfo& info) {
    const OilModel oil = scenario_oil_model(in, info.oil_vol_mult);
    const CreditModel credit = scenario_credit_model(in, info.side, info.cir_vol_mult);
    const CorrelationSpec corr = map_market_correlation(info.rho_bar, oil.params);
    CommoditySwap swap = in.swap;
    swap.side = info.side;
    CvaResult result = run_cva(swap, in.simulation, oil, credit, corr, in.curve);
    result.scenario = info;
    if (result.scenario.scenario_id.empty() || result.scenario.scenario_id == "base")
        result.scenario.scenario_id = scenario_id(info);
    return result;
}

std::vector<std::string> SweepSpec::validate() const {
    std::vector<std::string> problems;
    for (double r : rho_bars)
        if (!(std::abs(r) <= 1.0))
            problems.push_back("sweep: rho_bar " + compact(r) + " outside [-1, 1]");
    for (double m : oil_vol_mults)
        if (!(m > 0.0)) problems.push_back("sweep: oil vol multiplier " + compact(m) + " must be positive");
    for (double m : cir_vol_mults)
        if (!(m > 0.0)) problems.push_back("sweep: cir vol multiplier " + compact(m) + " must be positive");
    return problems;
}

std::vector<ScenarioInfo> SweepSpec::scenarios() const {
    std::vector<ScenarioInfo> out;
    for (Side side : sides)
        for (double rho : rho_bars)
            for (double oil : oil_vol_mults)
                for (double cir : cir_vol_mults) {
                    ScenarioInfo info{"", rho, oil, cir, side};
                    info.scenario_id = scenario_id(info);
                    out.push_back(info);
                }
    return out;
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec, const ScenarioInputs& inputs,
                                 const SweepProgress& progress) {
    if (auto problems = spec.validate(); !problems.empty()) throw ConfigError(problems);
    std::vector<SweepCell> cells;
    for (const auto& info : spec.scenarios()) {
        SweepCell cell{info, std::nullopt, {}};
        try {
            cell.result = run_scenario(inputs, info);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        if (progress) progress(cell);
        cells.push_back(std::move(cell));
    }
    return cells;
}

}  // namespace crcva
