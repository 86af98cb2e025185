#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crcva/credit_model.hpp"
#include "crcva/cva_engine.hpp"
#include "crcva/market_data.hpp"
#include "crcva/oil_model.hpp"
#include "crcva/pricers.hpp"

namespace crcva {

/// Market inputs and base parameters from which every scenario is recalibrated.
struct ScenarioInputs {
    OilParams oil_params;
    ForwardCurveQuotes forwards;
    double x0 = 0.0;
    std::optional<double> L0;  // ln(first forward quote) when empty
    ZeroCurve curve = ZeroCurve::flat(0.0);
    /// Counterparty credit seen by the payer (the receiver's credit) and by the receiver.
    HazardCurve payer_counterparty_hazard;
    HazardCurve receiver_counterparty_hazard;
    CirParams payer_counterparty_cir;
    CirParams receiver_counterparty_cir;
    CreditShiftOptions shift_options;
    CommoditySwap swap;
    SimulationConfig simulation;

    const HazardCurve& hazard_for(Side side) const {
        return side == Side::Payer ? payer_counterparty_hazard : receiver_counterparty_hazard;
    }
    const CirParams& cir_for(Side side) const {
        return side == Side::Payer ? payer_counterparty_cir : receiver_counterparty_cir;
    }
};

/// Oil model with sigma_x, sigma_L scaled by `oil_vol_mult` and phi refitted.
OilModel scenario_oil_model(const ScenarioInputs& in, double oil_vol_mult);

/// CIR++ model for the side's counterparty with nu scaled by `cir_vol_mult` and Psi
/// refitted on the simulation grid together with the CDS maturities.
CreditModel scenario_credit_model(const ScenarioInputs& in, Side side, double cir_vol_mult);

/// Stable identifier, e.g. "payer_rho+0.689_oil1_cir0.05".
std::string scenario_id(const ScenarioInfo& info);

/// Recalibrates and prices one scenario.
CvaResult run_scenario(const ScenarioInputs& in, const ScenarioInfo& info);

struct SweepSpec {
    std::vector<double> rho_bars;
    std::vector<double> oil_vol_mults{1.0};
    std::vector<double> cir_vol_mults{1.0};
    std::vector<Side> sides{Side::Payer};

    std::vector<std::string> validate() const;
    std::vector<ScenarioInfo> scenarios() const;
};

struct SweepCell {
    ScenarioInfo scenario;
    std::optional<CvaResult> result;
    std::string error;  // set when the cell failed
};

using SweepProgress = std::function<void(const SweepCell&)>;

/// Runs every (side, rho_bar, oil multiplier, cir multiplier) cell. A failed
/// recalibration or simulation is recorded on its cell and the sweep continues.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, const ScenarioInputs& inputs,
                                 const SweepProgress& progress = {});

}  // namespace crcva
