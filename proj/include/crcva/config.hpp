#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crcva/credit_model.hpp"
#include "crcva/cva_engine.hpp"
#include "crcva/market_data.hpp"
#include "crcva/oil_model.hpp"
#include "crcva/sweep.hpp"

namespace crcva {

/// Market data files. Relative paths are resolved against the config file's directory.
struct MarketFiles {
    std::string zero_curve;
    std::string forward_curve;
    std::string atm_vols;                   // optional
    std::string payer_counterparty_cds;     // credit of the payer's counterparty
    std::string receiver_counterparty_cds;  // credit of the receiver's counterparty
};

struct SwapSpec {
    double maturity = 5.0;
    int payments_per_year = 12;
    std::optional<double> strike;  // fair strike of the calibrated curve when empty
    double notional = 1.0;
};

struct RunConfig {
    MarketFiles files;
    double recovery = 0.4;
    int cds_payment_frequency = 4;
    OilParams oil;
    bool calibrate_oil_to_atm_vols = false;
    double x0 = 0.0;
    std::optional<double> L0;
    CirParams payer_counterparty_cir{0.0560, 0.6331, 0.0293, 0.5945};
    CirParams receiver_counterparty_cir{0.0000, 0.5341, 0.0328, 0.2105};
    bool require_positive_psi = true;
    SwapSpec swap;
    SimulationConfig simulation;
    ScenarioInfo scenario;
    SweepSpec sweep{{-0.689, -0.276, -0.138, 0.0, 0.138, 0.276, 0.689},
                    {1.0},
                    {0.05, 0.5, 1.0},
                    {Side::Payer}};
    std::string output_dir = "out";
    std::vector<std::string> notes;
};

/// Parsed market term structures plus provenance notes ("# note:" comments).
struct MarketBundle {
    ZeroCurve curve = ZeroCurve::flat(0.0);
    ForwardCurveQuotes forwards;
    AtmVolQuotes atm_vols;
    CdsQuoteSet payer_counterparty_cds;
    CdsQuoteSet receiver_counterparty_cds;
    std::vector<std::string> provenance;
};

bool operator==(const MarketBundle& a, const MarketBundle& b);

struct LoadedConfig {
    RunConfig config;
    MarketBundle market;
};

/// Parses a JSON run configuration. Every unknown key, type mismatch and invariant
/// violation is collected and reported together in one ConfigError; JSON syntax
/// errors carry line and column.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// JSON document with every field explicit; file paths are written as given.
std::string serialize_run_config(const RunConfig& config);

/// Reads the config at `path`, resolves file paths and loads the market data.
LoadedConfig load_market_config(const std::filesystem::path& path);

/// Loads the files named in `config` (already resolved).
MarketBundle load_market_bundle(const RunConfig& config);

/// Two-column CSV with a header row; '#' starts a comment. Returns rows of numbers.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<int> line_numbers;
    std::vector<std::string> notes;
};
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& columns);

/// Strips hazards, fits the oil parameters when requested (reporting the fit through
/// `oil_fit`), and assembles the base scenario inputs.
ScenarioInputs make_scenario_inputs(const RunConfig& config, const MarketBundle& market,
                                    std::optional<OilCalibrationResult>* oil_fit = nullptr);

/// Base-case calibrated models and swap figures.
struct CalibratedState {
    OilModel oil;
    std::optional<OilCalibrationResult> oil_fit;
    HazardCurve payer_counterparty_hazard;
    HazardCurve receiver_counterparty_hazard;
    CreditModel payer_counterparty_credit;
    CreditModel receiver_counterparty_credit;
    double strike = 0.0;
    double fair_strike = 0.0;
    double annuity = 0.0;
    double fixed_leg = 0.0;
    double payer_feller_indicator = 0.0;
    double receiver_feller_indicator = 0.0;
};

CalibratedState calibrate_state(const ScenarioInputs& inputs,
                                const std::optional<OilCalibrationResult>& oil_fit = {});

/// JSON; doubles are written in shortest round-trip form, so reading back is bit-exact.
std::string serialize_calibrated_state(const CalibratedState& state);
CalibratedState parse_calibrated_state(std::string_view json_text);

}  // namespace crcva
