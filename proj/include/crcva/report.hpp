#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crcva/cva_engine.hpp"
#include "crcva/oil_model.hpp"

namespace crcva {

/// Column order of every results CSV.
inline constexpr const char* kResultsColumns[] = {
    "scenario_id", "rho_bar", "oil_vol_mult", "cir_vol_mult", "side",
    "cva_usd",     "std_error", "cva_pct",    "adjusted_strike"};

void write_results_csv(std::ostream& out, std::span<const CvaResult> results);
/// Reads back a results CSV; fields not stored in the CSV are left at their defaults.
std::vector<CvaResult> read_results_csv(std::istream& in);

struct ReportOptions {
    double fixed_leg = 0.0;
    /// Column labels: nu = multiplier x base nu of the side's counterparty.
    double payer_counterparty_nu = 0.5945;
    double receiver_counterparty_nu = 0.2105;
    /// Column labels: sigma_S = multiplier x this reference spot volatility.
    double sigma_s_reference = 0.3285;
};

/// Text tables, one per side and sweep direction: rows by rho_bar, columns by the
/// swept multiplier; each cell shows CVA +- standard error, % of fixed leg and the
/// adjusted strike. A pure function of its inputs.
std::string render_report(std::span<const CvaResult> results, const ReportOptions& options);

/// (expiry, multiplier, model ATM vol) rows for the given vol multipliers.
std::string vol_term_structure_csv(const OilParams& params, std::span<const double> multipliers,
                                   std::span<const double> expiries);

/// Writes results.csv, report.txt and vol_term_structure.csv into `dir`.
void write_report_files(const std::filesystem::path& dir, std::span<const CvaResult> results,
                        const ReportOptions& options, const OilParams& params);

}  // namespace crcva
