#include "crcva/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "crcva/errors.hpp"

namespace crcva {

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string general(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

std::vector<double> distinct(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

struct Table {
    std::string title;
    std::vector<std::string> column_labels;
    std::vector<double> rows;  // rho_bar values
    // cell lookup: (row, column) -> result
    std::map<std::pair<std::size_t, std::size_t>, const CvaResult*> cells;
};

std::string render_table(const Table& t, double fixed_leg) {
    const std::vector<std::string> kinds{"CVA (USD)", "% fixed leg", "Adjusted strike"};
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"rho_bar", ""});
    for (const auto& label : t.column_labels) grid.back().push_back(label);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            std::vector<std::string> line{k == 0 ? fixed(t.rows[r], 3) : "", kinds[k]};
            for (std::size_t c = 0; c < t.column_labels.size(); ++c) {
                auto it = t.cells.find({r, c});
                if (it == t.cells.end()) {
                    line.push_back("-");
                    continue;
                }
                const CvaResult& res = *it->second;
                if (k == 0) line.push_back(fixed(res.cva, 2) + " +- " + fixed(res.std_error, 2));
                else if (k == 1)
                    line.push_back(fixed_leg > 0.0 ? fixed(100.0 * res.cva / fixed_leg, 3) + "%"
                                                   : "-");
                else line.push_back(fixed(res.adjusted_strike, 2));
            }
            grid.push_back(std::move(line));
        }
    }
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& line : grid)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    std::ostringstream os;
    os << t.title << "\n";
    auto rule = [&] {
        for (std::size_t c = 0; c < width.size(); ++c) os << std::string(width[c] + 2, '-');
        os << "\n";
    };
    rule();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t c = 0; c < grid[i].size(); ++c) {
            if (c < 2) os << std::left << std::setw(static_cast<int>(width[c] + 2)) << grid[i][c];
            else os << std::right << std::setw(static_cast<int>(width[c] + 2)) << grid[i][c];
        }
        os << "\n";
        if (i == 0 || (i % kinds.size() == 0)) rule();
    }
    return os.str();
}

}  // namespace

void write_results_csv(std::ostream& out, std::span<const CvaResult> results) {
    for (std::size_t i = 0; i < std::size(kResultsColumns); ++i)
        out << (i ? "," : "") << kResultsColumns[i];
    out << "\n";
    out << std::setprecision(10);
    for (const auto& r : results) {
        out << r.scenario.scenario_id << ',' << r.scenario.rho_bar << ','
            << r.scenario.oil_vol_mult << ',' << r.scenario.cir_vol_mult << ','
            << to_string(r.scenario.side) << ',' << r.cva << ',' << r.std_error << ','
            << r.cva_pct_of_fixed_leg << ',' << r.adjusted_strike << "\n";
    }
}

std::vector<CvaResult> read_results_csv(std::istream& in) {
    std::vector<CvaResult> out;
    std::string line;
    int number = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (header) {
            header = false;
            std::vector<std::string> expected(std::begin(kResultsColumns), std::end(kResultsColumns));
            if (fields != expected) throw ConfigError("results csv: unexpected header on line 1");
            continue;
        }
        if (fields.size() != std::size(kResultsColumns))
            throw ConfigError("results csv line " + std::to_string(number) + ": expected " +
                              std::to_string(std::size(kResultsColumns)) + " fields");
        try {
            CvaResult r;
            r.scenario.scenario_id = fields[0];
            r.scenario.rho_bar = std::stod(fields[1]);
            r.scenario.oil_vol_mult = std::stod(fields[2]);
            r.scenario.cir_vol_mult = std::stod(fields[3]);
            r.scenario.side = parse_side(fields[4]);
            r.cva = std::stod(fields[5]);
            r.std_error = std::stod(fields[6]);
            r.cva_pct_of_fixed_leg = std::stod(fields[7]);
            r.adjusted_strike = std::stod(fields[8]);
            out.push_back(r);
        } catch (const std::logic_error&) {
            throw ConfigError("results csv line " + std::to_string(number) + ": malformed number");
        }
    }
    return out;
}

std::string render_report(std::span<const CvaResult> results, const ReportOptions& options) {
    std::ostringstream os;
    if (options.fixed_leg > 0.0)
        os << "Fixed leg value: " << fixed(options.fixed_leg, 2) << " USD\n\n";
    for (Side side : {Side::Payer, Side::Receiver}) {
        std::vector<const CvaResult*> mine;
        for (const auto& r : results)
            if (r.scenario.side == side) mine.push_back(&r);
        if (mine.empty()) continue;
        const double base_nu = side == Side::Payer ? options.payer_counterparty_nu
                                                   : options.receiver_counterparty_nu;

        auto build = [&](bool credit_axis, double fixed_mult) {
            Table t;
            std::vector<double> columns;
            std::vector<double> rows;
            for (const auto* r : mine) {
                const double other = credit_axis ? r->scenario.oil_vol_mult : r->scenario.cir_vol_mult;
                if (other != fixed_mult) continue;
                columns.push_back(credit_axis ? r->scenario.cir_vol_mult : r->scenario.oil_vol_mult);
                rows.push_back(r->scenario.rho_bar);
            }
            columns = distinct(columns);
            t.rows = distinct(rows);
            for (double m : columns) {
                if (credit_axis)
                    t.column_labels.push_back("nu " + fixed(m * base_nu, 4) + " (x" + general(m) + ")");
                else
                    t.column_labels.push_back("sigma_S " + fixed(m * options.sigma_s_reference, 4) +
                                              " (x" + general(m) + ")");
            }
            for (const auto* r : mine) {
                const double other = credit_axis ? r->scenario.oil_vol_mult : r->scenario.cir_vol_mult;
                if (other != fixed_mult) continue;
                const double col = credit_axis ? r->scenario.cir_vol_mult : r->scenario.oil_vol_mult;
                const auto ci = static_cast<std::size_t>(
                    std::lower_bound(columns.begin(), columns.end(), col) - columns.begin());
                const auto ri = static_cast<std::size_t>(
                    std::lower_bound(t.rows.begin(), t.rows.end(), r->scenario.rho_bar) -
                    t.rows.begin());
                t.cells[{ri, ci}] = r;
            }
            t.title = std::string(to_string(side)) + " swap: " +
                      (credit_axis ? "effect of credit spread volatility (oil vol x" + general(fixed_mult) + ")"
                                   : "effect of oil volatility (intensity vol x" + general(fixed_mult) + ")");
            return std::pair{t, columns.size()};
        };

        std::vector<double> oil_mults;
        std::vector<double> cir_mults;
        for (const auto* r : mine) {
            oil_mults.push_back(r->scenario.oil_vol_mult);
            cir_mults.push_back(r->scenario.cir_vol_mult);
        }
        oil_mults = distinct(oil_mults);
        cir_mults = distinct(cir_mults);
        bool emitted = false;
        for (double o : oil_mults) {
            auto [t, n] = build(true, o);
            if (n >= 2) {
                os << render_table(t, options.fixed_leg) << "\n";
                emitted = true;
            }
        }
        for (double c : cir_mults) {
            auto [t, n] = build(false, c);
            if (n >= 2) {
                os << render_table(t, options.fixed_leg) << "\n";
                emitted = true;
            }
        }
        if (!emitted)
            for (double o : oil_mults) os << render_table(build(true, o).first, options.fixed_leg) << "\n";
    }
    return os.str();
}

std::string vol_term_structure_csv(const OilParams& params, std::span<const double> multipliers,
                                   std::span<const double> expiries) {
    std::ostringstream os;
    os << "expiry_years,vol_mult,model_atm_vol\n" << std::setprecision(10);
    for (double m : multipliers) {
        const OilParams p = params.with_vol_multiplier(m);
        for (double T : expiries) os << T << ',' << m << ',' << model_atm_vol(p, T) << "\n";
    }
    return os.str();
}

void write_report_files(const std::filesystem::path& dir, std::span<const CvaResult> results,
                        const ReportOptions& options, const OilParams& params) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "results.csv");
        write_results_csv(out, results);
    }
    {
        std::ofstream out(dir / "report.txt");
        out << render_report(results, options);
    }
    std::vector<double> multipliers;
    for (const auto& r : results) multipliers.push_back(r.scenario.oil_vol_mult);
    multipliers = distinct(multipliers);
    if (multipliers.empty()) multipliers.push_back(1.0);
    std::vector<double> expiries;
    for (int i = 1; i <= 60; ++i) expiries.push_back(i / 12.0);
    std::ofstream out(dir / "vol_term_structure.csv");
    out << vol_term_structure_csv(params, multipliers, expiries);
}

}  // namespace crcva
