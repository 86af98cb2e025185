#include "crcva/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crcva/errors.hpp"

namespace crcva {

using nlohmann::json;

namespace {

/// Typed access to one JSON object that records problems instead of throwing.
class Reader {
public:
    Reader(const json* node, std::string path, std::vector<std::string>& problems)
        : node_(node), path_(std::move(path)), problems_(problems) {
        if (node_ && !node_->is_object()) {
            problems_.push_back(where() + "expected an object");
            node_ = nullptr;
        }
    }

    Reader child(const char* key) const {
        const json* c = find(key);
        return Reader(c, qualified(key), problems_);
    }

    void allow(std::initializer_list<const char*> keys) const {
        if (!node_) return;
        for (const auto& [key, value] : node_->items()) {
            if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) ==
                keys.end())
                problems_.push_back("unknown field '" + qualified(key.c_str()) + "'");
        }
    }

    void number(const char* key, double& out) const {
        if (const json* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else problems_.push_back("field '" + qualified(key) + "': expected a number");
        }
    }
    void optional_number(const char* key, std::optional<double>& out) const {
        if (const json* v = find(key)) {
            if (v->is_null()) out.reset();
            else if (v->is_number()) out = v->get<double>();
            else problems_.push_back("field '" + qualified(key) + "': expected a number or null");
        }
    }
    template <class Int>
    void integer(const char* key, Int& out) const {
        if (const json* v = find(key)) {
            if (v->is_number_integer() && (std::is_signed_v<Int> || v->get<long long>() >= 0 ||
                                           v->is_number_unsigned()))
                out = v->get<Int>();
            else
                problems_.push_back("field '" + qualified(key) + "': expected " +
                                    (std::is_signed_v<Int> ? "an integer" : "a nonnegative integer"));
        }
    }
    void boolean(const char* key, bool& out) const {
        if (const json* v = find(key)) {
            if (v->is_boolean()) out = v->get<bool>();
            else problems_.push_back("field '" + qualified(key) + "': expected true or false");
        }
    }
    void string(const char* key, std::string& out) const {
        if (const json* v = find(key)) {
            if (v->is_string()) out = v->get<std::string>();
            else problems_.push_back("field '" + qualified(key) + "': expected a string");
        }
    }
    void numbers(const char* key, std::vector<double>& out) const {
        if (const json* v = find(key)) {
            if (!v->is_array()) {
                problems_.push_back("field '" + qualified(key) + "': expected an array of numbers");
                return;
            }
            std::vector<double> values;
            for (std::size_t i = 0; i < v->size(); ++i) {
                if ((*v)[i].is_number()) values.push_back((*v)[i].get<double>());
                else problems_.push_back("field '" + qualified(key) + "[" + std::to_string(i) +
                                         "]': expected a number");
            }
            out = std::move(values);
        }
    }
    void strings(const char* key, std::vector<std::string>& out) const {
        if (const json* v = find(key)) {
            if (!v->is_array()) {
                problems_.push_back("field '" + qualified(key) + "': expected an array of strings");
                return;
            }
            std::vector<std::string> values;
            for (std::size_t i = 0; i < v->size(); ++i) {
                if ((*v)[i].is_string()) values.push_back((*v)[i].get<std::string>());
                else problems_.push_back("field '" + qualified(key) + "[" + std::to_string(i) +
                                         "]': expected a string");
            }
            out = std::move(values);
        }
    }
    bool has(const char* key) const { return find(key) != nullptr; }
    std::string qualified(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

private:
    const json* find(const char* key) const {
        if (!node_) return nullptr;
        auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }
    std::string where() const { return path_.empty() ? "config: " : "field '" + path_ + "': "; }

    const json* node_;
    std::string path_;
    std::vector<std::string>& problems_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

void add_prefixed(std::vector<std::string>& out, const std::string& prefix,
                  const std::vector<std::string>& items) {
    for (const auto& item : items) out.push_back(prefix + item);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
    if (file.empty()) return {};
    const std::filesystem::path p(file);
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json curve_nodes_json(std::span<const double> t, std::span<const double> v, const char* tk,
                      const char* vk) {
    json arr = json::array();
    for (std::size_t i = 0; i < t.size(); ++i) arr.push_back({{tk, t[i]}, {vk, v[i]}});
    return arr;
}

std::pair<std::vector<double>, std::vector<double>> curve_nodes_from(const json& arr,
                                                                     const char* tk,
                                                                     const char* vk) {
    std::vector<double> t;
    std::vector<double> v;
    for (const auto& node : arr) {
        t.push_back(node.at(tk).get<double>());
        v.push_back(node.at(vk).get<double>());
    }
    return {std::move(t), std::move(v)};
}

const char* estimator_name(Estimator e) {
    return e == Estimator::IntensityWeighted ? "intensity" : "indicator";
}
const char* scheme_name(CirScheme s) {
    return s == CirScheme::Exact ? "exact" : "euler";
}

}  // namespace

bool operator==(const MarketBundle& a, const MarketBundle& b) {
    auto same_cds = [](const CdsQuoteSet& x, const CdsQuoteSet& y) {
        return x.maturities == y.maturities && x.spreads == y.spreads && x.recovery == y.recovery &&
               x.payment_frequency == y.payment_frequency;
    };
    auto same_zero = [](const ZeroCurve& x, const ZeroCurve& y) {
        const auto xn = x.nodes();
        const auto yn = y.nodes();
        return std::equal(xn.begin(), xn.end(), yn.begin(), yn.end(), [](const auto& p, const auto& q) {
            return p.tenor == q.tenor && p.zero_rate == q.zero_rate;
        });
    };
    auto same_fwd = [](const ForwardCurveQuotes& x, const ForwardCurveQuotes& y) {
        return std::equal(x.nodes.begin(), x.nodes.end(), y.nodes.begin(), y.nodes.end(),
                          [](const auto& p, const auto& q) {
                              return p.maturity == q.maturity && p.price == q.price;
                          });
    };
    auto same_vol = [](const AtmVolQuotes& x, const AtmVolQuotes& y) {
        return std::equal(x.nodes.begin(), x.nodes.end(), y.nodes.begin(), y.nodes.end(),
                          [](const auto& p, const auto& q) {
                              return p.expiry == q.expiry && p.vol == q.vol;
                          });
    };
    return same_zero(a.curve, b.curve) && same_fwd(a.forwards, b.forwards) &&
           same_vol(a.atm_vols, b.atm_vols) &&
           same_cds(a.payer_counterparty_cds, b.payer_counterparty_cds) &&
           same_cds(a.receiver_counterparty_cds, b.receiver_counterparty_cds) &&
           a.provenance == b.provenance;
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    std::vector<std::string> problems;
    RunConfig c;
    const Reader root(&doc, "", problems);
    root.allow({"market", "oil", "credit", "swap", "simulation", "scenario", "sweep", "output_dir",
                "notes"});

    const Reader market = root.child("market");
    market.allow({"zero_curve", "forward_curve", "atm_vols", "payer_counterparty_cds",
                  "receiver_counterparty_cds", "recovery", "cds_payment_frequency"});
    for (const char* key : {"zero_curve", "forward_curve", "payer_counterparty_cds",
                            "receiver_counterparty_cds"})
        if (!market.has(key)) problems.push_back("missing field '" + market.qualified(key) + "'");
    market.string("zero_curve", c.files.zero_curve);
    market.string("forward_curve", c.files.forward_curve);
    market.string("atm_vols", c.files.atm_vols);
    market.string("payer_counterparty_cds", c.files.payer_counterparty_cds);
    market.string("receiver_counterparty_cds", c.files.receiver_counterparty_cds);
    market.number("recovery", c.recovery);
    market.integer("cds_payment_frequency", c.cds_payment_frequency);

    const Reader oil = root.child("oil");
    oil.allow({"k_x", "sigma_x", "sigma_L", "rho_xL", "mu_L", "calibrate_to_atm_vols", "x0", "L0"});
    oil.number("k_x", c.oil.k_x);
    oil.number("sigma_x", c.oil.sigma_x);
    oil.number("sigma_L", c.oil.sigma_L);
    oil.number("rho_xL", c.oil.rho_xL);
    oil.number("mu_L", c.oil.mu_L);
    oil.boolean("calibrate_to_atm_vols", c.calibrate_oil_to_atm_vols);
    oil.number("x0", c.x0);
    oil.optional_number("L0", c.L0);

    const Reader credit = root.child("credit");
    credit.allow({"payer_counterparty", "receiver_counterparty", "require_positive_psi"});
    credit.boolean("require_positive_psi", c.require_positive_psi);
    for (auto [key, target] : {std::pair{"payer_counterparty", &c.payer_counterparty_cir},
                               std::pair{"receiver_counterparty", &c.receiver_counterparty_cir}}) {
        const Reader cir = credit.child(key);
        cir.allow({"y0", "kappa", "mu", "nu"});
        cir.number("y0", target->y0);
        cir.number("kappa", target->kappa);
        cir.number("mu", target->mu);
        cir.number("nu", target->nu);
        add_prefixed(problems, std::string(key) + ": ", target->validate());
    }

    const Reader swap = root.child("swap");
    swap.allow({"maturity", "payments_per_year", "strike", "notional"});
    swap.number("maturity", c.swap.maturity);
    swap.integer("payments_per_year", c.swap.payments_per_year);
    swap.optional_number("strike", c.swap.strike);
    swap.number("notional", c.swap.notional);
    if (!(c.swap.maturity > 0.0)) problems.emplace_back("field 'swap.maturity' must be positive");
    if (c.swap.payments_per_year <= 0)
        problems.emplace_back("field 'swap.payments_per_year' must be positive");
    if (!(c.swap.notional > 0.0)) problems.emplace_back("field 'swap.notional' must be positive");
    if (c.swap.strike && !(*c.swap.strike > 0.0))
        problems.emplace_back("field 'swap.strike' must be positive");

    const Reader sim = root.child("simulation");
    sim.allow({"paths", "grid", "steps_per_bucket", "seed", "estimator", "antithetic", "lgd",
               "cir_scheme", "threads"});
    sim.integer("paths", c.simulation.paths);
    if (c.swap.maturity > 0.0 && c.swap.payments_per_year > 0) {
        c.simulation.grid.clear();
        const auto n = static_cast<int>(std::lround(c.swap.maturity * c.swap.payments_per_year));
        for (int i = 1; i <= n; ++i)
            c.simulation.grid.push_back(static_cast<double>(i) / c.swap.payments_per_year);
    }
    sim.numbers("grid", c.simulation.grid);
    sim.integer("steps_per_bucket", c.simulation.steps_per_bucket);
    sim.integer("seed", c.simulation.seed);
    std::string estimator = estimator_name(c.simulation.estimator);
    sim.string("estimator", estimator);
    if (lower(estimator) == "intensity") c.simulation.estimator = Estimator::IntensityWeighted;
    else if (lower(estimator) == "indicator") c.simulation.estimator = Estimator::Indicator;
    else problems.push_back("field 'simulation.estimator': expected intensity or indicator");
    sim.boolean("antithetic", c.simulation.antithetic);
    sim.number("lgd", c.simulation.lgd);
    std::string scheme = scheme_name(c.simulation.cir_scheme);
    sim.string("cir_scheme", scheme);
    if (lower(scheme) == "exact") c.simulation.cir_scheme = CirScheme::Exact;
    else if (lower(scheme) == "euler") c.simulation.cir_scheme = CirScheme::FullTruncationEuler;
    else problems.push_back("field 'simulation.cir_scheme': expected exact or euler");
    sim.integer("threads", c.simulation.threads);
    add_prefixed(problems, "", c.simulation.validate());

    const Reader scenario = root.child("scenario");
    scenario.allow({"side", "rho_bar", "oil_vol_mult", "cir_vol_mult"});
    std::string side = std::string(to_string(c.scenario.side));
    scenario.string("side", side);
    try {
        c.scenario.side = parse_side(side);
    } catch (const ConfigError& e) {
        problems.push_back("field 'scenario.side': " + std::string(e.what()));
    }
    scenario.number("rho_bar", c.scenario.rho_bar);
    scenario.number("oil_vol_mult", c.scenario.oil_vol_mult);
    scenario.number("cir_vol_mult", c.scenario.cir_vol_mult);
    if (!(std::abs(c.scenario.rho_bar) <= 1.0))
        problems.emplace_back("field 'scenario.rho_bar' must lie in [-1, 1]");
    if (!(c.scenario.oil_vol_mult > 0.0))
        problems.emplace_back("field 'scenario.oil_vol_mult' must be positive");
    if (!(c.scenario.cir_vol_mult > 0.0))
        problems.emplace_back("field 'scenario.cir_vol_mult' must be positive");

    const Reader sweep = root.child("sweep");
    sweep.allow({"rho_bars", "oil_vol_mults", "cir_vol_mults", "sides"});
    sweep.numbers("rho_bars", c.sweep.rho_bars);
    sweep.numbers("oil_vol_mults", c.sweep.oil_vol_mults);
    sweep.numbers("cir_vol_mults", c.sweep.cir_vol_mults);
    if (sweep.has("sides")) {
        std::vector<std::string> sides;
        sweep.strings("sides", sides);
        c.sweep.sides.clear();
        for (const auto& s : sides) {
            try {
                c.sweep.sides.push_back(parse_side(s));
            } catch (const ConfigError& e) {
                problems.push_back("field 'sweep.sides': " + std::string(e.what()));
            }
        }
    }
    add_prefixed(problems, "", c.sweep.validate());

    root.string("output_dir", c.output_dir);
    root.strings("notes", c.notes);

    add_prefixed(problems, "", c.oil.validate());
    if (!(c.recovery >= 0.0 && c.recovery < 1.0))
        problems.emplace_back("field 'market.recovery' must lie in [0, 1)");
    if (c.cds_payment_frequency <= 0)
        problems.emplace_back("field 'market.cds_payment_frequency' must be positive");

    if (!problems.empty()) throw ConfigError(problems);

    for (std::string* file : {&c.files.zero_curve, &c.files.forward_curve, &c.files.atm_vols,
                              &c.files.payer_counterparty_cds, &c.files.receiver_counterparty_cds})
        if (!file->empty()) *file = resolve(base_dir, *file).string();
    return c;
}

std::string serialize_run_config(const RunConfig& c) {
    json doc;
    doc["market"] = {{"zero_curve", c.files.zero_curve},
                     {"forward_curve", c.files.forward_curve},
                     {"atm_vols", c.files.atm_vols},
                     {"payer_counterparty_cds", c.files.payer_counterparty_cds},
                     {"receiver_counterparty_cds", c.files.receiver_counterparty_cds},
                     {"recovery", c.recovery},
                     {"cds_payment_frequency", c.cds_payment_frequency}};
    doc["oil"] = {{"k_x", c.oil.k_x},
                  {"sigma_x", c.oil.sigma_x},
                  {"sigma_L", c.oil.sigma_L},
                  {"rho_xL", c.oil.rho_xL},
                  {"mu_L", c.oil.mu_L},
                  {"calibrate_to_atm_vols", c.calibrate_oil_to_atm_vols},
                  {"x0", c.x0},
                  {"L0", c.L0 ? json(*c.L0) : json(nullptr)}};
    auto cir = [](const CirParams& p) {
        return json{{"y0", p.y0}, {"kappa", p.kappa}, {"mu", p.mu}, {"nu", p.nu}};
    };
    doc["credit"] = {{"payer_counterparty", cir(c.payer_counterparty_cir)},
                     {"receiver_counterparty", cir(c.receiver_counterparty_cir)},
                     {"require_positive_psi", c.require_positive_psi}};
    doc["swap"] = {{"maturity", c.swap.maturity},
                   {"payments_per_year", c.swap.payments_per_year},
                   {"strike", c.swap.strike ? json(*c.swap.strike) : json(nullptr)},
                   {"notional", c.swap.notional}};
    doc["simulation"] = {{"paths", c.simulation.paths},
                         {"grid", c.simulation.grid},
                         {"steps_per_bucket", c.simulation.steps_per_bucket},
                         {"seed", c.simulation.seed},
                         {"estimator", estimator_name(c.simulation.estimator)},
                         {"antithetic", c.simulation.antithetic},
                         {"lgd", c.simulation.lgd},
                         {"cir_scheme", scheme_name(c.simulation.cir_scheme)},
                         {"threads", c.simulation.threads}};
    doc["scenario"] = {{"side", std::string(to_string(c.scenario.side))},
                       {"rho_bar", c.scenario.rho_bar},
                       {"oil_vol_mult", c.scenario.oil_vol_mult},
                       {"cir_vol_mult", c.scenario.cir_vol_mult}};
    json sides = json::array();
    for (Side s : c.sweep.sides) sides.push_back(std::string(to_string(s)));
    doc["sweep"] = {{"rho_bars", c.sweep.rho_bars},
                    {"oil_vol_mults", c.sweep.oil_vol_mults},
                    {"cir_vol_mults", c.sweep.cir_vol_mults},
                    {"sides", sides}};
    doc["output_dir"] = c.output_dir;
    doc["notes"] = c.notes;
    return doc.dump(2) + "\n";
}

CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read file '" + path.string() + "'");
    const std::string name = path.filename().string();
    CsvTable table;
    std::vector<std::string> problems;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            const std::string comment = trim(std::string_view(line).substr(hash + 1));
            if (lower(comment.substr(0, 5)) == "note:") table.notes.push_back(trim(comment.substr(5)));
            line.erase(hash);
        }
        const std::string content = trim(line);
        if (content.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(content);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));

        if (table.header.empty()) {
            table.header = fields;
            std::vector<std::string> got;
            for (const auto& f : fields) got.push_back(lower(f));
            if (got != columns) {
                std::string expected;
                for (const auto& c : columns) expected += (expected.empty() ? "" : ",") + c;
                problems.push_back(name + ":" + std::to_string(number) + ": expected header '" +
                                   expected + "'");
            }
            continue;
        }
        if (fields.size() != columns.size()) {
            problems.push_back(name + ":" + std::to_string(number) + ": expected " +
                               std::to_string(columns.size()) + " fields, got " +
                               std::to_string(fields.size()));
            continue;
        }
        std::vector<double> row;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            double v = 0.0;
            const char* first = fields[i].data();
            const char* last = first + fields[i].size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
                problems.push_back(name + ":" + std::to_string(number) + ": field '" + columns[i] +
                                   "' is not a number: '" + fields[i] + "'");
                continue;
            }
            row.push_back(v);
        }
        if (row.size() == columns.size()) {
            table.rows.push_back(std::move(row));
            table.line_numbers.push_back(number);
        }
    }
    if (table.header.empty()) problems.push_back(name + ": missing header row");
    if (!problems.empty()) throw ConfigError(problems);
    return table;
}

MarketBundle load_market_bundle(const RunConfig& c) {
    MarketBundle m;
    std::vector<std::string> problems;
    auto load = [&](const std::string& file, const std::vector<std::string>& columns,
                    auto&& consume) {
        try {
            const CsvTable table = read_csv(file, columns);
            const std::string name = std::filesystem::path(file).filename().string();
            for (const auto& note : table.notes) m.provenance.push_back(name + ": " + note);
            consume(table, name);
        } catch (const ConfigError& e) {
            problems.insert(problems.end(), e.problems().begin(), e.problems().end());
        }
    };

    load(c.files.zero_curve, {"tenor_years", "zero_rate"}, [&](const CsvTable& t, const std::string& name) {
        std::vector<ZeroCurveNode> nodes;
        for (const auto& r : t.rows) nodes.push_back({r[0], r[1]});
        try {
            m.curve = ZeroCurve(std::move(nodes));
        } catch (const ConfigError& e) {
            add_prefixed(problems, name + ": ", e.problems());
        }
    });
    load(c.files.forward_curve, {"maturity_years", "price_usd"},
         [&](const CsvTable& t, const std::string& name) {
             for (const auto& r : t.rows) m.forwards.nodes.push_back({r[0], r[1]});
             add_prefixed(problems, name + ": ", m.forwards.validate());
         });
    if (!c.files.atm_vols.empty())
        load(c.files.atm_vols, {"expiry_years", "vol"}, [&](const CsvTable& t, const std::string& name) {
            for (const auto& r : t.rows) m.atm_vols.nodes.push_back({r[0], r[1]});
            add_prefixed(problems, name + ": ", m.atm_vols.validate());
        });
    for (auto [file, target] : {std::pair{&c.files.payer_counterparty_cds, &m.payer_counterparty_cds},
                                std::pair{&c.files.receiver_counterparty_cds,
                                          &m.receiver_counterparty_cds}}) {
        load(*file, {"maturity_years", "spread_bps"}, [&](const CsvTable& t, const std::string& name) {
            target->recovery = c.recovery;
            target->payment_frequency = c.cds_payment_frequency;
            for (std::size_t i = 0; i < t.rows.size(); ++i) {
                const auto& r = t.rows[i];
                if (r[1] < 0.0)
                    problems.push_back(name + ":" + std::to_string(t.line_numbers[i]) +
                                       ": field 'spread_bps' = " + fmt(r[1]) +
                                       " must be nonnegative");
                target->maturities.push_back(r[0]);
                target->spreads.push_back(r[1] * 1e-4);
            }
            add_prefixed(problems, name + ": ", target->validate());
        });
    }
    if (!problems.empty()) {
        // The same file may back both counterparties; report each message once.
        std::vector<std::string> unique;
        for (const auto& p : problems)
            if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
        throw ConfigError(unique);
    }
    return m;
}

LoadedConfig load_market_config(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    LoadedConfig out;
    out.config = parse_run_config(text, path.parent_path());
    out.market = load_market_bundle(out.config);
    return out;
}

ScenarioInputs make_scenario_inputs(const RunConfig& config, const MarketBundle& market,
                                    std::optional<OilCalibrationResult>* oil_fit) {
    ScenarioInputs in;
    in.oil_params = config.oil;
    if (config.calibrate_oil_to_atm_vols) {
        if (market.atm_vols.nodes.empty())
            throw ConfigError("oil.calibrate_to_atm_vols is set but no atm_vols file is given");
        const auto fit = calibrate_oil_params(market.atm_vols, config.oil);
        in.oil_params = fit.params;
        if (oil_fit) *oil_fit = fit;
    }
    in.forwards = market.forwards;
    in.x0 = config.x0;
    in.L0 = config.L0;
    in.curve = market.curve;
    try {
        in.payer_counterparty_hazard = strip_hazard_curve(market.payer_counterparty_cds, market.curve);
    } catch (const CalibrationError& e) {
        throw CalibrationError(std::string("payer counterparty CDS: ") + e.what());
    }
    try {
        in.receiver_counterparty_hazard =
            strip_hazard_curve(market.receiver_counterparty_cds, market.curve);
    } catch (const CalibrationError& e) {
        throw CalibrationError(std::string("receiver counterparty CDS: ") + e.what());
    }
    in.payer_counterparty_cir = config.payer_counterparty_cir;
    in.receiver_counterparty_cir = config.receiver_counterparty_cir;
    in.shift_options.require_positive_psi = config.require_positive_psi;
    in.simulation = config.simulation;

    const double strike_placeholder = config.swap.strike.value_or(1.0);
    in.swap = CommoditySwap::regular(config.swap.maturity, config.swap.payments_per_year,
                                     strike_placeholder, config.scenario.side, config.swap.notional);
    if (!config.swap.strike) {
        const OilModel base = scenario_oil_model(in, 1.0);
        in.swap.strike = fair_strike(in.swap, base, base.initial_state(), in.curve);
    }
    return in;
}

CalibratedState calibrate_state(const ScenarioInputs& in,
                                const std::optional<OilCalibrationResult>& oil_fit) {
    CalibratedState s;
    s.oil = scenario_oil_model(in, 1.0);
    s.oil_fit = oil_fit;
    s.payer_counterparty_hazard = in.payer_counterparty_hazard;
    s.receiver_counterparty_hazard = in.receiver_counterparty_hazard;
    s.payer_counterparty_credit = scenario_credit_model(in, Side::Payer, 1.0);
    s.receiver_counterparty_credit = scenario_credit_model(in, Side::Receiver, 1.0);
    s.strike = in.swap.strike;
    s.fair_strike = fair_strike(in.swap, s.oil, s.oil.initial_state(), in.curve);
    s.annuity = swap_annuity(in.swap, in.curve);
    s.fixed_leg = fixed_leg_value(in.swap, in.curve);
    s.payer_feller_indicator = in.payer_counterparty_cir.feller_indicator();
    s.receiver_feller_indicator = in.receiver_counterparty_cir.feller_indicator();
    return s;
}

std::string serialize_calibrated_state(const CalibratedState& s) {
    json doc;
    doc["oil"] = {{"k_x", s.oil.params.k_x},
                  {"sigma_x", s.oil.params.sigma_x},
                  {"sigma_L", s.oil.params.sigma_L},
                  {"rho_xL", s.oil.params.rho_xL},
                  {"mu_L", s.oil.params.mu_L},
                  {"x0", s.oil.x0},
                  {"L0", s.oil.L0},
                  {"shift", curve_nodes_json(s.oil.shift.maturities(), s.oil.shift.values(),
                                             "maturity", "phi")}};
    if (s.oil_fit)
        doc["oil_fit"] = {{"objective", s.oil_fit->objective}, {"iterations", s.oil_fit->iterations}};
    auto hazard = [](const HazardCurve& h) {
        return curve_nodes_json(h.tenors(), h.hazard_rates(), "tenor", "hazard_rate");
    };
    auto credit = [](const CreditModel& m) {
        return json{{"y0", m.params.y0},
                    {"kappa", m.params.kappa},
                    {"mu", m.params.mu},
                    {"nu", m.params.nu},
                    {"shift", curve_nodes_json(m.shift.times(), m.shift.values(), "t", "Psi")}};
    };
    doc["payer_counterparty"] = {{"hazard", hazard(s.payer_counterparty_hazard)},
                                 {"cir", credit(s.payer_counterparty_credit)},
                                 {"feller_indicator", s.payer_feller_indicator}};
    doc["receiver_counterparty"] = {{"hazard", hazard(s.receiver_counterparty_hazard)},
                                    {"cir", credit(s.receiver_counterparty_credit)},
                                    {"feller_indicator", s.receiver_feller_indicator}};
    doc["swap"] = {{"strike", s.strike},
                   {"fair_strike", s.fair_strike},
                   {"annuity", s.annuity},
                   {"fixed_leg", s.fixed_leg}};
    return doc.dump(2) + "\n";
}

CalibratedState parse_calibrated_state(std::string_view json_text) {
    CalibratedState s;
    try {
        const json doc = json::parse(json_text.begin(), json_text.end());
        const json& oil = doc.at("oil");
        s.oil.params.k_x = oil.at("k_x").get<double>();
        s.oil.params.sigma_x = oil.at("sigma_x").get<double>();
        s.oil.params.sigma_L = oil.at("sigma_L").get<double>();
        s.oil.params.rho_xL = oil.at("rho_xL").get<double>();
        s.oil.params.mu_L = oil.at("mu_L").get<double>();
        s.oil.x0 = oil.at("x0").get<double>();
        s.oil.L0 = oil.at("L0").get<double>();
        auto [mats, phis] = curve_nodes_from(oil.at("shift"), "maturity", "phi");
        s.oil.shift = OilShift(std::move(mats), std::move(phis));
        if (doc.contains("oil_fit")) {
            const auto& fit = doc.at("oil_fit");
            s.oil_fit = OilCalibrationResult{s.oil.params, fit.at("objective").get<double>(),
                                             fit.at("iterations").get<int>()};
        }
        auto read_side = [](const json& node, HazardCurve& hazard, CreditModel& model,
                            double& feller) {
            auto [tenors, rates] = curve_nodes_from(node.at("hazard"), "tenor", "hazard_rate");
            hazard = HazardCurve(std::move(tenors), std::move(rates));
            const json& cir = node.at("cir");
            model.params = {cir.at("y0").get<double>(), cir.at("kappa").get<double>(),
                            cir.at("mu").get<double>(), cir.at("nu").get<double>()};
            auto [times, psi] = curve_nodes_from(cir.at("shift"), "t", "Psi");
            model.shift = CreditShift(std::move(times), std::move(psi));
            feller = node.at("feller_indicator").get<double>();
        };
        read_side(doc.at("payer_counterparty"), s.payer_counterparty_hazard,
                  s.payer_counterparty_credit, s.payer_feller_indicator);
        read_side(doc.at("receiver_counterparty"), s.receiver_counterparty_hazard,
                  s.receiver_counterparty_credit, s.receiver_feller_indicator);
        const json& swap = doc.at("swap");
        s.strike = swap.at("strike").get<double>();
        s.fair_strike = swap.at("fair_strike").get<double>();
        s.annuity = swap.at("annuity").get<double>();
        s.fixed_leg = swap.at("fixed_leg").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("calibrated state: ") + e.what());
    }
    return s;
}

}  // namespace crcva
