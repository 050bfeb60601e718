// SPDX-License-Identifier: Apache-2.0
//
// aachan - air-to-air propagation channel toolkit for built-up areas
// Copyright (C) 2026 aachan contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Command-line front end: scenario configuration, batch runs, and CSV/JSON
// emission for plotting. Subcommands: predict, simulate, grprob, fit,
// reproduce, generate-city.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aachan/aachan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DistRange {
    double min = 5.0;
    double max = 300.0;
    double step = 1.0;
};

struct RunConfig {
    std::string env_name = "urban";
    std::optional<aachan::EnvironmentParams> env_explicit;
    double frequency_hz = 4e9;
    std::vector<double> altitudes_m{100.0};
    DistRange dist;
    std::uint64_t realizations = 1;
    std::uint64_t seed = 1;
    std::string polarization = "horizontal";
    double eps_building = 4.44;
    double eps_ground = 3.0;
    bool paper_literal_fresnel = false;
    bool exact_amplitude = false;
    bool stochastic_hb = false;
    bool linear_power_averaging = false;
    std::vector<double> thetas_deg{10, 20, 30, 40, 50, 60, 70, 80};
    std::uint64_t links_per_city = 200;
    double side_d_km = 0.0;
    std::optional<double> p_g;
    unsigned threads = 0;
    std::string out = "-";
    std::string format = "csv";

    aachan::EnvironmentParams environment() const {
        if (env_explicit) {
            env_explicit->validate();
            return *env_explicit;
        }
        return aachan::preset_by_name(env_name);
    }

    void validate() const {
        environment();
        if (!(frequency_hz > 0.0))
            throw std::invalid_argument("config: frequency_hz must be positive");
        if (altitudes_m.empty())
            throw std::invalid_argument("config: altitudes_m must not be empty");
        for (double a : altitudes_m)
            if (!(a > 0.0))
                throw std::invalid_argument("config: altitudes must be positive");
        if (!(dist.min > 0.0) || !(dist.max >= dist.min) || !(dist.step > 0.0))
            throw std::invalid_argument("config: distance_m requires 0 < min <= max and step > 0");
        if (realizations < 1)
            throw std::invalid_argument("config: realizations must be at least 1");
        aachan::polarization_from_string(polarization);
        if (!(eps_building > 1.0) || !(eps_ground > 1.0))
            throw std::invalid_argument("config: permittivities must exceed 1");
        for (double t : thetas_deg)
            if (!(t > 0.0 && t < 90.0))
                throw std::invalid_argument("config: thetas_deg must lie strictly in (0, 90)");
        if (links_per_city < 1)
            throw std::invalid_argument("config: links_per_city must be at least 1");
        if (side_d_km < 0.0)
            throw std::invalid_argument("config: side_d_km must be non-negative");
        if (p_g && !(*p_g >= 0.0 && *p_g <= 1.0))
            throw std::invalid_argument("config: p_g must lie in [0,1]");
        if (format != "csv" && format != "json")
            throw std::invalid_argument("config: format must be csv or json");
    }

    json resolved(const std::string &command) const {
        json j;
        j["command"] = command;
        if (env_explicit) {
            const auto &e = *env_explicit;
            j["environment"] = {{"name", e.name},
                                {"alpha", e.alpha},
                                {"beta", e.beta},
                                {"gamma", e.gamma},
                                {"gr_logistic",
                                 {{"a", e.gr_logistic.a},
                                  {"b", e.gr_logistic.b},
                                  {"c", e.gr_logistic.c},
                                  {"d", e.gr_logistic.d},
                                  {"e", e.gr_logistic.e}}}};
        } else {
            j["environment"] = env_name;
        }
        j["frequency_hz"] = frequency_hz;
        j["altitudes_m"] = altitudes_m;
        j["distance_m"] = {{"min", dist.min}, {"max", dist.max}, {"step", dist.step}};
        j["realizations"] = realizations;
        j["seed"] = seed;
        j["polarization"] = polarization;
        j["eps_building"] = eps_building;
        j["eps_ground"] = eps_ground;
        j["paper_literal_fresnel"] = paper_literal_fresnel;
        j["exact_amplitude"] = exact_amplitude;
        j["stochastic_hb"] = stochastic_hb;
        j["linear_power_averaging"] = linear_power_averaging;
        j["thetas_deg"] = thetas_deg;
        j["links_per_city"] = links_per_city;
        j["side_d_km"] = side_d_km;
        if (p_g)
            j["p_g"] = *p_g;
        else
            j["p_g"] = nullptr;
        j["threads"] = threads;
        return j;
    }
};

[[noreturn]] void config_error(const std::string &msg) {
    throw std::invalid_argument(msg);
}

double require_number(const json &j, const std::string &field) {
    if (!j.is_number())
        config_error("config: field '" + field + "' must be a number");
    return j.get<double>();
}

aachan::EnvironmentParams parse_env_object(const json &j) {
    static const std::set<std::string> keys{"name", "alpha", "beta", "gamma", "gr_logistic"};
    for (const auto &item : j.items())
        if (!keys.count(item.key()))
            config_error("config: unknown field 'environment." + item.key() + "'");
    aachan::EnvironmentParams env;
    env.name = j.value("name", std::string("custom"));
    env.alpha = require_number(j.at("alpha"), "environment.alpha");
    env.beta = require_number(j.at("beta"), "environment.beta");
    env.gamma = require_number(j.at("gamma"), "environment.gamma");
    const json &g = j.at("gr_logistic");
    static const std::set<std::string> gkeys{"a", "b", "c", "d", "e"};
    for (const auto &item : g.items())
        if (!gkeys.count(item.key()))
            config_error("config: unknown field 'environment.gr_logistic." + item.key() + "'");
    env.gr_logistic.a = require_number(g.at("a"), "gr_logistic.a");
    env.gr_logistic.b = require_number(g.at("b"), "gr_logistic.b");
    env.gr_logistic.c = require_number(g.at("c"), "gr_logistic.c");
    env.gr_logistic.d = require_number(g.at("d"), "gr_logistic.d");
    env.gr_logistic.e = require_number(g.at("e"), "gr_logistic.e");
    return env;
}

// Strict config ingestion: every key must be known and well typed; numeric
// ranges are checked in RunConfig::validate before any computation starts.
void apply_config_json(RunConfig &cfg, const json &j) {
    if (!j.is_object())
        config_error("config: top level must be a JSON object");
    static const std::set<std::string> keys{
        "environment", "frequency_hz", "altitudes_m", "distance_m", "realizations",
        "seed", "polarization", "eps_building", "eps_ground", "paper_literal_fresnel",
        "exact_amplitude", "stochastic_hb", "linear_power_averaging", "thetas_deg",
        "links_per_city", "side_d_km", "p_g", "threads", "out", "format"};
    for (const auto &item : j.items())
        if (!keys.count(item.key()))
            config_error("config: unknown field '" + item.key() + "'");

    if (j.contains("environment")) {
        const json &e = j["environment"];
        if (e.is_string()) {
            cfg.env_name = e.get<std::string>();
            cfg.env_explicit.reset();
        } else if (e.is_object()) {
            cfg.env_explicit = parse_env_object(e);
        } else {
            config_error("config: 'environment' must be a preset name or an object");
        }
    }
    if (j.contains("frequency_hz")) cfg.frequency_hz = require_number(j["frequency_hz"], "frequency_hz");
    if (j.contains("altitudes_m")) {
        const json &a = j["altitudes_m"];
        if (a.is_number()) {
            cfg.altitudes_m = {a.get<double>()};
        } else if (a.is_array()) {
            cfg.altitudes_m.clear();
            for (const auto &v : a)
                cfg.altitudes_m.push_back(require_number(v, "altitudes_m[]"));
        } else {
            config_error("config: 'altitudes_m' must be a number or an array");
        }
    }
    if (j.contains("distance_m")) {
        const json &d = j["distance_m"];
        if (!d.is_object())
            config_error("config: 'distance_m' must be an object {min,max,step}");
        static const std::set<std::string> dkeys{"min", "max", "step"};
        for (const auto &item : d.items())
            if (!dkeys.count(item.key()))
                config_error("config: unknown field 'distance_m." + item.key() + "'");
        if (d.contains("min")) cfg.dist.min = require_number(d["min"], "distance_m.min");
        if (d.contains("max")) cfg.dist.max = require_number(d["max"], "distance_m.max");
        if (d.contains("step")) cfg.dist.step = require_number(d["step"], "distance_m.step");
    }
    if (j.contains("realizations")) {
        if (!j["realizations"].is_number_unsigned())
            config_error("config: 'realizations' must be a non-negative integer");
        cfg.realizations = j["realizations"].get<std::uint64_t>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            config_error("config: 'seed' must be a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("polarization")) {
        if (!j["polarization"].is_string())
            config_error("config: 'polarization' must be a string");
        cfg.polarization = j["polarization"].get<std::string>();
    }
    if (j.contains("eps_building")) cfg.eps_building = require_number(j["eps_building"], "eps_building");
    if (j.contains("eps_ground")) cfg.eps_ground = require_number(j["eps_ground"], "eps_ground");
    for (const char *flag : {"paper_literal_fresnel", "exact_amplitude", "stochastic_hb",
                             "linear_power_averaging"}) {
        if (j.contains(flag) && !j[flag].is_boolean())
            config_error(std::string("config: '") + flag + "' must be a boolean");
    }
    if (j.contains("paper_literal_fresnel")) cfg.paper_literal_fresnel = j["paper_literal_fresnel"];
    if (j.contains("exact_amplitude")) cfg.exact_amplitude = j["exact_amplitude"];
    if (j.contains("stochastic_hb")) cfg.stochastic_hb = j["stochastic_hb"];
    if (j.contains("linear_power_averaging")) cfg.linear_power_averaging = j["linear_power_averaging"];
    if (j.contains("thetas_deg")) {
        if (!j["thetas_deg"].is_array())
            config_error("config: 'thetas_deg' must be an array");
        cfg.thetas_deg.clear();
        for (const auto &v : j["thetas_deg"])
            cfg.thetas_deg.push_back(require_number(v, "thetas_deg[]"));
    }
    if (j.contains("links_per_city")) {
        if (!j["links_per_city"].is_number_unsigned())
            config_error("config: 'links_per_city' must be a non-negative integer");
        cfg.links_per_city = j["links_per_city"].get<std::uint64_t>();
    }
    if (j.contains("side_d_km")) cfg.side_d_km = require_number(j["side_d_km"], "side_d_km");
    if (j.contains("p_g")) {
        if (j["p_g"].is_null())
            cfg.p_g.reset();
        else
            cfg.p_g = require_number(j["p_g"], "p_g");
    }
    if (j.contains("threads")) {
        if (!j["threads"].is_number_unsigned())
            config_error("config: 'threads' must be a non-negative integer");
        cfg.threads = j["threads"].get<unsigned>();
    }
    if (j.contains("out")) {
        if (!j["out"].is_string())
            config_error("config: 'out' must be a string");
        cfg.out = j["out"].get<std::string>();
    }
    if (j.contains("format")) {
        if (!j["format"].is_string())
            config_error("config: 'format' must be a string");
        cfg.format = j["format"].get<std::string>();
    }
}

void load_config_file(RunConfig &cfg, const std::string &path) {
    std::ifstream in(path);
    if (!in)
        config_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        config_error("config: JSON parse failure in " + path + ": " + e.what());
    }
    apply_config_json(cfg, j);
}

DistRange parse_dist_spec(const std::string &spec) {
    DistRange r;
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        config_error("--dist-m expects MIN:MAX:STEP");
    try {
        r.min = std::stod(spec.substr(0, c1));
        r.max = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        r.step = std::stod(spec.substr(c2 + 1));
    } catch (const std::exception &) {
        config_error("--dist-m expects numeric MIN:MAX:STEP");
    }
    return r;
}

std::vector<double> distance_grid(const DistRange &r) {
    std::vector<double> grid;
    for (double d = r.min; d <= r.max + 1e-9; d += r.step)
        grid.push_back(d);
    return grid;
}

// ---------------------------------------------------------------- output --

void write_text_output(const std::string &out, const std::string &payload) {
    if (out == "-" || out.empty()) {
        std::cout << payload;
        return;
    }
    const fs::path p(out);
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f)
        config_error("cannot open output file " + out);
    f << payload;
    if (!f)
        config_error("failed writing output file " + out);
}

void write_file(const fs::path &p, const std::string &payload) {
    std::ofstream f(p, std::ios::binary);
    if (!f)
        config_error("cannot open output file " + p.string());
    f << payload;
    f.flush();
    if (!f)
        config_error("failed writing output file " + p.string());
}

json provenance_json(const json &resolved) {
    return {{"config_fnv1a64", aachan::hex64(aachan::fnv1a64(resolved.dump()))},
            {"config", resolved}};
}

// Rows-to-CSV with the provenance comment line; also renders the same table
// as JSON when format=json.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows; // numeric cells, NaN allowed

    std::string to_csv(const json &resolved) const {
        std::ostringstream os;
        aachan::write_provenance_comment(os, resolved.dump());
        for (std::size_t i = 0; i < columns.size(); ++i)
            os << columns[i] << (i + 1 < columns.size() ? "," : "");
        os << "\n";
        for (const auto &row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                os << aachan::format_f6(row[i]) << (i + 1 < row.size() ? "," : "");
            os << "\n";
        }
        return os.str();
    }

    std::string to_json_str(const json &resolved) const {
        json j;
        j["provenance"] = provenance_json(resolved);
        auto &arr = j["rows"] = json::array();
        for (const auto &row : rows) {
            json obj;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (std::isnan(row[i]))
                    obj[columns[i]] = nullptr;
                else
                    obj[columns[i]] = row[i];
            }
            arr.push_back(obj);
        }
        return j.dump(2) + "\n";
    }

    std::string render(const RunConfig &cfg, const json &resolved) const {
        return cfg.format == "json" ? to_json_str(resolved) : to_csv(resolved);
    }
};

// ------------------------------------------------------------- commands --

double single_altitude(const RunConfig &cfg, const char *cmd) {
    if (cfg.altitudes_m.size() != 1)
        config_error(std::string(cmd) + " expects exactly one altitude");
    return cfg.altitudes_m.front();
}

int cmd_predict(const RunConfig &cfg) {
    cfg.validate();
    const auto env = cfg.environment();
    const double h = single_altitude(cfg, "predict");
    const auto pol = aachan::polarization_from_string(cfg.polarization);
    const auto grid = distance_grid(cfg.dist);

    aachan::PtrOptions opt;
    opt.paper_literal_fresnel = cfg.paper_literal_fresnel;
    opt.exact_amplitude = cfg.exact_amplitude;

    const double hb_mean = aachan::effective_building_height(env, h);

    Table table;
    table.columns = {"distance_m", "pl_ptr_db", "pl_fspl_db"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid[i];
        aachan::Link link;
        link.tx = {0.0, 0.0, h};
        link.rx = {d, 0.0, h};
        link.frequency_hz = cfg.frequency_hz;
        link.polarization = pol;
        link.eps_building = cfg.eps_building;
        link.eps_ground = cfg.eps_ground;

        double hb = hb_mean;
        if (cfg.stochastic_hb) {
            // per-evaluation roof height from the Rayleigh law truncated to [0, h)
            aachan::Rng rng(aachan::substream_seed(cfg.seed, i));
            const double u_cap = aachan::rayleigh_cdf(h, env.gamma);
            hb = aachan::sample_building_height(env.gamma, rng.uniform_open01() * u_cap);
        }
        const auto br = aachan::ptr_path_loss(link, env, hb, cfg.p_g, opt);
        const double fspl = aachan::fspl_db(d / 1000.0, cfg.frequency_hz / 1e6);
        table.rows.push_back({d, br.path_loss_db, fspl});
    }
    write_text_output(cfg.out, table.render(cfg, cfg.resolved("predict")));
    return 0;
}

int cmd_simulate(const RunConfig &cfg) {
    cfg.validate();
    const auto env = cfg.environment();
    const double h = single_altitude(cfg, "simulate");

    aachan::SweepOptions opt;
    opt.polarization = aachan::polarization_from_string(cfg.polarization);
    opt.eps_building = cfg.eps_building;
    opt.eps_ground = cfg.eps_ground;
    opt.linear_power_averaging = cfg.linear_power_averaging;
    opt.threads = cfg.threads;
    opt.side_d_km = cfg.side_d_km;

    const auto sweep = aachan::distance_sweep(env, h, cfg.frequency_hz, cfg.dist.min, cfg.dist.max,
                                              cfg.dist.step, cfg.realizations, cfg.seed, opt);
    const json resolved = cfg.resolved("simulate");
    if (cfg.format == "json") {
        json j;
        j["provenance"] = provenance_json(resolved);
        j["environment"] = sweep.environment;
        j["altitude_m"] = sweep.altitude_m;
        j["frequency_hz"] = sweep.frequency_hz;
        j["realizations"] = sweep.realizations;
        auto &arr = j["rows"] = json::array();
        for (const auto &row : sweep.rows)
            arr.push_back({{"distance_m", row.distance_m},
                           {"pl_db", std::isnan(row.path_loss_db) ? json(nullptr) : json(row.path_loss_db)},
                           {"n_cond1", row.n_cond1},
                           {"n_cond2", row.n_cond2},
                           {"n_cond3", row.n_cond3},
                           {"n_blocked", row.n_blocked}});
        write_text_output(cfg.out, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        aachan::sweep_to_csv(os, sweep, resolved.dump());
        write_text_output(cfg.out, os.str());
    }
    return 0;
}

int cmd_grprob(const RunConfig &cfg) {
    cfg.validate();
    const auto env = cfg.environment();
    std::vector<aachan::GrEstimate> curve;
    curve.reserve(cfg.thetas_deg.size());
    for (std::size_t i = 0; i < cfg.thetas_deg.size(); ++i)
        curve.push_back(aachan::estimate_gr_probability(env, cfg.thetas_deg[i], cfg.realizations,
                                                        cfg.links_per_city,
                                                        aachan::substream_seed(cfg.seed, i),
                                                        cfg.side_d_km, cfg.threads));
    const json resolved = cfg.resolved("grprob");
    if (cfg.format == "json") {
        json j;
        j["provenance"] = provenance_json(resolved);
        auto &arr = j["rows"] = json::array();
        for (const auto &e : curve)
            arr.push_back({{"theta_deg", e.theta_deg},
                           {"p_gr", e.p_gr},
                           {"stderr", e.std_err},
                           {"n", e.n_links}});
        write_text_output(cfg.out, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        aachan::gr_curve_to_csv(os, curve, resolved.dump());
        write_text_output(cfg.out, os.str());
    }
    return 0;
}

int cmd_generate_city(const RunConfig &cfg) {
    cfg.validate();
    const auto env = cfg.environment();
    const double side = cfg.side_d_km > 0.0 ? cfg.side_d_km : 0.472;
    const auto city = aachan::generate_city(env, side, cfg.seed);
    json j = aachan::to_json(city);
    j["provenance"] = provenance_json(cfg.resolved("generate-city"));
    write_text_output(cfg.out, j.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------------ fit --

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double> &column(const std::string &name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return columns[i];
        config_error("fit: input has no column '" + name + "'");
    }
};

CsvTable read_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        config_error("fit: cannot open " + path);
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (!have_header) {
            t.header = cells;
            t.columns.assign(cells.size(), {});
            have_header = true;
            continue;
        }
        for (std::size_t i = 0; i < t.columns.size() && i < cells.size(); ++i) {
            try {
                t.columns[i].push_back(std::stod(cells[i]));
            } catch (const std::exception &) {
                t.columns[i].push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
    }
    if (!have_header)
        config_error("fit: input " + path + " has no header row");
    return t;
}

std::vector<double> drop_nan(const std::vector<double> &v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (double x : v)
        if (!std::isnan(x))
            out.push_back(x);
    return out;
}

int cmd_fit(const RunConfig &cfg, const std::string &input, const std::string &what,
            const std::string &column, const std::string &form_name) {
    const CsvTable t = read_csv(input);
    json report;
    report["what"] = what;
    report["input"] = input;

    if (what == "weibull" || what == "normal") {
        const auto data = drop_nan(t.column(column));
        report["column"] = column;
        report["n"] = data.size();
        if (what == "weibull") {
            const auto w = aachan::fit_weibull(data);
            report["params"] = {{"eta", w.eta}, {"nu", w.nu}};
            report["ks"] = aachan::ks_statistic(data, [&](double x) { return aachan::weibull_cdf(x, w); });
        } else {
            const auto p = aachan::fit_normal(data);
            report["params"] = {{"mu", p.mu}, {"sigma", p.sigma}};
            report["ks"] = aachan::ks_statistic(data, [&](double x) { return aachan::normal_cdf(x, p); });
        }
    } else if (what == "shadow_model") {
        aachan::ShadowForm form;
        if (form_name == "exp_decay")
            form = aachan::ShadowForm::exp_decay;
        else if (form_name == "power_law")
            form = aachan::ShadowForm::power_law;
        else
            config_error("fit: --form must be exp_decay or power_law");
        const auto h = drop_nan(t.column("h_m"));
        const auto s = drop_nan(t.column("sigma_db"));
        const auto fit = aachan::fit_shadow_model(h, s, form);
        report["form"] = form_name;
        report["n"] = h.size();
        report["params"] = {{"p", fit.p}, {"q", fit.q}, {"r", fit.r}};
        report["rmse_db"] = fit.rmse;
    } else {
        config_error("fit: --what must be weibull, normal or shadow_model");
    }

    report["provenance"] = provenance_json(cfg.resolved("fit"));
    write_text_output(cfg.out, report.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------ reproduce --

// PTR model curve over a distance grid for one altitude.
std::vector<double> ptr_curve(const aachan::EnvironmentParams &env, double h, double f_hz,
                              const std::vector<double> &grid, const RunConfig &cfg) {
    aachan::PtrOptions opt;
    opt.paper_literal_fresnel = cfg.paper_literal_fresnel;
    opt.exact_amplitude = cfg.exact_amplitude;
    const double hb = aachan::effective_building_height(env, h);
    const auto pol = aachan::polarization_from_string(cfg.polarization);
    std::vector<double> pl;
    pl.reserve(grid.size());
    for (double d : grid) {
        aachan::Link link;
        link.tx = {0.0, 0.0, h};
        link.rx = {d, 0.0, h};
        link.frequency_hz = f_hz;
        link.polarization = pol;
        link.eps_building = cfg.eps_building;
        link.eps_ground = cfg.eps_ground;
        pl.push_back(aachan::ptr_path_loss(link, env, hb, cfg.p_g, opt).path_loss_db);
    }
    return pl;
}

aachan::SweepResult raycheck_curve(const aachan::EnvironmentParams &env, double h, double f_hz,
                                   const std::vector<double> &grid, const RunConfig &cfg,
                                   std::uint64_t seed) {
    aachan::SweepOptions opt;
    opt.polarization = aachan::polarization_from_string(cfg.polarization);
    opt.eps_building = cfg.eps_building;
    opt.eps_ground = cfg.eps_ground;
    opt.linear_power_averaging = cfg.linear_power_averaging;
    opt.threads = cfg.threads;
    return aachan::distance_sweep(env, h, f_hz, grid.front(), grid.back(),
                                  grid.size() > 1 ? grid[1] - grid[0] : 1.0, cfg.realizations,
                                  seed, opt);
}

// sigma(h) extraction from PTR model sweeps on a fixed distance grid.
std::vector<std::pair<double, double>> model_sigma_curve(const aachan::EnvironmentParams &env,
                                                         const std::vector<double> &alts,
                                                         const std::vector<double> &grid,
                                                         const RunConfig &cfg) {
    std::vector<std::pair<double, double>> out;
    for (double h : alts) {
        const auto pl = ptr_curve(env, h, cfg.frequency_hz, grid, cfg);
        const auto resid = aachan::extract_shadowing(grid, pl);
        out.emplace_back(h, aachan::fit_normal(resid).sigma);
    }
    return out;
}

// Altitudes where most trajectories are blocked by taller buildings cannot
// yield a meaningful spread and are skipped.
std::vector<std::pair<double, double>> raycheck_sigma_curve(const aachan::EnvironmentParams &env,
                                                            const std::vector<double> &alts,
                                                            const std::vector<double> &grid,
                                                            const RunConfig &cfg) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < alts.size(); ++i) {
        const auto sweep = raycheck_curve(env, alts[i], cfg.frequency_hz, grid, cfg,
                                          aachan::substream_seed(cfg.seed, 1000 + i));
        std::vector<double> d, pl;
        for (const auto &row : sweep.rows) {
            if (!std::isnan(row.path_loss_db)) {
                d.push_back(row.distance_m);
                pl.push_back(row.path_loss_db);
            }
        }
        if (d.size() < 30)
            continue;
        const auto resid = aachan::extract_shadowing(d, pl);
        out.emplace_back(alts[i], aachan::fit_normal(resid).sigma);
    }
    return out;
}

json shadow_fit_json(const aachan::ShadowModelParams &fit) {
    return {{"p", fit.p},
            {"q", fit.q},
            {"r", fit.r},
            {"rmse_db", fit.rmse},
            {"form", fit.form == aachan::ShadowForm::exp_decay ? "exp_decay" : "power_law"}};
}

void write_sigma_table(const fs::path &path, const std::vector<std::pair<double, double>> &pts,
                       const aachan::ShadowModelParams &fit, const json &resolved) {
    Table t;
    t.columns = {"h_m", "sigma_db", "fit_sigma_db"};
    for (const auto &[h, s] : pts)
        t.rows.push_back({h, s, fit.evaluate(h)});
    write_file(path, t.to_csv(resolved));
}

std::vector<double> shadow_altitudes() {
    std::vector<double> alts;
    for (double h = 50.0; h <= 300.0 + 1e-9; h += 25.0)
        alts.push_back(h);
    return alts;
}

int cmd_reproduce(const RunConfig &cfg_in, const std::string &figure) {
    RunConfig cfg = cfg_in;
    // experiment defaults: 4 GHz, urban grid city, permittivities 4.44/3
    cfg.validate();
    const json resolved = cfg.resolved("reproduce:" + figure);
    const fs::path dir = cfg.out == "-" ? fs::path("reproduce_" + figure) : fs::path(cfg.out);
    fs::create_directories(dir);

    const auto grid = distance_grid(cfg.dist);

    if (figure == "fig5a" || figure == "fig5b") {
        const double h = figure == "fig5a" ? 50.0 : 100.0;
        const auto env = cfg.environment();
        const auto ptr = ptr_curve(env, h, cfg.frequency_hz, grid, cfg);
        const auto ray = raycheck_curve(env, h, cfg.frequency_hz, grid, cfg, cfg.seed);
        Table t;
        t.columns = {"distance_m", "pl_fspl_db", "pl_ptr_db", "pl_raycheck_db"};
        for (std::size_t i = 0; i < grid.size(); ++i)
            t.rows.push_back({grid[i], aachan::fspl_db(grid[i] / 1000.0, cfg.frequency_hz / 1e6),
                              ptr[i], ray.rows[i].path_loss_db});
        write_file(dir / (figure + ".csv"), t.to_csv(resolved));
    } else if (figure == "fig6") {
        const double h = 100.0;
        const auto env = cfg.environment();
        const auto ptr = ptr_curve(env, h, cfg.frequency_hz, grid, cfg);
        const auto ray_sweep = raycheck_curve(env, h, cfg.frequency_hz, grid, cfg, cfg.seed);
        std::vector<double> ray_d, ray;
        for (const auto &row : ray_sweep.rows) {
            if (!std::isnan(row.path_loss_db)) {
                ray_d.push_back(row.distance_m);
                ray.push_back(row.path_loss_db);
            }
        }
        json fits;
        const auto emit = [&](const std::string &stem, const std::vector<double> &data,
                              bool weibull) {
            Table t;
            t.columns = {"x_db", "ecdf", "fit_cdf"};
            const aachan::Ecdf ecdf(data);
            if (weibull) {
                const auto w = aachan::fit_weibull(data);
                fits[stem] = {{"eta", w.eta},
                              {"nu", w.nu},
                              {"ks", aachan::ks_statistic(
                                         data, [&](double x) { return aachan::weibull_cdf(x, w); })}};
                for (double x : ecdf.sorted())
                    t.rows.push_back({x, ecdf(x), aachan::weibull_cdf(x, w)});
            } else {
                const auto p = aachan::fit_normal(data);
                fits[stem] = {{"mu", p.mu},
                              {"sigma", p.sigma},
                              {"ks", aachan::ks_statistic(
                                         data, [&](double x) { return aachan::normal_cdf(x, p); })}};
                for (double x : ecdf.sorted())
                    t.rows.push_back({x, ecdf(x), aachan::normal_cdf(x, p)});
            }
            write_file(dir / (stem + ".csv"), t.to_csv(resolved));
        };
        emit("fig6_pathloss_model", ptr, true);
        emit("fig6_pathloss_raycheck", ray, true);
        emit("fig6_shadow_model", aachan::extract_shadowing(grid, ptr), false);
        emit("fig6_shadow_raycheck", aachan::extract_shadowing(ray_d, ray), false);
        fits["provenance"] = provenance_json(resolved);
        write_file(dir / "fig6_fits.json", fits.dump(2) + "\n");
    } else if (figure == "fig7") {
        const auto alts = shadow_altitudes();
        json fits;
        for (const auto &env : aachan::all_presets()) {
            const auto model_pts = model_sigma_curve(env, alts, grid, cfg);
            std::vector<double> hs, ss;
            for (const auto &[h, s] : model_pts) {
                hs.push_back(h);
                ss.push_back(s);
            }
            const auto fit = aachan::fit_shadow_model(hs, ss, aachan::ShadowForm::exp_decay);
            write_sigma_table(dir / ("fig7_" + env.name + ".csv"), model_pts, fit, resolved);
            fits[env.name]["model"] = shadow_fit_json(fit);

            const auto ray_pts = raycheck_sigma_curve(env, alts, grid, cfg);
            if (ray_pts.size() >= 4) {
                std::vector<double> rh, rs;
                for (const auto &[h, s] : ray_pts) {
                    rh.push_back(h);
                    rs.push_back(s);
                }
                const auto rfit = aachan::fit_shadow_model(rh, rs, aachan::ShadowForm::exp_decay);
                write_sigma_table(dir / ("fig7_" + env.name + "_raycheck.csv"), ray_pts, rfit,
                                  resolved);
                fits[env.name]["raycheck"] = shadow_fit_json(rfit);
            } else {
                fits[env.name]["raycheck"] = {{"skipped", "too few clear links at these altitudes"}};
            }
        }
        fits["provenance"] = provenance_json(resolved);
        write_file(dir / "fig7_fits.json", fits.dump(2) + "\n");
    } else if (figure == "fig8") {
        const auto env = aachan::suburban_env();
        const auto alts = shadow_altitudes();
        const auto pts = model_sigma_curve(env, alts, grid, cfg);
        std::vector<double> hs, ss;
        for (const auto &[h, s] : pts) {
            hs.push_back(h);
            ss.push_back(s);
        }
        const auto fit_exp = aachan::fit_shadow_model(hs, ss, aachan::ShadowForm::exp_decay);
        const auto fit_pow = aachan::fit_shadow_model(hs, ss, aachan::ShadowForm::power_law);
        Table t;
        t.columns = {"h_m", "sigma_db", "fit_exp_db", "fit_pow_db"};
        for (const auto &[h, s] : pts)
            t.rows.push_back({h, s, fit_exp.evaluate(h), fit_pow.evaluate(h)});
        write_file(dir / "fig8.csv", t.to_csv(resolved));
        json fits;
        fits["exp_decay"] = shadow_fit_json(fit_exp);
        fits["power_law"] = shadow_fit_json(fit_pow);
        fits["provenance"] = provenance_json(resolved);
        write_file(dir / "fig8_fits.json", fits.dump(2) + "\n");
    } else if (figure == "table3") {
        const auto alts = shadow_altitudes();
        std::ostringstream os;
        aachan::write_provenance_comment(os, resolved.dump());
        os << "environment,p2_fit,q2_fit,r2_fit,rmse_db,p2_ref,q2_ref,r2_ref\n";
        for (const auto &env : aachan::all_presets()) {
            const auto pts = model_sigma_curve(env, alts, grid, cfg);
            std::vector<double> hs, ss;
            for (const auto &[h, s] : pts) {
                hs.push_back(h);
                ss.push_back(s);
            }
            const auto fit = aachan::fit_shadow_model(hs, ss, aachan::ShadowForm::exp_decay);
            const auto ref = aachan::shadow_reference(env.name);
            os << env.name << ',' << aachan::format_f6(fit.p) << ',' << aachan::format_f6(fit.q)
               << ',' << aachan::format_f6(fit.r) << ',' << aachan::format_f6(fit.rmse) << ','
               << aachan::format_f6(ref.p2) << ',' << aachan::format_f6(ref.q2) << ','
               << aachan::format_f6(ref.r2) << '\n';
        }
        write_file(dir / "table3.csv", os.str());
    } else {
        config_error("reproduce: unknown figure id '" + figure +
                     "' (expected fig5a|fig5b|fig6|fig7|fig8|table3)");
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"air-to-air propagation toolkit for built-up areas"};
    app.require_subcommand(1);

    std::string config_path, dist_spec, env_name, polarization, out_path, format;
    std::uint64_t seed = 0, realizations = 0, links_per_city = 0;
    double freq_hz = 0.0, side_d_km = 0.0;
    std::vector<double> alts, thetas;
    unsigned threads = 0;

    const auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override file values");
        cmd->add_option("--seed", seed, "RNG master seed");
        cmd->add_option("--env", env_name, "environment preset")
            ->check(CLI::IsMember({"suburban", "urban", "dense-urban", "high-rise"}));
        cmd->add_option("--freq-hz", freq_hz, "carrier frequency in Hz");
        cmd->add_option("--alt-m", alts, "platform altitude(s) in meters");
        cmd->add_option("--dist-m", dist_spec, "distance grid MIN:MAX:STEP in meters");
        cmd->add_option("--realizations", realizations, "number of city realizations");
        cmd->add_option("--links-per-city", links_per_city, "links sampled per city realization");
        cmd->add_option("--theta-deg", thetas, "elevation angles in degrees");
        cmd->add_option("--side-d-km", side_d_km, "map side in km (0 = auto)");
        cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
        cmd->add_option("--out", out_path, "output path ('-' = stdout)");
        cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    };

    auto *predict = app.add_subcommand("predict", "closed-form model vs free-space loss over a distance grid");
    auto *simulate = app.add_subcommand("simulate", "geometric two-ray sweep over generated cities");
    auto *grprob = app.add_subcommand("grprob", "ground-reflection probability curve (Monte Carlo)");
    auto *fit = app.add_subcommand("fit", "fit a distribution or the shadowing law to a CSV file");
    auto *reproduce = app.add_subcommand("reproduce", "run a canned experiment recipe");
    auto *gencity = app.add_subcommand("generate-city", "emit one generated city as JSON");
    for (auto *cmd : {predict, simulate, grprob, fit, reproduce, gencity})
        add_common(cmd);

    std::string fit_input, fit_what, fit_column = "pl_db", fit_form = "exp_decay";
    fit->add_option("--input", fit_input, "input CSV")->required();
    fit->add_option("--what", fit_what, "weibull|normal|shadow_model")->required();
    fit->add_option("--column", fit_column, "data column for weibull/normal");
    fit->add_option("--form", fit_form, "shadow model form: exp_decay|power_law");

    std::string figure;
    reproduce->add_option("figure", figure, "fig5a|fig5b|fig6|fig7|fig8|table3")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        CLI::App *active = app.get_subcommands().front();
        if (active->count("--config"))
            load_config_file(cfg, config_path);
        if (active->count("--seed")) cfg.seed = seed;
        if (active->count("--env")) {
            cfg.env_name = env_name;
            cfg.env_explicit.reset();
        }
        if (active->count("--freq-hz")) cfg.frequency_hz = freq_hz;
        if (active->count("--alt-m")) cfg.altitudes_m = alts;
        if (active->count("--dist-m")) cfg.dist = parse_dist_spec(dist_spec);
        if (active->count("--realizations")) cfg.realizations = realizations;
        if (active->count("--links-per-city")) cfg.links_per_city = links_per_city;
        if (active->count("--theta-deg")) cfg.thetas_deg = thetas;
        if (active->count("--side-d-km")) cfg.side_d_km = side_d_km;
        if (active->count("--threads")) cfg.threads = threads;
        if (active->count("--out")) cfg.out = out_path;
        if (active->count("--format")) cfg.format = format;

        if (active == predict) return cmd_predict(cfg);
        if (active == simulate) return cmd_simulate(cfg);
        if (active == grprob) return cmd_grprob(cfg);
        if (active == fit) return cmd_fit(cfg, fit_input, fit_what, fit_column, fit_form);
        if (active == reproduce) return cmd_reproduce(cfg, figure);
        if (active == gencity) return cmd_generate_city(cfg);
        return 1;
    } catch (const aachan::FitError &e) {
        json err;
        err["error"] = {{"type", "fit"},
                        {"message", e.what()},
                        {"best_params", e.best_params()},
                        {"rmse", e.best_rmse()}};
        std::cout << err.dump(2) << "\n";
        return 1;
    } catch (const std::exception &e) {
        json err;
        err["error"] = {{"type", "invalid_argument"}, {"message", e.what()}};
        std::cout << err.dump(2) << "\n";
        return 1;
    }
}
