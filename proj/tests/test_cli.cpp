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
// End-to-end tests that drive the built binary. The test runner exports
// AACHAN_CLI with the binary path.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code;
    std::string output; // stdout
};

const char *cli_path() {
    const char *p = std::getenv("AACHAN_CLI");
    REQUIRE(p != nullptr);
    return p;
}

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "aachan_cli_tests";
    fs::create_directories(dir);
    return dir;
}

RunResult run_cli(const std::string &args) {
    const fs::path out = temp_dir() / "stdout.txt";
    const std::string cmd = std::string(cli_path()) + " " + args + " > " + out.string() + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// tiny CSV reader for the tests: skips # comments, returns header + rows
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string &text) {
    Csv out;
    std::stringstream ss(text);
    std::string line;
    bool have_header = false;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!have_header) {
            out.header = cells;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto &c : cells)
            row.push_back(std::strtod(c.c_str(), nullptr));
        out.rows.push_back(row);
    }
    return out;
}

} // namespace

TEST_CASE("predict command") {
    const auto dir = temp_dir();
    const auto out = dir / "predict.csv";

    SECTION("model column oscillates about the free-space column") {
        const auto res = run_cli("predict --env urban --alt-m 100 --freq-hz 4e9 --dist-m 5:300:1 --out " +
                                 out.string());
        REQUIRE(res.exit_code == 0);
        const auto csv = parse_csv(slurp(out));
        REQUIRE(csv.header == std::vector<std::string>{"distance_m", "pl_ptr_db", "pl_fspl_db"});
        REQUIRE(csv.rows.size() == 296);
        int sign_changes = 0;
        double prev = 0.0;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const double dev = csv.rows[i][1] - csv.rows[i][2];
            if (i > 0 && ((prev < 0 && dev > 0) || (prev > 0 && dev < 0)))
                ++sign_changes;
            prev = dev;
        }
        CHECK(sign_changes >= 10);
    }

    SECTION("reruns are byte-identical") {
        const auto out2 = dir / "predict2.csv";
        REQUIRE(run_cli("predict --env urban --alt-m 100 --seed 9 --out " + out.string()).exit_code == 0);
        REQUIRE(run_cli("predict --env urban --alt-m 100 --seed 9 --out " + out2.string()).exit_code == 0);
        CHECK(slurp(out) == slurp(out2));
    }

    SECTION("degenerate environment with forced p_g reduces to free space") {
        const auto cfgp = dir / "open.json";
        {
            std::ofstream f(cfgp);
            f << R"({"environment": {"name": "open", "alpha": 0.0, "beta": 500, "gamma": 15,
                     "gr_logistic": {"a": 120.0, "b": 0, "c": 0, "d": 24.3, "e": 1.229}},
                     "p_g": 0.0, "altitudes_m": [100.0]})";
        }
        const auto res = run_cli("predict --config " + cfgp.string() + " --out " + out.string());
        REQUIRE(res.exit_code == 0);
        const auto csv = parse_csv(slurp(out));
        for (const auto &row : csv.rows)
            CHECK(std::abs(row[1] - row[2]) < 0.01);
    }
}

TEST_CASE("simulate command") {
    const auto dir = temp_dir();
    const auto out = dir / "sim.csv";

    SECTION("emits tallies and is reproducible") {
        const std::string args =
            "simulate --env urban --alt-m 100 --dist-m 10:200:10 --realizations 4 --seed 5 --out ";
        REQUIRE(run_cli(args + out.string()).exit_code == 0);
        const auto csv = parse_csv(slurp(out));
        REQUIRE(csv.header ==
                std::vector<std::string>{"distance_m", "pl_db", "n_cond1", "n_cond2", "n_cond3",
                                         "n_blocked"});
        REQUIRE(csv.rows.size() == 20);
        for (const auto &row : csv.rows)
            CHECK(row[2] + row[3] + row[4] + row[5] == 4.0);

        const auto out2 = dir / "sim2.csv";
        REQUIRE(run_cli(args + out2.string()).exit_code == 0);
        CHECK(slurp(out) == slurp(out2));
    }

    SECTION("thread count does not change the bytes") {
        const auto out1 = dir / "sim_t1.csv";
        const auto out4 = dir / "sim_t4.csv";
        const std::string base =
            "simulate --env urban --alt-m 100 --dist-m 10:200:10 --realizations 6 --seed 5 ";
        REQUIRE(run_cli(base + "--threads 1 --out " + out1.string()).exit_code == 0);
        REQUIRE(run_cli(base + "--threads 4 --out " + out4.string()).exit_code == 0);
        // provenance embeds the thread count; compare rows only
        const auto a = parse_csv(slurp(out1));
        const auto b = parse_csv(slurp(out4));
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i)
            CHECK(a.rows[i] == b.rows[i]);
    }
}

TEST_CASE("grprob command") {
    const auto dir = temp_dir();
    const auto out = dir / "gr.csv";
    const auto res = run_cli(
        "grprob --env urban --theta-deg 20 --theta-deg 50 --theta-deg 80 --realizations 3 "
        "--links-per-city 200 --seed 2 --out " + out.string());
    REQUIRE(res.exit_code == 0);
    const auto csv = parse_csv(slurp(out));
    REQUIRE(csv.header == std::vector<std::string>{"theta_deg", "p_gr", "stderr", "n"});
    REQUIRE(csv.rows.size() == 3);
    CHECK(csv.rows[0][0] == 20.0);
    CHECK(csv.rows[2][0] == 80.0);
    for (const auto &row : csv.rows) {
        CHECK(row[1] >= 0.0);
        CHECK(row[1] <= 1.0);
        CHECK(row[3] == 600.0);
    }
}

TEST_CASE("fit command") {
    const auto dir = temp_dir();

    SECTION("weibull on a sweep column") {
        const auto sweep = dir / "fit_input.csv";
        REQUIRE(run_cli("simulate --env urban --alt-m 100 --dist-m 5:300:1 --realizations 1 --seed 3 --out " +
                        sweep.string()).exit_code == 0);
        const auto out = dir / "fit.json";
        const auto res = run_cli("fit --input " + sweep.string() + " --what weibull --out " + out.string());
        REQUIRE(res.exit_code == 0);
        const auto j = json::parse(slurp(out));
        CHECK(j["what"] == "weibull");
        CHECK(j["params"]["eta"].get<double>() > 50.0);
        CHECK(j["params"]["nu"].get<double>() > 5.0);
        CHECK(j["ks"].get<double>() < 0.3);
    }

    SECTION("shadow model on a sigma table") {
        const auto table = dir / "sigma.csv";
        {
            std::ofstream f(table);
            f << "h_m,sigma_db\n";
            for (double h = 50; h <= 300; h += 25)
                f << h << ',' << 2.013 * std::exp(-0.0167 * h) + 1.608 << "\n";
        }
        const auto out = dir / "shadow.json";
        const auto res = run_cli("fit --input " + table.string() +
                                 " --what shadow_model --form exp_decay --out " + out.string());
        REQUIRE(res.exit_code == 0);
        const auto j = json::parse(slurp(out));
        CHECK(std::abs(j["params"]["p"].get<double>() - 2.013) < 0.01);
        CHECK(std::abs(j["params"]["q"].get<double>() - 0.0167) < 1e-4);
        CHECK(std::abs(j["params"]["r"].get<double>() - 1.608) < 0.01);
    }

    SECTION("unknown estimator rejected") {
        const auto res = run_cli("fit --input /nonexistent.csv --what cauchy");
        CHECK(res.exit_code != 0);
    }
}

TEST_CASE("generate-city command") {
    const auto dir = temp_dir();
    const auto out = dir / "city.json";
    const auto res =
        run_cli("generate-city --env urban --side-d-km 0.472 --seed 11 --out " + out.string());
    REQUIRE(res.exit_code == 0);
    const auto j = json::parse(slurp(out));
    CHECK(j["seed"] == 11);
    CHECK(j["side_d_km"] == 0.472);
    CHECK(j["buildings"].size() == 121);
    CHECK(j.contains("w_m"));
    CHECK(j.contains("s_m"));
    CHECK(j.contains("provenance"));

    const auto out2 = dir / "city2.json";
    REQUIRE(run_cli("generate-city --env urban --side-d-km 0.472 --seed 11 --out " + out2.string())
                .exit_code == 0);
    CHECK(slurp(out) == slurp(out2));
}

TEST_CASE("configuration handling") {
    const auto dir = temp_dir();

    SECTION("unknown config fields are rejected with the field name") {
        const auto cfgp = dir / "bad.json";
        {
            std::ofstream f(cfgp);
            f << R"({"frequnecy_hz": 4e9})";
        }
        const auto res = run_cli("predict --config " + cfgp.string());
        CHECK(res.exit_code != 0);
        const auto j = json::parse(res.output);
        CHECK(j.contains("error"));
        CHECK(j["error"]["message"].get<std::string>().find("frequnecy_hz") != std::string::npos);
    }

    SECTION("flags override file values") {
        const auto cfgp = dir / "freq.json";
        {
            std::ofstream f(cfgp);
            f << R"({"frequency_hz": 2e9, "altitudes_m": [100.0]})";
        }
        const auto out = dir / "override.csv";
        REQUIRE(run_cli("predict --config " + cfgp.string() + " --freq-hz 4e9 --out " + out.string())
                    .exit_code == 0);
        const auto text = slurp(out);
        CHECK(text.find("\"frequency_hz\":4000000000.0") != std::string::npos);
    }

    SECTION("invalid numeric ranges rejected before computing") {
        const auto res = run_cli("predict --env urban --alt-m -5 --out -");
        CHECK(res.exit_code != 0);
        const auto j = json::parse(res.output);
        CHECK(j.contains("error"));
    }
}

TEST_CASE("reproduce command") {
    const auto dir = temp_dir() / "repro";

    SECTION("unknown figure id is a usage error") {
        const auto res = run_cli("reproduce fig99 --out " + dir.string());
        CHECK(res.exit_code != 0);
        const auto j = json::parse(res.output);
        CHECK(j["error"]["message"].get<std::string>().find("fig99") != std::string::npos);
    }

    SECTION("fig5b bundle") {
        const auto res = run_cli("reproduce fig5b --seed 3 --out " + dir.string());
        REQUIRE(res.exit_code == 0);
        const auto csv = parse_csv(slurp(dir / "fig5b.csv"));
        REQUIRE(csv.header == std::vector<std::string>{"distance_m", "pl_fspl_db", "pl_ptr_db",
                                                       "pl_raycheck_db"});
        REQUIRE(csv.rows.size() == 296);
        CHECK(csv.rows.front()[0] == 5.0);
        CHECK(csv.rows.back()[0] == 300.0);
    }
}
