// Copyright 2026 The mpqw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpqw/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

using namespace mpqw;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(static_cast<bool>(in)) << "missing " << path;
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(ValidateConfig, AcceptsTheFig2Preset) {
    const auto runs = preset_runs("fig2");
    ASSERT_EQ(runs.size(), 1u);
    const Scenario scenario = validate_config(runs[0].config);
    EXPECT_EQ(scenario.lattice.half_modes, 25);
    EXPECT_EQ(scenario.lattice.steps, 6);
    EXPECT_EQ(scenario.occupations.total(), 8);
    EXPECT_EQ(scenario.occupations.at_mode(22), 1);
    EXPECT_EQ(scenario.occupations.at_mode(29), 1);
    EXPECT_EQ(scenario.occupations.at_mode(21), 0);
    ASSERT_EQ(scenario.species.size(), 2u);
    EXPECT_EQ(scenario.species[0], Species::Boson);
    EXPECT_EQ(scenario.species[1], Species::Distinguishable);
    ASSERT_EQ(scenario.observables.size(), 1u);
    EXPECT_EQ(scenario.observables[0].kind, ObservableKind::SingleMode);
    EXPECT_EQ(scenario.observables[0].mode_i, 25);
}

TEST(ValidateConfig, ReportsPauliViolationWithLineNumber) {
    const std::string config =
        "lattice = 2\n"
        "steps = 1\n"
        "occupations = 0,2,1,0\n"
        "species = fermion\n"
        "observable = mean-profile\n";
    try {
        validate_config(config);
        FAIL() << "expected a config error";
    } catch (const ConfigError& e) {
        ASSERT_EQ(e.messages().size(), 1u);
        EXPECT_NE(e.messages()[0].find("line 3"), std::string::npos);
        EXPECT_NE(e.messages()[0].find("Pauli violation at mode 2"), std::string::npos);
    }
}

TEST(ValidateConfig, RejectsOverconditionedRequest) {
    const std::string config =
        "lattice = 2\n"
        "steps = 1\n"
        "occupations = 1,1,0,0\n"
        "species = boson\n"
        "observable = conditional 3 1 2\n";
    EXPECT_THROW(validate_config(config), ConfigError);
}

TEST(ValidateConfig, CollectsEveryViolation) {
    const std::string config =
        "lattice = 0\n"
        "steps = -4\n"
        "species = muon\n"
        "observable = conditional 1 2\n"
        "flavour = strange\n";
    try {
        validate_config(config);
        FAIL() << "expected a config error";
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        EXPECT_GE(e.messages().size(), 5u);
        EXPECT_NE(all.find("`lattice`"), std::string::npos);
        EXPECT_NE(all.find("`steps`"), std::string::npos);
        EXPECT_NE(all.find("muon"), std::string::npos);
        EXPECT_NE(all.find("conditional"), std::string::npos);
        EXPECT_NE(all.find("flavour"), std::string::npos);
        EXPECT_NE(all.find("occupations"), std::string::npos);
    }
}

TEST(ValidateConfig, RejectsMixedObservableKinds) {
    const std::string config =
        "lattice = 2\n"
        "steps = 1\n"
        "occupations = 1,1,0,0\n"
        "species = boson\n"
        "observable = mean-profile\n"
        "observable = single-mode-statistics 1\n";
    EXPECT_THROW(validate_config(config), ConfigError);
}

TEST(ValidateConfig, OracleEngineExcludesDistinguishable) {
    const std::string config =
        "lattice = 2\n"
        "steps = 1\n"
        "occupations = 1,1,0,0\n"
        "species = distinguishable\n"
        "observable = mean-profile\n"
        "engine = oracle\n";
    EXPECT_THROW(validate_config(config), ConfigError);
}

TEST(MergeOverrides, CommandLineReplacesListsAndScalars) {
    RawConfig base = parse_config_text(preset_runs("fig2")[0].config);
    RawConfig overrides;
    overrides.entries.push_back({"species", "fermion", 0});
    overrides.entries.push_back({"steps", "3", 0});
    merge_overrides(base, overrides);
    const Scenario scenario = validate_raw(base);
    EXPECT_EQ(scenario.lattice.steps, 3);
    ASSERT_EQ(scenario.species.size(), 1u);
    EXPECT_EQ(scenario.species[0], Species::Fermion);
}

TEST(RunScenario, WritesDeterministicSelfDescribingCsv) {
    const std::string out = temp_path("hom.csv");
    const std::string config =
        "lattice = 1\n"
        "steps = 1\n"
        "occupations = 1,1\n"
        "species = boson, fermion, distinguishable\n"
        "observable = two-mode-statistics 1 2\n"
        "out = " + out + "\n";
    const Scenario scenario = validate_config(config);
    ASSERT_EQ(run_scenario(scenario), 0);
    const std::string first = slurp(out);
    ASSERT_EQ(run_scenario(scenario), 0);
    const std::string second = slurp(out);
    EXPECT_EQ(first, second);

    EXPECT_NE(first.find("# occupations = 1,1"), std::string::npos);
    EXPECT_NE(first.find("# species = boson, fermion, distinguishable"), std::string::npos);
    EXPECT_NE(first.find("mode_i,mode_j,k_i,k_j,P_boson,P_fermion,P_distinguishable"), std::string::npos);

    // Coincidence row k_i = k_j = 1: 0 | 1 | 1/2.
    std::istringstream lines(first);
    std::string line;
    bool coincidence_row_found = false;
    while (std::getline(lines, line)) {
        if (line.rfind("1,2,1,1,", 0) != 0) {
            continue;
        }
        coincidence_row_found = true;
        std::istringstream fields(line);
        std::string field;
        std::vector<double> row;
        while (std::getline(fields, field, ',')) {
            row.push_back(std::stod(field));
        }
        ASSERT_GE(row.size(), 7u);
        EXPECT_NEAR(row[4], 0.0, 1e-12);
        EXPECT_NEAR(row[5], 1.0, 1e-12);
        EXPECT_NEAR(row[6], 0.5, 1e-12);
    }
    EXPECT_TRUE(coincidence_row_found);
    std::remove(out.c_str());
}

TEST(RunScenario, JsonMirrorCarriesTheSameNumbers) {
    const std::string csv_out = temp_path("mirror.csv");
    const std::string json_out = temp_path("mirror.json");
    const std::string base =
        "lattice = 2\n"
        "steps = 2\n"
        "occupations = 0,1,1,0\n"
        "species = boson\n"
        "observable = single-mode-statistics 2\n";
    const Scenario csv_scenario = validate_config(base + "format = csv\nout = " + csv_out + "\n");
    const Scenario json_scenario = validate_config(base + "format = json\nout = " + json_out + "\n");
    ASSERT_EQ(run_scenario(csv_scenario), 0);
    ASSERT_EQ(run_scenario(json_scenario), 0);

    const auto doc = nlohmann::json::parse(slurp(json_out));
    ASSERT_TRUE(doc.contains("columns"));
    ASSERT_TRUE(doc.contains("rows"));
    const auto columns = doc["columns"].get<std::vector<std::string>>();
    const auto rows = doc["rows"];

    // Parse the CSV data lines back into numbers and compare.
    std::istringstream csv(slurp(csv_out));
    std::string line;
    std::vector<std::vector<double>> csv_rows;
    bool header_seen = false;
    while (std::getline(csv, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            row.push_back(std::stod(field));
        }
        csv_rows.push_back(row);
    }
    ASSERT_EQ(csv_rows.size(), rows.size());
    for (std::size_t r = 0; r < csv_rows.size(); ++r) {
        ASSERT_EQ(csv_rows[r].size(), columns.size());
        for (std::size_t c = 0; c < csv_rows[r].size(); ++c) {
            EXPECT_DOUBLE_EQ(csv_rows[r][c], rows[r][c].get<double>());
        }
    }
    std::remove(csv_out.c_str());
    std::remove(json_out.c_str());
}

TEST(RunScenario, OracleEngineMatchesMainEngine) {
    const std::string main_out = temp_path("engine_main.csv");
    const std::string oracle_out = temp_path("engine_oracle.csv");
    const std::string base =
        "lattice = 3\n"
        "steps = 4\n"
        "occupations = 0,1,1,1,0,0\n"
        "species = boson, fermion\n"
        "observable = two-mode-statistics 2 5\n";
    const Scenario with_main = validate_config(base + "engine = main\nout = " + main_out + "\n");
    const Scenario with_oracle = validate_config(base + "engine = oracle\nout = " + oracle_out + "\n");
    ASSERT_EQ(run_scenario(with_main), 0);
    ASSERT_EQ(run_scenario(with_oracle), 0);

    const ResultTable main_table = compute_scenario(with_main);
    const ResultTable oracle_table = compute_scenario(with_oracle);
    ASSERT_EQ(main_table.rows.size(), oracle_table.rows.size());
    for (std::size_t r = 0; r < main_table.rows.size(); ++r) {
        for (std::size_t c = 0; c < 6; ++c) {  // key columns and the two probability columns
            EXPECT_NEAR(main_table.rows[r][c], oracle_table.rows[r][c], 1e-10);
        }
    }
    std::remove(main_out.c_str());
    std::remove(oracle_out.c_str());
}

TEST(RunScenario, OracleEngineHonorsCaps) {
    const std::string config =
        "lattice = 25\n"
        "steps = 6\n"
        "occupations = central-block:8\n"
        "species = boson\n"
        "observable = single-mode-statistics 25\n"
        "engine = oracle\n"
        "out = " + temp_path("never_written.csv") + "\n";
    const Scenario scenario = validate_config(config);
    EXPECT_THROW(run_scenario(scenario), CapError);
}

TEST(RunScenario, EmitsGnuplotScriptOnRequest) {
    const std::string out = temp_path("plotted.csv");
    const std::string config =
        "lattice = 1\n"
        "steps = 1\n"
        "occupations = 1,1\n"
        "species = boson\n"
        "observable = single-mode-statistics 1\n"
        "out = " + out + "\n";
    Scenario scenario = validate_config(config);
    scenario.emit_plot_script = true;
    ASSERT_EQ(run_scenario(scenario), 0);
    const std::string script = slurp(temp_path("plotted.gnuplot"));
    EXPECT_NE(script.find(out), std::string::npos);
    EXPECT_NE(script.find("logscale"), std::string::npos);
    std::remove(out.c_str());
    std::remove(temp_path("plotted.gnuplot").c_str());
}

TEST(ExitCodes, FollowTheDocumentedContract) {
    EXPECT_EQ(exit_code_for(ConfigError("bad")), 2);
    EXPECT_EQ(exit_code_for(CapError("big")), 3);
    EXPECT_EQ(exit_code_for(NumericalHealthError("sick")), 4);
    EXPECT_EQ(exit_code_for(std::runtime_error("other")), 1);

    const auto record =
        nlohmann::json::parse(error_record_json(ConfigError(std::vector<std::string>{"first", "second"})));
    EXPECT_EQ(record["exit_code"], 2);
    EXPECT_EQ(record["kind"], "config");
    EXPECT_EQ(record["messages"].size(), 2u);
}

TEST(Presets, AllPresetsValidate) {
    for (const auto& name : preset_names()) {
        for (const auto& run : preset_runs(name)) {
            EXPECT_NO_THROW(validate_config(run.config)) << name;
        }
    }
    EXPECT_EQ(preset_runs("fig3c").size(), 3u);
    EXPECT_EQ(preset_runs("fig4").size(), 2u);
    EXPECT_THROW(preset_runs("fig9"), ConfigError);
}

TEST(ComputeScenario, CoversEveryObservableKind) {
    const std::string base =
        "lattice = 2\n"
        "steps = 3\n"
        "occupations = 0,1,1,0\n"
        "species = boson, distinguishable\n";

    const ResultTable mean = compute_scenario(validate_config(base + "observable = mean-profile\n"));
    ASSERT_EQ(mean.columns.size(), 5u);  // mode + 2 means + 2 defects
    ASSERT_EQ(mean.rows.size(), 4u);
    double boson_total = 0.0;
    for (const auto& row : mean.rows) {
        boson_total += row[1];
        EXPECT_NEAR(row[1], row[2], 1e-12);  // the mean is species independent
    }
    EXPECT_NEAR(boson_total, 2.0, 1e-10);

    const ResultTable conditional =
        compute_scenario(validate_config(base + "observable = conditional 2 1 4\n"));
    ASSERT_EQ(conditional.rows.size(), 3u);  // delta_k in {-2, 0, 2}
    for (const auto& row : conditional.rows) {
        EXPECT_EQ(row[0], 2.0);
        EXPECT_EQ(row[1], 1.0);
        EXPECT_EQ(row[2], 4.0);
    }
    double conditional_total = 0.0;
    for (const auto& row : conditional.rows) {
        conditional_total += row[4];
    }
    EXPECT_NEAR(conditional_total, 1.0, 1e-12);

    const ResultTable averaged =
        compute_scenario(validate_config(base + "observable = pair-averaged 2\n"));
    ASSERT_EQ(averaged.rows.size(), 3u);
    double averaged_total = 0.0;
    for (const auto& row : averaged.rows) {
        averaged_total += row[2];
    }
    EXPECT_NEAR(averaged_total, 1.0, 1e-12);
}

TEST(Presets, TablesCarryHealthyNormalizationDefects) {
    for (const std::string& name : preset_names()) {
        for (const auto& run : preset_runs(name)) {
            const Scenario scenario = validate_config(run.config);
            const ResultTable table = compute_scenario(scenario);
            std::vector<std::size_t> defect_columns;
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                if (table.columns[c].rfind("defect_", 0) == 0) {
                    defect_columns.push_back(c);
                }
            }
            ASSERT_FALSE(defect_columns.empty());
            for (const auto& row : table.rows) {
                for (std::size_t c : defect_columns) {
                    EXPECT_LT(row[c], 1e-9) << name;
                }
            }
        }
    }
}

TEST(Presets, Fig3PresetsTargetTheIntendedModePairs) {
    const Scenario fig3a = validate_config(preset_runs("fig3a")[0].config);
    ASSERT_EQ(fig3a.observables.size(), 2u);
    EXPECT_EQ(fig3a.observables[0].m, 4);
    EXPECT_EQ(fig3a.observables[1].m, 8);
    EXPECT_EQ(fig3a.observables[0].mode_i, 19);
    EXPECT_EQ(fig3a.observables[0].mode_j, 32);
    const Scenario fig3b = validate_config(preset_runs("fig3b")[0].config);
    EXPECT_EQ(fig3b.observables[0].mode_i, 18);
}
