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

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mpqw/mpqw.hpp"

namespace {

std::string insert_suffix(const std::string& path, const std::string& suffix) {
    if (suffix.empty()) {
        return path;
    }
    const auto slash = path.find_last_of("/\\");
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return path + suffix;
    }
    return path.substr(0, dot) + suffix + path.substr(dot);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mpqw: counting statistics of many-particle quantum walks on a beam-splitter array"};

    std::string preset;
    std::string config_path;
    int lattice = 0;
    int steps = -1;
    std::string occupations;
    std::vector<std::string> species;
    std::vector<std::string> observables;
    std::string engine;
    std::string format;
    std::string out_path;
    bool emit_plot = false;

    app.add_option("--preset", preset, "built-in scenario: fig2 | fig3a | fig3b | fig3c | fig4")
        ->check(CLI::IsMember(mpqw::preset_names()));
    app.add_option("--config", config_path, "path to a key = value scenario file");
    app.add_option("--lattice", lattice, "beam splitters per row (L); the lattice has 2L modes");
    app.add_option("--steps", steps, "number of time steps n");
    app.add_option("--occupations", occupations, "comma list of 2L occupations, or central-block:N");
    app.add_option("--species", species, "particle species (repeatable): boson | fermion | distinguishable");
    app.add_option("--observable", observables,
                   "observable request (repeatable): mean-profile | single-mode-statistics i | "
                   "two-mode-statistics i j | conditional m i j | pair-averaged m");
    app.add_option("--engine", engine, "main | oracle (oracle: brute-force Fock expansion, N <= 6, 2L <= 8)");
    app.add_option("--format", format, "csv | json");
    app.add_option("--out", out_path, "output path");
    app.add_flag("--emit-plot", emit_plot, "also write a gnuplot script next to the csv output");

    CLI11_PARSE(app, argc, argv);

    try {
        // Base configuration from the preset or file, command-line flags on top.
        std::vector<mpqw::PresetRun> runs;
        if (!preset.empty() && !config_path.empty()) {
            throw mpqw::ConfigError("choose either --preset or --config, not both");
        }
        if (!preset.empty()) {
            runs = mpqw::preset_runs(preset);
        } else if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                throw mpqw::ConfigError("cannot read config file `" + config_path + "`");
            }
            std::ostringstream text;
            text << in.rdbuf();
            runs.push_back({"", text.str()});
        } else {
            runs.push_back({"", ""});
        }

        mpqw::RawConfig overrides;
        auto add_override = [&](const std::string& key, const std::string& value) {
            overrides.entries.push_back({key, value, 0});
        };
        if (app.count("--lattice")) add_override("lattice", std::to_string(lattice));
        if (app.count("--steps")) add_override("steps", std::to_string(steps));
        if (!occupations.empty()) add_override("occupations", occupations);
        for (const auto& s : species) add_override("species", s);
        for (const auto& o : observables) add_override("observable", o);
        if (!engine.empty()) add_override("engine", engine);
        if (!format.empty()) add_override("format", format);
        if (!out_path.empty()) add_override("out", out_path);

        for (const auto& run : runs) {
            mpqw::RawConfig raw = mpqw::parse_config_text(run.config);
            mpqw::merge_overrides(raw, overrides);
            mpqw::Scenario scenario = mpqw::validate_raw(raw);
            if (!out_path.empty()) {
                scenario.out_path = insert_suffix(out_path, run.suffix);
                for (auto& [key, value] : scenario.resolved) {
                    if (key == "out") {
                        value = scenario.out_path;
                    }
                }
            }
            scenario.emit_plot_script = emit_plot;
            mpqw::run_scenario(scenario);
            std::cout << "wrote " << scenario.out_path << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << mpqw::error_record_json(e) << "\n";
        return mpqw::exit_code_for(e);
    }
}
