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

#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mpqw/counting.hpp"
#include "mpqw/fock_oracle.hpp"
#include "mpqw/lattice.hpp"

namespace mpqw {

enum class ObservableKind { MeanProfile, SingleMode, TwoMode, Conditional, PairAveraged };

struct ObservableRequest {
    ObservableKind kind = ObservableKind::MeanProfile;
    int m = 0;       // conditional / pair-averaged particle total
    int mode_i = 0;  // single / two-mode / conditional
    int mode_j = 0;
};

enum class EngineKind { Main, Oracle };
enum class OutputFormat { Csv, Json };

/// A fully validated run request: lattice, initial occupations, species
/// list, observables (all of one kind) and output disposition.
struct Scenario {
    LatticeConfig lattice;
    OccupationVector occupations;
    std::vector<Species> species;
    std::vector<ObservableRequest> observables;
    EngineKind engine = EngineKind::Main;
    OutputFormat format = OutputFormat::Csv;
    std::string out_path = "mpqw_out.csv";
    bool emit_plot_script = false;
    std::vector<std::pair<std::string, std::string>> resolved;  // key/value lines for the output header
};

// ---------------------------------------------------------------------------
// Flat key = value configuration text
// ---------------------------------------------------------------------------

struct RawEntry {
    std::string key;
    std::string value;
    int line = 0;  // 0 = command line
};

struct RawConfig {
    std::vector<RawEntry> entries;
    std::vector<std::string> parse_errors;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(s);
    while (std::getline(in, current, sep)) {
        parts.push_back(trim(current));
    }
    return parts;
}

inline std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> parts;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        parts.push_back(tok);
    }
    return parts;
}

inline std::string where(const RawEntry& entry) {
    return entry.line == 0 ? "command line" : "line " + std::to_string(entry.line);
}

inline std::optional<int> parse_int(const std::string& s) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) {
            return std::nullopt;
        }
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline std::string format_number(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

}  // namespace detail

/// Parses flat `key = value` text; '#' starts a comment, blank lines are
/// skipped. Syntax problems are collected, not thrown.
inline RawConfig parse_config_text(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            raw.parse_errors.push_back("line " + std::to_string(line_number) + ": expected `key = value`, got `" +
                                       line + "`");
            continue;
        }
        RawEntry entry;
        entry.key = detail::trim(line.substr(0, eq));
        entry.value = detail::trim(line.substr(eq + 1));
        entry.line = line_number;
        if (entry.key.empty()) {
            raw.parse_errors.push_back("line " + std::to_string(line_number) + ": empty key");
            continue;
        }
        raw.entries.push_back(std::move(entry));
    }
    return raw;
}

/// Layering rule for command-line overrides on top of a preset or config
/// file: scalar keys are appended (last one wins); species and observable
/// lists replace the base lists entirely when the override provides any.
inline void merge_overrides(RawConfig& base, const RawConfig& overrides) {
    bool replaces_species = false;
    bool replaces_observables = false;
    for (const auto& entry : overrides.entries) {
        replaces_species |= entry.key == "species";
        replaces_observables |= entry.key == "observable";
    }
    if (replaces_species || replaces_observables) {
        std::vector<RawEntry> kept;
        for (auto& entry : base.entries) {
            if ((entry.key == "species" && replaces_species) ||
                (entry.key == "observable" && replaces_observables)) {
                continue;
            }
            kept.push_back(std::move(entry));
        }
        base.entries = std::move(kept);
    }
    base.entries.insert(base.entries.end(), overrides.entries.begin(), overrides.entries.end());
    base.parse_errors.insert(base.parse_errors.end(), overrides.parse_errors.begin(), overrides.parse_errors.end());
}

namespace detail {

inline std::optional<ObservableRequest> parse_observable(const std::string& value, std::string& error) {
    const auto parts = tokens(value);
    if (parts.empty()) {
        error = "empty observable";
        return std::nullopt;
    }
    ObservableRequest request;
    auto need_ints = [&](int count) -> std::optional<std::vector<int>> {
        if (static_cast<int>(parts.size()) != count + 1) {
            error = "observable `" + parts[0] + "` takes " + std::to_string(count) + " integer argument(s)";
            return std::nullopt;
        }
        std::vector<int> values;
        for (int a = 1; a <= count; ++a) {
            const auto v = parse_int(parts[a]);
            if (!v) {
                error = "observable `" + parts[0] + "`: `" + parts[a] + "` is not an integer";
                return std::nullopt;
            }
            values.push_back(*v);
        }
        return values;
    };
    if (parts[0] == "mean-profile") {
        if (parts.size() != 1) {
            error = "observable `mean-profile` takes no arguments";
            return std::nullopt;
        }
        request.kind = ObservableKind::MeanProfile;
        return request;
    }
    if (parts[0] == "single-mode-statistics") {
        const auto v = need_ints(1);
        if (!v) return std::nullopt;
        request.kind = ObservableKind::SingleMode;
        request.mode_i = (*v)[0];
        return request;
    }
    if (parts[0] == "two-mode-statistics") {
        const auto v = need_ints(2);
        if (!v) return std::nullopt;
        request.kind = ObservableKind::TwoMode;
        request.mode_i = (*v)[0];
        request.mode_j = (*v)[1];
        return request;
    }
    if (parts[0] == "conditional") {
        const auto v = need_ints(3);
        if (!v) return std::nullopt;
        request.kind = ObservableKind::Conditional;
        request.m = (*v)[0];
        request.mode_i = (*v)[1];
        request.mode_j = (*v)[2];
        return request;
    }
    if (parts[0] == "pair-averaged") {
        const auto v = need_ints(1);
        if (!v) return std::nullopt;
        request.kind = ObservableKind::PairAveraged;
        request.m = (*v)[0];
        return request;
    }
    error = "unknown observable `" + parts[0] +
            "` (expected mean-profile | single-mode-statistics i | two-mode-statistics i j | "
            "conditional m i j | pair-averaged m)";
    return std::nullopt;
}

inline const char* observable_kind_name(ObservableKind kind) {
    switch (kind) {
        case ObservableKind::MeanProfile: return "mean-profile";
        case ObservableKind::SingleMode: return "single-mode-statistics";
        case ObservableKind::TwoMode: return "two-mode-statistics";
        case ObservableKind::Conditional: return "conditional";
        case ObservableKind::PairAveraged: return "pair-averaged";
    }
    return "unknown";
}

inline std::string observable_to_string(const ObservableRequest& request) {
    switch (request.kind) {
        case ObservableKind::MeanProfile: return "mean-profile";
        case ObservableKind::SingleMode: return "single-mode-statistics " + std::to_string(request.mode_i);
        case ObservableKind::TwoMode:
            return "two-mode-statistics " + std::to_string(request.mode_i) + " " + std::to_string(request.mode_j);
        case ObservableKind::Conditional:
            return "conditional " + std::to_string(request.m) + " " + std::to_string(request.mode_i) + " " +
                   std::to_string(request.mode_j);
        case ObservableKind::PairAveraged: return "pair-averaged " + std::to_string(request.m);
    }
    return "unknown";
}

}  // namespace detail

/// Validates a parsed configuration, reporting every violation found.
inline Scenario validate_raw(const RawConfig& raw) {
    std::vector<std::string> errors = raw.parse_errors;

    std::optional<RawEntry> lattice_entry, steps_entry, occupations_entry, engine_entry, format_entry, out_entry;
    std::vector<RawEntry> species_entries, observable_entries;

    for (const auto& entry : raw.entries) {
        if (entry.key == "lattice") {
            lattice_entry = entry;
        } else if (entry.key == "steps") {
            steps_entry = entry;
        } else if (entry.key == "occupations") {
            occupations_entry = entry;
        } else if (entry.key == "species") {
            species_entries.push_back(entry);
        } else if (entry.key == "observable") {
            observable_entries.push_back(entry);
        } else if (entry.key == "engine") {
            engine_entry = entry;
        } else if (entry.key == "format") {
            format_entry = entry;
        } else if (entry.key == "out") {
            out_entry = entry;
        } else {
            errors.push_back(detail::where(entry) + ": unknown key `" + entry.key + "`");
        }
    }

    Scenario scenario;

    // Lattice geometry.
    bool lattice_ok = false;
    if (!lattice_entry) {
        errors.push_back("missing required key `lattice`");
    } else {
        const auto L = detail::parse_int(lattice_entry->value);
        if (!L || *L < 1) {
            errors.push_back(detail::where(*lattice_entry) + ": `lattice` must be a positive integer (beam "
                                                             "splitters per row)");
        } else {
            scenario.lattice.half_modes = *L;
            lattice_ok = true;
        }
    }
    if (!steps_entry) {
        errors.push_back("missing required key `steps`");
    } else {
        const auto n = detail::parse_int(steps_entry->value);
        if (!n || *n < 0) {
            errors.push_back(detail::where(*steps_entry) + ": `steps` must be a non-negative integer");
        } else {
            scenario.lattice.steps = *n;
        }
    }

    // Species.
    for (const auto& entry : species_entries) {
        for (const auto& name : detail::split(entry.value, ',')) {
            if (name == "boson") {
                scenario.species.push_back(Species::Boson);
            } else if (name == "fermion") {
                scenario.species.push_back(Species::Fermion);
            } else if (name == "distinguishable") {
                scenario.species.push_back(Species::Distinguishable);
            } else {
                errors.push_back(detail::where(entry) + ": unknown species `" + name + "`");
            }
        }
    }
    // Dedupe, preserving request order.
    {
        std::vector<Species> unique;
        for (Species s : scenario.species) {
            bool seen = false;
            for (Species u : unique) {
                seen |= u == s;
            }
            if (!seen) {
                unique.push_back(s);
            }
        }
        scenario.species = std::move(unique);
    }
    if (scenario.species.empty()) {
        errors.push_back("at least one `species` is required (boson | fermion | distinguishable)");
    }

    // Occupations; resolution needs a valid lattice size.
    bool occupations_ok = false;
    if (!occupations_entry) {
        errors.push_back("missing required key `occupations`");
    } else if (lattice_ok) {
        const int mode_count = scenario.lattice.mode_count();
        const std::string& value = occupations_entry->value;
        if (value.rfind("central-block:", 0) == 0) {
            const auto n = detail::parse_int(value.substr(std::string("central-block:").size()));
            if (!n || *n < 1) {
                errors.push_back(detail::where(*occupations_entry) +
                                 ": `central-block:N` needs a positive particle number");
            } else if (*n > mode_count) {
                errors.push_back(detail::where(*occupations_entry) + ": central block of " + std::to_string(*n) +
                                 " particles does not fit in " + std::to_string(mode_count) + " modes");
            } else {
                scenario.occupations = OccupationVector::central_block(mode_count, *n);
                occupations_ok = true;
            }
        } else {
            std::vector<int> occ;
            bool entries_ok = true;
            for (const auto& part : detail::split(value, ',')) {
                const auto v = detail::parse_int(part);
                if (!v) {
                    errors.push_back(detail::where(*occupations_entry) + ": `" + part +
                                     "` is not an integer occupation");
                    entries_ok = false;
                    break;
                }
                occ.push_back(*v);
            }
            if (entries_ok) {
                if (static_cast<int>(occ.size()) != mode_count) {
                    errors.push_back(detail::where(*occupations_entry) + ": expected " +
                                     std::to_string(mode_count) + " occupations for 2L modes, got " +
                                     std::to_string(occ.size()));
                } else {
                    scenario.occupations = OccupationVector(std::move(occ));
                    occupations_ok = true;
                }
            }
        }
    }
    if (occupations_ok) {
        for (Species species : scenario.species) {
            try {
                validate_occupations(scenario.occupations, species);
            } catch (const std::invalid_argument& e) {
                errors.push_back(detail::where(*occupations_entry) + ": " + e.what());
                occupations_ok = false;
            }
        }
    }

    // Observables.
    if (observable_entries.empty()) {
        errors.push_back("at least one `observable` is required");
    }
    for (const auto& entry : observable_entries) {
        std::string error;
        const auto request = detail::parse_observable(entry.value, error);
        if (!request) {
            errors.push_back(detail::where(entry) + ": " + error);
            continue;
        }
        scenario.observables.push_back(*request);
        if (!scenario.observables.empty() && scenario.observables.front().kind != request->kind) {
            errors.push_back(detail::where(entry) + ": observables in one run must share a kind; `" +
                             detail::observable_kind_name(request->kind) + "` clashes with `" +
                             detail::observable_kind_name(scenario.observables.front().kind) + "`");
        }
        if (lattice_ok) {
            const int mode_count = scenario.lattice.mode_count();
            auto check_mode = [&](int mode) {
                if (mode < 1 || mode > mode_count) {
                    errors.push_back(detail::where(entry) + ": mode " + std::to_string(mode) +
                                     " outside the lattice (1.." + std::to_string(mode_count) + ")");
                }
            };
            switch (request->kind) {
                case ObservableKind::SingleMode:
                    check_mode(request->mode_i);
                    break;
                case ObservableKind::TwoMode:
                case ObservableKind::Conditional:
                    check_mode(request->mode_i);
                    check_mode(request->mode_j);
                    if (request->mode_i == request->mode_j) {
                        errors.push_back(detail::where(entry) + ": the two watched modes must differ");
                    }
                    break;
                default:
                    break;
            }
        }
        if (occupations_ok &&
            (request->kind == ObservableKind::Conditional || request->kind == ObservableKind::PairAveraged)) {
            const int n = scenario.occupations.total();
            if (request->m < 0 || request->m > n) {
                errors.push_back(detail::where(entry) + ": conditioned particle number m = " +
                                 std::to_string(request->m) + " must lie in [0, N] with N = " + std::to_string(n));
            }
        }
    }

    // Engine, format, output path.
    if (engine_entry) {
        if (engine_entry->value == "main") {
            scenario.engine = EngineKind::Main;
        } else if (engine_entry->value == "oracle") {
            scenario.engine = EngineKind::Oracle;
        } else {
            errors.push_back(detail::where(*engine_entry) + ": `engine` must be main or oracle");
        }
    }
    if (scenario.engine == EngineKind::Oracle) {
        for (Species species : scenario.species) {
            if (species == Species::Distinguishable) {
                errors.push_back("the oracle engine covers bosons and fermions; distinguishable particles use "
                                 "the exact convolution engine");
            }
        }
    }
    if (format_entry) {
        if (format_entry->value == "csv") {
            scenario.format = OutputFormat::Csv;
        } else if (format_entry->value == "json") {
            scenario.format = OutputFormat::Json;
        } else {
            errors.push_back(detail::where(*format_entry) + ": `format` must be csv or json");
        }
    }
    if (out_entry) {
        if (out_entry->value.empty()) {
            errors.push_back(detail::where(*out_entry) + ": empty output path");
        } else {
            scenario.out_path = out_entry->value;
        }
    } else if (format_entry && scenario.format == OutputFormat::Json) {
        scenario.out_path = "mpqw_out.json";
    }

    if (!errors.empty()) {
        throw ConfigError(errors);
    }

    // Record the fully resolved configuration for self-describing outputs.
    scenario.resolved.emplace_back("lattice", std::to_string(scenario.lattice.half_modes));
    scenario.resolved.emplace_back("steps", std::to_string(scenario.lattice.steps));
    {
        std::string occ;
        for (int i = 0; i < scenario.occupations.mode_count(); ++i) {
            if (i) occ += ",";
            occ += std::to_string(scenario.occupations.occupations[i]);
        }
        scenario.resolved.emplace_back("occupations", occ);
    }
    {
        std::string names;
        for (std::size_t i = 0; i < scenario.species.size(); ++i) {
            if (i) names += ", ";
            names += species_name(scenario.species[i]);
        }
        scenario.resolved.emplace_back("species", names);
    }
    for (const auto& request : scenario.observables) {
        scenario.resolved.emplace_back("observable", detail::observable_to_string(request));
    }
    scenario.resolved.emplace_back("engine", scenario.engine == EngineKind::Main ? "main" : "oracle");
    scenario.resolved.emplace_back("format", scenario.format == OutputFormat::Csv ? "csv" : "json");
    scenario.resolved.emplace_back("out", scenario.out_path);
    return scenario;
}

/// Parses and validates configuration text in one step.
inline Scenario validate_config(const std::string& text) { return validate_raw(parse_config_text(text)); }

// ---------------------------------------------------------------------------
// Built-in presets
// ---------------------------------------------------------------------------

struct PresetRun {
    std::string suffix;  // appended to the output stem when a preset expands to several runs
    std::string config;
};

inline std::vector<std::string> preset_names() { return {"fig2", "fig3a", "fig3b", "fig3c", "fig4"}; }

inline std::vector<PresetRun> preset_runs(const std::string& name) {
    if (name == "fig2") {
        return {{"",
                 "lattice = 25\n"
                 "steps = 6\n"
                 "occupations = central-block:8\n"
                 "species = boson, distinguishable\n"
                 "observable = single-mode-statistics 25\n"
                 "out = fig2.csv\n"}};
    }
    if (name == "fig3a") {
        return {{"",
                 "lattice = 25\n"
                 "steps = 20\n"
                 "occupations = central-block:8\n"
                 "species = boson, distinguishable\n"
                 "observable = conditional 4 19 32\n"
                 "observable = conditional 8 19 32\n"
                 "out = fig3a.csv\n"}};
    }
    if (name == "fig3b") {
        return {{"",
                 "lattice = 25\n"
                 "steps = 20\n"
                 "occupations = central-block:8\n"
                 "species = boson, distinguishable\n"
                 "observable = conditional 4 18 32\n"
                 "observable = conditional 8 18 32\n"
                 "out = fig3b.csv\n"}};
    }
    if (name == "fig3c") {
        std::vector<PresetRun> runs;
        for (int n : {4, 6, 8}) {
            const std::string tag = "_N" + std::to_string(n);
            runs.push_back({tag,
                            "lattice = 25\n"
                            "steps = 20\n"
                            "occupations = central-block:" + std::to_string(n) + "\n"
                            "species = boson\n"
                            "observable = conditional " + std::to_string(n) + " 19 32\n"
                            "out = fig3c" + tag + ".csv\n"});
        }
        return runs;
    }
    if (name == "fig4") {
        std::vector<PresetRun> runs;
        for (int steps : {19, 20}) {
            const std::string tag = "_n" + std::to_string(steps);
            runs.push_back({tag,
                            "lattice = 25\n"
                            "steps = " + std::to_string(steps) + "\n"
                            "occupations = central-block:8\n"
                            "species = boson, distinguishable\n"
                            "observable = pair-averaged 8\n"
                            "out = fig4" + tag + ".csv\n"});
        }
        return runs;
    }
    throw ConfigError("unknown preset `" + name + "` (available: fig2, fig3a, fig3b, fig3c, fig4)");
}

// ---------------------------------------------------------------------------
// Scenario evaluation
// ---------------------------------------------------------------------------

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline CountingDistribution scenario_single_mode(const Scenario& scenario, const Matrix& w, Species species,
                                                 int mode) {
    if (scenario.engine == EngineKind::Oracle) {
        return oracle_counting(expand_final_state(w, scenario.occupations, species), {mode});
    }
    return single_mode_counting(w, scenario.occupations, species, mode);
}

inline CountingDistribution scenario_two_mode(const Scenario& scenario, const Matrix& w, Species species,
                                              int mode_i, int mode_j) {
    if (scenario.engine == EngineKind::Oracle) {
        return oracle_counting(expand_final_state(w, scenario.occupations, species), {mode_i, mode_j});
    }
    return two_mode_counting(w, scenario.occupations, species, mode_i, mode_j);
}

inline std::map<int, double> scenario_pair_averaged(const Scenario& scenario, const Matrix& w, Species species,
                                                    int m) {
    if (scenario.engine != EngineKind::Oracle) {
        return pair_averaged_statistics(w, scenario.occupations, species, m);
    }
    const FockExpansion expansion = expand_final_state(w, scenario.occupations, species);
    std::map<int, double> average;
    for (int dk = -m; dk <= m; dk += 2) {
        average[dk] = 0.0;
    }
    int included = 0;
    const int dim = expansion.mode_count;
    for (int mode_i = 1; mode_i <= dim; ++mode_i) {
        for (int mode_j = mode_i + 1; mode_j <= dim; ++mode_j) {
            const auto slice = try_conditional_imbalance(oracle_counting(expansion, {mode_i, mode_j}), m);
            if (!slice) {
                continue;
            }
            for (const auto& [dk, p] : *slice) {
                average[dk] += p;
            }
            ++included;
        }
    }
    if (included == 0) {
        throw NumericalHealthError("pair-averaged: conditioning on " + std::to_string(m) +
                                   " particles is impossible for every mode pair");
    }
    for (auto& [dk, p] : average) {
        p /= included;
    }
    return average;
}

inline double scenario_mean(const Scenario& scenario, const Matrix& w, Species species, int mode) {
    if (scenario.engine == EngineKind::Oracle) {
        return oracle_correlator(expand_final_state(w, scenario.occupations, species), ModeTuple::repeated(mode, 1));
    }
    (void)species;  // the mean is species-independent
    return mean_occupation(w, scenario.occupations, mode);
}

}  // namespace detail

/// Evaluates every observable of the scenario into one table. Rows are
/// emitted in a fixed deterministic order; species columns follow the
/// requested species order.
inline ResultTable compute_scenario(const Scenario& scenario) {
    const Matrix w = evolution(scenario.lattice);
    const int n_particles = scenario.occupations.total();
    ResultTable table;
    const auto kind = scenario.observables.front().kind;

    auto value_columns = [&](const std::string& prefix) {
        for (Species species : scenario.species) {
            table.columns.push_back(prefix + "_" + species_name(species));
        }
        for (Species species : scenario.species) {
            table.columns.push_back(std::string("defect_") + species_name(species));
        }
    };

    switch (kind) {
        case ObservableKind::MeanProfile: {
            table.columns = {"mode"};
            value_columns("mean");
            std::vector<double> defects(scenario.species.size());
            std::vector<std::vector<double>> per_species(scenario.species.size());
            for (std::size_t s = 0; s < scenario.species.size(); ++s) {
                double total = 0.0;
                per_species[s].resize(static_cast<std::size_t>(scenario.lattice.mode_count()));
                for (int mode = 1; mode <= scenario.lattice.mode_count(); ++mode) {
                    per_species[s][mode - 1] = detail::scenario_mean(scenario, w, scenario.species[s], mode);
                    total += per_species[s][mode - 1];
                }
                defects[s] = std::abs(total - n_particles);
            }
            for (int mode = 1; mode <= scenario.lattice.mode_count(); ++mode) {
                std::vector<double> row{static_cast<double>(mode)};
                for (std::size_t s = 0; s < scenario.species.size(); ++s) {
                    row.push_back(per_species[s][mode - 1]);
                }
                for (std::size_t s = 0; s < scenario.species.size(); ++s) {
                    row.push_back(defects[s]);
                }
                table.rows.push_back(std::move(row));
            }
            break;
        }
        case ObservableKind::SingleMode: {
            table.columns = {"mode", "k"};
            value_columns("P");
            for (const auto& request : scenario.observables) {
                std::vector<CountingDistribution> dists;
                for (Species species : scenario.species) {
                    dists.push_back(detail::scenario_single_mode(scenario, w, species, request.mode_i));
                }
                for (int k = 0; k <= n_particles; ++k) {
                    std::vector<double> row{static_cast<double>(request.mode_i), static_cast<double>(k)};
                    for (const auto& dist : dists) {
                        row.push_back(dist.single[k]);
                    }
                    for (const auto& dist : dists) {
                        row.push_back(dist.normalization_defect);
                    }
                    table.rows.push_back(std::move(row));
                }
            }
            break;
        }
        case ObservableKind::TwoMode: {
            table.columns = {"mode_i", "mode_j", "k_i", "k_j"};
            value_columns("P");
            for (const auto& request : scenario.observables) {
                std::vector<CountingDistribution> dists;
                for (Species species : scenario.species) {
                    dists.push_back(detail::scenario_two_mode(scenario, w, species, request.mode_i, request.mode_j));
                }
                for (int ki = 0; ki <= n_particles; ++ki) {
                    for (int kj = 0; kj <= n_particles; ++kj) {
                        std::vector<double> row{static_cast<double>(request.mode_i),
                                                static_cast<double>(request.mode_j), static_cast<double>(ki),
                                                static_cast<double>(kj)};
                        for (const auto& dist : dists) {
                            row.push_back(dist.joint[ki][kj]);
                        }
                        for (const auto& dist : dists) {
                            row.push_back(dist.normalization_defect);
                        }
                        table.rows.push_back(std::move(row));
                    }
                }
            }
            break;
        }
        case ObservableKind::Conditional: {
            table.columns = {"m", "mode_i", "mode_j", "delta_k"};
            value_columns("P");
            for (const auto& request : scenario.observables) {
                std::vector<std::map<int, double>> slices;
                std::vector<double> defects;
                for (Species species : scenario.species) {
                    const CountingDistribution joint =
                        detail::scenario_two_mode(scenario, w, species, request.mode_i, request.mode_j);
                    slices.push_back(conditional_imbalance(joint, request.m));
                    defects.push_back(joint.normalization_defect);
                }
                for (int dk = -request.m; dk <= request.m; dk += 2) {
                    std::vector<double> row{static_cast<double>(request.m), static_cast<double>(request.mode_i),
                                            static_cast<double>(request.mode_j), static_cast<double>(dk)};
                    for (const auto& slice : slices) {
                        const auto it = slice.find(dk);
                        row.push_back(it == slice.end() ? 0.0 : it->second);
                    }
                    for (double defect : defects) {
                        row.push_back(defect);
                    }
                    table.rows.push_back(std::move(row));
                }
            }
            break;
        }
        case ObservableKind::PairAveraged: {
            table.columns = {"m", "delta_k"};
            value_columns("P");
            for (const auto& request : scenario.observables) {
                std::vector<std::map<int, double>> averages;
                std::vector<double> defects;
                for (Species species : scenario.species) {
                    averages.push_back(detail::scenario_pair_averaged(scenario, w, species, request.m));
                    double total = 0.0;
                    for (const auto& [dk, p] : averages.back()) {
                        total += p;
                    }
                    defects.push_back(std::abs(total - 1.0));
                }
                for (int dk = -request.m; dk <= request.m; dk += 2) {
                    std::vector<double> row{static_cast<double>(request.m), static_cast<double>(dk)};
                    for (const auto& average : averages) {
                        row.push_back(average.at(dk));
                    }
                    for (double defect : defects) {
                        row.push_back(defect);
                    }
                    table.rows.push_back(std::move(row));
                }
            }
            break;
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Output writers
// ---------------------------------------------------------------------------

inline void write_csv(const Scenario& scenario, const ResultTable& table, std::ostream& out) {
    out << "# mpqw output\n";
    for (const auto& [key, value] : scenario.resolved) {
        out << "# " << key << " = " << value << "\n";
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << table.columns[c];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << detail::format_number(row[c]);
        }
        out << "\n";
    }
}

inline void write_json(const Scenario& scenario, const ResultTable& table, std::ostream& out) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json config;
    nlohmann::ordered_json observables = nlohmann::ordered_json::array();
    for (const auto& [key, value] : scenario.resolved) {
        if (key == "observable") {
            observables.push_back(value);
        } else {
            config[key] = value;
        }
    }
    config["observable"] = observables;
    doc["config"] = config;
    doc["columns"] = table.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        rows.push_back(row);
    }
    doc["rows"] = rows;
    out << doc.dump(2) << "\n";
}

/// A gnuplot script that renders the probability columns of the CSV output.
inline std::string plot_script_for(const Scenario& scenario, const ResultTable& table,
                                   const std::string& csv_path) {
    const auto kind = scenario.observables.front().kind;
    std::size_t x_column = 1;
    std::string x_label = "mode";
    bool log_y = false;
    switch (kind) {
        case ObservableKind::MeanProfile:
            x_column = 1;
            x_label = "mode";
            break;
        case ObservableKind::SingleMode:
            x_column = 2;
            x_label = "k";
            log_y = true;
            break;
        case ObservableKind::TwoMode:
            x_column = 3;
            x_label = "k_i";
            break;
        case ObservableKind::Conditional:
            x_column = 4;
            x_label = "delta_k";
            break;
        case ObservableKind::PairAveraged:
            x_column = 2;
            x_label = "delta_k";
            break;
    }
    std::ostringstream script;
    script << "set datafile separator ','\n";
    script << "set datafile commentschars '#'\n";
    script << "set xlabel '" << x_label << "'\n";
    script << "set ylabel 'probability'\n";
    if (log_y) {
        script << "set logscale y\n";
    }
    script << "set key autotitle columnhead\n";
    script << "plot ";
    std::size_t plotted = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c].rfind("P_", 0) != 0 && table.columns[c].rfind("mean_", 0) != 0) {
            continue;
        }
        if (plotted) {
            script << ", \\\n     ";
        }
        script << "'" << csv_path << "' using " << x_column << ":" << (c + 1) << " with linespoints";
        ++plotted;
    }
    script << "\n";
    return script.str();
}

namespace detail {

inline std::string replace_extension(const std::string& path, const std::string& extension) {
    const auto slash = path.find_last_of("/\\");
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return path + extension;
    }
    return path.substr(0, dot) + extension;
}

}  // namespace detail

/// Runs one validated scenario: computes the table and writes the requested
/// output files. Returns 0 on success; failures surface as typed exceptions.
inline int run_scenario(const Scenario& scenario) {
    if (scenario.emit_plot_script && scenario.format != OutputFormat::Csv) {
        throw ConfigError("plot script emission requires csv format");
    }
    const ResultTable table = compute_scenario(scenario);
    std::ofstream out(scenario.out_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output path `" + scenario.out_path + "`");
    }
    if (scenario.format == OutputFormat::Csv) {
        write_csv(scenario, table, out);
    } else {
        write_json(scenario, table, out);
    }
    out.close();
    if (!out) {
        throw std::runtime_error("failed writing `" + scenario.out_path + "`");
    }
    if (scenario.emit_plot_script) {
        const std::string script_path = detail::replace_extension(scenario.out_path, ".gnuplot");
        std::ofstream script(script_path, std::ios::binary);
        if (!script) {
            throw std::runtime_error("cannot open plot script path `" + script_path + "`");
        }
        script << plot_script_for(scenario, table, scenario.out_path);
    }
    return 0;
}

/// Exit-code contract: 2 configuration, 3 cap violation, 4 numerical health,
/// 1 anything else.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) {
        return 2;
    }
    if (dynamic_cast<const CapError*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const NumericalHealthError*>(&e)) {
        return 4;
    }
    return 1;
}

/// Machine-readable error record for nonzero exits.
inline std::string error_record_json(const std::exception& e) {
    nlohmann::ordered_json record;
    record["error"] = true;
    record["exit_code"] = exit_code_for(e);
    const char* kind = "internal";
    if (dynamic_cast<const ConfigError*>(&e)) {
        kind = "config";
    } else if (dynamic_cast<const CapError*>(&e)) {
        kind = "cap";
    } else if (dynamic_cast<const NumericalHealthError*>(&e)) {
        kind = "numerical-health";
    }
    record["kind"] = kind;
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    if (const auto* config_error = dynamic_cast<const ConfigError*>(&e)) {
        for (const auto& m : config_error->messages()) {
            messages.push_back(m);
        }
    } else {
        messages.push_back(e.what());
    }
    record["messages"] = messages;
    return record.dump(2);
}

}  // namespace mpqw
