/*
 *  Copyright 2026 The uclab Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

// uclab: run failure-of-uniform-convergence experiments and emit CSV.

#include "uclab/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using uclab::harness::ExperimentConfig;

struct CommonFlags {
    std::string config;
    std::optional<std::int64_t> seed;
    std::string out;
    std::optional<std::size_t> m;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> threads;
    std::vector<std::string> set;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "key = value config file");
    cmd->add_option("--seed", f.seed, "first seed (default 0)");
    cmd->add_option("--out", f.out, "CSV output path (default stdout)");
    cmd->add_option("--m", f.m, "training set size");
    cmd->add_option("--trials", f.trials, "number of seeds: seed, seed+1, ...");
    cmd->add_option("--threads", f.threads, "worker threads (output does not depend on it)");
    cmd->add_option("--set", f.set, "extra key=value override (repeatable)");
}

ExperimentConfig build_config(const std::string& experiment, const CommonFlags& f)
{
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        cfg = uclab::harness::load_config(f.config);
    }
    if (experiment != "sweep") {
        if (!cfg.experiment.empty() && cfg.experiment != experiment) {
            throw std::invalid_argument("config experiment '" + cfg.experiment
                                        + "' does not match subcommand '" + experiment + "'");
        }
        cfg.experiment = experiment;
    }
    for (const auto& kv : f.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        }
        const auto key = kv.substr(0, eq);
        const auto value = kv.substr(eq + 1);
        if (key == "experiment" || key == "seeds" || key == "out" || key == "threads") {
            throw std::invalid_argument("--set cannot override '" + key + "'; use the flag");
        }
        cfg.params[key] = value;
    }
    if (f.m) {
        cfg.params["m"] = std::to_string(*f.m);
    }
    if (f.seed || f.trials || cfg.seeds.empty()) {
        const std::int64_t first = f.seed.value_or(cfg.seeds.empty() ? 0 : cfg.seeds.front());
        const std::size_t n = f.trials.value_or(f.seed || cfg.seeds.empty() ? 1 : cfg.seeds.size());
        cfg.seeds.clear();
        for (std::size_t i = 0; i < n; ++i) {
            cfg.seeds.push_back(first + static_cast<std::int64_t>(i));
        }
    }
    if (!f.out.empty()) {
        cfg.output_path = f.out;
    }
    if (f.threads) {
        cfg.threads = *f.threads;
    }
    return cfg;
}

void write(std::vector<uclab::harness::SweepRow> rows, const ExperimentConfig& cfg)
{
    if (cfg.output_path.empty()) {
        uclab::harness::emit_csv(std::move(rows), std::cout);
        return;
    }
    uclab::harness::emit_csv(std::move(rows), cfg.output_path);
    std::ofstream side(cfg.output_path + ".config");
    side << uclab::harness::canonical_text(cfg);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(uclab::harness::config_hash(cfg)));
    side << "# hash " << hash << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"uclab: uniform-convergence lab experiments"};
    app.require_subcommand(1);

    std::map<std::string, CommonFlags> flags;
    for (const char* name : {"linear", "expnet", "relu", "abstract", "bounds-report"}) {
        auto* cmd = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        add_common(cmd, flags[name]);
    }
    auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment over a list of values");
    std::string sweep_experiment;
    std::string axis = "m";
    std::vector<std::string> values;
    add_common(sweep_cmd, flags["sweep"]);
    sweep_cmd->add_option("--experiment", sweep_experiment, "experiment to sweep");
    sweep_cmd->add_option("--axis", axis, "parameter to vary (default m)");
    sweep_cmd->add_option("--values", values, "axis values")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        const auto* cmd = app.get_subcommands().front();
        const auto name = cmd->get_name();
        auto cfg = build_config(name, flags[name]);
        if (name == "sweep") {
            if (!sweep_experiment.empty()) {
                cfg.experiment = sweep_experiment;
            }
            if (cfg.experiment.empty()) {
                throw std::invalid_argument("sweep needs --experiment or experiment = ... in the config");
            }
            if (values.empty()) {
                if (const auto it = cfg.params.find("sweep_values"); it != cfg.params.end()) {
                    std::string item;
                    std::istringstream in(it->second);
                    while (std::getline(in, item, ',')) {
                        values.push_back(item);
                    }
                    cfg.params.erase(it);
                }
            }
            if (const auto it = cfg.params.find("sweep_axis"); it != cfg.params.end()) {
                axis = it->second;
                cfg.params.erase(it);
            }
            write(uclab::harness::sweep(cfg, axis, values).rows, cfg);
        } else {
            write(uclab::harness::run_experiment(cfg), cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "uclab: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
