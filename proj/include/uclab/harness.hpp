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

#pragma once

#include "uclab/numerics.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace uclab::harness {

/// One experiment invocation. `params` holds the experiment keys as text;
/// each experiment parses the keys it knows and rejects the rest.
struct ExperimentConfig {
    std::string experiment;
    std::map<std::string, std::string> params;
    std::vector<std::int64_t> seeds;
    std::string output_path;
    std::size_t threads = 1;
};

/// Flat `key = value` text; `#` starts a comment. The reserved keys
/// `experiment`, `seeds` (comma list), `out` and `threads` fill the
/// corresponding fields; everything else lands in params. Throws
/// std::invalid_argument on a malformed line or a duplicate key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical `key=value` lines (sorted), used for hashing and sidecars.
std::string canonical_text(const ExperimentConfig& cfg);
/// FNV-1a over canonical_text.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Aggregate rows (over seeds or over the sweep axis) use seed -1.
constexpr std::int64_t kAggregateSeed = -1;

struct SweepRow {
    std::string experiment;
    std::size_t m = 0;
    std::int64_t seed = 0;
    std::string metric;
    double value = 0.0;
    std::optional<double> std_err;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct MetricInfo {
    const char* name;
    const char* unit;
    const char* meaning;
};

/// Every metric the harness can emit. Sweep summaries append ".slope",
/// ".intercept" or ".r2" to a registered name.
const std::vector<MetricInfo>& metric_registry();
bool is_registered_metric(const std::string& name);

/// Experiment names: linear, expnet, relu, abstract, bounds-report.
/// Throws std::invalid_argument for an unknown experiment, an unknown or
/// malformed key, or a missing seed; errors from the experiment itself are
/// rethrown as std::runtime_error with the experiment and seed prepended.
std::vector<SweepRow> run_experiment(const ExperimentConfig& cfg);

struct MetricSlope {
    std::string metric;
    SlopeFit fit;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<MetricSlope> slopes;
};

/// Runs cfg once per axis value. For each metric whose seed-mean is positive
/// at every value, fits a log-log slope against the axis value and appends
/// "<metric>.slope", "<metric>.intercept" and "<metric>.r2" rows (m = 0,
/// seed -1). Sweeping any axis other than m tags the experiment name as
/// "<experiment>[<axis>=<value>]". Throws std::invalid_argument with
/// fewer than 2 values.
SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<std::string>& values);

/// Sorts by (experiment, m, seed, metric) and writes the CSV. Values use 17
/// significant digits; a missing std_err is an empty field. Throws
/// std::invalid_argument for an unregistered metric and std::runtime_error
/// on I/O failure.
void emit_csv(std::vector<SweepRow> rows, std::ostream& out);
void emit_csv(std::vector<SweepRow> rows, const std::string& path);

/// Inverse of emit_csv. Throws std::runtime_error on malformed input.
std::vector<SweepRow> parse_csv(std::istream& in);

} // namespace uclab::harness
