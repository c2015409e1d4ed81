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

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace uclab {

/// Outcome of one trial of a failure-of-uniform-convergence experiment.
///
/// Losses are the margin loss the trial was asked for; the *_error fields
/// are always the 0-1 error. `witness` is |test_loss - bad_set_loss|, the
/// per-trial lower-bound certificate for the algorithm-dependent uniform
/// convergence bound.
struct TrialReport {
    std::string experiment;
    std::size_t m = 0;
    std::size_t input_dim = 0;
    bool theorem_regime = false;
    double gamma = 0.0;

    double train_loss = 0.0;
    double test_loss = 0.0;
    double test_std_err = 0.0;
    double bad_set_loss = 0.0;
    double witness = 0.0;

    double train_error = 0.0;
    double test_error = 0.0;
    double test_error_std_err = 0.0;
    double bad_set_error = 0.0;

    /// Experiment-specific diagnostics (weight norms, margins, ...).
    std::vector<std::pair<std::string, double>> extras;

    void set_extra(const std::string& name, double value);
    /// Throws std::out_of_range if absent.
    double extra(const std::string& name) const;
};

} // namespace uclab
