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

#include "uclab/losses.hpp"
#include "uclab/matrix.hpp"
#include "uclab/random.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uclab::relu {

// ---------------------------------------------------------------------------
// Hypersphere task
// ---------------------------------------------------------------------------

/// Two origin-centered spheres in R^dim. Class -1 lives on the inner one.
struct HypersphereConfig {
    std::size_t dim = 256;
    double r_inner = 1.0;
    double r_outer = 1.1;
    std::size_t n = 0;

    void validate() const;
    double radius(int label) const noexcept { return label > 0 ? r_outer : r_inner; }
};

/// n points with uniform random labels; point i is drawn from rng.derive(i).
Dataset sample_hypersphere(const HypersphereConfig& cfg, const RngStream& rng);

/// Moves every point to the other sphere along its own direction and flips
/// its label. Throws std::invalid_argument for a point at the origin or one
/// whose norm is not within 1e-6 of either radius.
Dataset project_swap(const Dataset& data, const HypersphereConfig& cfg);

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

/// f(x) = W2 relu(W1 [x; 1]) with two logits; logit 0 scores label -1 and
/// logit 1 scores label +1. When has_bias() is false the constant input is
/// absent and W1 is width x dim.
///
/// The initialization snapshots Z1, Z2 are fixed at construction.
class TwoLayerNet {
public:
    TwoLayerNet() = default;
    /// Throws std::invalid_argument on inconsistent shapes.
    TwoLayerNet(Matrix w1, Matrix w2, bool bias);

    std::size_t input_dim() const noexcept { return w1_.cols() - (bias_ ? 1 : 0); }
    std::size_t width() const noexcept { return w1_.rows(); }
    bool has_bias() const noexcept { return bias_; }

    Matrix& w1() noexcept { return w1_; }
    Matrix& w2() noexcept { return w2_; }
    const Matrix& w1() const noexcept { return w1_; }
    const Matrix& w2() const noexcept { return w2_; }
    const Matrix& z1() const noexcept { return z1_; }
    const Matrix& z2() const noexcept { return z2_; }

    /// Copy carrying new weights but this net's snapshots.
    TwoLayerNet with_weights(Matrix w1, Matrix w2) const;

    /// Both logits for one input.
    std::pair<double, double> logits(std::span<const double> x) const;
    /// logit(+1) - logit(-1).
    double output(std::span<const double> x) const;
    /// Hidden activations for one input (always >= 0).
    Vector hidden(std::span<const double> x) const;

    double distance_from_init() const;

    friend bool operator==(const TwoLayerNet&, const TwoLayerNet&) = default;

private:
    friend TwoLayerNet load_net(std::istream& in);
    TwoLayerNet(Matrix w1, Matrix w2, Matrix z1, Matrix z2, bool bias);

    Matrix w1_, w2_, z1_, z2_;
    bool bias_ = false;
};

/// W1 ~ N(0, scale_1^2 / dim) (bias column included), W2 ~ N(0, scale_2^2 / width).
/// W1 is drawn from rng.derive(1) and W2 from rng.derive(2), row-major.
TwoLayerNet init_two_layer(std::size_t dim, std::size_t width, const RngStream& rng,
                           double scale_1, double scale_2, bool bias);
/// Same scale for both layers.
TwoLayerNet init_two_layer(std::size_t dim, std::size_t width, const RngStream& rng,
                           double scale = 1.0, bool bias = true);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class TrainLoss { cross_entropy, squared };

struct EpochStats {
    std::size_t epoch = 0;          // epochs completed
    double margin_fraction = 0.0;   // share of training margins >= stop_margin
    double median_margin = 0.0;
};

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t batch_size = 64;
    double stop_fraction = 0.99;
    double stop_margin = 10.0;
    std::size_t max_epochs = 500;
    TrainLoss loss = TrainLoss::cross_entropy;
    RngStream rng;
    /// Called after every margin check, including the one before training.
    std::function<void(const EpochStats&)> on_epoch;

    void validate() const;
};

struct TrainResult {
    std::size_t epochs_used = 0;
    bool converged = false;
    double margin_fraction = 0.0;
};

/// Raised when a step produces NaN or infinite weights.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::size_t epoch, std::size_t step)
        : std::runtime_error(what), epoch_(epoch), step_(step)
    {
    }
    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t epoch_;
    std::size_t step_;
};

/// Mini-batch SGD. Margins are checked before the first epoch and after
/// every epoch; training stops as soon as stop_fraction of the examples
/// reach stop_margin. The epoch order is reshuffled from
/// cfg.rng.derive(epoch). Labels must be -1 or +1.
TrainResult train_sgd(TwoLayerNet& net, const Dataset& data, const TrainConfig& cfg);

struct Gradients {
    Matrix w1;
    Matrix w2;
};

/// Mean training loss over `data` and, if grad is non-null, its gradient.
/// Cross-entropy is softmax over the two logits; squared loss is
/// 0.5 * ||f(x) - onehot(y)||^2.
double loss_and_gradient(const TwoLayerNet& net, const Dataset& data, TrainLoss loss,
                         Gradients* grad);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Margin (correct logit minus wrong logit) for every example.
std::vector<double> margins(const TwoLayerNet& net, const Dataset& data);

/// Mean of loss(output(x), y). Margin 0 counts as an error.
double evaluate_error(const TwoLayerNet& net, const Dataset& data, const LossKind& loss);

/// 0-1 error of the net with weights (1-t) A + t B, for every t.
std::vector<std::pair<double, double>> interpolate_eval(const TwoLayerNet& a, const TwoLayerNet& b,
                                                        std::span<const double> ts,
                                                        const Dataset& data);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Text format:
///
///     uclab-two-layer 1
///     bias <0|1>
///     W1 <rows> <cols>
///     <row-major values, one row per line>
///     W2 <rows> <cols>
///     ...
///     Z1 <rows> <cols>
///     ...
///     Z2 <rows> <cols>
///     ...
///
/// Values are written with 17 significant digits, so a round trip is exact.
void save_net(const TwoLayerNet& net, std::ostream& out);
/// Throws std::runtime_error on malformed input.
TwoLayerNet load_net(std::istream& in);

} // namespace uclab::relu
