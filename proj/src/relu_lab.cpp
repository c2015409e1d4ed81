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

#include "uclab/relu_lab.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace uclab::relu {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

constexpr std::size_t kChunk = 512;

ConstMatMap view(const Matrix& m)
{
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

MatMap view(Matrix& m)
{
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

void check_input(const TwoLayerNet& net, const Dataset& data, const char* who)
{
    if (data.dim() != net.input_dim()) {
        throw std::invalid_argument(std::string(who) + ": dataset dim " + std::to_string(data.dim())
                                    + " does not match net input dim "
                                    + std::to_string(net.input_dim()));
    }
}

void check_labels(const Dataset& data, const char* who)
{
    for (const auto& e : data) {
        if (e.y != 1 && e.y != -1) {
            throw std::invalid_argument(std::string(who) + ": labels must be -1 or +1");
        }
    }
}

// Rows [begin, end) of the dataset, with a trailing 1 when the net has a bias.
RowMat pack_rows(const Dataset& data, const std::vector<std::size_t>& index, std::size_t begin,
                 std::size_t end, bool bias)
{
    const auto dim = data.dim();
    RowMat x(static_cast<Eigen::Index>(end - begin), static_cast<Eigen::Index>(dim + (bias ? 1 : 0)));
    for (std::size_t r = begin; r < end; ++r) {
        const auto& src = data[index[r]].x;
        auto* dst = x.data() + (r - begin) * static_cast<std::size_t>(x.cols());
        std::copy(src.begin(), src.end(), dst);
        if (bias) {
            dst[dim] = 1.0;
        }
    }
    return x;
}

std::vector<std::size_t> identity_index(std::size_t n)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

// y_out = f[+1] - f[-1] for every example, evaluated in chunks.
std::vector<double> outputs(const TwoLayerNet& net, const Dataset& data)
{
    const auto idx = identity_index(data.size());
    const auto w1 = view(net.w1());
    const auto w2 = view(net.w2());
    const Eigen::RowVectorXd diff = w2.row(1) - w2.row(0);
    std::vector<double> out(data.size());
    for (std::size_t begin = 0; begin < data.size(); begin += kChunk) {
        const auto end = std::min(data.size(), begin + kChunk);
        const RowMat x = pack_rows(data, idx, begin, end, net.has_bias());
        const RowMat h = (x * w1.transpose()).cwiseMax(0.0);
        const Eigen::VectorXd o = h * diff.transpose();
        std::copy(o.data(), o.data() + o.size(), out.begin() + static_cast<std::ptrdiff_t>(begin));
    }
    return out;
}

// Output-layer error signal dL/dF for a batch, already divided by the batch size.
double output_gradient(const RowMat& f, std::span<const int> labels, TrainLoss loss, RowMat& g)
{
    const auto n = f.rows();
    g.resize(n, 2);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int yi = labels[static_cast<std::size_t>(i)] > 0 ? 1 : 0;
        if (loss == TrainLoss::cross_entropy) {
            const double gamma = f(i, yi) - f(i, 1 - yi);
            // log(1 + exp(-gamma)) and sigmoid(-gamma), both overflow-safe
            total += gamma > 0 ? std::log1p(std::exp(-gamma)) : -gamma + std::log1p(std::exp(gamma));
            const double s = gamma > 0 ? std::exp(-gamma) / (1.0 + std::exp(-gamma))
                                       : 1.0 / (1.0 + std::exp(gamma));
            g(i, yi) = -s;
            g(i, 1 - yi) = s;
        } else {
            const double r0 = f(i, 0) - (yi == 0 ? 1.0 : 0.0);
            const double r1 = f(i, 1) - (yi == 1 ? 1.0 : 0.0);
            total += 0.5 * (r0 * r0 + r1 * r1);
            g(i, 0) = r0;
            g(i, 1) = r1;
        }
    }
    g /= static_cast<double>(n);
    return total / static_cast<double>(n);
}

// One forward/backward pass. With lr > 0 the weights are updated in place;
// otherwise the gradients are written to d_w1 / d_w2.
double forward_backward(Matrix& w1m, Matrix& w2m, const RowMat& x, std::span<const int> labels,
                        TrainLoss loss, double lr, RowMat* d_w1, RowMat* d_w2)
{
    auto w1 = view(w1m);
    auto w2 = view(w2m);
    const RowMat pre = x * w1.transpose();
    const RowMat h = pre.cwiseMax(0.0);
    const RowMat f = h * w2.transpose();
    RowMat g;
    const double value = output_gradient(f, labels, loss, g);
    RowMat dh = g * w2;
    dh = (pre.array() > 0.0).select(dh, 0.0);
    if (lr > 0.0) {
        w2.noalias() -= lr * (g.transpose() * h);
        w1.noalias() -= lr * (dh.transpose() * x);
    } else {
        *d_w2 = g.transpose() * h;
        *d_w1 = dh.transpose() * x;
    }
    return value;
}

double frobenius_distance(const Matrix& a, const Matrix& b)
{
    return (view(a) - view(b)).norm();
}

double median_of(std::vector<double> v)
{
    if (v.empty()) {
        return 0.0;
    }
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) {
        return hi;
    }
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

void write_matrix(std::ostream& out, const char* name, const Matrix& m)
{
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    char buf[32];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << (c == 0 ? "" : " ") << buf;
        }
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, const std::string& expected)
{
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(in >> name >> rows >> cols) || name != expected) {
        throw std::runtime_error("load_net: expected header for " + expected);
    }
    Matrix m(rows, cols);
    for (double& v : m.entries()) {
        if (!(in >> v)) {
            throw std::runtime_error("load_net: truncated values in " + expected);
        }
    }
    return m;
}

} // namespace

// ---------------------------------------------------------------------------

void HypersphereConfig::validate() const
{
    if (dim == 0) {
        throw std::invalid_argument("HypersphereConfig: dim must be >= 1");
    }
    if (!(r_inner > 0.0 && r_inner < r_outer)) {
        throw std::invalid_argument("HypersphereConfig: need 0 < r_inner < r_outer");
    }
}

Dataset sample_hypersphere(const HypersphereConfig& cfg, const RngStream& rng)
{
    cfg.validate();
    Dataset data(cfg.dim);
    data.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        RandomEngine engine(rng.derive(i));
        const int y = engine.sign();
        auto x = sample_gaussian(engine, cfg.dim, 1.0);
        const double scale = cfg.radius(y) / norm2(x);
        for (double& v : x) {
            v *= scale;
        }
        data.add({std::move(x), y});
    }
    return data;
}

Dataset project_swap(const Dataset& data, const HypersphereConfig& cfg)
{
    cfg.validate();
    constexpr double tol = 1e-6;
    Dataset out(data.dim());
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& e = data[i];
        const double r = norm2(e.x);
        if (r == 0.0) {
            throw std::invalid_argument("project_swap: point " + std::to_string(i) + " at origin");
        }
        double ratio;
        if (std::abs(r - cfg.r_inner) <= tol) {
            ratio = cfg.r_outer / cfg.r_inner;
        } else if (std::abs(r - cfg.r_outer) <= tol) {
            ratio = cfg.r_inner / cfg.r_outer;
        } else {
            throw std::invalid_argument("project_swap: point " + std::to_string(i)
                                        + " lies on neither sphere");
        }
        LabeledExample s{e.x, -e.y};
        for (double& v : s.x) {
            v *= ratio;
        }
        out.add(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------

TwoLayerNet::TwoLayerNet(Matrix w1, Matrix w2, bool bias)
    : TwoLayerNet(w1, w2, w1, w2, bias)
{
}

TwoLayerNet::TwoLayerNet(Matrix w1, Matrix w2, Matrix z1, Matrix z2, bool bias)
    : w1_(std::move(w1)), w2_(std::move(w2)), z1_(std::move(z1)), z2_(std::move(z2)), bias_(bias)
{
    if (w1_.rows() == 0 || w1_.cols() < (bias_ ? 2u : 1u)) {
        throw std::invalid_argument("TwoLayerNet: W1 too small");
    }
    if (w2_.rows() != 2 || w2_.cols() != w1_.rows()) {
        throw std::invalid_argument("TwoLayerNet: W2 must be 2 x width");
    }
    if (!z1_.same_shape(w1_) || !z2_.same_shape(w2_)) {
        throw std::invalid_argument("TwoLayerNet: snapshot shape mismatch");
    }
}

TwoLayerNet TwoLayerNet::with_weights(Matrix w1, Matrix w2) const
{
    if (!w1.same_shape(w1_) || !w2.same_shape(w2_)) {
        throw std::invalid_argument("TwoLayerNet::with_weights: shape mismatch");
    }
    return TwoLayerNet(std::move(w1), std::move(w2), z1_, z2_, bias_);
}

Vector TwoLayerNet::hidden(std::span<const double> x) const
{
    if (x.size() != input_dim()) {
        throw std::invalid_argument("TwoLayerNet: input dim mismatch");
    }
    Vector h(width());
    const auto dim = input_dim();
    for (std::size_t j = 0; j < width(); ++j) {
        const auto row = w1_.row(j);
        double a = dot(row.first(dim), x);
        if (bias_) {
            a += row[dim];
        }
        h[j] = a > 0.0 ? a : 0.0;
    }
    return h;
}

std::pair<double, double> TwoLayerNet::logits(std::span<const double> x) const
{
    const auto h = hidden(x);
    return {dot(w2_.row(0), h), dot(w2_.row(1), h)};
}

double TwoLayerNet::output(std::span<const double> x) const
{
    const auto [f0, f1] = logits(x);
    return f1 - f0;
}

double TwoLayerNet::distance_from_init() const
{
    const double d1 = frobenius_distance(w1_, z1_);
    const double d2 = frobenius_distance(w2_, z2_);
    return std::sqrt(d1 * d1 + d2 * d2);
}

TwoLayerNet init_two_layer(std::size_t dim, std::size_t width, const RngStream& rng,
                           double scale_1, double scale_2, bool bias)
{
    if (dim == 0 || width == 0) {
        throw std::invalid_argument("init_two_layer: dim and width must be >= 1");
    }
    const auto cols = dim + (bias ? 1 : 0);
    Matrix w1(width, cols,
              sample_gaussian(rng.derive(1), width * cols,
                              scale_1 * scale_1 / static_cast<double>(dim)));
    Matrix w2(2, width,
              sample_gaussian(rng.derive(2), 2 * width,
                              scale_2 * scale_2 / static_cast<double>(width)));
    return TwoLayerNet(std::move(w1), std::move(w2), bias);
}

TwoLayerNet init_two_layer(std::size_t dim, std::size_t width, const RngStream& rng, double scale,
                           bool bias)
{
    return init_two_layer(dim, width, rng, scale, scale, bias);
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const
{
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be finite and >= 0");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    }
    if (!(stop_fraction > 0.0 && stop_fraction <= 1.0)) {
        throw std::invalid_argument("TrainConfig: stop_fraction must lie in (0, 1]");
    }
}

TrainResult train_sgd(TwoLayerNet& net, const Dataset& data, const TrainConfig& cfg)
{
    cfg.validate();
    if (data.empty()) {
        throw std::invalid_argument("train_sgd: empty dataset");
    }
    check_input(net, data, "train_sgd");
    check_labels(data, "train_sgd");

    const auto n = data.size();
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = data[i].y;
    }

    TrainResult result;
    auto check = [&](std::size_t epoch) {
        const auto ms = margins(net, data);
        const auto hit = std::count_if(ms.begin(), ms.end(),
                                       [&](double g) { return g >= cfg.stop_margin; });
        result.margin_fraction = static_cast<double>(hit) / static_cast<double>(n);
        result.epochs_used = epoch;
        if (cfg.on_epoch) {
            cfg.on_epoch({epoch, result.margin_fraction, median_of(ms)});
        }
        return result.margin_fraction >= cfg.stop_fraction;
    };

    if (check(0)) {
        result.converged = true;
        return result;
    }
    if (cfg.learning_rate == 0.0) {
        result.epochs_used = cfg.max_epochs;
        return result;
    }

    std::vector<std::size_t> order(n);
    std::vector<int> batch_labels;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        RandomEngine engine(cfg.rng.derive(epoch));
        shuffle(order, engine);
        std::size_t step = 0;
        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size, ++step) {
            const auto end = std::min(n, begin + cfg.batch_size);
            const RowMat x = pack_rows(data, order, begin, end, net.has_bias());
            batch_labels.resize(end - begin);
            for (std::size_t r = begin; r < end; ++r) {
                batch_labels[r - begin] = labels[order[r]];
            }
            forward_backward(net.w1(), net.w2(), x, batch_labels, cfg.loss, cfg.learning_rate,
                             nullptr, nullptr);
            if (!view(net.w1()).allFinite() || !view(net.w2()).allFinite()) {
                throw TrainingError("train_sgd: non-finite weights at epoch " + std::to_string(epoch)
                                        + ", step " + std::to_string(step),
                                    epoch, step);
            }
        }
        if (check(epoch)) {
            result.converged = true;
            return result;
        }
    }
    return result;
}

double loss_and_gradient(const TwoLayerNet& net, const Dataset& data, TrainLoss loss,
                         Gradients* grad)
{
    if (data.empty()) {
        throw std::invalid_argument("loss_and_gradient: empty dataset");
    }
    check_input(net, data, "loss_and_gradient");
    check_labels(data, "loss_and_gradient");
    std::vector<int> labels;
    labels.reserve(data.size());
    for (const auto& e : data) {
        labels.push_back(e.y);
    }
    const RowMat x = pack_rows(data, identity_index(data.size()), 0, data.size(), net.has_bias());
    Matrix w1 = net.w1();
    Matrix w2 = net.w2();
    RowMat d1;
    RowMat d2;
    const double value = forward_backward(w1, w2, x, labels, loss, 0.0, &d1, &d2);
    if (grad != nullptr) {
        grad->w1 = Matrix(w1.rows(), w1.cols());
        grad->w2 = Matrix(w2.rows(), w2.cols());
        view(grad->w1) = d1;
        view(grad->w2) = d2;
    }
    return value;
}

// ---------------------------------------------------------------------------

std::vector<double> margins(const TwoLayerNet& net, const Dataset& data)
{
    check_input(net, data, "margins");
    check_labels(data, "margins");
    auto out = outputs(net, data);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= static_cast<double>(data[i].y);
    }
    return out;
}

double evaluate_error(const TwoLayerNet& net, const Dataset& data, const LossKind& loss)
{
    if (data.empty()) {
        throw std::invalid_argument("evaluate_error: empty dataset");
    }
    check_input(net, data, "evaluate_error");
    const auto out = outputs(net, data);
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        total += evaluate_loss(loss, out[i], data[i].y);
    }
    return total / static_cast<double>(out.size());
}

std::vector<std::pair<double, double>> interpolate_eval(const TwoLayerNet& a, const TwoLayerNet& b,
                                                        std::span<const double> ts,
                                                        const Dataset& data)
{
    if (!a.w1().same_shape(b.w1()) || !a.w2().same_shape(b.w2()) || a.has_bias() != b.has_bias()) {
        throw std::invalid_argument("interpolate_eval: nets have different shapes");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(ts.size());
    for (double t : ts) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw std::invalid_argument("interpolate_eval: t must lie in [0, 1]");
        }
        Matrix w1 = a.w1() * (1.0 - t) + b.w1() * t;
        Matrix w2 = a.w2() * (1.0 - t) + b.w2() * t;
        const auto net = a.with_weights(std::move(w1), std::move(w2));
        out.emplace_back(t, evaluate_error(net, data, LossKind::zero_one()));
    }
    return out;
}

// ---------------------------------------------------------------------------

void save_net(const TwoLayerNet& net, std::ostream& out)
{
    out << "uclab-two-layer 1\n";
    out << "bias " << (net.has_bias() ? 1 : 0) << '\n';
    write_matrix(out, "W1", net.w1());
    write_matrix(out, "W2", net.w2());
    write_matrix(out, "Z1", net.z1());
    write_matrix(out, "Z2", net.z2());
    if (!out) {
        throw std::runtime_error("save_net: write failed");
    }
}

TwoLayerNet load_net(std::istream& in)
{
    std::string magic;
    int version = 0;
    std::string key;
    int bias = -1;
    if (!(in >> magic >> version) || magic != "uclab-two-layer" || version != 1) {
        throw std::runtime_error("load_net: not a uclab-two-layer v1 file");
    }
    if (!(in >> key >> bias) || key != "bias" || (bias != 0 && bias != 1)) {
        throw std::runtime_error("load_net: bad bias line");
    }
    auto w1 = read_matrix(in, "W1");
    auto w2 = read_matrix(in, "W2");
    auto z1 = read_matrix(in, "Z1");
    auto z2 = read_matrix(in, "Z2");
    return TwoLayerNet(std::move(w1), std::move(w2), std::move(z1), std::move(z2), bias == 1);
}

} // namespace uclab::relu
