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

#include "uclab/harness.hpp"
#include "uclab/bounds_audit.hpp"
#include "uclab/expnet_example.hpp"
#include "uclab/linear_example.hpp"
#include "uclab/relu_lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace uclab::harness {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_real(const std::string& key, const std::string& text)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument("key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text)
{
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument("key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

// Typed access to params; every key must be consumed exactly by the
// experiment that reads it.
class Params {
public:
    explicit Params(const std::map<std::string, std::string>& raw) : raw_(raw) {}

    double real(const std::string& key, double fallback)
    {
        const auto* v = find(key);
        return v ? parse_real(key, *v) : fallback;
    }

    std::size_t count(const std::string& key, std::size_t fallback)
    {
        const auto* v = find(key);
        if (!v) {
            return fallback;
        }
        const auto n = parse_int(key, *v);
        if (n < 0) {
            throw std::invalid_argument("key '" + key + "' must be >= 0");
        }
        return static_cast<std::size_t>(n);
    }

    bool flag(const std::string& key, bool fallback)
    {
        const auto* v = find(key);
        if (!v) {
            return fallback;
        }
        if (*v == "1" || *v == "true") {
            return true;
        }
        if (*v == "0" || *v == "false") {
            return false;
        }
        throw std::invalid_argument("key '" + key + "': expected 0/1/true/false");
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        const auto* v = find(key);
        return v ? *v : fallback;
    }

    void finish(const std::string& experiment) const
    {
        for (const auto& [k, v] : raw_) {
            if (!used_.contains(k)) {
                throw std::invalid_argument("experiment '" + experiment + "' has no key '" + k + "'");
            }
        }
    }

private:
    const std::string* find(const std::string& key)
    {
        used_.insert(key);
        const auto it = raw_.find(key);
        return it == raw_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, std::string>& raw_;
    std::set<std::string> used_;
};

struct RowSink {
    std::string experiment;
    std::size_t m;
    std::int64_t seed;
    std::vector<SweepRow> rows;

    void add(const std::string& metric, double value, std::optional<double> std_err = std::nullopt)
    {
        rows.push_back({experiment, m, seed, metric, value, std_err});
    }
};

void add_report(RowSink& sink, const TrialReport& r)
{
    sink.add("input_dim", static_cast<double>(r.input_dim));
    sink.add("theorem_regime", r.theorem_regime ? 1.0 : 0.0);
    sink.add("train_loss", r.train_loss);
    sink.add("test_loss", r.test_loss, r.test_std_err);
    sink.add("bad_set_loss", r.bad_set_loss);
    sink.add("witness", r.witness);
    sink.add("train_error", r.train_error);
    sink.add("test_error", r.test_error, r.test_error_std_err);
    sink.add("bad_set_error", r.bad_set_error);
    for (const auto& [name, value] : r.extras) {
        sink.add(name, value);
    }
}

void add_eps_rows(RowSink& sink, const std::vector<TrialReport>& reports, double delta)
{
    if (reports.size() < 10) {
        return;
    }
    const auto eps = audit::estimate_eps(reports, delta);
    double eps_hat = 0.0;
    for (const auto& r : reports) {
        eps_hat = std::max(eps_hat, r.train_loss);
    }
    const auto pb = audit::pb_det_lower_bounds(eps.eps_unif_alg_lower, eps.eps_gen_estimate, eps_hat);
    sink.add("eps_gen", eps.eps_gen_estimate, eps.std_err);
    sink.add("eps_unif_alg_lower", eps.eps_unif_alg_lower, eps.std_err);
    sink.add("pb_det_a", pb.type_a);
    sink.add("pb_det_b", pb.type_b);
}

template <typename Fn>
auto map_seeds(const std::vector<std::int64_t>& seeds, std::size_t threads, Fn fn)
{
    using Result = decltype(fn(std::int64_t{}));
    std::vector<Result> out(seeds.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            out[i] = fn(seeds[i]);
        }
        return out;
    }
    for (std::size_t begin = 0; begin < seeds.size(); begin += threads) {
        const auto end = std::min(seeds.size(), begin + threads);
        std::vector<std::future<Result>> wave;
        for (std::size_t i = begin; i < end; ++i) {
            wave.push_back(std::async(std::launch::async, fn, seeds[i]));
        }
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = wave[i - begin].get();
        }
    }
    return out;
}

template <typename Fn>
auto guarded(const std::string& experiment, Fn fn)
{
    return [experiment, fn](std::int64_t seed) {
        try {
            return fn(seed);
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error(experiment + " (seed " + std::to_string(seed) + "): " + e.what());
        }
    };
}

RngStream root_stream(std::int64_t seed) { return RngStream{static_cast<std::uint64_t>(seed), 0}; }

double hash_tag(std::uint64_t h) { return static_cast<double>(h >> 11); }

// --------------------------------------------------------------------------

std::vector<SweepRow> run_linear(const ExperimentConfig& cfg, Params& p)
{
    const auto m = p.count("m", 100);
    const double epsilon = p.real("epsilon", 0.05);
    const double delta = p.real("delta", 0.05);
    const auto dim = p.text("dim", "theorem");
    const auto n_test = p.count("n_test", 10000);
    const double gamma = p.real("gamma", 1.0);
    const auto K = p.count("K", 1);
    p.finish(cfg.experiment);

    std::size_t D = 0;
    bool theorem = false;
    if (dim == "theorem") {
        D = linear::min_dimension(m, epsilon, delta);
        theorem = true;
    } else if (dim == "empirical") {
        D = linear::empirical_dimension(m);
    } else {
        D = static_cast<std::size_t>(parse_int("dim", dim));
        theorem = D >= linear::min_dimension(m, epsilon, delta);
    }
    auto task = linear::LinearTaskConfig::make(m, D, epsilon, delta, K);
    task.theorem_regime = theorem;

    const auto hash = config_hash(cfg);
    auto reports = map_seeds(cfg.seeds, cfg.threads, guarded("linear", [&](std::int64_t seed) {
        return linear::run_trial(task, n_test, gamma, root_stream(seed));
    }));
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        RowSink sink{"linear", m, cfg.seeds[i], {}};
        add_report(sink, reports[i]);
        sink.add("config_hash", hash_tag(hash));
        rows.insert(rows.end(), sink.rows.begin(), sink.rows.end());
    }
    RowSink agg{"linear", m, kAggregateSeed, {}};
    add_eps_rows(agg, reports, delta);
    rows.insert(rows.end(), agg.rows.begin(), agg.rows.end());
    return rows;
}

std::vector<SweepRow> run_expnet(const ExperimentConfig& cfg, Params& p)
{
    const auto m = p.count("m", 32);
    const double epsilon = p.real("epsilon", 0.05);
    const double delta = p.real("delta", 0.05);
    const auto dim = p.text("dim", "theorem");
    const auto n_test = p.count("n_test", 10000);
    p.finish(cfg.experiment);

    const auto req = expnet::exp_dimension_requirement(m, epsilon, delta);
    std::size_t D = req.D;
    bool theorem = req.sample_condition_met;
    if (dim != "theorem") {
        D = static_cast<std::size_t>(parse_int("dim", dim));
        theorem = theorem && D >= req.D;
    }
    auto task = expnet::ExpTaskConfig::make(m, D, epsilon, delta);
    task.theorem_regime = theorem;

    const auto hash = config_hash(cfg);
    auto reports = map_seeds(cfg.seeds, cfg.threads, guarded("expnet", [&](std::int64_t seed) {
        return expnet::run_trial_exp(task, n_test, root_stream(seed));
    }));
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        RowSink sink{"expnet", m, cfg.seeds[i], {}};
        add_report(sink, reports[i]);
        sink.add("config_hash", hash_tag(hash));
        rows.insert(rows.end(), sink.rows.begin(), sink.rows.end());
    }
    RowSink agg{"expnet", m, kAggregateSeed, {}};
    add_eps_rows(agg, reports, delta);
    rows.insert(rows.end(), agg.rows.begin(), agg.rows.end());
    return rows;
}

std::vector<SweepRow> run_abstract(const ExperimentConfig& cfg, Params& p)
{
    const auto m = p.count("m", 100);
    const auto D = p.count("dim", 50);
    const auto n_test = p.count("n_test", 100000);
    p.finish(cfg.experiment);

    const auto hash = config_hash(cfg);
    auto reports = map_seeds(cfg.seeds, cfg.threads, guarded("abstract", [&](std::int64_t seed) {
        return audit::run_abstract_trial(D, m, n_test, root_stream(seed));
    }));
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        RowSink sink{"abstract", m, cfg.seeds[i], {}};
        add_report(sink, reports[i]);
        sink.add("config_hash", hash_tag(hash));
        rows.insert(rows.end(), sink.rows.begin(), sink.rows.end());
    }
    return rows;
}

struct ReluSettings {
    relu::HypersphereConfig task;
    relu::TrainConfig train;
    std::size_t width = 8192;
    double init_scale = 1.0;
    double init_scale_out = 1.0;
    bool bias = true;
    std::size_t n_test = 10000;
    bool paired = false;
    std::string net_in;
    std::string net_out;
};

ReluSettings read_relu(Params& p, bool paired_default)
{
    ReluSettings s;
    s.task.dim = p.count("dim", 256);
    s.task.n = p.count("m", 4096);
    s.task.r_inner = p.real("r_inner", 1.0);
    s.task.r_outer = p.real("r_outer", 1.1);
    s.width = p.count("width", 8192);
    s.train.learning_rate = p.real("lr", 0.1);
    s.train.batch_size = p.count("batch", 64);
    s.train.stop_fraction = p.real("stop_fraction", 0.99);
    s.train.stop_margin = p.real("stop_margin", 10.0);
    s.train.max_epochs = p.count("max_epochs", 500);
    const auto loss = p.text("loss", "cross_entropy");
    if (loss == "cross_entropy") {
        s.train.loss = relu::TrainLoss::cross_entropy;
    } else if (loss == "squared") {
        s.train.loss = relu::TrainLoss::squared;
    } else {
        throw std::invalid_argument("key 'loss': expected cross_entropy or squared");
    }
    s.init_scale = p.real("init_scale", 1.0);
    s.init_scale_out = p.real("init_scale_out", s.init_scale);
    s.bias = p.flag("bias", true);
    s.n_test = p.count("n_test", 10000);
    s.paired = p.flag("paired", paired_default);
    s.net_in = p.text("net_in", "");
    s.net_out = p.text("net_out", "");
    s.task.validate();
    s.train.validate();
    return s;
}

std::string seeded_path(const std::string& path, std::int64_t seed)
{
    return path + "." + std::to_string(seed);
}

std::vector<SweepRow> relu_trial(const std::string& name, const ReluSettings& s, std::int64_t seed,
                                 std::uint64_t hash)
{
    const auto root = root_stream(seed);
    const auto train = relu::sample_hypersphere(s.task, root.derive(1));
    auto test_cfg = s.task;
    test_cfg.n = s.n_test;
    const auto test = relu::sample_hypersphere(test_cfg, root.derive(2));
    const auto swapped = relu::project_swap(train, s.task);

    RowSink sink{name, s.task.n, seed, {}};
    relu::TwoLayerNet net;
    if (!s.net_in.empty()) {
        std::ifstream in(seeded_path(s.net_in, seed));
        if (!in) {
            throw std::runtime_error("cannot open " + seeded_path(s.net_in, seed));
        }
        net = relu::load_net(in);
    } else {
        net = relu::init_two_layer(s.task.dim, s.width, root.derive(3), s.init_scale,
                                   s.init_scale_out, s.bias);
        auto tc = s.train;
        tc.rng = root.derive(4);
        const auto initial = net;
        const auto result = relu::train_sgd(net, train, tc);
        sink.add("epochs", static_cast<double>(result.epochs_used));
        sink.add("converged", result.converged ? 1.0 : 0.0);
        sink.add("margin_fraction", result.margin_fraction);
        if (s.paired) {
            const auto other_data = relu::sample_hypersphere(s.task, root.derive(5));
            auto other = initial;
            tc.rng = root.derive(6);
            relu::train_sgd(other, other_data, tc);
            sink.add("dist_between_runs", audit::trajectory_diagnostics(net, other).dist_between_runs);
        }
        if (!s.net_out.empty()) {
            std::ofstream out(seeded_path(s.net_out, seed));
            relu::save_net(net, out);
            if (!out) {
                throw std::runtime_error("cannot write " + seeded_path(s.net_out, seed));
            }
        }
    }

    const double test_error = relu::evaluate_error(net, test, LossKind::zero_one());
    sink.add("train_error", relu::evaluate_error(net, train, LossKind::zero_one()));
    sink.add("test_error", test_error,
             std::sqrt(test_error * (1.0 - test_error) / static_cast<double>(test.size())));
    sink.add("bad_set_error", relu::evaluate_error(net, swapped, LossKind::zero_one()));

    const double B = audit::input_norm_bound(net, train);
    const auto bounds = audit::compute_bounds(net, B, s.train.stop_margin, train.size());
    sink.add("input_norm_bound", B);
    sink.add("dist_from_init", net.distance_from_init());
    sink.add("dist_from_origin", bounds.dist_from_origin);
    sink.add("spectral_norm_w1", bounds.spectral_norms[0]);
    sink.add("spectral_norm_w2", bounds.spectral_norms[1]);
    sink.add("spectral_product", bounds.spectral_product);
    sink.add("bound_neyshabur18", bounds.bound_neyshabur18);
    sink.add("bound_bartlett17", bounds.bound_bartlett17);
    sink.add("bound_two_layer19", *bounds.bound_two_layer19);

    const auto ms = audit::margin_stats(net, train, test);
    sink.add("margin_p1", ms.percentile_1);
    sink.add("margin_median", ms.median);
    sink.add("mean_train_margin", ms.mean_train);
    sink.add("mean_test_margin", ms.mean_test);
    sink.add("pseudo_overfit_gap", ms.pseudo_overfit_gap);
    sink.add("config_hash", hash_tag(hash));
    return sink.rows;
}

std::vector<SweepRow> run_relu(const ExperimentConfig& cfg, Params& p, bool paired_default)
{
    const auto settings = read_relu(p, paired_default);
    p.finish(cfg.experiment);
    const auto hash = config_hash(cfg);
    const auto name = cfg.experiment;
    auto per_seed = map_seeds(cfg.seeds, cfg.threads, guarded(name, [&](std::int64_t seed) {
        return relu_trial(name, settings, seed, hash);
    }));
    std::vector<SweepRow> rows;
    for (auto& r : per_seed) {
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return rows;
}

std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool row_less(const SweepRow& a, const SweepRow& b)
{
    return std::tie(a.experiment, a.m, a.seed, a.metric) < std::tie(b.experiment, b.m, b.seed, b.metric);
}

} // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        }
        if (!seen.insert(key).second) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '"
                                        + key + "'");
        }
        if (key == "experiment") {
            cfg.experiment = value;
        } else if (key == "seeds") {
            for (const auto& s : split(value, ',')) {
                cfg.seeds.push_back(parse_int("seeds", s));
            }
        } else if (key == "out") {
            cfg.output_path = value;
        } else if (key == "threads") {
            cfg.threads = static_cast<std::size_t>(std::max<std::int64_t>(1, parse_int("threads", value)));
        } else {
            cfg.params[key] = value;
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string canonical_text(const ExperimentConfig& cfg)
{
    std::ostringstream out;
    out << "experiment=" << cfg.experiment << '\n';
    for (const auto& [k, v] : cfg.params) {
        out << k << '=' << v << '\n';
    }
    out << "seeds=";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        out << (i ? "," : "") << cfg.seeds[i];
    }
    out << '\n';
    return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

const std::vector<MetricInfo>& metric_registry()
{
    static const std::vector<MetricInfo> registry = {
        {"input_dim", "count", "input dimension of the task"},
        {"theorem_regime", "flag", "1 when the dimension meets the proven requirement"},
        {"train_loss", "fraction", "margin loss on the training set"},
        {"test_loss", "fraction", "Monte Carlo margin loss on fresh draws"},
        {"bad_set_loss", "fraction", "margin loss on the bad set"},
        {"witness", "fraction", "|test_loss - bad_set_loss|"},
        {"train_error", "fraction", "0-1 error on the training set"},
        {"test_error", "fraction", "Monte Carlo 0-1 error on fresh draws"},
        {"bad_set_error", "fraction", "0-1 error on the bad set"},
        {"weight_norm", "l2", "linear: ||w||"},
        {"w1_norm", "l2", "linear: ||w1||"},
        {"w2_norm", "l2", "linear: ||w2||"},
        {"min_train_margin", "logit", "linear: smallest y h(x) on the training set"},
        {"max_bad_margin", "logit", "linear: largest y h(x) on the bad set"},
        {"streamed", "flag", "linear: training set regenerated instead of stored"},
        {"projected_test", "flag", "linear: test draws via the exact projection onto w2"},
        {"train_margin_fraction", "fraction", "expnet: share of training points with y h >= 1"},
        {"min_train_log_margin", "log", "expnet: smallest log(y h) on the training set"},
        {"non_finite", "count", "expnet: NaN or infinite log-magnitudes"},
        {"eps_gen", "fraction", "estimated generalization error over seeds"},
        {"eps_unif_alg_lower", "fraction", "lower-bound certificate on algorithm-dependent uniform convergence"},
        {"pb_det_a", "fraction", "derandomized PAC-Bayes lower bound, type A"},
        {"pb_det_b", "fraction", "derandomized PAC-Bayes lower bound, type B"},
        {"epochs", "count", "relu: SGD epochs run"},
        {"converged", "flag", "relu: stop rule reached"},
        {"margin_fraction", "fraction", "relu: share of training margins >= stop_margin"},
        {"dist_between_runs", "l2", "relu: distance between nets trained on two draws from one init"},
        {"input_norm_bound", "l2", "relu: B, largest training input norm incl. bias coordinate"},
        {"dist_from_init", "l2", "relu: distance from initialization"},
        {"dist_from_origin", "l2", "relu: distance from the origin"},
        {"spectral_norm_w1", "l2", "relu: ||W1||_2"},
        {"spectral_norm_w2", "l2", "relu: ||W2||_2"},
        {"spectral_product", "l2", "relu: ||W1||_2 ||W2||_2"},
        {"bound_neyshabur18", "bound", "relu: spectral bound with Frobenius distance term"},
        {"bound_bartlett17", "bound", "relu: spectral bound with (2,1) distance term"},
        {"bound_two_layer19", "bound", "relu: two-layer width-aware bound"},
        {"margin_p1", "logit", "relu: 1st percentile of training margins"},
        {"margin_median", "logit", "relu: median training margin"},
        {"mean_train_margin", "logit", "relu: mean training margin"},
        {"mean_test_margin", "logit", "relu: mean test margin"},
        {"pseudo_overfit_gap", "logit", "relu: mean train margin - mean test margin"},
        {"config_hash", "id", "top 53 bits of the FNV-1a hash of the canonical config"},
    };
    return registry;
}

bool is_registered_metric(const std::string& name)
{
    std::string base = name;
    for (const char* suffix : {".slope", ".intercept", ".r2"}) {
        const std::string s(suffix);
        if (base.size() > s.size() && base.compare(base.size() - s.size(), s.size(), s) == 0) {
            base.resize(base.size() - s.size());
            break;
        }
    }
    const auto& reg = metric_registry();
    return std::any_of(reg.begin(), reg.end(), [&](const MetricInfo& i) { return base == i.name; });
}

std::vector<SweepRow> run_experiment(const ExperimentConfig& cfg)
{
    if (cfg.seeds.empty()) {
        throw std::invalid_argument("no seeds given");
    }
    Params p(cfg.params);
    if (cfg.experiment == "linear") {
        return run_linear(cfg, p);
    }
    if (cfg.experiment == "expnet") {
        return run_expnet(cfg, p);
    }
    if (cfg.experiment == "abstract") {
        return run_abstract(cfg, p);
    }
    if (cfg.experiment == "relu") {
        return run_relu(cfg, p, false);
    }
    if (cfg.experiment == "bounds-report") {
        return run_relu(cfg, p, true);
    }
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<std::string>& values)
{
    if (values.size() < 2) {
        throw std::invalid_argument("sweep: slope fit needs >= 2 points, got "
                                    + std::to_string(values.size()));
    }
    SweepResult result;
    // metric -> list of (axis value, seed-mean)
    std::map<std::string, std::vector<std::pair<double, double>>> means;
    std::map<std::string, std::size_t> seen_in;
    for (const auto& value : values) {
        auto cfg = base;
        cfg.params[axis] = value;
        auto rows = run_experiment(cfg);
        const double x = parse_real(axis, value);
        std::map<std::string, std::pair<double, std::size_t>> acc;
        for (auto& row : rows) {
            if (axis != "m") {
                row.experiment += "[" + axis + "=" + value + "]";
            }
            if (row.seed != kAggregateSeed && row.metric != "config_hash") {
                auto& a = acc[row.metric];
                a.first += row.value;
                a.second += 1;
            }
        }
        for (const auto& [metric, a] : acc) {
            means[metric].emplace_back(x, a.first / static_cast<double>(a.second));
        }
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
    for (const auto& [metric, pts] : means) {
        const bool usable = pts.size() == values.size()
                            && std::all_of(pts.begin(), pts.end(), [](const auto& pt) {
                                   return pt.second > 0.0 && std::isfinite(pt.second);
                               });
        if (!usable) {
            continue;
        }
        const auto fit = fit_loglog_slope(pts);
        result.slopes.push_back({metric, fit});
        result.rows.push_back({base.experiment, 0, kAggregateSeed, metric + ".slope", fit.exponent, {}});
        result.rows.push_back({base.experiment, 0, kAggregateSeed, metric + ".intercept", fit.intercept, {}});
        result.rows.push_back({base.experiment, 0, kAggregateSeed, metric + ".r2", fit.r_squared, {}});
    }
    return result;
}

void emit_csv(std::vector<SweepRow> rows, std::ostream& out)
{
    for (const auto& r : rows) {
        if (!is_registered_metric(r.metric)) {
            throw std::invalid_argument("emit_csv: unregistered metric '" + r.metric + "'");
        }
        if (r.experiment.find_first_of(",\n\"") != std::string::npos) {
            throw std::invalid_argument("emit_csv: experiment name needs quoting: " + r.experiment);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), row_less);
    out << "experiment,m,seed,metric,value,std_err\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.m << ',' << r.seed << ',' << r.metric << ','
            << format_real(r.value) << ',';
        if (r.std_err) {
            out << format_real(*r.std_err);
        }
        out << '\n';
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("emit_csv: write failed");
    }
}

void emit_csv(std::vector<SweepRow> rows, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("emit_csv: cannot open " + path);
    }
    emit_csv(std::move(rows), out);
}

std::vector<SweepRow> parse_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "experiment,m,seed,metric,value,std_err") {
        throw std::runtime_error("parse_csv: bad header");
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        const auto f = split(line, ',');
        if (f.size() != 6) {
            throw std::runtime_error("parse_csv: expected 6 fields in '" + line + "'");
        }
        try {
            SweepRow r;
            r.experiment = f[0];
            r.m = static_cast<std::size_t>(parse_int("m", f[1]));
            r.seed = parse_int("seed", f[2]);
            r.metric = f[3];
            r.value = parse_real("value", f[4]);
            if (!f[5].empty()) {
                r.std_err = parse_real("std_err", f[5]);
            }
            rows.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(std::string("parse_csv: ") + e.what());
        }
    }
    return rows;
}

} // namespace uclab::harness
