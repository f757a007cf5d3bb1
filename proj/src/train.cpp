#include "difm/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "difm/metrics.hpp"

namespace difm {

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (l2 < 0.0) throw ConfigError("l2 must be >= 0");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (!(val_max_fpr > 0.0 && val_max_fpr <= 1.0)) throw ConfigError("val_max_fpr must be in (0, 1]");
}

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState s;
    s.m = difm::zeros_like(params);
    s.v = difm::zeros_like(params);
    return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const TrainConfig& cfg) {
    state.step += 1;
    double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));

    auto p_refs = tensor_refs(params);
    auto g_refs = tensor_refs(const_cast<ModelParams&>(grads));
    auto m_refs = tensor_refs(state.m);
    auto v_refs = tensor_refs(state.v);
    for (size_t t = 0; t < p_refs.size(); ++t) {
        auto p = p_refs[t].data;
        auto g = g_refs[t].data;
        auto m = m_refs[t].data;
        auto v = v_refs[t].data;
        if (g.size() != p.size()) throw ShapeError("gradient shape mismatch at " + p_refs[t].name);
        for (size_t i = 0; i < p.size(); ++i) {
            if (!std::isfinite(g[i])) throw NumericError("non-finite gradient in " + p_refs[t].name);
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
            p[i] -= cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_epsilon);
        }
    }
}

std::vector<double> score_dataset(std::span<const EventSequence> samples, const ModelParams& params,
                                  const ModelConfig& cfg, const IndexLayout& layout) {
    std::vector<double> scores;
    scores.reserve(samples.size());
    for (const auto& s : samples) scores.push_back(forward(s, params, cfg, layout, Mode::eval).y_hat);
    return scores;
}

static double validation_metric(const std::vector<EventSequence>& val, const ModelParams& params,
                                const ModelConfig& cfg, const IndexLayout& layout, double max_fpr) {
    std::vector<double> scores = score_dataset(val, params, cfg, layout);
    std::vector<int> labels;
    labels.reserve(val.size());
    for (const auto& s : val) labels.push_back(s.label);
    return partial_auc(scores, labels, max_fpr).partial_auc_standardized;
}

TrainResult train(const std::vector<EventSequence>& train_set, const std::vector<EventSequence>& val_set,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg, const IndexLayout& layout,
                  std::ostream* log) {
    model_cfg.validate();
    train_cfg.validate();
    if (train_set.empty()) throw ConfigError("training split is empty");
    if (val_set.empty()) throw ConfigError("validation split is empty");

    ModelParams params = init_params(model_cfg, layout.vocab_size, train_cfg.seed);
    ModelParams grads = zeros_like(params);
    AdamState adam = AdamState::zeros_like(params);

    TrainResult result;
    result.best_metric = -1.0;

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<EventSequence> batch;

    int epochs_without_improvement = 0;
    for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(train_cfg.seed, 0x5a00 + static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        Rng dropout_rng(derive_seed(train_cfg.seed, 0xd000 + static_cast<uint64_t>(epoch)));

        double loss_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
            size_t end = std::min(order.size(), start + train_cfg.batch_size);
            batch.clear();
            for (size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
            double obj = batch_backward(batch, params, model_cfg, layout, train_cfg.l2, Mode::train, &dropout_rng, grads);
            if (!std::isfinite(obj)) throw NumericError("non-finite training loss");
            loss_sum += obj * static_cast<double>(batch.size());
            adam_step(params, grads, adam, train_cfg);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(train_set.size());
        stats.val_metric = validation_metric(val_set, params, model_cfg, layout, train_cfg.val_max_fpr);

        if (stats.val_metric > result.best_metric) {
            result.best_metric = stats.val_metric;
            result.best_epoch = epoch;
            result.best_params = params;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
        }
        stats.best_metric = result.best_metric;
        result.history.push_back(stats);

        if (log) {
            (*log) << "epoch=" << epoch << " train_loss=" << stats.train_loss << " val_pauc=" << stats.val_metric
                   << " best=" << stats.best_metric << "\n";
        }
        if (epochs_without_improvement >= train_cfg.patience) break;
    }
    return result;
}

// A deterministic toy batch that touches every dictionary index, so every
// embedding row receives a data gradient and finite differences stay well
// conditioned.
static std::vector<EventSequence> toy_batch(const ModelConfig& cfg, int values_per_field,
                                            uint64_t seed) {
    Rng rng(derive_seed(seed, 0x70b));
    std::vector<EventSequence> batch;

    for (int rep = 0; rep < 2; ++rep) {
        // coverage samples: event j holds value j of every field
        EventSequence s;
        s.user_id = "cover" + std::to_string(rep);
        s.label = rep % 2;
        for (int j = 0; j < values_per_field && j < cfg.max_events; ++j) {
            SparseVector ev;
            for (int n = 0; n < cfg.n_fields; ++n) {
                double x = n == 0 ? rng.uniform(0.5, 1.5) : 1.0;
                ev.entries.push_back({n * values_per_field + j, x});
            }
            s.events.push_back(ev);
        }
        batch.push_back(std::move(s));
    }

    for (int i = 0; i < 6; ++i) {
        EventSequence s;
        s.user_id = "rand" + std::to_string(i);
        s.label = static_cast<int>(rng.below(2));
        int n_events = rng.range(1, cfg.max_events);
        for (int t = 0; t < n_events; ++t) {
            SparseVector ev;
            for (int n = 0; n < cfg.n_fields; ++n) {
                if (rng.bernoulli(0.2)) continue;  // sparse: sometimes absent
                double x = n == 0 ? rng.uniform(-1.5, 1.5) : 1.0;
                ev.entries.push_back({n * values_per_field + static_cast<int>(rng.below(values_per_field)), x});
            }
            s.events.push_back(ev);
        }
        if (s.events.empty()) s.events.push_back(SparseVector{});
        batch.push_back(std::move(s));
    }
    return batch;
}

GradCheckReport gradient_check(const ModelConfig& cfg_in, double tolerance, uint64_t seed, double l2,
                               const std::string& corrupt_tensor) {
    ModelConfig cfg = cfg_in;
    cfg.dropout = 0.0;
    cfg.validate();

    const int values_per_field = 3;
    IndexLayout layout;
    layout.vocab_size = cfg.n_fields * values_per_field;
    layout.field_of.resize(layout.vocab_size);
    for (int i = 0; i < layout.vocab_size; ++i) layout.field_of[i] = i / values_per_field;

    std::vector<EventSequence> batch = toy_batch(cfg, values_per_field, seed);
    ModelParams params = init_params(cfg, layout.vocab_size, derive_seed(seed, 0x9c));
    // Every tensor gets a random value, biases included: structural zeros park
    // relu preactivations exactly on the kink, where central differences and
    // the (one-sided) analytic derivative legitimately disagree. Magnitudes
    // stay off zero so coordinates whose gradient is only the l2 term keep a
    // gradient above the finite-difference noise floor.
    {
        Rng rng(derive_seed(seed, 0xb1a5));
        for (auto& t : tensor_refs(params))
            for (auto& v : t.data) v = rng.uniform(0.15, 0.6) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    }
    ModelParams grads = zeros_like(params);
    batch_backward(batch, params, cfg, layout, l2, Mode::eval, nullptr, grads);

    const double h = 1e-5;
    GradCheckReport report;
    report.tolerance = tolerance;

    auto p_refs = tensor_refs(params);
    auto g_refs = tensor_refs(grads);
    for (size_t t = 0; t < p_refs.size(); ++t) {
        GradCheckGroup group;
        group.name = p_refs[t].name;
        double corruption = p_refs[t].name == corrupt_tensor ? 2.0 : 1.0;
        for (size_t i = 0; i < p_refs[t].data.size(); ++i) {
            double saved = p_refs[t].data[i];
            p_refs[t].data[i] = saved + h;
            double up = batch_objective(batch, params, cfg, layout, l2);
            p_refs[t].data[i] = saved - h;
            double down = batch_objective(batch, params, cfg, layout, l2);
            p_refs[t].data[i] = saved;

            double fd = (up - down) / (2.0 * h);
            double analytic = g_refs[t].data[i] * corruption;
            double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-12});
            group.worst_rel_err = std::max(group.worst_rel_err, rel);
        }
        if (group.worst_rel_err > report.worst_rel_err) {
            report.worst_rel_err = group.worst_rel_err;
            report.worst_tensor = group.name;
        }
        report.groups.push_back(std::move(group));
    }
    report.passed = report.worst_rel_err <= tolerance;
    return report;
}

}  // namespace difm
