#include "difm/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace difm {

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "same") return Variant::same;
    if (s == "alpha") return Variant::alpha;
    if (s == "beta") return Variant::beta;
    throw ConfigError("unknown variant: " + s + " (expected full|same|alpha|beta)");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::same: return "same";
        case Variant::alpha: return "alpha";
        case Variant::beta: return "beta";
    }
    return "full";
}

void ModelConfig::validate() const {
    if (k < 1) throw ConfigError("embedding dimension must be >= 1");
    if (max_events < 1) throw ConfigError("max_events must be >= 1");
    if (n_fields < 1) throw ConfigError("field count must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    for (int h : mlp_hidden)
        if (h < 1) throw ConfigError("mlp hidden dims must be >= 1");
}

IndexLayout IndexLayout::from_dictionary(const FieldValueDictionary& dict) {
    IndexLayout layout;
    layout.vocab_size = dict.size();
    layout.field_of.assign(layout.vocab_size, -1);
    for (const auto& f : dict.fields)
        for (int i = f.range_begin; i < f.range_end; ++i) layout.field_of[i] = f.schema.field_id;
    return layout;
}

static std::vector<Affine> make_mlp(const ModelConfig& cfg) {
    std::vector<Affine> mlp;
    int in_dim = 3 * cfg.k;
    for (int h : cfg.mlp_hidden) {
        mlp.emplace_back(h, in_dim);
        in_dim = h;
    }
    mlp.emplace_back(1, in_dim);
    return mlp;
}

ModelParams init_params(const ModelConfig& cfg, int vocab_size, uint64_t seed) {
    cfg.validate();
    if (vocab_size < 1) throw ConfigError("vocab size must be >= 1");

    ModelParams p;
    p.embeddings = Matrix(vocab_size, cfg.k);
    p.wide_weights.assign(vocab_size, 0.0);
    bool shared = cfg.variant == Variant::same;
    p.field_im = ImportanceParams::make(cfg.k, shared, cfg.im_activation);
    p.event_im = ImportanceParams::make(cfg.k, shared, cfg.im_activation);
    p.mlp = make_mlp(cfg);

    Rng rng(derive_seed(seed, 0x1a17));
    auto fill_uniform = [&](double* data, size_t n, int fan_in) {
        double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (size_t i = 0; i < n; ++i) data[i] = rng.uniform(-s, s);
    };
    fill_uniform(p.embeddings.data(), p.embeddings.size(), cfg.k);
    for (auto& net : p.field_im.nets) fill_uniform(net.w.data(), net.w.size(), net.in_dim());
    for (auto& net : p.event_im.nets) fill_uniform(net.w.data(), net.w.size(), net.in_dim());
    for (auto& layer : p.mlp) fill_uniform(layer.w.data(), layer.w.size(), layer.in_dim());
    return p;
}

ModelParams zeros_like(const ModelParams& params) {
    ModelParams z = params;
    for (auto& t : tensor_refs(z)) std::fill(t.data.begin(), t.data.end(), 0.0);
    return z;
}

std::vector<TensorRef> tensor_refs(ModelParams& p) {
    std::vector<TensorRef> refs;
    refs.push_back({"embeddings", {p.embeddings.data(), p.embeddings.size()}, true});
    refs.push_back({"wide", {p.wide_weights.data(), p.wide_weights.size()}, true});
    refs.push_back({"wide_bias", {&p.wide_bias, 1}, false});
    auto add_nets = [&](const std::string& prefix, std::vector<Affine>& nets) {
        for (size_t i = 0; i < nets.size(); ++i) {
            refs.push_back({prefix + "[" + std::to_string(i) + "].w", {nets[i].w.data(), nets[i].w.size()}, true});
            refs.push_back({prefix + "[" + std::to_string(i) + "].b", {nets[i].b.data(), nets[i].b.size()}, false});
        }
    };
    add_nets("field_im", p.field_im.nets);
    add_nets("event_im", p.event_im.nets);
    add_nets("mlp", p.mlp);
    return refs;
}

static void check_sample(const EventSequence& sample, const ModelConfig& cfg, const IndexLayout& layout) {
    if (sample.events.empty()) throw DataError("sample " + sample.user_id + " has no events");
    if (static_cast<int>(sample.events.size()) > cfg.max_events)
        throw DataError("sample " + sample.user_id + " longer than the configured window");
    for (const auto& ev : sample.events)
        for (const auto& e : ev.entries)
            if (e.index < 0 || e.index >= layout.vocab_size)
                throw DataError("sample " + sample.user_id + " references index " + std::to_string(e.index) +
                                " outside the dictionary");
}

static fm::RescaledSet rescaled_set(const FmNode& node, const ModelParams& params) {
    fm::RescaledSet set;
    set.reserve(node.items.size());
    for (const auto& it : node.items) set.push_back({it.x, params.embeddings.row(it.index)});
    return set;
}

static void run_field_fm(const EventSequence& sample, const ModelParams& params, const ModelConfig& cfg,
                         const IndexLayout& layout, std::vector<FmNode>& nodes, std::vector<Vec>& reps) {
    nodes.assign(cfg.n_fields, FmNode{});
    for (const auto& ev : sample.events)
        for (const auto& e : ev.entries) nodes[layout.field_of[e.index]].items.push_back({e.index, e.value});

    reps.resize(cfg.n_fields);
    for (int n = 0; n < cfg.n_fields; ++n) {
        auto fwd = fm::forward(rescaled_set(nodes[n], params), cfg.k);
        nodes[n].sum = std::move(fwd.sum);
        reps[n] = std::move(fwd.output);
        require_finite(reps[n], "field variations fm");
    }
}

static void run_event_fm(const EventSequence& sample, const ModelParams& params, const ModelConfig& cfg,
                         std::vector<FmNode>& nodes, std::vector<Vec>& reps) {
    size_t n_events = sample.events.size();
    nodes.assign(n_events, FmNode{});
    reps.resize(n_events);
    for (size_t t = 0; t < n_events; ++t) {
        for (const auto& e : sample.events[t].entries) nodes[t].items.push_back({e.index, e.value});
        auto fwd = fm::forward(rescaled_set(nodes[t], params), cfg.k);
        nodes[t].sum = std::move(fwd.sum);
        reps[t] = std::move(fwd.output);
        require_finite(reps[t], "field interactions fm");
    }
}

VariationsOut field_variations_forward(const EventSequence& sample, const ModelParams& params,
                                       const ModelConfig& cfg, const IndexLayout& layout) {
    check_sample(sample, cfg, layout);
    VariationsOut out;
    run_field_fm(sample, params, cfg, layout, out.nodes, out.field_reps);
    out.im = importance_forward({out.field_reps.data(), out.field_reps.size()}, params.field_im);
    return out;
}

InteractionsOut field_interactions_forward(const EventSequence& sample, const ModelParams& params,
                                           const ModelConfig& cfg, const IndexLayout& layout) {
    check_sample(sample, cfg, layout);
    InteractionsOut out;
    run_event_fm(sample, params, cfg, out.nodes, out.event_reps);
    size_t history = out.event_reps.size() - 1;
    out.has_history = history > 0;
    if (out.has_history) {
        out.im = importance_forward({out.event_reps.data(), history}, params.event_im);
        out.history_summary = out.im.output;
    } else {
        out.history_summary.assign(cfg.k, 0.0);
    }
    return out;
}

double wide_score(const EventSequence& sample, const ModelParams& params) {
    double score = params.wide_bias;
    for (const auto& ev : sample.events)
        for (const auto& e : ev.entries) score += params.wide_weights[e.index] * e.value;
    return score;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

static double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double bce_loss(double logit, int label) {
    if (label != 0 && label != 1) throw DataError("label must be 0 or 1");
    return softplus((1 - 2 * label) * logit);
}

double batch_mean_bce(std::span<const double> logits, std::span<const int> labels) {
    if (logits.size() != labels.size()) throw ShapeError("logits/labels length mismatch");
    if (logits.empty()) throw ShapeError("batch mean over empty batch");
    double total = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) total += bce_loss(logits[i], labels[i]);
    return total / static_cast<double>(logits.size());
}

static Vec draw_dropout_mask(Rng& rng, size_t n, double rate) {
    Vec mask(n);
    double keep = 1.0 - rate;
    for (auto& m : mask) m = rng.next_double() < keep ? 1.0 / keep : 0.0;
    return mask;
}

ForwardTrace forward(const EventSequence& sample, const ModelParams& params, const ModelConfig& cfg,
                     const IndexLayout& layout, Mode mode, Rng* dropout_rng) {
    cfg.validate();
    check_sample(sample, cfg, layout);
    bool use_dropout = mode == Mode::train && cfg.dropout > 0.0;
    if (use_dropout && dropout_rng == nullptr)
        throw ConfigError("train-mode forward with dropout requires an explicit dropout rng");

    ForwardTrace tr;
    int k = cfg.k;

    if (cfg.variations_active()) {
        run_field_fm(sample, params, cfg, layout, tr.field_nodes, tr.field_reps);
        tr.field_im = importance_forward({tr.field_reps.data(), tr.field_reps.size()}, params.field_im);
        require_finite(tr.field_im.output, "field importance");
        tr.variation_summary = tr.field_im.output;
        tr.field_weights = tr.field_im.weights;
    } else {
        tr.variation_summary.assign(k, 0.0);
    }

    if (cfg.interactions_active()) {
        run_event_fm(sample, params, cfg, tr.event_nodes, tr.event_reps);
        tr.current_event = tr.event_reps.back();
        size_t history = tr.event_reps.size() - 1;
        if (history > 0) {
            tr.event_im = importance_forward({tr.event_reps.data(), history}, params.event_im);
            require_finite(tr.event_im.output, "event importance");
            tr.history_summary = tr.event_im.output;
            tr.event_weights = tr.event_im.weights;
        } else {
            tr.history_summary.assign(k, 0.0);
        }
    } else {
        tr.current_event.assign(k, 0.0);
        tr.history_summary.assign(k, 0.0);
    }

    tr.mlp_input.reserve(3 * k);
    tr.mlp_input.insert(tr.mlp_input.end(), tr.variation_summary.begin(), tr.variation_summary.end());
    tr.mlp_input.insert(tr.mlp_input.end(), tr.history_summary.begin(), tr.history_summary.end());
    tr.mlp_input.insert(tr.mlp_input.end(), tr.current_event.begin(), tr.current_event.end());

    size_t n_layers = params.mlp.size();
    tr.mlp_layer_input.resize(n_layers);
    tr.mlp_pre.resize(n_layers);

    Vec x = tr.mlp_input;
    if (use_dropout) {
        tr.dropout_masks.resize(n_layers);
        tr.dropout_masks[0] = draw_dropout_mask(*dropout_rng, x.size(), cfg.dropout);
        for (size_t c = 0; c < x.size(); ++c) x[c] *= tr.dropout_masks[0][c];
    }
    for (size_t l = 0; l < n_layers; ++l) {
        tr.mlp_layer_input[l] = x;
        tr.mlp_pre[l].resize(params.mlp[l].out_dim());
        params.mlp[l].apply(tr.mlp_layer_input[l], tr.mlp_pre[l]);
        require_finite(tr.mlp_pre[l], "mlp");
        if (l + 1 < n_layers) {
            x.resize(tr.mlp_pre[l].size());
            for (size_t c = 0; c < x.size(); ++c) x[c] = apply_activation(cfg.mlp_activation, tr.mlp_pre[l][c]);
            if (use_dropout) {
                tr.dropout_masks[l + 1] = draw_dropout_mask(*dropout_rng, x.size(), cfg.dropout);
                for (size_t c = 0; c < x.size(); ++c) x[c] *= tr.dropout_masks[l + 1][c];
            }
        }
    }

    tr.wide_sum = wide_score(sample, params);
    if (!std::isfinite(tr.wide_sum)) throw NumericError("non-finite value in wide score");
    tr.logit = tr.mlp_pre.back()[0] + tr.wide_sum;
    if (!std::isfinite(tr.logit)) throw NumericError("non-finite value in output logit");
    tr.y_hat = sigmoid(tr.logit);
    return tr;
}

// Routes FM item gradients into the embedding table.
static void fm_node_backward(const FmNode& node, const ModelParams& params, std::span<const double> upstream,
                             ModelParams& grads) {
    auto item_grads = fm::backward(rescaled_set(node, params), node.sum, upstream);
    for (size_t i = 0; i < node.items.size(); ++i) {
        auto row = grads.embeddings.row(node.items[i].index);
        for (size_t c = 0; c < row.size(); ++c) row[c] += item_grads[i].d_vec[c];
    }
}

void backward(const EventSequence& sample, const ForwardTrace& trace, const ModelParams& params,
              const ModelConfig& cfg, double d_logit, ModelParams& grads) {
    int k = cfg.k;

    grads.wide_bias += d_logit;
    for (const auto& ev : sample.events)
        for (const auto& e : ev.entries) grads.wide_weights[e.index] += d_logit * e.value;

    // MLP, output layer first
    size_t n_layers = params.mlp.size();
    bool dropped = !trace.dropout_masks.empty();
    Vec d_pre{d_logit};
    Vec d_s;
    for (size_t l = n_layers; l-- > 0;) {
        const Affine& layer = params.mlp[l];
        Affine& g = grads.mlp[l];
        const Vec& x = trace.mlp_layer_input[l];
        Vec d_x(layer.in_dim(), 0.0);
        for (int r = 0; r < layer.out_dim(); ++r) {
            double dp = d_pre[r];
            if (dp == 0.0) continue;
            g.b[r] += dp;
            auto gw = g.w.row(r);
            auto wr = layer.w.row(r);
            for (int c = 0; c < layer.in_dim(); ++c) {
                gw[c] += dp * x[c];
                d_x[c] += wr[c] * dp;
            }
        }
        if (dropped)
            for (size_t c = 0; c < d_x.size(); ++c) d_x[c] *= trace.dropout_masks[l][c];
        if (l == 0) {
            d_s = std::move(d_x);
        } else {
            d_pre.resize(d_x.size());
            for (size_t c = 0; c < d_x.size(); ++c)
                d_pre[c] = d_x[c] * activation_grad(cfg.mlp_activation, trace.mlp_pre[l - 1][c]);
        }
    }

    std::span<const double> d_variation(d_s.data(), k);
    std::span<const double> d_history(d_s.data() + k, k);
    std::span<const double> d_current(d_s.data() + 2 * k, k);

    if (cfg.variations_active()) {
        auto d_field_reps = importance_backward({trace.field_reps.data(), trace.field_reps.size()}, params.field_im,
                                                trace.field_im, d_variation, grads.field_im);
        for (int n = 0; n < cfg.n_fields; ++n) fm_node_backward(trace.field_nodes[n], params, d_field_reps[n], grads);
    }

    if (cfg.interactions_active()) {
        size_t history = trace.event_reps.size() - 1;
        std::vector<Vec> d_events(trace.event_reps.size(), Vec(k, 0.0));
        for (int c = 0; c < k; ++c) d_events.back()[c] = d_current[c];
        if (history > 0) {
            auto d_hist = importance_backward({trace.event_reps.data(), history}, params.event_im, trace.event_im,
                                              d_history, grads.event_im);
            for (size_t t = 0; t < history; ++t)
                for (int c = 0; c < k; ++c) d_events[t][c] += d_hist[t][c];
        }
        for (size_t t = 0; t < trace.event_nodes.size(); ++t)
            fm_node_backward(trace.event_nodes[t], params, d_events[t], grads);
    }
}

static double l2_penalty(const ModelParams& params, double l2) {
    if (l2 == 0.0) return 0.0;
    double sum_sq = 0.0;
    auto refs = tensor_refs(const_cast<ModelParams&>(params));
    for (const auto& t : refs) {
        if (!t.regularized) continue;
        for (double v : t.data) sum_sq += v * v;
    }
    return l2 * sum_sq;
}

double batch_objective(std::span<const EventSequence> batch, const ModelParams& params, const ModelConfig& cfg,
                       const IndexLayout& layout, double l2) {
    if (batch.empty()) throw ConfigError("empty batch");
    double total = 0.0;
    for (const auto& sample : batch) total += bce_loss(forward(sample, params, cfg, layout, Mode::eval).logit, sample.label);
    return total / static_cast<double>(batch.size()) + l2_penalty(params, l2);
}

double batch_backward(std::span<const EventSequence> batch, const ModelParams& params, const ModelConfig& cfg,
                      const IndexLayout& layout, double l2, Mode mode, Rng* dropout_rng, ModelParams& grads) {
    if (batch.empty()) throw ConfigError("empty batch");
    for (auto& t : tensor_refs(grads)) std::fill(t.data.begin(), t.data.end(), 0.0);

    double inv = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& sample : batch) {
        ForwardTrace tr = forward(sample, params, cfg, layout, mode, dropout_rng);
        total += bce_loss(tr.logit, sample.label);
        backward(sample, tr, params, cfg, (tr.y_hat - sample.label) * inv, grads);
    }

    if (l2 > 0.0) {
        auto p_refs = tensor_refs(const_cast<ModelParams&>(params));
        auto g_refs = tensor_refs(grads);
        for (size_t i = 0; i < p_refs.size(); ++i) {
            if (!p_refs[i].regularized) continue;
            for (size_t j = 0; j < p_refs[i].data.size(); ++j) g_refs[i].data[j] += 2.0 * l2 * p_refs[i].data[j];
        }
    }
    return total * inv + l2_penalty(params, l2);
}

// ---- model file ----

namespace {

void put_bytes(std::ostream& out, const void* p, size_t n) { out.write(static_cast<const char*>(p), n); }

void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 8);
}
void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 4);
}
void put_i32(std::ostream& out, int32_t v) { put_u32(out, static_cast<uint32_t>(v)); }
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }
void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    put_bytes(out, s.data(), s.size());
}

uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw DataError("truncated model file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}
uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("truncated model file");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}
int32_t get_i32(std::istream& in) { return static_cast<int32_t>(get_u32(in)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }
std::string get_str(std::istream& in) {
    uint32_t n = get_u32(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw DataError("truncated model file");
    return s;
}

}  // namespace

void save_model(const std::string& path, const ModelFile& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open model file for writing: " + path);

    out.write("DIFM", 4);
    put_u32(out, 1);  // format version
    put_str(out, to_string(model.config.variant));
    put_u32(out, model.config.im_activation == Activation::relu ? 1 : 0);
    put_u32(out, model.config.mlp_activation == Activation::relu ? 1 : 0);
    put_i32(out, model.config.k);
    put_i32(out, model.config.max_events);
    put_i32(out, model.config.n_fields);
    put_f64(out, model.config.dropout);
    put_u32(out, static_cast<uint32_t>(model.config.mlp_hidden.size()));
    for (int h : model.config.mlp_hidden) put_i32(out, h);
    put_i32(out, model.params.vocab_size());
    put_u64(out, model.dict_hash);
    put_u64(out, model.seed);

    auto refs = tensor_refs(const_cast<ModelParams&>(model.params));
    put_u32(out, static_cast<uint32_t>(refs.size()));
    for (const auto& t : refs) {
        put_str(out, t.name);
        put_u64(out, t.data.size());
        for (double v : t.data) put_f64(out, v);
    }
    if (!out) throw DataError("failed writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DIFM", 4) != 0) throw DataError("not a model file: " + path);
    if (get_u32(in) != 1) throw DataError("unsupported model file version in " + path);

    ModelFile model;
    model.config.variant = variant_from_string(get_str(in));
    model.config.im_activation = get_u32(in) == 1 ? Activation::relu : Activation::linear;
    model.config.mlp_activation = get_u32(in) == 1 ? Activation::relu : Activation::linear;
    model.config.k = get_i32(in);
    model.config.max_events = get_i32(in);
    model.config.n_fields = get_i32(in);
    model.config.dropout = get_f64(in);
    uint32_t n_hidden = get_u32(in);
    model.config.mlp_hidden.clear();
    for (uint32_t i = 0; i < n_hidden; ++i) model.config.mlp_hidden.push_back(get_i32(in));
    int vocab = get_i32(in);
    model.dict_hash = get_u64(in);
    model.seed = get_u64(in);

    model.params = init_params(model.config, vocab, 0);
    auto refs = tensor_refs(model.params);
    uint32_t n_tensors = get_u32(in);
    if (n_tensors != refs.size()) throw DataError("model file tensor count mismatch in " + path);
    for (auto& t : refs) {
        std::string name = get_str(in);
        uint64_t size = get_u64(in);
        if (name != t.name || size != t.data.size())
            throw DataError("model file tensor layout mismatch at " + name + " in " + path);
        for (auto& v : t.data) v = get_f64(in);
    }
    return model;
}

ModelFile load_model_checked(const std::string& path, const FieldValueDictionary& dict) {
    ModelFile model = load_model(path);
    if (model.dict_hash != dict.hash())
        throw DataError("model " + path + " was trained against a different dictionary (hash mismatch)");
    if (model.params.vocab_size() != dict.size())
        throw DataError("model vocab size does not match the dictionary");
    return model;
}

}  // namespace difm
