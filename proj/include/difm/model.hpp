#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "difm/common.hpp"
#include "difm/data_model.hpp"
#include "difm/fm.hpp"
#include "difm/importance.hpp"

namespace difm {

// full:  both perspectives, three distinct nets per importance module
// same:  both perspectives, one shared net per importance module
// alpha: field value variations perspective only
// beta:  field interactions perspective only
enum class Variant { full, same, alpha, beta };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

struct ModelConfig {
    int k = 64;           // embedding dimension
    int max_events = 20;  // sequence window T
    int n_fields = 0;     // N, from the dictionary schema
    Variant variant = Variant::full;
    std::vector<int> mlp_hidden = {64};
    double dropout = 0.2;
    Activation im_activation = Activation::relu;
    Activation mlp_activation = Activation::relu;

    bool variations_active() const { return variant != Variant::beta; }
    bool interactions_active() const { return variant != Variant::alpha; }
    void validate() const;
};

struct ModelParams {
    Matrix embeddings;  // |V| x k
    Vec wide_weights;   // |V|
    double wide_bias = 0.0;
    ImportanceParams field_im;
    ImportanceParams event_im;
    std::vector<Affine> mlp;  // 3k -> hidden... -> 1

    int vocab_size() const { return embeddings.rows(); }
};

// Maps global field-value indices to their owning field.
struct IndexLayout {
    int vocab_size = 0;
    std::vector<int> field_of;  // size |V|

    static IndexLayout from_dictionary(const FieldValueDictionary& dict);
};

// Embeddings and affine weights uniform in +-1/sqrt(fan_in); wide weights and
// all biases start at zero so wide-weight rankings start neutral.
ModelParams init_params(const ModelConfig& cfg, int vocab_size, uint64_t seed);
ModelParams zeros_like(const ModelParams& params);

// Fixed traversal order over all parameter tensors; this order defines the
// model file layout and the optimizer state layout.
struct TensorRef {
    std::string name;
    std::span<double> data;
    bool regularized;  // weights yes, biases no
};
std::vector<TensorRef> tensor_refs(ModelParams& params);

enum class Mode { train, eval };

// Per-field or per-event FM state retained for backward.
struct FmNode {
    struct Item {
        int index;  // global field-value index
        double x;   // sparse entry value
    };
    std::vector<Item> items;
    Vec sum;  // running sum of rescaled items
};

struct ForwardTrace {
    Vec variation_summary;  // aggregated field-variations vector (zero if branch off)
    Vec history_summary;    // aggregated history-events vector (zero if off/empty)
    Vec current_event;      // current event representation (zero if branch off)
    Vec mlp_input;          // [variation_summary | history_summary | current_event]
    Vec field_weights;      // importance over fields, sums to 1 when branch active
    Vec event_weights;      // importance over history events
    double wide_sum = 0.0;
    double logit = 0.0;
    double y_hat = 0.0;

    // backward caches
    std::vector<FmNode> field_nodes;
    std::vector<Vec> field_reps;
    ImportanceForward field_im;
    std::vector<FmNode> event_nodes;
    std::vector<Vec> event_reps;
    ImportanceForward event_im;
    std::vector<Vec> dropout_masks;    // aligned with mlp layer inputs; empty in eval
    std::vector<Vec> mlp_layer_input;  // what each affine consumed (post-dropout)
    std::vector<Vec> mlp_pre;          // preactivation per layer
};

// Per-field FM across all events of the sample. Fields with fewer than two
// entries in the whole sequence contribute a zero vector.
struct VariationsOut {
    std::vector<FmNode> nodes;
    std::vector<Vec> field_reps;  // one per field
    ImportanceForward im;         // output = summary, weights = per-field importance
};
VariationsOut field_variations_forward(const EventSequence& sample, const ModelParams& params,
                                       const ModelConfig& cfg, const IndexLayout& layout);

// Per-event FM across the event's entries; history events (all but the last)
// go through the event importance module.
struct InteractionsOut {
    std::vector<FmNode> nodes;
    std::vector<Vec> event_reps;  // one per event, last is the current event
    bool has_history = false;
    ImportanceForward im;    // over history events only
    Vec history_summary;     // zero when history is empty
};
InteractionsOut field_interactions_forward(const EventSequence& sample, const ModelParams& params,
                                           const ModelConfig& cfg, const IndexLayout& layout);

// sum over every entry of every event of w[index] * value, plus the bias.
double wide_score(const EventSequence& sample, const ModelParams& params);

// Train mode requires a dropout rng when cfg.dropout > 0.
ForwardTrace forward(const EventSequence& sample, const ModelParams& params, const ModelConfig& cfg,
                     const IndexLayout& layout, Mode mode, Rng* dropout_rng = nullptr);

double sigmoid(double z);

// Cross entropy evaluated in logit form: log(1 + exp(-(2y-1) * logit)).
// Finite for any finite logit.
double bce_loss(double logit, int label);
double batch_mean_bce(std::span<const double> logits, std::span<const int> labels);

// Accumulates parameter gradients for one sample given d(loss)/d(logit).
void backward(const EventSequence& sample, const ForwardTrace& trace, const ModelParams& params,
              const ModelConfig& cfg, double d_logit, ModelParams& grads);

// mean BCE over the batch plus l2 * sum of squared weights (biases excluded).
double batch_objective(std::span<const EventSequence> batch, const ModelParams& params, const ModelConfig& cfg,
                       const IndexLayout& layout, double l2);

// Zeroes grads, then accumulates exact gradients of batch_objective. In train
// mode dropout masks are drawn per sample from dropout_rng.
double batch_backward(std::span<const EventSequence> batch, const ModelParams& params, const ModelConfig& cfg,
                      const IndexLayout& layout, double l2, Mode mode, Rng* dropout_rng, ModelParams& grads);

// Model container: config, dictionary fingerprint, seed, tensors in
// tensor_refs order as little-endian doubles.
struct ModelFile {
    ModelConfig config;
    uint64_t dict_hash = 0;
    uint64_t seed = 0;
    ModelParams params;
};

void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);
ModelFile load_model_checked(const std::string& path, const FieldValueDictionary& dict);

}  // namespace difm
