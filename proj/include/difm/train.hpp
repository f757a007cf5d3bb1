#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "difm/model.hpp"

namespace difm {

struct TrainConfig {
    int batch_size = 256;
    double learning_rate = 0.0005;
    double l2 = 1e-6;
    int max_epochs = 50;
    int patience = 5;  // epochs without validation improvement before stopping
    uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double val_max_fpr = 0.01;  // early-stopping metric cut

    void validate() const;
};

struct AdamState {
    ModelParams m;  // first moments, same shapes as the params
    ModelParams v;  // second moments
    long step = 0;

    static AdamState zeros_like(const ModelParams& params);
};

// Bias-corrected Adam update. Non-finite gradients abort naming the tensor.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const TrainConfig& cfg);

// eval-mode fraud probabilities, one per sample
std::vector<double> score_dataset(std::span<const EventSequence> samples, const ModelParams& params,
                                  const ModelConfig& cfg, const IndexLayout& layout);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_metric = 0.0;
    double best_metric = 0.0;
};

struct TrainResult {
    ModelParams best_params;
    int best_epoch = 0;
    double best_metric = 0.0;
    std::vector<EpochStats> history;
};

// Mini-batch Adam with per-epoch seeded reshuffle and early stopping on the
// validation partial AUC. Returns the parameters of the best epoch.
TrainResult train(const std::vector<EventSequence>& train_set, const std::vector<EventSequence>& val_set,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg, const IndexLayout& layout,
                  std::ostream* log = nullptr);

struct GradCheckGroup {
    std::string name;
    double worst_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckGroup> groups;
    std::string worst_tensor;
    double worst_rel_err = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Compares analytic gradients of the batch objective (dropout off) against
// central finite differences with h = 1e-5, coordinate by coordinate, on a
// synthetic toy batch that touches every parameter. corrupt_tensor is a test
// hook that doubles one tensor's analytic gradient before comparing.
GradCheckReport gradient_check(const ModelConfig& cfg, double tolerance, uint64_t seed, double l2 = 1e-6,
                               const std::string& corrupt_tensor = "");

}  // namespace difm
