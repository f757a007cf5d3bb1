#pragma once

#include <span>
#include <vector>

#include "difm/common.hpp"

namespace difm {

// Importance-aware module over a set of k-vectors: each element is scored by
// a scaled dot product of two learned projections, scores are softmaxed, and
// the output is the weight-blended third projection.
//
// nets holds either three distinct maps (score-left, score-right, value) or a
// single shared map aliased for all three roles.
struct ImportanceParams {
    std::vector<Affine> nets;
    Activation activation = Activation::relu;

    static ImportanceParams make(int dim, bool shared, Activation act);

    bool shared() const { return nets.size() == 1; }
    const Affine& net(int role) const { return nets[shared() ? 0 : role]; }
    Affine& net(int role) { return nets[shared() ? 0 : role]; }
};

// Per-role activations retained for the backward pass.
struct ImportanceForward {
    std::vector<Vec> pre[3];   // preactivations per element, per role
    std::vector<Vec> post[3];  // activations per element, per role
    Vec logits;
    Vec weights;
    Vec output;
};

// Scaled dot-product scores <F1(x_m), F2(x_m)> / sqrt(k). Empty input is an error.
Vec importance_logits(std::span<const Vec> inputs, const ImportanceParams& params);

// Max-subtracted softmax; output sums to 1.
Vec importance_weights(std::span<const double> logits);

// sum_m weights[m] * F3(inputs[m]).
Vec importance_aggregate(std::span<const Vec> inputs, std::span<const double> weights, const ImportanceParams& params);

ImportanceForward importance_forward(std::span<const Vec> inputs, const ImportanceParams& params);

// Backprop through aggregate + softmax + scoring. Returns d/d input_m and
// accumulates parameter gradients into a params-shaped buffer; aliased roles
// accumulate into the single shared slot.
std::vector<Vec> importance_backward(std::span<const Vec> inputs, const ImportanceParams& params,
                                     const ImportanceForward& fwd, std::span<const double> upstream,
                                     ImportanceParams& grads);

}  // namespace difm
