#include "difm/importance.hpp"

#include <algorithm>
#include <cmath>

namespace difm {

ImportanceParams ImportanceParams::make(int dim, bool shared, Activation act) {
    ImportanceParams p;
    p.activation = act;
    p.nets.assign(shared ? 1 : 3, Affine(dim, dim));
    return p;
}

static void project(const Affine& net, Activation act, const Vec& x, Vec& pre, Vec& post) {
    pre.resize(net.out_dim());
    post.resize(net.out_dim());
    net.apply(x, pre);
    for (size_t i = 0; i < pre.size(); ++i) post[i] = apply_activation(act, pre[i]);
}

Vec importance_logits(std::span<const Vec> inputs, const ImportanceParams& params) {
    if (inputs.empty()) throw ShapeError("importance module requires a non-empty input set");
    int dim = params.net(0).in_dim();
    double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(dim));

    Vec logits(inputs.size());
    Vec pre, left, right;
    for (size_t m = 0; m < inputs.size(); ++m) {
        if (static_cast<int>(inputs[m].size()) != dim) throw ShapeError("importance input dimension mismatch");
        project(params.net(0), params.activation, inputs[m], pre, left);
        project(params.net(1), params.activation, inputs[m], pre, right);
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += left[c] * right[c];
        logits[m] = dot * inv_sqrt_k;
    }
    require_finite(logits, "importance logits");
    return logits;
}

Vec importance_weights(std::span<const double> logits) {
    if (logits.empty()) throw ShapeError("softmax over an empty set");
    if (!all_finite(logits)) throw NumericError("non-finite importance logit");
    double max_logit = *std::max_element(logits.begin(), logits.end());
    Vec w(logits.size());
    double total = 0.0;
    for (size_t m = 0; m < logits.size(); ++m) {
        w[m] = std::exp(logits[m] - max_logit);
        total += w[m];
    }
    for (auto& x : w) x /= total;
    return w;
}

Vec importance_aggregate(std::span<const Vec> inputs, std::span<const double> weights,
                         const ImportanceParams& params) {
    if (inputs.size() != weights.size()) throw ShapeError("importance aggregate: |set| != |weights|");
    int dim = params.net(2).out_dim();
    Vec out(dim, 0.0);
    Vec pre, value;
    for (size_t m = 0; m < inputs.size(); ++m) {
        project(params.net(2), params.activation, inputs[m], pre, value);
        for (int c = 0; c < dim; ++c) out[c] += weights[m] * value[c];
    }
    return out;
}

ImportanceForward importance_forward(std::span<const Vec> inputs, const ImportanceParams& params) {
    if (inputs.empty()) throw ShapeError("importance module requires a non-empty input set");
    int dim = params.net(0).in_dim();
    double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(dim));

    ImportanceForward fwd;
    for (int role = 0; role < 3; ++role) {
        fwd.pre[role].resize(inputs.size());
        fwd.post[role].resize(inputs.size());
    }
    fwd.logits.resize(inputs.size());

    for (size_t m = 0; m < inputs.size(); ++m) {
        if (static_cast<int>(inputs[m].size()) != dim) throw ShapeError("importance input dimension mismatch");
        for (int role = 0; role < 3; ++role)
            project(params.net(role), params.activation, inputs[m], fwd.pre[role][m], fwd.post[role][m]);
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += fwd.post[0][m][c] * fwd.post[1][m][c];
        fwd.logits[m] = dot * inv_sqrt_k;
    }
    require_finite(fwd.logits, "importance logits");

    fwd.weights = importance_weights(fwd.logits);
    fwd.output.assign(dim, 0.0);
    for (size_t m = 0; m < inputs.size(); ++m)
        for (int c = 0; c < dim; ++c) fwd.output[c] += fwd.weights[m] * fwd.post[2][m][c];
    return fwd;
}

// Accumulate one affine backward step: d_pre = d_post * act'(pre), then
// gW += d_pre x^T, gb += d_pre, d_x += W^T d_pre.
static void affine_backward(const Affine& net, Activation act, const Vec& x, const Vec& pre, const Vec& d_post,
                            Affine& grad, Vec& d_x) {
    int out_dim = net.out_dim();
    int in_dim = net.in_dim();
    for (int r = 0; r < out_dim; ++r) {
        double d_pre = d_post[r] * activation_grad(act, pre[r]);
        if (d_pre == 0.0) continue;
        grad.b[r] += d_pre;
        auto gw = grad.w.row(r);
        auto wr = net.w.row(r);
        for (int c = 0; c < in_dim; ++c) {
            gw[c] += d_pre * x[c];
            d_x[c] += wr[c] * d_pre;
        }
    }
}

std::vector<Vec> importance_backward(std::span<const Vec> inputs, const ImportanceParams& params,
                                     const ImportanceForward& fwd, std::span<const double> upstream,
                                     ImportanceParams& grads) {
    size_t n = inputs.size();
    int dim = params.net(0).in_dim();
    if (static_cast<int>(upstream.size()) != dim) throw ShapeError("importance backward upstream dimension mismatch");
    double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(dim));

    // Through the weighted sum: d_value_m = a_m * u, d_a_m = <u, value_m>.
    Vec d_weight(n);
    for (size_t m = 0; m < n; ++m) {
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += upstream[c] * fwd.post[2][m][c];
        d_weight[m] = dot;
    }

    // Softmax Jacobian: d_logit_m = a_m (d_a_m - sum_j a_j d_a_j).
    double mixed = 0.0;
    for (size_t m = 0; m < n; ++m) mixed += fwd.weights[m] * d_weight[m];
    Vec d_logit(n);
    for (size_t m = 0; m < n; ++m) d_logit[m] = fwd.weights[m] * (d_weight[m] - mixed);

    std::vector<Vec> d_inputs(n, Vec(dim, 0.0));
    Vec d_post(dim);
    for (size_t m = 0; m < n; ++m) {
        // value path
        for (int c = 0; c < dim; ++c) d_post[c] = fwd.weights[m] * upstream[c];
        affine_backward(params.net(2), params.activation, inputs[m], fwd.pre[2][m], d_post, grads.net(2), d_inputs[m]);

        // scoring paths: d_left = g * right, d_right = g * left with g = d_logit / sqrt(k)
        double g = d_logit[m] * inv_sqrt_k;
        for (int c = 0; c < dim; ++c) d_post[c] = g * fwd.post[1][m][c];
        affine_backward(params.net(0), params.activation, inputs[m], fwd.pre[0][m], d_post, grads.net(0), d_inputs[m]);
        for (int c = 0; c < dim; ++c) d_post[c] = g * fwd.post[0][m][c];
        affine_backward(params.net(1), params.activation, inputs[m], fwd.pre[1][m], d_post, grads.net(1), d_inputs[m]);
    }
    return d_inputs;
}

}  // namespace difm
