#include "difm/fm.hpp"

namespace difm::fm {

static void check_dims(const RescaledSet& set, int dim) {
    for (const auto& item : set) {
        if (static_cast<int>(item.vec.size()) != dim)
            throw ShapeError("rescaled set item dimension " + std::to_string(item.vec.size()) + " != " +
                             std::to_string(dim));
    }
}

Vec bruteforce(const RescaledSet& set, int dim) {
    check_dims(set, dim);
    Vec out(dim, 0.0);
    for (size_t i = 0; i + 1 < set.size(); ++i) {
        for (size_t j = i + 1; j < set.size(); ++j) {
            double wij = set[i].weight * set[j].weight;
            for (int c = 0; c < dim; ++c) out[c] += wij * set[i].vec[c] * set[j].vec[c];
        }
    }
    return out;
}

Forward forward(const RescaledSet& set, int dim) {
    check_dims(set, dim);
    Forward fwd;
    fwd.sum.assign(dim, 0.0);
    Vec sum_sq(dim, 0.0);
    for (const auto& item : set) {
        double w = item.weight;
        for (int c = 0; c < dim; ++c) {
            double r = w * item.vec[c];
            fwd.sum[c] += r;
            sum_sq[c] += r * r;
        }
    }
    fwd.output.resize(dim);
    for (int c = 0; c < dim; ++c) fwd.output[c] = 0.5 * (fwd.sum[c] * fwd.sum[c] - sum_sq[c]);
    return fwd;
}

Vec linear(const RescaledSet& set, int dim) { return forward(set, dim).output; }

std::vector<ItemGrad> backward(const RescaledSet& set, const Vec& sum, std::span<const double> upstream) {
    int dim = static_cast<int>(sum.size());
    if (static_cast<int>(upstream.size()) != dim) throw ShapeError("upstream dimension mismatch in fm backward");
    check_dims(set, dim);

    std::vector<ItemGrad> grads(set.size());
    for (size_t i = 0; i < set.size(); ++i) {
        auto& g = grads[i];
        g.d_vec.assign(dim, 0.0);
        double w = set[i].weight;
        for (int c = 0; c < dim; ++c) {
            double r = w * set[i].vec[c];
            double d_r = upstream[c] * (sum[c] - r);
            g.d_vec[c] = w * d_r;
            g.d_weight += d_r * set[i].vec[c];
        }
    }
    return grads;
}

}  // namespace difm::fm
