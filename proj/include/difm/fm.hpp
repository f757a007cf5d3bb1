#pragma once

#include <span>
#include <vector>

#include "difm/common.hpp"

namespace difm::fm {

// One rescaled embedding: weight * vector. The vector is borrowed.
struct RescaledItem {
    double weight = 1.0;
    std::span<const double> vec;
};

using RescaledSet = std::vector<RescaledItem>;

// Sum over unordered pairs i<j of (w_i v_i) elementwise* (w_j v_j),
// computed by explicit pair expansion. O(k n^2); reference route.
Vec bruteforce(const RescaledSet& set, int dim);

// Same quantity as 0.5 * [(sum w_i v_i)^2 - sum (w_i v_i)^2], one pass
// accumulating the two running sums. O(k n).
Vec linear(const RescaledSet& set, int dim);

// Forward state needed by the backward pass.
struct Forward {
    Vec sum;     // S = sum of rescaled items
    Vec output;  // 0.5 * (S^2 - sum of squares)
};

Forward forward(const RescaledSet& set, int dim);

// Gradient of a scalar loss w.r.t. each rescaled item:
//   d(w_i v_i) = upstream elementwise* (S - w_i v_i)
// and chained into the weight and the vector:
//   d w_i = <d(w_i v_i), v_i>,  d v_i = w_i * d(w_i v_i).
struct ItemGrad {
    double d_weight = 0.0;
    Vec d_vec;
};

std::vector<ItemGrad> backward(const RescaledSet& set, const Vec& sum, std::span<const double> upstream);

}  // namespace difm::fm
