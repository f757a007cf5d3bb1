#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace difm {

// Error taxonomy, mapped to process exit codes by the CLI:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};
// Shape mismatches are programming errors but surface as NumericError
// so the CLI exit contract stays small.
struct ShapeError : NumericError {
    explicit ShapeError(const std::string& msg) : NumericError(msg) {}
};

using Vec = std::vector<double>;

// Dense row-major matrix. All model tensors are double; reductions stay in
// double everywhere because the FM forward cancels catastrophically in float.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(int r) { return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)}; }
    std::span<const double> row(int r) const {
        return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
    }

    double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    void zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  private:
    int rows_ = 0;
    int cols_ = 0;
    Vec data_;
};

enum class Activation { relu, linear };

inline double apply_activation(Activation a, double x) {
    return a == Activation::relu ? (x > 0.0 ? x : 0.0) : x;
}
inline double activation_grad(Activation a, double pre) {
    return a == Activation::relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0;
}

// Affine map y = W x + b followed by an activation chosen by the caller.
struct Affine {
    Matrix w;  // out_dim x in_dim
    Vec b;     // out_dim

    Affine() = default;
    Affine(int out_dim, int in_dim) : w(out_dim, in_dim), b(out_dim, 0.0) {}

    int in_dim() const { return w.cols(); }
    int out_dim() const { return w.rows(); }

    // pre = W x + b (no activation)
    void apply(std::span<const double> x, std::span<double> pre) const {
        for (int r = 0; r < w.rows(); ++r) {
            double acc = b[r];
            auto wr = w.row(r);
            for (int c = 0; c < w.cols(); ++c) acc += wr[c] * x[c];
            pre[r] = acc;
        }
    }
};

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline void require_finite(std::span<const double> xs, const char* stage) {
    if (!all_finite(xs)) throw NumericError(std::string("non-finite value in ") + stage);
}

// FNV-1a 64-bit, used to fingerprint dictionary files referenced by models.
inline uint64_t fnv1a64(const void* bytes, size_t n, uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}
inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// Mixes a root seed into independent stream seeds (splitmix64 step).
inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
    uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG wrapper. Draw helpers avoid std distributions so a given
// seed reproduces the same stream regardless of standard library.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    // uniform integer in [0, n), unbiased via rejection
    uint64_t below(uint64_t n) {
        if (n == 0) throw NumericError("Rng::below(0)");
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    int range(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace difm
