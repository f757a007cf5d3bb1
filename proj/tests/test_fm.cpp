#include <doctest.h>

#include <cmath>

#include "difm/fm.hpp"

using namespace difm;

namespace {

fm::RescaledSet make_set(const std::vector<double>& weights, const std::vector<Vec>& vecs) {
    fm::RescaledSet set;
    for (size_t i = 0; i < weights.size(); ++i) set.push_back({weights[i], {vecs[i].data(), vecs[i].size()}});
    return set;
}

std::vector<Vec> random_vectors(Rng& rng, int n, int k) {
    std::vector<Vec> vs(n, Vec(k));
    for (auto& v : vs)
        for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    return vs;
}

}  // namespace

TEST_CASE("fm bruteforce pair sums") {
    SUBCASE("empty set is the zero vector") {
        auto out = fm::bruteforce({}, 3);
        CHECK(out == Vec{0.0, 0.0, 0.0});
    }
    SUBCASE("single item has no pairs") {
        std::vector<Vec> vs = {{1.0, -2.0}};
        auto out = fm::bruteforce(make_set({3.0}, vs), 2);
        CHECK(out == Vec{0.0, 0.0});
    }
    SUBCASE("two unit-weight items multiply elementwise") {
        std::vector<Vec> vs = {{1.0, 2.0}, {3.0, 4.0}};
        auto out = fm::bruteforce(make_set({1.0, 1.0}, vs), 2);
        CHECK(out[0] == doctest::Approx(3.0));
        CHECK(out[1] == doctest::Approx(8.0));
    }
}

TEST_CASE("fm linear form") {
    SUBCASE("single item collapses to zero") {
        std::vector<Vec> vs = {{5.0, -1.0, 0.5}};
        auto out = fm::linear(make_set({2.0}, vs), 3);
        for (double x : out) CHECK(x == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("matches the two-item pair expansion") {
        std::vector<Vec> vs = {{1.0, 2.0}, {3.0, 4.0}};
        auto out = fm::linear(make_set({1.0, 1.0}, vs), 2);
        CHECK(out[0] == doctest::Approx(3.0));
        CHECK(out[1] == doctest::Approx(8.0));
    }
    SUBCASE("ten random items agree with bruteforce") {
        Rng rng(42);
        auto vs = random_vectors(rng, 10, 8);
        std::vector<double> ws;
        for (int i = 0; i < 10; ++i) ws.push_back(rng.uniform(-1.5, 1.5));
        auto set = make_set(ws, vs);
        auto fast = fm::linear(set, 8);
        auto slow = fm::bruteforce(set, 8);
        for (int c = 0; c < 8; ++c) CHECK(std::abs(fast[c] - slow[c]) <= 1e-10 * (1.0 + std::abs(slow[c])));
    }
    SUBCASE("dimension mismatch throws") {
        std::vector<Vec> vs = {{1.0, 2.0}, {3.0}};
        CHECK_THROWS_AS(fm::linear(make_set({1.0, 1.0}, vs), 2), ShapeError);
    }
}

TEST_CASE("fm linear equals bruteforce over random sets") {
    Rng rng(7);
    for (int k : {1, 4, 16}) {
        for (int n = 0; n <= 12; ++n) {
            for (int rep = 0; rep < 8; ++rep) {
                auto vs = random_vectors(rng, n, k);
                std::vector<double> ws;
                for (int i = 0; i < n; ++i) ws.push_back(rng.uniform(-2.0, 2.0));
                auto set = make_set(ws, vs);
                auto fast = fm::linear(set, k);
                auto slow = fm::bruteforce(set, k);
                double worst = 0.0, scale = 0.0;
                for (int c = 0; c < k; ++c) {
                    worst = std::max(worst, std::abs(fast[c] - slow[c]));
                    scale = std::max(scale, std::abs(slow[c]));
                }
                REQUIRE(worst <= 1e-10 * (1.0 + scale));
            }
        }
    }
}

TEST_CASE("fm permutation invariance") {
    Rng rng(11);
    auto vs = random_vectors(rng, 7, 4);
    std::vector<double> ws;
    for (int i = 0; i < 7; ++i) ws.push_back(rng.uniform(-1.0, 1.0));
    auto base = fm::linear(make_set(ws, vs), 4);

    std::vector<int> perm{3, 0, 6, 2, 5, 1, 4};
    std::vector<Vec> pv;
    std::vector<double> pw;
    for (int i : perm) {
        pv.push_back(vs[i]);
        pw.push_back(ws[i]);
    }
    auto shuffled = fm::linear(make_set(pw, pv), 4);
    for (int c = 0; c < 4; ++c) CHECK(std::abs(base[c] - shuffled[c]) <= 1e-12);
}

TEST_CASE("fm output is quadratic in a global weight rescale") {
    Rng rng(13);
    auto vs = random_vectors(rng, 5, 3);
    std::vector<double> ws{0.3, -1.2, 0.8, 2.0, -0.5};
    auto base = fm::linear(make_set(ws, vs), 3);

    double c = 1.7;
    std::vector<double> scaled = ws;
    for (auto& w : scaled) w *= c;
    auto out = fm::linear(make_set(scaled, vs), 3);
    for (int i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(c * c * base[i]).epsilon(1e-12));
}

TEST_CASE("fm backward") {
    SUBCASE("single item set has zero gradients") {
        std::vector<Vec> vs = {{1.0, 2.0}};
        auto set = make_set({2.0}, vs);
        auto fwd = fm::forward(set, 2);
        Vec up{1.0, 1.0};
        auto grads = fm::backward(set, fwd.sum, up);
        CHECK(grads[0].d_weight == doctest::Approx(0.0));
        CHECK(grads[0].d_vec == Vec{0.0, 0.0});
    }
    SUBCASE("two-item hand case") {
        // d/d(r_1) of 0.5(S^2 - sum r_i^2) against upstream (1,1) is S - r_1
        std::vector<Vec> vs = {{1.0, 2.0}, {3.0, 4.0}};
        auto set = make_set({1.0, 1.0}, vs);
        auto fwd = fm::forward(set, 2);
        Vec up{1.0, 1.0};
        auto grads = fm::backward(set, fwd.sum, up);
        CHECK(grads[0].d_vec[0] == doctest::Approx(3.0));  // x_1 = 1, so d_vec = d_r
        CHECK(grads[0].d_vec[1] == doctest::Approx(4.0));
    }
    SUBCASE("matches central finite differences on a random set") {
        Rng rng(29);
        const int n = 6, k = 8;
        auto vs = random_vectors(rng, n, k);
        std::vector<double> ws;
        for (int i = 0; i < n; ++i) ws.push_back(rng.uniform(-1.5, 1.5));
        Vec up(k);
        for (auto& u : up) u = rng.uniform(-1.0, 1.0);

        auto scalar_loss = [&]() {
            auto out = fm::linear(make_set(ws, vs), k);
            double s = 0.0;
            for (int c = 0; c < k; ++c) s += up[c] * out[c];
            return s;
        };
        auto set = make_set(ws, vs);
        auto fwd = fm::forward(set, k);
        auto grads = fm::backward(set, fwd.sum, up);

        const double h = 1e-6;
        for (int i = 0; i < n; ++i) {
            double saved = ws[i];
            ws[i] = saved + h;
            double a = scalar_loss();
            ws[i] = saved - h;
            double b = scalar_loss();
            ws[i] = saved;
            double fd = (a - b) / (2 * h);
            CHECK(std::abs(grads[i].d_weight - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            for (int c = 0; c < k; ++c) {
                double sv = vs[i][c];
                vs[i][c] = sv + h;
                double va = scalar_loss();
                vs[i][c] = sv - h;
                double vb = scalar_loss();
                vs[i][c] = sv;
                double vfd = (va - vb) / (2 * h);
                CHECK(std::abs(grads[i].d_vec[c] - vfd) <= 1e-6 * std::max(1.0, std::abs(vfd)));
            }
        }
    }
}
