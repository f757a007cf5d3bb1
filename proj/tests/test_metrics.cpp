#include <doctest.h>

#include <cmath>

#include "difm/metrics.hpp"
#include "oracles.hpp"

using namespace difm;

namespace {

struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;
};

ScoredSet random_set(Rng& rng, int n, double tie_prob = 0.3) {
    ScoredSet s;
    int n_pos = 1 + static_cast<int>(rng.below(n - 1));
    for (int i = 0; i < n; ++i) {
        s.labels.push_back(i < n_pos ? 1 : 0);
        // coarse grid makes score ties common
        double v = rng.bernoulli(tie_prob) ? std::floor(rng.uniform(0.0, 10.0)) / 10.0 : rng.next_double();
        s.scores.push_back(v);
    }
    return s;
}

}  // namespace

TEST_CASE("auc basics") {
    std::vector<double> s{0.9, 0.8, 0.3, 0.1};
    std::vector<int> perfect{1, 1, 0, 0};
    CHECK(auc(s, perfect) == doctest::Approx(1.0));
    std::vector<int> reversed{0, 0, 1, 1};
    CHECK(auc(s, reversed) == doctest::Approx(0.0));

    std::vector<int> ones{1, 1, 1, 1};
    CHECK_THROWS_AS(auc(s, ones), DataError);
}

TEST_CASE("auc matches the pairwise oracle") {
    Rng rng(101);
    for (int rep = 0; rep < 60; ++rep) {
        auto set = random_set(rng, 5 + static_cast<int>(rng.below(150)));
        double fast = auc(set.scores, set.labels);
        double slow = oracles::pairwise_auc(set.scores, set.labels);
        REQUIRE(std::abs(fast - slow) <= 1e-12);
    }
}

TEST_CASE("partial auc examples") {
    SUBCASE("perfect separation is 1.0") {
        std::vector<double> s{0.99, 0.95, 0.9, 0.2, 0.1, 0.05};
        std::vector<int> y{1, 1, 1, 0, 0, 0};
        CHECK(partial_auc(s, y, 0.01).partial_auc_standardized == doctest::Approx(1.0));
    }
    SUBCASE("constant scores sit at chance") {
        std::vector<double> s{0.5, 0.5, 0.5, 0.5};
        std::vector<int> y{1, 0, 1, 0};
        CHECK(partial_auc(s, y, 0.01).partial_auc_standardized == doctest::Approx(0.5));
        CHECK(partial_auc(s, y, 0.37).partial_auc_standardized == doctest::Approx(0.5));
    }
    SUBCASE("six-sample case agrees with the exhaustive oracle") {
        std::vector<double> s{0.9, 0.7, 0.7, 0.4, 0.3, 0.1};
        std::vector<int> y{1, 0, 1, 1, 0, 0};
        for (double f : {0.01, 0.34, 0.5, 1.0}) {
            double got = partial_auc(s, y, f).partial_auc_standardized;
            double want = oracles::exhaustive_partial_auc(s, y, f);
            CHECK(std::abs(got - want) <= 1e-12);
        }
    }
    SUBCASE("bad max_fpr is rejected") {
        std::vector<double> s{0.9, 0.1};
        std::vector<int> y{1, 0};
        CHECK_THROWS_AS(partial_auc(s, y, 0.0), ConfigError);
        CHECK_THROWS_AS(partial_auc(s, y, 1.5), ConfigError);
    }
}

TEST_CASE("partial auc agrees with the exhaustive oracle on random sets") {
    Rng rng(202);
    for (int rep = 0; rep < 100; ++rep) {
        auto set = random_set(rng, 4 + static_cast<int>(rng.below(197)));
        double max_fpr = rep % 3 == 0 ? 0.01 : rng.uniform(0.005, 1.0);
        double got = partial_auc(set.scores, set.labels, max_fpr).partial_auc_standardized;
        double want = oracles::exhaustive_partial_auc(set.scores, set.labels, max_fpr);
        REQUIRE(std::abs(got - want) <= 1e-12);
    }
}

TEST_CASE("partial auc at max_fpr 1 degenerates to auc") {
    Rng rng(303);
    for (int rep = 0; rep < 40; ++rep) {
        auto set = random_set(rng, 10 + static_cast<int>(rng.below(100)));
        double full = partial_auc(set.scores, set.labels, 1.0).partial_auc_standardized;
        REQUIRE(std::abs(full - auc(set.scores, set.labels)) <= 1e-12);
    }
}

TEST_CASE("metric invariances") {
    Rng rng(404);
    auto set = random_set(rng, 120);

    SUBCASE("strictly increasing transforms leave both metrics alone") {
        std::vector<double> warped;
        for (double s : set.scores) warped.push_back(std::tanh(3.0 * s) + 2.0);
        CHECK(std::abs(auc(set.scores, set.labels) - auc(warped, set.labels)) <= 1e-12);
        CHECK(std::abs(partial_auc(set.scores, set.labels, 0.25).partial_auc_standardized -
                       partial_auc(warped, set.labels, 0.25).partial_auc_standardized) <= 1e-12);
    }
    SUBCASE("negating scores flips auc") {
        std::vector<double> neg;
        for (double s : set.scores) neg.push_back(-s);
        CHECK(std::abs(auc(neg, set.labels) - (1.0 - auc(set.scores, set.labels))) <= 1e-12);
    }
    SUBCASE("outputs stay in [0,1]") {
        for (int rep = 0; rep < 20; ++rep) {
            auto s = random_set(rng, 30);
            auto rep01 = partial_auc(s.scores, s.labels, 0.01);
            CHECK(rep01.partial_auc_standardized >= 0.0);
            CHECK(rep01.partial_auc_standardized <= 1.0);
            CHECK(rep01.auc >= 0.0);
            CHECK(rep01.auc <= 1.0);
        }
    }
}

TEST_CASE("roc curve shape") {
    Rng rng(505);
    auto set = random_set(rng, 64);
    RocSummary roc = build_roc(set.scores, set.labels);
    CHECK(roc.points.front().fpr == 0.0);
    CHECK(roc.points.front().tpr == 0.0);
    CHECK(roc.points.back().fpr == doctest::Approx(1.0));
    CHECK(roc.points.back().tpr == doctest::Approx(1.0));
    for (size_t i = 1; i < roc.points.size(); ++i) {
        CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
        CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    }
}

TEST_CASE("confidence intervals") {
    SUBCASE("identical values collapse to zero width") {
        std::vector<double> v{0.8, 0.8, 0.8};
        auto ci = confidence_interval(v);
        CHECK(ci.mean == doctest::Approx(0.8));
        CHECK(ci.half_width == doctest::Approx(0.0));
    }
    SUBCASE("n=2 doubles the t quantile through the half width") {
        std::vector<double> v{0.0, 1.0};
        auto ci = confidence_interval(v);
        CHECK(ci.mean == doctest::Approx(0.5));
        // t_{0.975,1} = 12.706, sd = 0.7071, half width = 12.706 * 0.7071 / 1.4142
        CHECK(ci.half_width == doctest::Approx(6.3531).epsilon(1e-4));
    }
    SUBCASE("report format has four decimals") {
        std::vector<double> v{0.8491, 0.8575, 0.8408, 0.8530, 0.8452};
        auto ci = confidence_interval(v);
        std::string s = format_ci(ci);
        CHECK(s.substr(0, 6) == "0.8491");
        CHECK(s.find("±") != std::string::npos);
    }
    SUBCASE("fewer than two runs is an error") {
        std::vector<double> v{0.5};
        CHECK_THROWS_AS(confidence_interval(v), ConfigError);
    }
}
