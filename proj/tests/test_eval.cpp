#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nigmix/eval.hpp"

using namespace nigmix;

namespace {

// O(N^2) pair counting.
double brute_force_ari(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    double both = 0, only_a = 0, only_b = 0, neither = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) ++both;
            else if (sa) ++only_a;
            else if (sb) ++only_b;
            else ++neither;
        }
    }
    const double pairs = both + only_a + only_b + neither;
    const double pa = both + only_a;
    const double pb = both + only_b;
    const double expected = pa * pb / pairs;
    const double max_index = 0.5 * (pa + pb);
    if (max_index == expected) return both == max_index ? 1.0 : 0.0;
    return (both - expected) / (max_index - expected);
}

std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, k - 1);
    std::vector<int> out(n);
    for (auto& x : out) x = d(rng);
    return out;
}

}  // namespace

TEST(Ari, Examples) {
    EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}), -0.5);
}

TEST(Ari, DegenerateDenominators) {
    EXPECT_EQ(adjusted_rand_index({0, 0, 0}, {5, 5, 5}), 1.0);
    EXPECT_EQ(adjusted_rand_index({0, 1, 2}, {2, 0, 1}), 1.0);
    EXPECT_EQ(adjusted_rand_index({0, 1, 2, 3}, {0, 0, 0, 0}), 0.0);
}

TEST(Ari, RejectsBadInput) {
    EXPECT_THROW(adjusted_rand_index({0, 1}, {0}), ValidationError);
    EXPECT_THROW(adjusted_rand_index({0}, {0}), ValidationError);
}

TEST(Ari, MatchesPairCountingOracle) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> size(2, 200), clusters(1, 8);
    for (int rep = 0; rep < 100; ++rep) {
        const auto n = static_cast<std::size_t>(size(rng));
        const auto a = random_labels(n, clusters(rng), rng);
        const auto b = random_labels(n, clusters(rng), rng);
        EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), brute_force_ari(a, b));
    }
}

TEST(Ari, SymmetricSelfAndRelabelInvariant) {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const auto a = random_labels(150, 5, rng);
        auto b = random_labels(150, 4, rng);
        for (std::size_t i = 0; i < 100; ++i) b[i] = a[i];
        EXPECT_EQ(adjusted_rand_index(a, b), adjusted_rand_index(b, a));
        EXPECT_DOUBLE_EQ(adjusted_rand_index(a, a), 1.0);
        std::vector<int> perm{3, 0, 4, 1, 2};
        std::vector<int> relabeled(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) relabeled[i] = 10 * perm[static_cast<std::size_t>(a[i])] + 7;
        EXPECT_NEAR(adjusted_rand_index(relabeled, b), adjusted_rand_index(a, b), 1e-15);
    }
}

TEST(Ari, NullLabelsAreNearZero) {
    std::mt19937_64 rng(3);
    const auto a = random_labels(10000, 4, rng);
    const auto b = random_labels(10000, 4, rng);
    EXPECT_LT(std::abs(adjusted_rand_index(a, b)), 0.02);
}

TEST(SelectBestRun, PicksLargestElboThenLowestSeed) {
    RunRecord r;
    r.seed = 4;
    r.elbo = -5.0;
    EXPECT_EQ(select_best_run({r}).seed, 4u);
    RunRecord a = r, b = r;
    a.elbo = -100.0;
    a.seed = 1;
    b.elbo = -90.0;
    b.seed = 2;
    EXPECT_EQ(select_best_run({a, b}).seed, 2u);
    RunRecord c = b;
    c.seed = 0;
    EXPECT_EQ(select_best_run({a, b, c}).seed, 0u);
    EXPECT_THROW(select_best_run({}), ValidationError);
}

TEST(Stats, MedianRanksAndCorrelations) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    const auto r = ranks({10.0, 20.0, 10.0, 5.0});
    EXPECT_EQ(r, (std::vector<double>{2.5, 4.0, 2.5, 1.0}));
    EXPECT_NEAR(pearson_correlation({1, 2, 3}, {2, 4, 6}), 1.0, 1e-15);
    EXPECT_NEAR(spearman_correlation({1, 2, 3, 4}, {1, 8, 27, 64}), 1.0, 1e-15);
    EXPECT_NEAR(spearman_correlation({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-15);
}
