#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "nigmix/errors.hpp"
#include "nigmix/model.hpp"

namespace nigmix {

/// Hubert-Arabie adjusted Rand index from the contingency table.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ValidationError("adjusted_rand_index: label vectors differ in length");
    if (a.size() < 2) throw ValidationError("adjusted_rand_index: needs at least two points");
    const auto choose2 = [](double n) { return 0.5 * n * (n - 1.0); };
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    double index = 0.0;
    for (const auto& [key, count] : table) index += choose2(count);
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (const auto& [key, count] : rows) sum_a += choose2(count);
    for (const auto& [key, count] : cols) sum_b += choose2(count);
    const double expected = sum_a * sum_b / choose2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) {
        // Both partitions all-singletons or both a single block.
        return index == max_index ? 1.0 : 0.0;
    }
    return (index - expected) / (max_index - expected);
}

struct RunRecord {
    std::string dataset;
    Variant variant = Variant::invg;
    Concentration concentration = Concentration::dd;
    std::uint64_t seed = 0;
    double ari = 0.0;
    std::size_t n_clusters = 0;
    double elbo = 0.0;
    std::size_t iterations = 0;
    double wall_time = 0.0;
};

/// Largest ELBO; ties go to the lowest seed.
inline const RunRecord& select_best_run(const std::vector<RunRecord>& records) {
    if (records.empty()) throw ValidationError("select_best_run: no records");
    const RunRecord* best = &records.front();
    for (const auto& r : records) {
        if (r.elbo > best->elbo || (r.elbo == best->elbo && r.seed < best->seed)) best = &r;
    }
    return *best;
}

inline double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Average ranks (1-based), ties share the mean rank.
inline std::vector<double> ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> out(values.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t end = k + 1;
        while (end < order.size() && values[order[end]] == values[order[k]]) ++end;
        const double rank = 0.5 * static_cast<double>(k + end + 1);
        for (std::size_t t = k; t < end; ++t) out[order[t]] = rank;
        k = end;
    }
    return out;
}

inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("correlation needs two equal-length samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson_correlation(ranks(x), ranks(y));
}

}  // namespace nigmix
