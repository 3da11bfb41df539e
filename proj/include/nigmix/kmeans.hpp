#pragma once

#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "nigmix/errors.hpp"
#include "nigmix/linalg.hpp"
#include "nigmix/model.hpp"

namespace nigmix {

/// Hard k-means labels: k-means++ seeding then at most `max_lloyd` Lloyd
/// sweeps. Labels are compacted so that empty clusters disappear.
template <class Rng>
std::vector<int> kmeans_labels(const Matrix& x, std::size_t k, Rng& rng, std::size_t max_lloyd = 100) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (k < 1) throw ValidationError("k-means needs at least one cluster");
    if (k > n) throw ValidationError("k-means: M0 (" + std::to_string(k) + ") exceeds N (" + std::to_string(n) + ")");

    Matrix centers(static_cast<Eigen::Index>(k), x.cols());
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    centers.row(0) = x.row(static_cast<Eigen::Index>(pick(rng)));

    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (x.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c - 1)))
                                 .squaredNorm();
            if (d < dist2[i]) dist2[i] = d;
            total += dist2[i];
        }
        std::size_t chosen = n - 1;
        if (total > 0.0) {
            const double target = uniform(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (target < acc) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(chosen));
    }

    std::vector<int> labels(n, -1);
    std::vector<std::size_t> counts(k);
    for (std::size_t sweep = 0; sweep < max_lloyd; ++sweep) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = x.row(static_cast<Eigen::Index>(i));
            int best = 0;
            double best_d = (row - centers.row(0)).squaredNorm();
            for (std::size_t c = 1; c < k; ++c) {
                const double d = (row - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        Matrix sums = Matrix::Zero(centers.rows(), centers.cols());
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(labels[i]) += x.row(static_cast<Eigen::Index>(i));
            ++counts[static_cast<std::size_t>(labels[i])];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        }
    }

    std::vector<bool> used(k, false);
    for (int label : labels) used[static_cast<std::size_t>(label)] = true;
    std::vector<int> remap(k, -1);
    int next = 0;
    for (std::size_t c = 0; c < k; ++c) {
        if (used[c]) remap[c] = next++;
    }
    for (auto& label : labels) label = remap[static_cast<std::size_t>(label)];
    return labels;
}

/// One-hot responsibilities from k-means, with E[y] = E[1/y] = 1.
template <class Rng>
HiddenMoments kmeans_init(const ObservationSet& data, std::size_t m0, Rng& rng) {
    const std::vector<int> labels = kmeans_labels(data.x, m0, rng);
    int clusters = 0;
    for (int label : labels) clusters = std::max(clusters, label + 1);
    const auto n = static_cast<Eigen::Index>(data.size());
    HiddenMoments hm;
    hm.zbar = Matrix::Zero(n, clusters);
    for (Eigen::Index i = 0; i < n; ++i) hm.zbar(i, labels[static_cast<std::size_t>(i)]) = 1.0;
    hm.ybar = Matrix::Ones(n, clusters);
    hm.yhat = Matrix::Ones(n, clusters);
    return hm;
}

}  // namespace nigmix
