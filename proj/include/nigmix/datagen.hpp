#pragma once

// Synthetic NIG mixtures for benchmarking.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nigmix/distributions.hpp"
#include "nigmix/errors.hpp"
#include "nigmix/linalg.hpp"

namespace nigmix {

enum class Population { uniform, nonuniform };

inline std::string_view to_string(Population p) { return p == Population::uniform ? "uniform" : "nonuniform"; }

inline Population parse_population(std::string_view s) {
    if (s == "uniform") return Population::uniform;
    if (s == "nonuniform") return Population::nonuniform;
    throw ValidationError("unknown population '" + std::string(s) + "' (expected uniform or nonuniform)");
}

struct GenConfig {
    int clusters = 10;
    int dim = 2;
    int points = 1000;
    double sigma = 0.3;
    double sigma_beta = 0.5;
    double lambda_star = 1.0;
    Population population = Population::uniform;
    std::uint64_t seed = 0;

    void validate() const {
        if (clusters < 1 || dim < 1) throw ValidationError("cluster count and dimension must be positive");
        if (points < clusters) throw ValidationError("N must be at least M");
        if (!(sigma > 0.0) || !(lambda_star > 0.0) || !(sigma_beta >= 0.0)) {
            throw ValidationError("sigma and lambda_star must be positive, sigma_beta nonnegative");
        }
        if (population == Population::nonuniform && (points != 1000 || clusters != 10)) {
            throw ValidationError("nonuniform population is defined only for N = 1000, M = 10");
        }
    }
};

struct LabeledDataset {
    Matrix data;
    std::vector<int> labels;
    std::vector<NigParams> true_params;
    std::vector<int> counts;
};

inline std::vector<int> population_counts(const GenConfig& config) {
    if (config.population == Population::nonuniform) return {400, 200, 50, 50, 50, 50, 50, 50, 50, 50};
    std::vector<int> counts(static_cast<std::size_t>(config.clusters), config.points / config.clusters);
    for (int k = 0; k < config.points % config.clusters; ++k) ++counts[static_cast<std::size_t>(k)];
    return counts;
}

/// Draws cluster parameters, then points per cluster, then shuffles rows.
/// `shuffle = false` keeps points grouped by cluster.
inline LabeledDataset generate(const GenConfig& config, bool shuffle = true) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const Eigen::Index dim = config.dim;
    LabeledDataset out;
    out.counts = population_counts(config);
    const Matrix tau_mean = Matrix::Identity(dim, dim) / (config.sigma * config.sigma);
    for (int k = 0; k < config.clusters; ++k) {
        NigParams p;
        p.mu = standard_normal_vector(dim, rng);
        p.beta = config.sigma_beta * standard_normal_vector(dim, rng);
        p.tau = sample_wishart(dim + 5.0, tau_mean, rng);
        p.lambda = sample_inverse_gaussian({config.lambda_star, 5.0}, rng);
        out.true_params.push_back(std::move(p));
    }
    Matrix grouped(config.points, dim);
    std::vector<int> grouped_labels;
    grouped_labels.reserve(static_cast<std::size_t>(config.points));
    Eigen::Index row = 0;
    for (int k = 0; k < config.clusters; ++k) {
        for (int i = 0; i < out.counts[static_cast<std::size_t>(k)]; ++i) {
            grouped.row(row++) = sample_nig(out.true_params[static_cast<std::size_t>(k)], rng).transpose();
            grouped_labels.push_back(k);
        }
    }
    std::vector<std::size_t> order(static_cast<std::size_t>(config.points));
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle) {
        // Fisher-Yates with an explicit draw so the permutation does not
        // depend on the standard library's shuffle.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }
    }
    out.data.resize(config.points, dim);
    out.labels.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.data.row(static_cast<Eigen::Index>(i)) = grouped.row(static_cast<Eigen::Index>(order[i]));
        out.labels[i] = grouped_labels[order[i]];
    }
    return out;
}

}  // namespace nigmix
