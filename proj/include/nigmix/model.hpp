#pragma once

// Shared value types: observations, variant tags, the per-cluster variational
// posterior, hidden-variable moments and their sufficient statistics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nigmix/errors.hpp"
#include "nigmix/linalg.hpp"

namespace nigmix {

/// Mixture-component family being fitted.
///  - gam:  NIG, gamma prior on the normality lambda
///  - invg: NIG, inverse Gaussian prior on lambda
///  - trun: NIG with the mixing shape tied to lambda and a truncated-normal
///          posterior on lambda
///  - gmm:  plain Gaussian mixture baseline
enum class Variant { gam, invg, trun, gmm };

/// Prior over mixture weights: finite Dirichlet or truncated stick-breaking.
enum class Concentration { dd, dpm };

inline std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::gam: return "gam";
        case Variant::invg: return "invg";
        case Variant::trun: return "trun";
        case Variant::gmm: return "gmm";
    }
    return "?";
}

inline std::string_view to_string(Concentration c) { return c == Concentration::dd ? "dd" : "dpm"; }

inline Variant parse_variant(std::string_view s) {
    if (s == "gam") return Variant::gam;
    if (s == "invg") return Variant::invg;
    if (s == "trun") return Variant::trun;
    if (s == "gmm") return Variant::gmm;
    throw ValidationError("unknown variant '" + std::string(s) + "' (expected gam, invg, trun or gmm)");
}

inline Concentration parse_concentration(std::string_view s) {
    if (s == "dd") return Concentration::dd;
    if (s == "dpm") return Concentration::dpm;
    throw ValidationError("unknown concentration '" + std::string(s) + "' (expected dd or dpm)");
}

/// N x D data with its mean and (regularized) covariance cached.
struct ObservationSet {
    Matrix x;
    Vector mean;
    Matrix cov;

    std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }

    static ObservationSet from_matrix(Matrix data) {
        if (data.rows() < 1 || data.cols() < 1) throw ValidationError("observation matrix is empty");
        if (!data.allFinite()) throw ValidationError("observation matrix has non-finite entries");
        ObservationSet out;
        out.mean = data.colwise().mean().transpose();
        const Matrix centred = data.rowwise() - out.mean.transpose();
        out.cov = (centred.transpose() * centred) / static_cast<double>(data.rows());
        const double scale = out.cov.trace() / static_cast<double>(data.cols());
        out.cov.diagonal().array() += 1e-10 * (scale > 0.0 ? scale : 1.0);
        out.x = std::move(data);
        return out;
    }
};

/// Variational posterior of one cluster.
///
/// Weights: Dirichlet component l, or Beta(l, r) stick for dpm.
/// Normality: GIG(f, g, h) for gam/invg; truncated normal (location f,
/// precision g) for trun.
/// Precision: Wishart(s, t) with rate t.
/// Centre/bias: N([m; n], [[u, w], [w, v]] (x) tau).
struct ClusterPosterior {
    double l = 1.0;
    double r = 1.0;
    double f = 1.0;
    double g = 1.0;
    double h = -0.5;
    double s = 1.0;
    Matrix t;
    double u = 1.0;
    double v = 1.0;
    double w = 0.0;
    Vector m;
    Vector n;
};

struct PosteriorState {
    Variant variant = Variant::invg;
    Concentration concentration = Concentration::dd;
    std::vector<ClusterPosterior> clusters;

    std::size_t size() const { return clusters.size(); }
};

/// Normal-Wishart posterior of one Gaussian baseline cluster:
/// mu | tau ~ N(m, (u tau)^{-1}), tau ~ W(s, t).
struct GmmCluster {
    double l = 1.0;
    double r = 1.0;
    double s = 1.0;
    Matrix t;
    double u = 1.0;
    Vector m;
};

struct GmmPosteriorState {
    Concentration concentration = Concentration::dd;
    std::vector<GmmCluster> clusters;

    std::size_t size() const { return clusters.size(); }
};

/// q(z, y) summaries: responsibilities and E[y], E[1/y] per (point, cluster).
struct HiddenMoments {
    Matrix zbar;
    Matrix ybar;
    Matrix yhat;

    std::size_t points() const { return static_cast<std::size_t>(zbar.rows()); }
    std::size_t clusters() const { return static_cast<std::size_t>(zbar.cols()); }
};

/// Per-cluster weighted data statistics consumed by the M-step.
struct SufficientStats {
    Vector zstar;   ///< sum_i z
    Vector zplus;   ///< sum_i z E[y]
    Vector zminus;  ///< sum_i z E[1/y]
    std::vector<Vector> xstar;   ///< sum_i z x
    std::vector<Vector> xminus;  ///< sum_i z E[1/y] x
    std::vector<Matrix> sminus;  ///< sum_i z E[1/y] x x^T

    std::size_t clusters() const { return static_cast<std::size_t>(zstar.size()); }
};

struct IterationSnapshot {
    std::size_t iteration;
    double elbo;
    const HiddenMoments& moments;
    std::size_t clusters;
    bool pruned_after;
};

struct FitConfig {
    std::size_t m0 = 50;
    double eps_z = 2.0;
    double eps_dl_coeff = 1e-5;
    std::size_t patience = 5;
    std::size_t max_iter = 1000;
    std::uint64_t seed = 0;
    Variant variant = Variant::invg;
    Concentration concentration = Concentration::dd;
    /// Use the as-printed lambda update (f += Z*/2, g += Z+ + Z- - 2Z*,
    /// h fixed) instead of the one derived from the expected log-likelihood.
    bool literal_lambda_update = false;
    /// Called after every iteration; used by diagnostics and tests.
    std::function<void(const IterationSnapshot&)> observer;

    void validate() const {
        if (m0 < 1) throw ValidationError("M0 must be at least 1");
        if (!(eps_z > 0.0) || !(eps_dl_coeff > 0.0)) throw ValidationError("thresholds must be positive");
        if (patience < 1) throw ValidationError("patience must be at least 1");
        if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
    }
};

/// Human-facing posterior summary of one surviving cluster.
struct ClusterSummary {
    double weight = 0.0;      ///< Z* / N
    Vector center;            ///< E[mu]
    Vector bias;              ///< E[beta] (zero for gmm)
    Vector mean;              ///< E[mu + beta]
    Matrix precision;         ///< E[tau]
    double lambda = 0.0;      ///< E[lambda]; +inf for gmm
};

struct FitResult {
    std::vector<int> labels;
    Matrix zbar;
    std::vector<double> elbo_trace;
    std::vector<std::size_t> prune_iterations;  ///< 0-based iterations followed by a prune
    std::size_t n_clusters = 0;
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<ClusterSummary> clusters;
    PosteriorState state;         ///< NIG variants only
    GmmPosteriorState gmm_state;  ///< gmm only

    double final_elbo() const { return elbo_trace.empty() ? 0.0 : elbo_trace.back(); }
};

/// Lowest index wins ties.
inline std::vector<int> argmax_labels(const Matrix& zbar) {
    std::vector<int> labels(static_cast<std::size_t>(zbar.rows()));
    for (Eigen::Index i = 0; i < zbar.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < zbar.cols(); ++j) {
            if (zbar(i, j) > zbar(i, best)) best = j;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace nigmix
