#pragma once

// Coordinate-ascent driver shared by the NIG engine and the Gaussian
// baseline: M-step first (from k-means one-hot moments), then E-step, ELBO,
// pruning of clusters whose expected size drops below eps_z, and the
// |dL| < eps_dL * N for `patience` consecutive iterations stopping rule.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "nigmix/errors.hpp"
#include "nigmix/kmeans.hpp"
#include "nigmix/model.hpp"

namespace nigmix {

struct EStepResult {
    HiddenMoments moments;
    Vector log_rho_rowsums;
};

/// Sufficient statistics in one pass over the data, fixed summation order.
inline SufficientStats accumulate_stats(const ObservationSet& data, const HiddenMoments& hm) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto m = static_cast<Eigen::Index>(hm.clusters());
    const Eigen::Index dim = data.dim();
    if (hm.zbar.rows() != n || hm.ybar.rows() != n || hm.yhat.rows() != n || hm.ybar.cols() != m ||
        hm.yhat.cols() != m) {
        throw ValidationError("accumulate_stats: hidden moments do not match the data shape");
    }
    SufficientStats st;
    st.zstar = Vector::Zero(m);
    st.zplus = Vector::Zero(m);
    st.zminus = Vector::Zero(m);
    st.xstar.assign(static_cast<std::size_t>(m), Vector::Zero(dim));
    st.xminus.assign(static_cast<std::size_t>(m), Vector::Zero(dim));
    st.sminus.assign(static_cast<std::size_t>(m), Matrix::Zero(dim, dim));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto xi = data.x.row(i).transpose();
        for (Eigen::Index j = 0; j < m; ++j) {
            const double z = hm.zbar(i, j);
            if (z == 0.0) continue;
            const double zy = z * hm.ybar(i, j);
            const double zinv = z * hm.yhat(i, j);
            const auto sj = static_cast<std::size_t>(j);
            st.zstar(j) += z;
            st.zplus(j) += zy;
            st.zminus(j) += zinv;
            st.xstar[sj].noalias() += z * xi;
            st.xminus[sj].noalias() += zinv * xi;
            st.sminus[sj].selfadjointView<Eigen::Lower>().rankUpdate(xi, zinv);
        }
    }
    for (auto& s : st.sminus) s = s.selfadjointView<Eigen::Lower>();
    return st;
}

/// Row-wise softmax of log rho with max subtraction; returns the row
/// log-sum-exp values.
inline Vector softmax_rows(Matrix& log_rho) {
    Vector rowsums(log_rho.rows());
    for (Eigen::Index i = 0; i < log_rho.rows(); ++i) {
        const double peak = log_rho.row(i).maxCoeff();
        double acc = 0.0;
        for (Eigen::Index j = 0; j < log_rho.cols(); ++j) {
            log_rho(i, j) = std::exp(log_rho(i, j) - peak);
            acc += log_rho(i, j);
        }
        log_rho.row(i) /= acc;
        rowsums(i) = peak + std::log(acc);
    }
    return rowsums;
}

/// Column indices whose expected size reaches eps_z.
inline std::vector<std::size_t> surviving_clusters(const Matrix& zbar, double eps_z) {
    std::vector<std::size_t> keep;
    const Vector sizes = zbar.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < sizes.size(); ++j) {
        if (sizes(j) >= eps_z) keep.push_back(static_cast<std::size_t>(j));
    }
    return keep;
}

/// Drops the columns not in `keep` and renormalizes each responsibility row.
/// A row whose remaining mass underflows to zero is spread uniformly.
inline HiddenMoments restrict_moments(const HiddenMoments& hm, const std::vector<std::size_t>& keep) {
    const Eigen::Index n = hm.zbar.rows();
    const auto m = static_cast<Eigen::Index>(keep.size());
    HiddenMoments out;
    out.zbar.resize(n, m);
    out.ybar.resize(n, m);
    out.yhat.resize(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto j = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(k)]);
        out.zbar.col(k) = hm.zbar.col(j);
        out.ybar.col(k) = hm.ybar.col(j);
        out.yhat.col(k) = hm.yhat.col(j);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double total = out.zbar.row(i).sum();
        if (total > 0.0) {
            out.zbar.row(i) /= total;
        } else {
            out.zbar.row(i).setConstant(1.0 / static_cast<double>(m));
        }
    }
    return out;
}

namespace detail {

/// `Model` supplies:
///   State m_step(const SufficientStats&) const;
///   EStepResult e_step(const ObservationSet&, const State&) const;
///   double elbo(const Vector& log_rho_rowsums, const State&) const;
template <class Model>
struct LoopOutcome {
    typename Model::State state;
    HiddenMoments moments;
    std::vector<double> elbo_trace;
    std::vector<std::size_t> prune_iterations;
    bool converged = false;
    std::size_t iterations = 0;
};

template <class Model>
LoopOutcome<Model> run_vb_loop(const Model& model, const ObservationSet& data, const FitConfig& config) {
    config.validate();
    if (config.m0 > data.size()) {
        throw ValidationError("M0 (" + std::to_string(config.m0) + ") exceeds N (" + std::to_string(data.size()) + ")");
    }
    std::mt19937_64 rng(config.seed);
    HiddenMoments hm = kmeans_init(data, config.m0, rng);

    LoopOutcome<Model> out;
    const double tolerance = config.eps_dl_coeff * static_cast<double>(data.size());
    std::size_t small_steps = 0;
    bool pruned_last = false;
    for (std::size_t it = 0; it < config.max_iter; ++it) {
        const SufficientStats stats = accumulate_stats(data, hm);
        out.state = model.m_step(stats);
        EStepResult es = model.e_step(data, out.state);
        const double elbo = model.elbo(es.log_rho_rowsums, out.state);
        if (!std::isfinite(elbo)) throw NumericalBreakdown("ELBO is not finite at iteration " + std::to_string(it));
        out.elbo_trace.push_back(elbo);
        out.moments = std::move(es.moments);
        out.iterations = it + 1;

        if (out.elbo_trace.size() >= 2 && !pruned_last) {
            const double delta = elbo - out.elbo_trace[out.elbo_trace.size() - 2];
            small_steps = std::abs(delta) < tolerance ? small_steps + 1 : 0;
        }

        const std::vector<std::size_t> keep = surviving_clusters(out.moments.zbar, config.eps_z);
        if (keep.empty()) {
            throw DegenerateFit("every cluster fell below eps_z = " + std::to_string(config.eps_z));
        }
        const bool prune_now = keep.size() < out.moments.clusters();
        if (config.observer) {
            config.observer(IterationSnapshot{it, elbo, out.moments, out.moments.clusters(), prune_now});
        }
        if (prune_now) {
            out.prune_iterations.push_back(it);
            hm = restrict_moments(out.moments, keep);
            small_steps = 0;
            pruned_last = true;
            continue;
        }
        pruned_last = false;
        if (small_steps >= config.patience) {
            out.converged = true;
            break;
        }
        hm = out.moments;
    }
    return out;
}

}  // namespace detail

}  // namespace nigmix
