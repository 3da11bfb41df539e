#pragma once

// Variational Gaussian mixture baseline with Normal-Wishart clusters. Runs on
// the same loop as the NIG engine with E[y] = E[1/y] = 1.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nigmix/distributions.hpp"
#include "nigmix/expectations.hpp"
#include "nigmix/priors.hpp"
#include "nigmix/vb_loop.hpp"

namespace nigmix {

struct GmmPrior {
    double l0 = 1.0;
    double r0 = 1.0;
    double s0 = 1.0;
    Matrix t0;
    double u0 = 1.0;
    Vector m0;
};

inline GmmPrior build_gmm_prior(const PriorConfig& config, const Vector& data_mean, const Matrix& data_cov) {
    const int dim = static_cast<int>(data_mean.size());
    config.validate(dim);
    if (data_cov.rows() != dim || data_cov.cols() != dim) throw ValidationError("data covariance has wrong shape");
    cholesky<ValidationError>(data_cov, "data covariance");
    GmmPrior p;
    p.l0 = config.l0;
    p.r0 = config.r0;
    const double nu_tau = config.nu_tau.value_or(dim + 1.0);
    const double eta_tau2 = config.eta_tau * config.eta_tau;
    p.s0 = nu_tau;
    p.t0 = nu_tau * eta_tau2 * data_cov;
    p.u0 = eta_tau2 / (config.eta_mu * config.eta_mu);
    p.m0 = data_mean;
    return p;
}

inline GmmPosteriorState gmm_m_step(const SufficientStats& stats, const GmmPrior& prior, Concentration concentration) {
    const std::size_t m = stats.clusters();
    GmmPosteriorState state;
    state.concentration = concentration;
    state.clusters.resize(m);
    double tail = 0.0;
    for (std::size_t j = m; j-- > 0;) {
        GmmCluster& c = state.clusters[j];
        const double z = stats.zstar(static_cast<Eigen::Index>(j));
        c.l = prior.l0 + z;
        c.r = prior.r0 + tail;
        tail += z;
        c.s = prior.s0 + z;
        c.u = prior.u0 + z;
        c.m = (prior.u0 * prior.m0 + stats.xstar[j]) / c.u;
        c.t = symmetrized(prior.t0 + prior.u0 * prior.m0 * prior.m0.transpose() + stats.sminus[j] -
                          c.u * c.m * c.m.transpose());
        if (!is_spd(c.t)) throw NumericalBreakdown("cluster " + std::to_string(j) + ": Wishart rate is not SPD");
    }
    return state;
}

inline EStepResult gmm_e_step(const ObservationSet& data, const GmmPosteriorState& state) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto m = static_cast<Eigen::Index>(state.size());
    const int dim = data.dim();
    std::vector<double> l;
    std::vector<double> r;
    for (const auto& c : state.clusters) {
        l.push_back(c.l);
        r.push_back(c.r);
    }
    const std::vector<double> log_alpha = detail::expected_log_weights(state.concentration, l, r);
    Matrix log_rho(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const GmmCluster& c = state.clusters[static_cast<std::size_t>(j)];
        const WishartMoments wm = wishart_moments<NumericalBreakdown>({c.s, c.t});
        const double base = log_alpha[static_cast<std::size_t>(j)] - 0.5 * dim * std::log(2.0 * std::numbers::pi) +
                            0.5 * wm.mean_log_det - 0.5 * dim / c.u;
        const Matrix diff = data.x.rowwise() - c.m.transpose();
        const Vector quad = (diff * wm.mean).cwiseProduct(diff).rowwise().sum();
        log_rho.col(j) = (base - 0.5 * quad.array()).matrix();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!std::isfinite(log_rho(i, j))) {
                throw NumericalBreakdown("log rho is not finite at point " + std::to_string(i) + ", cluster " +
                                         std::to_string(j));
            }
        }
    }
    EStepResult out;
    out.log_rho_rowsums = softmax_rows(log_rho);
    out.moments.zbar = std::move(log_rho);
    out.moments.ybar = Matrix::Ones(n, m);
    out.moments.yhat = Matrix::Ones(n, m);
    return out;
}

inline double gmm_kl(const GmmPosteriorState& state, const GmmPrior& prior) {
    std::vector<double> l;
    std::vector<double> r;
    for (const auto& c : state.clusters) {
        l.push_back(c.l);
        r.push_back(c.r);
    }
    double kl = detail::weights_kl(state.concentration, l, r, prior.l0, prior.r0);
    const double dim = static_cast<double>(prior.m0.size());
    for (const auto& c : state.clusters) {
        const WishartMoments wm = wishart_moments<NumericalBreakdown>({c.s, c.t});
        const Vector dm = c.m - prior.m0;
        kl += wishart_kl({c.s, c.t}, {prior.s0, prior.t0});
        kl += 0.5 * (dim * prior.u0 / c.u - dim + prior.u0 * dm.dot(wm.mean * dm) + dim * std::log(c.u / prior.u0));
    }
    return kl;
}

inline double gmm_elbo(const Vector& log_rho_rowsums, const GmmPosteriorState& state, const GmmPrior& prior) {
    return log_rho_rowsums.sum() - gmm_kl(state, prior);
}

namespace detail {

struct GmmModel {
    using State = GmmPosteriorState;
    const GmmPrior& prior;
    Concentration concentration;

    State m_step(const SufficientStats& stats) const { return gmm_m_step(stats, prior, concentration); }
    EStepResult e_step(const ObservationSet& data, const State& state) const { return gmm_e_step(data, state); }
    double elbo(const Vector& rowsums, const State& state) const { return gmm_elbo(rowsums, state, prior); }
};

}  // namespace detail

/// Variational GMM fit on data centred internally; reported means are in the
/// original coordinates.
inline FitResult gmm_fit(const ObservationSet& data, const PriorConfig& pconfig, const FitConfig& fconfig) {
    const ObservationSet centred = ObservationSet::from_matrix(data.x.rowwise() - data.mean.transpose());
    PriorConfig pc = pconfig;
    pc.concentration_model = fconfig.concentration;
    const GmmPrior prior = build_gmm_prior(pc, centred.mean, centred.cov);
    const detail::GmmModel model{prior, fconfig.concentration};
    auto outcome = detail::run_vb_loop(model, centred, fconfig);

    FitResult res;
    res.labels = argmax_labels(outcome.moments.zbar);
    res.zbar = std::move(outcome.moments.zbar);
    res.elbo_trace = std::move(outcome.elbo_trace);
    res.prune_iterations = std::move(outcome.prune_iterations);
    res.n_clusters = outcome.state.size();
    res.converged = outcome.converged;
    res.iterations = outcome.iterations;
    const Vector zstar = res.zbar.colwise().sum().transpose();
    for (std::size_t j = 0; j < outcome.state.size(); ++j) {
        GmmCluster& c = outcome.state.clusters[j];
        c.m += data.mean;
        ClusterSummary cs;
        cs.weight = zstar(static_cast<Eigen::Index>(j)) / static_cast<double>(data.size());
        cs.center = c.m;
        cs.bias = Vector::Zero(data.dim());
        cs.mean = c.m;
        cs.precision = c.s * cholesky(c.t, "Wishart rate").solve(Matrix::Identity(data.dim(), data.dim()));
        cs.lambda = std::numeric_limits<double>::infinity();
        res.clusters.push_back(std::move(cs));
    }
    res.gmm_state = std::move(outcome.state);
    return res;
}

}  // namespace nigmix
