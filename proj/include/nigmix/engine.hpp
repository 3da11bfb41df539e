#pragma once

// Variational Bayes for NIG mixtures: M-step, E-step, ELBO, pruning and the
// fit driver for the gam, invg and trun variants. gmm is routed to gmm_fit.

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nigmix/distributions.hpp"
#include "nigmix/expectations.hpp"
#include "nigmix/gmm.hpp"
#include "nigmix/priors.hpp"
#include "nigmix/vb_loop.hpp"

namespace nigmix {

inline PosteriorState m_step(const SufficientStats& stats, const PriorHyperparams& prior, Variant variant,
                             Concentration concentration, bool literal_lambda_update = false) {
    if (variant == Variant::gmm) throw ValidationError("m_step: gmm has its own state type");
    const std::size_t m = stats.clusters();
    PosteriorState state;
    state.variant = variant;
    state.concentration = concentration;
    state.clusters.resize(m);
    double tail = 0.0;
    for (std::size_t j = m; j-- > 0;) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double zs = stats.zstar(jj);
        const double zp = stats.zplus(jj);
        const double zm = stats.zminus(jj);
        if (!std::isfinite(zs) || !std::isfinite(zp) || !std::isfinite(zm)) {
            throw NumericalBreakdown("cluster " + std::to_string(j) + ": non-finite statistics");
        }
        ClusterPosterior& c = state.clusters[j];
        c.l = prior.l0 + zs;
        c.r = prior.r0 + tail;
        tail += zs;

        if (variant == Variant::trun) {
            c.f = (prior.f0 * prior.g0 + zs) / (prior.g0 + zp);
            c.g = prior.g0 + zp;
            c.h = 0.0;
        } else if (literal_lambda_update) {
            c.f = prior.f0 + 0.5 * zs;
            c.g = prior.g0 + zp + zm - 2.0 * zs;
            c.h = prior.h0;
        } else {
            // E[y] E[1/y] >= 1 pointwise, so this excess is nonnegative up to rounding.
            c.f = prior.f0 + std::max(0.0, zp + zm - 2.0 * zs);
            c.g = prior.g0;
            c.h = prior.h0 + 0.5 * zs;
        }

        c.s = prior.s0 + zs;
        c.u = prior.u0 + zm;
        c.v = prior.v0 + zp;
        c.w = prior.w0 + zs;
        const double det = c.u * c.v - c.w * c.w;
        if (!(det > 0.0)) {
            throw NumericalBreakdown("cluster " + std::to_string(j) + ": u v - w^2 = " + std::to_string(det) +
                                     " is not positive");
        }
        const Vector rhs_m = prior.m0_prime + stats.xminus[j];
        const Vector rhs_n = prior.n0_prime + stats.xstar[j];
        c.m = (c.v * rhs_m - c.w * rhs_n) / det;
        c.n = (c.u * rhs_n - c.w * rhs_m) / det;
        c.t = symmetrized(prior.t0_prime + stats.sminus[j] -
                          (c.u * c.m * c.m.transpose() + c.w * (c.m * c.n.transpose() + c.n * c.m.transpose()) +
                           c.v * c.n * c.n.transpose()));
        if (!is_spd(c.t)) throw NumericalBreakdown("cluster " + std::to_string(j) + ": Wishart rate is not SPD");
    }
    return state;
}

inline EStepResult e_step(const ObservationSet& data, const PosteriorState& state, const PriorHyperparams& prior) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto m = static_cast<Eigen::Index>(state.size());
    const int dim = data.dim();
    if (prior.dim() != dim) throw ValidationError("e_step: prior and data dimensions differ");
    const double c = -0.5 * (dim + 1.0);
    const bool trun = state.variant == Variant::trun;
    const std::vector<ClusterExpectations> ex = family_expectations(state);

    Matrix log_rho(n, m);
    EStepResult out;
    out.moments.ybar.resize(n, m);
    out.moments.yhat.resize(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const ClusterExpectations& e = ex[static_cast<std::size_t>(j)];
        const ClusterPosterior& cp = state.clusters[static_cast<std::size_t>(j)];
        const Vector tau_n = e.tau * cp.n;
        const double a = (trun ? e.lambda_sq : e.lambda) + dim * e.cov.betabeta + cp.n.dot(tau_n);
        const double b0 = (trun ? 1.0 : e.lambda) + dim * e.cov.mumu;
        const double base = -0.5 * (dim + 1.0) * std::log(2.0 * std::numbers::pi) + e.log_alpha +
                            (trun ? 0.0 : 0.5 * e.log_lambda) + e.lambda + 0.5 * e.log_det_tau -
                            dim * e.cov.mubeta;
        const Matrix diff = data.x.rowwise() - cp.m.transpose();
        const Vector quad = (diff * e.tau).cwiseProduct(diff).rowwise().sum();
        const Vector lin = diff * tau_n;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double b = b0 + quad(i);
            const GigMeanPair g = gig_mean_pair(a, b, c);
            const double lr = base + lin(i) - g.log_norm;
            if (!std::isfinite(lr) || !std::isfinite(g.mean) || !std::isfinite(g.mean_inv)) {
                throw NumericalBreakdown("log rho is not finite at point " + std::to_string(i) + ", cluster " +
                                         std::to_string(j));
            }
            log_rho(i, j) = lr;
            out.moments.ybar(i, j) = g.mean;
            out.moments.yhat(i, j) = g.mean_inv;
        }
    }
    out.log_rho_rowsums = softmax_rows(log_rho);
    out.moments.zbar = std::move(log_rho);
    return out;
}

/// KL(q(theta) || p(theta)) summed over all factors.
inline double posterior_kl(const PosteriorState& state, const PriorHyperparams& prior) {
    std::vector<double> l;
    std::vector<double> r;
    for (const auto& c : state.clusters) {
        l.push_back(c.l);
        r.push_back(c.r);
    }
    double kl = detail::weights_kl(state.concentration, l, r, prior.l0, prior.r0);
    const BlockNormalParams p_block{prior.m0, prior.n0, prior.u0, prior.v0, prior.w0};
    for (const auto& c : state.clusters) {
        if (state.variant == Variant::trun) {
            kl += truncated_normal_kl({c.f, c.g}, {prior.f0, prior.g0});
        } else {
            kl += gig_kl({c.f, c.g, c.h}, {prior.f0, prior.g0, prior.h0});
        }
        const WishartMoments wm = wishart_moments<NumericalBreakdown>({c.s, c.t});
        kl += wishart_kl({c.s, c.t}, {prior.s0, prior.t0});
        kl += block_normal_expected_kl({c.m, c.n, c.u, c.v, c.w}, p_block, wm.mean);
    }
    return kl;
}

/// Evidence lower bound right after an E-step.
inline double elbo(const Vector& log_rho_rowsums, const PosteriorState& state, const PriorHyperparams& prior) {
    return log_rho_rowsums.sum() - posterior_kl(state, prior);
}

struct PruneResult {
    PosteriorState state;
    HiddenMoments moments;
};

/// Removes clusters with Z* < eps_z, keeping stick order.
inline PruneResult prune(const PosteriorState& state, const HiddenMoments& hm, const SufficientStats& stats,
                         double eps_z) {
    if (stats.clusters() != state.size() || hm.clusters() != state.size()) {
        throw ValidationError("prune: state, moments and statistics disagree on the cluster count");
    }
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < state.size(); ++j) {
        if (stats.zstar(static_cast<Eigen::Index>(j)) >= eps_z) keep.push_back(j);
    }
    if (keep.empty()) throw DegenerateFit("every cluster fell below eps_z = " + std::to_string(eps_z));
    PruneResult out;
    out.state.variant = state.variant;
    out.state.concentration = state.concentration;
    for (std::size_t j : keep) out.state.clusters.push_back(state.clusters[j]);
    out.moments = restrict_moments(hm, keep);
    return out;
}

namespace detail {

struct NigModel {
    using State = PosteriorState;
    const PriorHyperparams& prior;
    Variant variant;
    Concentration concentration;
    bool literal_lambda_update;

    State m_step(const SufficientStats& stats) const {
        return nigmix::m_step(stats, prior, variant, concentration, literal_lambda_update);
    }
    EStepResult e_step(const ObservationSet& data, const State& state) const {
        return nigmix::e_step(data, state, prior);
    }
    double elbo(const Vector& rowsums, const State& state) const { return nigmix::elbo(rowsums, state, prior); }
};

}  // namespace detail

/// Fits a mixture with the variant and weight model named in `fconfig`; the
/// lambda prior family follows the variant. Data are centred internally and
/// reported locations are in the original coordinates.
inline FitResult fit(const ObservationSet& data, const PriorConfig& pconfig, const FitConfig& fconfig) {
    if (fconfig.variant == Variant::gmm) return gmm_fit(data, pconfig, fconfig);
    const ObservationSet centred = ObservationSet::from_matrix(data.x.rowwise() - data.mean.transpose());
    PriorConfig pc = pconfig;
    pc.lambda_prior_family = lambda_prior_for(fconfig.variant);
    pc.concentration_model = fconfig.concentration;
    const PriorHyperparams prior = build_prior(pc, centred.mean, centred.cov);
    const detail::NigModel model{prior, fconfig.variant, fconfig.concentration, fconfig.literal_lambda_update};
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
    const std::vector<ClusterExpectations> ex = family_expectations(outcome.state);
    for (std::size_t j = 0; j < outcome.state.size(); ++j) {
        ClusterPosterior& c = outcome.state.clusters[j];
        c.m += data.mean;
        ClusterSummary cs;
        cs.weight = zstar(static_cast<Eigen::Index>(j)) / static_cast<double>(data.size());
        cs.center = c.m;
        cs.bias = c.n;
        cs.mean = c.m + c.n;
        cs.precision = ex[j].tau;
        cs.lambda = ex[j].lambda;
        res.clusters.push_back(std::move(cs));
    }
    res.state = std::move(outcome.state);
    return res;
}

}  // namespace nigmix
