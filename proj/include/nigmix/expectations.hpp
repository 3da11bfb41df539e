#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nigmix/distributions.hpp"
#include "nigmix/model.hpp"
#include "nigmix/specfun.hpp"

namespace nigmix {

/// Posterior expectations of one cluster's parameters under q_theta.
struct ClusterExpectations {
    double lambda = 0.0;
    double log_lambda = 0.0;  ///< unused by trun
    double lambda_sq = 0.0;   ///< trun only
    Matrix tau;
    double log_det_tau = 0.0;
    Vector mu;
    Vector beta;
    BlockCovariance cov{};  ///< conditional covariance factors of (mu, beta)
    double log_alpha = 0.0;
};

namespace detail {

/// E[log alpha_j] under a Dirichlet(l) or a stick-breaking Beta(l_j, r_j)
/// posterior; the last stick keeps its own Beta term.
inline std::vector<double> expected_log_weights(Concentration concentration, const std::vector<double>& l,
                                                const std::vector<double>& r) {
    const std::size_t m = l.size();
    std::vector<double> out(m);
    if (concentration == Concentration::dd) {
        double total = 0.0;
        for (double lj : l) total += lj;
        const double psi_total = digamma(total);
        for (std::size_t j = 0; j < m; ++j) out[j] = digamma(l[j]) - psi_total;
        return out;
    }
    double carried = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double psi_sum = digamma(l[j] + r[j]);
        out[j] = digamma(l[j]) - psi_sum + carried;
        carried += digamma(r[j]) - psi_sum;
    }
    return out;
}

/// KL of the weight posterior against Dirichlet(l0) or the Beta(l0, r0) sticks.
inline double weights_kl(Concentration concentration, const std::vector<double>& l, const std::vector<double>& r,
                         double l0, double r0) {
    if (concentration == Concentration::dd) {
        const std::vector<double> prior(l.size(), l0);
        return dirichlet_kl(l, prior);
    }
    double kl = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) kl += beta_kl(l[j], r[j], l0, r0);
    return kl;
}

inline std::vector<double> expected_log_weights(const PosteriorState& state) {
    std::vector<double> l;
    std::vector<double> r;
    for (const auto& c : state.clusters) {
        l.push_back(c.l);
        r.push_back(c.r);
    }
    return expected_log_weights(state.concentration, l, r);
}

inline ClusterExpectations cluster_expectations(const PosteriorState& state, std::size_t j, double log_alpha) {
    const ClusterPosterior& c = state.clusters[j];
    ClusterExpectations e;
    const std::string where = "cluster " + std::to_string(j);
    if (state.variant == Variant::trun) {
        const auto tn = truncated_normal_moments({c.f, c.g});
        e.lambda = tn.mean;
        e.lambda_sq = tn.mean_sq;
    } else {
        const GigMoments gm = gig_moments({c.f, c.g, c.h});
        e.lambda = gm.mean;
        e.log_lambda = gm.mean_log;
    }
    const WishartMoments wm = wishart_moments<NumericalBreakdown>({c.s, c.t});
    e.tau = wm.mean;
    e.log_det_tau = wm.mean_log_det;
    e.mu = c.m;
    e.beta = c.n;
    try {
        e.cov = block_covariance({c.m, c.n, c.u, c.v, c.w});
    } catch (const NumericalBreakdown& err) {
        throw NumericalBreakdown(where + ": " + err.what());
    }
    e.log_alpha = log_alpha;
    return e;
}

}  // namespace detail

inline std::vector<ClusterExpectations> family_expectations(const PosteriorState& state) {
    const std::vector<double> log_alpha = detail::expected_log_weights(state);
    std::vector<ClusterExpectations> out;
    out.reserve(state.size());
    for (std::size_t j = 0; j < state.size(); ++j) out.push_back(detail::cluster_expectations(state, j, log_alpha[j]));
    return out;
}

inline ClusterExpectations family_expectations(const PosteriorState& state, std::size_t j) {
    if (j >= state.size()) throw ValidationError("cluster index out of range");
    return detail::cluster_expectations(state, j, detail::expected_log_weights(state)[j]);
}

}  // namespace nigmix
