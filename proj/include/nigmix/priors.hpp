#pragma once

// Prior hyperparameters from interpretable ratios and the data statistics.
//
//   eta_mu   spread of cluster centres relative to the data spread
//   eta_tau  cluster size relative to the data spread
//   eta_beta bias size relative to the cluster size
//   xi       correlation between centre and bias
//   lambda0 / nu_lambda  prior mean and confidence of the normality

#include <cmath>
#include <optional>
#include <string>

#include "nigmix/distributions.hpp"
#include "nigmix/errors.hpp"
#include "nigmix/linalg.hpp"
#include "nigmix/model.hpp"

namespace nigmix {

enum class LambdaPrior { inverse_gaussian, gamma, truncated_normal };

inline LambdaPrior lambda_prior_for(Variant v) {
    switch (v) {
        case Variant::gam: return LambdaPrior::gamma;
        case Variant::trun: return LambdaPrior::truncated_normal;
        default: return LambdaPrior::inverse_gaussian;
    }
}

struct PriorConfig {
    double eta_mu = 1.0;
    double eta_tau = 0.3;
    double eta_beta = 0.3;
    double xi = 0.0;
    double lambda0 = 5.0;
    std::optional<double> nu_tau;  ///< defaults to D + 1
    double nu_lambda = 1.0;
    double l0 = 1.0;
    double r0 = 1.0;
    /// Location of the truncated-normal prior used by the trun variant; its
    /// precision is nu_lambda.
    double trun_location = 1.0;
    LambdaPrior lambda_prior_family = LambdaPrior::inverse_gaussian;
    Concentration concentration_model = Concentration::dd;

    void validate(int dim) const {
        const auto positive = [](double x, const char* name) {
            if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(std::string(name) + " must be positive");
        };
        positive(eta_mu, "eta_mu");
        positive(eta_tau, "eta_tau");
        positive(eta_beta, "eta_beta");
        positive(lambda0, "lambda0");
        positive(nu_lambda, "nu_lambda");
        positive(l0, "l0");
        positive(r0, "r0");
        if (!(std::abs(xi) < 1.0)) throw ValidationError("xi must lie in (-1, 1)");
        if (nu_tau && !(*nu_tau > dim - 1.0)) throw ValidationError("nu_tau must exceed D - 1");
        if (!std::isfinite(trun_location)) throw ValidationError("trun_location must be finite");
    }
};

struct PriorHyperparams {
    double l0 = 1.0;
    double r0 = 1.0;
    LambdaPrior lambda_family = LambdaPrior::inverse_gaussian;
    double f0 = 1.0;
    double g0 = 1.0;
    double h0 = -0.5;
    double s0 = 1.0;
    Matrix t0;
    double u0 = 1.0;
    double v0 = 1.0;
    double w0 = 0.0;
    Vector m0;
    Vector n0;
    // Prior natural parameters after expanding the (mu, beta) quadratic form.
    Matrix t0_prime;
    Vector m0_prime;
    Vector n0_prime;

    int dim() const { return static_cast<int>(m0.size()); }
};

inline PriorHyperparams build_prior(const PriorConfig& config, const Vector& data_mean, const Matrix& data_cov) {
    const int dim = static_cast<int>(data_mean.size());
    config.validate(dim);
    if (data_cov.rows() != dim || data_cov.cols() != dim) throw ValidationError("data covariance has wrong shape");
    cholesky<ValidationError>(data_cov, "data covariance");

    PriorHyperparams p;
    p.l0 = config.l0;
    p.r0 = config.r0;
    p.m0 = data_mean;
    p.n0 = Vector::Zero(dim);

    const double nu_tau = config.nu_tau.value_or(dim + 1.0);
    const double eta_tau2 = config.eta_tau * config.eta_tau;
    const double one_minus_xi2 = 1.0 - config.xi * config.xi;
    p.s0 = nu_tau;
    p.t0 = nu_tau * eta_tau2 * data_cov;
    p.u0 = eta_tau2 / (config.eta_mu * config.eta_mu * one_minus_xi2);
    p.w0 = config.eta_tau * config.xi / (config.eta_mu * config.eta_beta * one_minus_xi2);
    p.v0 = 1.0 / (config.eta_beta * config.eta_beta * one_minus_xi2);

    p.lambda_family = config.lambda_prior_family;
    switch (config.lambda_prior_family) {
        case LambdaPrior::inverse_gaussian:
            p.f0 = config.nu_lambda / config.lambda0;
            p.g0 = config.nu_lambda * config.lambda0;
            p.h0 = -0.5;
            break;
        case LambdaPrior::gamma:
            p.f0 = 2.0 * config.nu_lambda / config.lambda0;
            p.g0 = 0.0;
            p.h0 = config.nu_lambda;
            break;
        case LambdaPrior::truncated_normal:
            p.f0 = config.trun_location;
            p.g0 = config.nu_lambda;
            p.h0 = 0.0;
            break;
    }

    p.t0_prime = p.t0 + p.u0 * p.m0 * p.m0.transpose() + p.w0 * (p.m0 * p.n0.transpose() + p.n0 * p.m0.transpose()) +
                 p.v0 * p.n0 * p.n0.transpose();
    p.m0_prime = p.u0 * p.m0 + p.w0 * p.n0;
    p.n0_prime = p.w0 * p.m0 + p.v0 * p.n0;
    return p;
}

}  // namespace nigmix
