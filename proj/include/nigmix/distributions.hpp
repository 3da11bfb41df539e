#pragma once

// Densities, closed-form expectations, KL divergences and samplers for the
// families used by the NIG mixture: generalized inverse Gaussian (with the
// inverse Gaussian and gamma special cases), Wishart, the joint block normal
// over (mu, beta), Dirichlet/Beta, the positive truncated normal, and the
// multivariate NIG itself.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>

#include "nigmix/errors.hpp"
#include "nigmix/linalg.hpp"
#include "nigmix/specfun.hpp"

namespace nigmix {

// ---------------------------------------------------------------------------
// Generalized inverse Gaussian
//
//   log p(x | a, b, c) = Delta(a, b, c) + (c - 1) log x - (a/2) x - (b/2) / x
//   Delta(a, b, c)     = -log 2 + (c/2) log(a/b) - log K_c(sqrt(ab))
//
// b = 0 is the gamma limit (shape c, rate a/2), valid for c > 0.
// ---------------------------------------------------------------------------

struct GigParams {
    double a = 1.0;
    double b = 1.0;
    double c = -0.5;

    void validate() const {
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !(a > 0.0) || !(b >= 0.0)) {
            throw DomainError("GIG parameters require finite a > 0, b >= 0 (a=" + std::to_string(a) +
                              ", b=" + std::to_string(b) + ", c=" + std::to_string(c) + ")");
        }
        if (b == 0.0 && !(c > 0.0)) {
            throw DomainError("GIG with b = 0 (gamma limit) requires c > 0, got c=" + std::to_string(c));
        }
    }

    bool is_gamma() const { return b == 0.0; }
};

inline double gig_log_norm(const GigParams& p) {
    p.validate();
    if (p.is_gamma()) return p.c * std::log(0.5 * p.a) - log_gamma(p.c);
    return -std::numbers::ln2 + 0.5 * p.c * std::log(p.a / p.b) - log_bessel_k(p.c, std::sqrt(p.a * p.b));
}

struct GigMoments {
    double mean = 0.0;
    std::optional<double> mean_inv;  ///< empty when E[1/x] does not exist
    double mean_log = 0.0;

    double require_mean_inv() const {
        if (!mean_inv) throw UndefinedMoment("E[1/x] is undefined for a gamma with shape <= 1");
        return *mean_inv;
    }
};

inline GigMoments gig_moments(const GigParams& p) {
    p.validate();
    GigMoments out;
    if (p.is_gamma()) {
        out.mean = 2.0 * p.c / p.a;
        out.mean_log = digamma(p.c) - std::log(0.5 * p.a);
        if (p.c > 1.0) out.mean_inv = p.a / (2.0 * (p.c - 1.0));
        return out;
    }
    const double omega = std::sqrt(p.a * p.b);
    const double half_log_ratio = 0.5 * std::log(p.b / p.a);
    const LogBesselTriplet k = log_bessel_k_triplet(p.c, omega);
    out.mean = std::exp(half_log_ratio + k.above - k.at);
    out.mean_inv = std::exp(-half_log_ratio + k.below - k.at);
    out.mean_log = half_log_ratio + dlog_bessel_k_dorder(p.c, omega);
    return out;
}

inline double gig_variance(const GigParams& p) {
    p.validate();
    if (p.is_gamma()) return p.c / (0.25 * p.a * p.a);
    const double omega = std::sqrt(p.a * p.b);
    // E[x^2] = (b/a) K_{c+2}/K_c
    const double log_k_c = log_bessel_k(p.c, omega);
    const double log_k_c1 = log_bessel_k(p.c + 1.0, omega);
    const double log_k_c2 = log_bessel_k(p.c + 2.0, omega);
    const double ratio = p.b / p.a;
    const double mean = std::sqrt(ratio) * std::exp(log_k_c1 - log_k_c);
    return ratio * std::exp(log_k_c2 - log_k_c) - mean * mean;
}

/// E[x], E[1/x] and Delta from a single Bessel ladder; the E-step hot path.
struct GigMeanPair {
    double log_norm;
    double mean;
    double mean_inv;
};

inline GigMeanPair gig_mean_pair(double a, double b, double c) {
    const double omega = std::sqrt(a * b);
    const double half_log_ratio = 0.5 * std::log(b / a);
    const LogBesselTriplet k = log_bessel_k_triplet(c, omega);
    return {-std::numbers::ln2 - c * half_log_ratio - k.at, std::exp(half_log_ratio + k.above - k.at),
            std::exp(-half_log_ratio + k.below - k.at)};
}

/// KL(q || p) for two GIG distributions.
inline double gig_kl(const GigParams& q, const GigParams& p) {
    q.validate();
    p.validate();
    const GigMoments mq = gig_moments(q);
    double kl = gig_log_norm(q) - gig_log_norm(p) + (q.c - p.c) * mq.mean_log - 0.5 * (q.a - p.a) * mq.mean;
    if (q.b != p.b) kl -= 0.5 * (q.b - p.b) * mq.require_mean_inv();
    return std::max(0.0, kl);
}

// ---------------------------------------------------------------------------
// Inverse Gaussian (mean, shape)
// ---------------------------------------------------------------------------

struct InverseGaussianParams {
    double mean = 1.0;
    double shape = 1.0;

    void validate() const {
        if (!(mean > 0.0) || !(shape > 0.0) || !std::isfinite(mean) || !std::isfinite(shape)) {
            throw DomainError("inverse Gaussian requires finite mean > 0 and shape > 0");
        }
    }

    /// The same law as GIG(shape/mean^2, shape, -1/2).
    GigParams as_gig() const { return {shape / (mean * mean), shape, -0.5}; }
};

/// Michael-Schucany-Haas transformation sampler.
template <class Rng>
double sample_inverse_gaussian(const InverseGaussianParams& p, Rng& rng) {
    p.validate();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double z = normal(rng);
    const double y = z * z;
    const double my = p.mean * y;
    // mean * (1 - 2 my / (my + sqrt(4 mean shape y + my^2))), the smaller root,
    // written without the cancellation of the textbook form.
    const double root = std::sqrt(4.0 * p.mean * p.shape * y + my * my);
    const double x = (my + root) > 0.0 ? p.mean * (1.0 - 2.0 * my / (my + root)) : p.mean;
    if (uniform(rng) * (p.mean + x) <= p.mean) return x;
    return p.mean * p.mean / x;
}

// ---------------------------------------------------------------------------
// Multivariate normal, Wishart, categorical samplers
// ---------------------------------------------------------------------------

template <class Rng>
Vector standard_normal_vector(Eigen::Index dim, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = normal(rng);
    return z;
}

template <class Rng>
Vector sample_mvn(const Vector& mean, const Matrix& cov, Rng& rng) {
    if (cov.rows() != mean.size()) throw DomainError("sample_mvn: dimension mismatch");
    const auto llt = cholesky(cov, "sample_mvn covariance");
    return mean + llt.matrixL() * standard_normal_vector(mean.size(), rng);
}

/// Wishart draw parameterized by its mean (scale = mean / dof), via the
/// Bartlett decomposition on the Cholesky factor of the scale.
template <class Rng>
Matrix sample_wishart(double dof, const Matrix& mean_matrix, Rng& rng) {
    const Eigen::Index dim = mean_matrix.rows();
    if (!(dof > static_cast<double>(dim) - 1.0)) throw DomainError("sample_wishart: requires dof > D - 1");
    const auto llt = cholesky(mean_matrix / dof, "sample_wishart mean");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix bartlett = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        std::gamma_distribution<double> chi2(0.5 * (dof - static_cast<double>(i)), 2.0);
        bartlett(i, i) = std::sqrt(chi2(rng));
        for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = normal(rng);
    }
    const Matrix la = llt.matrixL() * bartlett;
    return la * la.transpose();
}

template <class Rng>
std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("sample_categorical: negative or non-finite weight");
        total += w;
    }
    if (!(total > 0.0)) throw DomainError("sample_categorical: weights sum to zero");
    std::uniform_real_distribution<double> uniform(0.0, total);
    const double u = uniform(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        last_positive = k;
        acc += weights[k];
        if (u < acc) return k;
    }
    return last_positive;
}

// ---------------------------------------------------------------------------
// Multivariate NIG in the mean-one mixing parameterization:
//   y ~ IG(1, lambda),  x | y ~ N(mu + y beta, precision tau / y)
// ---------------------------------------------------------------------------

struct NigParams {
    Vector mu;
    Vector beta;
    Matrix tau;
    double lambda = 1.0;

    Eigen::Index dim() const { return mu.size(); }

    void validate() const {
        if (beta.size() != mu.size() || tau.rows() != mu.size() || tau.cols() != mu.size()) {
            throw DomainError("NIG parameters have inconsistent dimensions");
        }
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("NIG requires lambda > 0");
    }
};

inline double nig_log_pdf(const Vector& x, const NigParams& p) {
    p.validate();
    if (x.size() != p.dim()) throw DomainError("nig_log_pdf: dimension mismatch");
    const auto llt = cholesky(p.tau, "NIG precision");
    const double dim = static_cast<double>(p.dim());
    const Vector diff = x - p.mu;
    const Vector tau_beta = p.tau * p.beta;
    const double a = p.lambda + p.beta.dot(tau_beta);
    const double b = p.lambda + diff.dot(p.tau * diff);
    const double c = -0.5 * (dim + 1.0);
    return -0.5 * (dim + 1.0) * std::log(2.0 * std::numbers::pi) + 0.5 * std::log(p.lambda) + p.lambda +
           0.5 * log_det(llt) + diff.dot(tau_beta) - gig_log_norm({a, b, c});
}

template <class Rng>
Vector sample_nig(const NigParams& p, Rng& rng) {
    p.validate();
    const auto llt = cholesky(p.tau, "NIG precision");
    const double y = sample_inverse_gaussian({1.0, p.lambda}, rng);
    // tau = L L^T, so L^{-T} z has covariance tau^{-1}.
    const Vector noise = llt.matrixU().solve(standard_normal_vector(p.dim(), rng));
    return p.mu + y * p.beta + std::sqrt(y) * noise;
}

// ---------------------------------------------------------------------------
// Wishart W(tau | s, t) with rate matrix t:  E[tau] = s t^{-1}
// ---------------------------------------------------------------------------

struct WishartParams {
    double dof = 1.0;
    Matrix rate;

    void validate() const {
        const double dim = static_cast<double>(rate.rows());
        if (!(dof > dim - 1.0)) throw DomainError("Wishart requires dof > D - 1");
    }
};

struct WishartMoments {
    Matrix mean;
    double mean_log_det = 0.0;
};

template <class Error = DomainError>
WishartMoments wishart_moments(const WishartParams& p) {
    p.validate();
    const auto llt = cholesky<Error>(p.rate, "Wishart rate");
    const int dim = static_cast<int>(p.rate.rows());
    WishartMoments out;
    out.mean = p.dof * llt.solve(Matrix::Identity(dim, dim));
    out.mean_log_det = multivariate_digamma(dim, 0.5 * p.dof) - log_det(llt) + dim * std::numbers::ln2;
    return out;
}

inline double wishart_log_norm(const WishartParams& p) {
    const int dim = static_cast<int>(p.rate.rows());
    const auto llt = cholesky(p.rate, "Wishart rate");
    return 0.5 * p.dof * (log_det(llt) - dim * std::numbers::ln2) - multivariate_log_gamma(dim, 0.5 * p.dof);
}

inline double wishart_kl(const WishartParams& q, const WishartParams& p) {
    const WishartMoments mq = wishart_moments(q);
    return wishart_log_norm(q) - wishart_log_norm(p) + 0.5 * (q.dof - p.dof) * mq.mean_log_det -
           0.5 * ((q.rate - p.rate).cwiseProduct(mq.mean)).sum();
}

// ---------------------------------------------------------------------------
// Joint normal over (mu, beta) given tau, precision [[u, w], [w, v]] (x) tau
// ---------------------------------------------------------------------------

struct BlockNormalParams {
    Vector m;
    Vector n;
    double u = 1.0;
    double v = 1.0;
    double w = 0.0;

    double determinant() const { return u * v - w * w; }
};

/// Scalar factors of the conditional covariances: Cov(mu) = mumu tau^{-1},
/// Cov(mu, beta) = mubeta tau^{-1}, Cov(beta) = betabeta tau^{-1}.
struct BlockCovariance {
    double mumu;
    double mubeta;
    double betabeta;
};

inline BlockCovariance block_covariance(const BlockNormalParams& p) {
    const double det = p.determinant();
    if (!(det > 0.0) || !(p.u > 0.0) || !(p.v > 0.0)) {
        throw NumericalBreakdown("block normal precision [[u,w],[w,v]] is not positive definite (u=" +
                                 std::to_string(p.u) + ", v=" + std::to_string(p.v) + ", w=" + std::to_string(p.w) +
                                 ")");
    }
    return {p.v / det, -p.w / det, p.u / det};
}

/// E_tau[ KL(q(mu, beta | tau) || p(mu, beta | tau)) ] given E[tau] under q.
inline double block_normal_expected_kl(const BlockNormalParams& q, const BlockNormalParams& p,
                                       const Matrix& mean_tau) {
    const BlockCovariance cq = block_covariance(q);
    block_covariance(p);
    const double dim = static_cast<double>(q.m.size());
    const double trace_term = p.u * cq.mumu + 2.0 * p.w * cq.mubeta + p.v * cq.betabeta;
    const Vector dm = q.m - p.m;
    const Vector dn = q.n - p.n;
    const double quad = p.u * dm.dot(mean_tau * dm) + 2.0 * p.w * dm.dot(mean_tau * dn) + p.v * dn.dot(mean_tau * dn);
    return 0.5 * (dim * trace_term - 2.0 * dim + quad + dim * std::log(q.determinant() / p.determinant()));
}

// ---------------------------------------------------------------------------
// Dirichlet and Beta
// ---------------------------------------------------------------------------

inline double dirichlet_kl(std::span<const double> q, std::span<const double> p) {
    if (q.size() != p.size()) throw DomainError("dirichlet_kl: size mismatch");
    double q_total = 0.0;
    double p_total = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        q_total += q[k];
        p_total += p[k];
    }
    const double psi_total = digamma(q_total);
    double kl = log_gamma(q_total) - log_gamma(p_total);
    for (std::size_t k = 0; k < q.size(); ++k) {
        kl += log_gamma(p[k]) - log_gamma(q[k]) + (q[k] - p[k]) * (digamma(q[k]) - psi_total);
    }
    return std::max(0.0, kl);
}

inline double log_beta_fn(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

inline double beta_kl(double qa, double qb, double pa, double pb) {
    const double psi_sum = digamma(qa + qb);
    const double kl = log_beta_fn(pa, pb) - log_beta_fn(qa, qb) + (qa - pa) * (digamma(qa) - psi_sum) +
                      (qb - pb) * (digamma(qb) - psi_sum);
    return std::max(0.0, kl);
}

// ---------------------------------------------------------------------------
// Normal truncated to (0, inf): location f, precision g
// ---------------------------------------------------------------------------

namespace detail {

/// phi(z) / (1 - Phi(z)); continued fraction for the upper tail.
inline double inverse_mills_ratio(double z) {
    if (z < 8.0) {
        const double tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
        const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        return density / tail;
    }
    // (1 - Phi(z)) / phi(z) = 1 / (z + 1/(z + 2/(z + 3/(z + ...)))), Lentz.
    constexpr double tiny = 1e-300;
    double f = z;
    double c = z;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        d = z + k * d;
        if (std::abs(d) < tiny) d = tiny;
        c = z + k / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return f;
}

/// log(1 - Phi(z)).
inline double log_upper_tail(double z) {
    if (z < 8.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
    return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(inverse_mills_ratio(z));
}

}  // namespace detail

struct TruncatedNormalParams {
    double location = 1.0;
    double precision = 1.0;

    void validate() const {
        if (!std::isfinite(location) || !(precision > 0.0) || !std::isfinite(precision)) {
            throw DomainError("truncated normal requires finite location and precision > 0");
        }
    }
};

struct TruncatedNormalMoments {
    double mean;
    double mean_sq;
};

inline TruncatedNormalMoments truncated_normal_moments(const TruncatedNormalParams& p) {
    p.validate();
    const double sigma = 1.0 / std::sqrt(p.precision);
    const double z = -p.location / sigma;
    const double hazard = detail::inverse_mills_ratio(z);
    const double mean = p.location + sigma * hazard;
    const double var = sigma * sigma * (1.0 + z * hazard - hazard * hazard);
    return {mean, var + mean * mean};
}

inline double truncated_normal_log_norm(const TruncatedNormalParams& p) {
    // log density = this - precision/2 (x - location)^2
    return 0.5 * std::log(p.precision / (2.0 * std::numbers::pi)) -
           detail::log_upper_tail(-p.location * std::sqrt(p.precision));
}

inline double truncated_normal_kl(const TruncatedNormalParams& q, const TruncatedNormalParams& p) {
    const TruncatedNormalMoments mq = truncated_normal_moments(q);
    const auto expected_sq_dev = [&](double centre) {
        return mq.mean_sq - 2.0 * centre * mq.mean + centre * centre;
    };
    const double kl = truncated_normal_log_norm(q) - truncated_normal_log_norm(p) -
                      0.5 * q.precision * expected_sq_dev(q.location) +
                      0.5 * p.precision * expected_sq_dev(p.location);
    return std::max(0.0, kl);
}

}  // namespace nigmix
