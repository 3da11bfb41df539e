#pragma once

// Scalar special functions. Everything Bessel-related is evaluated in log
// space: K_nu(x) underflows for x beyond ~700 and overflows for large orders
// at small x, and both regimes show up in the mixture model.

#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "nigmix/errors.hpp"

namespace nigmix {

namespace detail {

inline void require_bessel_args(double order, double x, const char* who) {
    if (!std::isfinite(order) || !std::isfinite(x) || x <= 0.0) {
        std::ostringstream msg;
        msg << who << ": requires finite order and x > 0 (order=" << order << ", x=" << x << ")";
        throw DomainError(msg.str());
    }
}

/// log(e^x K_mu(x)) and K_{mu+1}(x)/K_mu(x) for |mu| <= 1/2.
struct BesselSeed {
    double scaled_log_k;
    double ratio;
};

// Temme's series; used for x <= 2.
inline BesselSeed bessel_k_temme(double mu, double x) {
    constexpr double eps = 1e-17;
    constexpr double pi = std::numbers::pi;

    // Gamma-function combinations 1/Gamma(1 +- mu) and
    // gamma1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu) without cancellation.
    const double gp1 = boost::math::tgamma1pm1(mu);
    const double gm1 = boost::math::tgamma1pm1(-mu);
    const double gamma_plus = 1.0 + gp1;
    const double gamma_minus = 1.0 + gm1;
    const double gampl = 1.0 / gamma_plus;
    const double gammi = 1.0 / gamma_minus;
    const double gam1 = (mu == 0.0) ? -std::numbers::egamma
                                    : (gp1 - gm1) / (2.0 * mu * gamma_plus * gamma_minus);
    const double gam2 = 0.5 * (gammi + gampl);

    const double half_x = 0.5 * x;
    const double pimu = pi * mu;
    const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(half_x);
    double e = mu * d;
    const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = half_x * half_x;
    double sum1 = p;
    const double mu2 = mu * mu;
    for (int i = 1; i < 1000; ++i) {
        const double di = static_cast<double>(i);
        ff = (di * ff + p + q) / (di * di - mu2);
        c *= d / di;
        p /= (di - mu);
        q /= (di + mu);
        const double del = c * ff;
        sum += del;
        sum1 += c * (p - di * ff);
        if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return {std::log(sum) + x, (2.0 / x) * sum1 / sum};
}

// Steed's continued fraction (CF2) with Temme's normalization; x > 2.
inline BesselSeed bessel_k_steed(double mu, double x) {
    constexpr double eps = 1e-17;
    const double mu2 = mu * mu;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i < 100000; ++i) {
        const double di = static_cast<double>(i);
        a -= 2.0 * (di - 1.0);
        c = -a * c / di;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    h *= a1;
    const double scaled = 0.5 * std::log(std::numbers::pi / (2.0 * x)) - std::log(s);
    return {scaled, (mu + x + 0.5 - h) / x};
}

inline BesselSeed bessel_k_seed(double mu, double x) {
    // K_{1/2}(x) = sqrt(pi / 2x) e^{-x}, K_{3/2}/K_{1/2} = 1 + 1/x
    if (mu == 0.5) return {0.5 * std::log(std::numbers::pi / (2.0 * x)), 1.0 + 1.0 / x};
    if (mu == -0.5) return {0.5 * std::log(std::numbers::pi / (2.0 * x)), 1.0};
    return x <= 2.0 ? bessel_k_temme(mu, x) : bessel_k_steed(mu, x);
}

/// Fills out[k] = log(e^x K_{order + k}(x)) for order >= 0, by upward
/// recurrence on the ratios K_{v+1}/K_v (stable, all terms positive).
inline void scaled_log_bessel_k_ladder(double order, double x, std::span<double> out) {
    const double n = std::floor(order + 0.5);
    const double mu = order - n;
    const BesselSeed seed = bessel_k_seed(mu, x);
    double log_k = seed.scaled_log_k;
    double ratio = seed.ratio;
    const long steps = static_cast<long>(n);
    for (long i = 1; i <= steps; ++i) {
        log_k += std::log(ratio);
        ratio = 1.0 / ratio + 2.0 * (mu + static_cast<double>(i)) / x;
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = log_k;
        log_k += std::log(ratio);
        ratio = 1.0 / ratio + 2.0 * (order + static_cast<double>(k) + 1.0) / x;
    }
}

/// Orders from which the uniform (Debye) expansion replaces the ladder.
inline constexpr double debye_order = 100.0;

/// log of the Debye series 1 - u1/v + u2/v^2 - u3/v^3 + u4/v^4, p = v/sqrt(v^2 + x^2).
inline double debye_series(double v, double x) {
    const double p = v / std::hypot(v, x);
    const double p2 = p * p;
    const double u1 = p * (3.0 - 5.0 * p2) / 24.0;
    const double u2 = p2 * (81.0 + p2 * (-462.0 + p2 * 385.0)) / 1152.0;
    const double u3 = p * p2 * (30375.0 + p2 * (-369603.0 + p2 * (765765.0 - p2 * 425425.0))) / 414720.0;
    const double u4 =
        p2 * p2 * (4465125.0 + p2 * (-94121676.0 + p2 * (349922430.0 + p2 * (-446185740.0 + p2 * 185910725.0)))) /
        39813120.0;
    const double t = 1.0 / v;
    return std::log1p(t * (-u1 + t * (u2 + t * (-u3 + t * u4))));
}

/// log(e^x K_v(x)) for v >= debye_order.
inline double debye_scaled_log_k(double v, double x) {
    const double r = std::hypot(v, x);
    // x - r written without cancellation
    return 0.5 * std::log(std::numbers::pi / 2.0) - 0.5 * std::log(r) - v * v / (r + x) + v * std::log((v + r) / x) +
           debye_series(v, x);
}

inline double debye_dlog_k_dorder(double v, double x) {
    const double r = std::hypot(v, x);
    const double h = 1e-3 * v;
    return std::log((v + r) / x) - v / (2.0 * r * r) + (debye_series(v + h, x) - debye_series(v - h, x)) / (2.0 * h);
}

inline double scaled_log_bessel_k(double order, double x) {
    const double v_abs = std::abs(order);
    if (v_abs >= debye_order) return debye_scaled_log_k(v_abs, x);
    double v = 0.0;
    scaled_log_bessel_k_ladder(v_abs, x, std::span<double>(&v, 1));
    return v;
}

}  // namespace detail

/// log K_order(x), the modified Bessel function of the second (third) kind.
inline double log_bessel_k(double order, double x) {
    detail::require_bessel_args(order, x, "log_bessel_k");
    return detail::scaled_log_bessel_k(order, x) - x;
}

/// log K at orders (order - 1, order, order + 1), sharing one seed evaluation
/// whenever the three orders do not straddle zero.
struct LogBesselTriplet {
    double below;
    double at;
    double above;
};

inline LogBesselTriplet log_bessel_k_triplet(double order, double x) {
    detail::require_bessel_args(order, x, "log_bessel_k_triplet");
    double v[3];
    if (std::abs(order) + 1.0 >= detail::debye_order) {
        return {detail::scaled_log_bessel_k(order - 1.0, x) - x, detail::scaled_log_bessel_k(order, x) - x,
                detail::scaled_log_bessel_k(order + 1.0, x) - x};
    }
    if (order - 1.0 >= 0.0) {
        detail::scaled_log_bessel_k_ladder(order - 1.0, x, v);
        return {v[0] - x, v[1] - x, v[2] - x};
    }
    if (order + 1.0 <= 0.0) {
        detail::scaled_log_bessel_k_ladder(-(order + 1.0), x, v);
        return {v[2] - x, v[1] - x, v[0] - x};
    }
    return {detail::scaled_log_bessel_k(order - 1.0, x) - x, detail::scaled_log_bessel_k(order, x) - x,
            detail::scaled_log_bessel_k(order + 1.0, x) - x};
}

/// d/d(order) log K_order(x). Central difference (step 1e-5) on the
/// exponentially scaled log below the Debye cutoff, analytic above it.
inline double dlog_bessel_k_dorder(double order, double x) {
    detail::require_bessel_args(order, x, "dlog_bessel_k_dorder");
    const double v_abs = std::abs(order);
    if (v_abs >= detail::debye_order + 1e-5) {
        return order < 0.0 ? -detail::debye_dlog_k_dorder(v_abs, x) : detail::debye_dlog_k_dorder(v_abs, x);
    }
    constexpr double step = 1e-5;
    return (detail::scaled_log_bessel_k(order + step, x) - detail::scaled_log_bessel_k(order - step, x)) /
           (2.0 * step);
}

inline double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("digamma: requires finite x > 0, got " + std::to_string(x));
    }
    return boost::math::digamma(x);
}

inline double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("log_gamma: requires finite x > 0, got " + std::to_string(x));
    }
    return boost::math::lgamma(x);
}

/// log Gamma_D(x) = D(D-1)/4 log(pi) + sum_{i=1..D} log Gamma(x + (1 - i)/2).
inline double multivariate_log_gamma(int dim, double x) {
    if (dim < 1 || !(x > 0.5 * (dim - 1))) {
        throw DomainError("multivariate_log_gamma: requires D >= 1 and x > (D-1)/2");
    }
    double acc = 0.25 * dim * (dim - 1) * std::log(std::numbers::pi);
    for (int i = 1; i <= dim; ++i) acc += log_gamma(x + 0.5 * (1 - i));
    return acc;
}

inline double multivariate_digamma(int dim, double x) {
    if (dim < 1 || !(x > 0.5 * (dim - 1))) {
        throw DomainError("multivariate_digamma: requires D >= 1 and x > (D-1)/2");
    }
    double acc = 0.0;
    for (int i = 1; i <= dim; ++i) acc += digamma(x + 0.5 * (1 - i));
    return acc;
}

}  // namespace nigmix
