#pragma once

#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "nigmix/errors.hpp"

namespace nigmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Cholesky factor of an SPD matrix; throws `Error` (with `what` as context)
/// when the factorization fails.
template <class Error = DomainError>
Eigen::LLT<Matrix> cholesky(const Matrix& a, const std::string& what) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw Error(what + ": matrix must be square and non-empty");
    }
    if (!a.allFinite()) throw Error(what + ": matrix has non-finite entries");
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw Error(what + ": matrix is not positive definite");
    return llt;
}

inline double log_det(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline bool is_spd(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0 || !a.allFinite()) return false;
    if (!a.isApprox(a.transpose(), 1e-10)) return false;
    return Eigen::LLT<Matrix>(a).info() == Eigen::Success;
}

}  // namespace nigmix
