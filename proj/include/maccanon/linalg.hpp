#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace maccanon {

using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;
using cplx = std::complex<double>;

/// log2 det of a Hermitian positive-definite matrix via Cholesky.
inline double log2_det_hpd(const cmat& m) {
    Eigen::LLT<cmat> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("log2_det_hpd: matrix not positive definite");
    double s = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        s += std::log(std::real(l(i, i)));
    return 2.0 * s / std::log(2.0);
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
inline cmat inv_hpd(const cmat& m) {
    Eigen::LLT<cmat> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("inv_hpd: matrix not positive definite");
    return llt.solve(cmat::Identity(m.rows(), m.cols()));
}

inline double max_abs(const cmat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const cmat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= tol * (1.0 + max_abs(m));
}

inline double min_eigenvalue_hermitian(const cmat& m) {
    Eigen::SelfAdjointEigenSolver<cmat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace maccanon
