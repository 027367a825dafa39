// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

namespace remerge {

using cxd = std::complex<double>;

/// Eigenvalues of a Hermitian matrix, ascending. Uses LAPACKE zheevd when
/// built with it, Eigen's SelfAdjointEigenSolver otherwise.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& h);

/// Full eigendecomposition of a Hermitian matrix; eigenvalues ascending,
/// columns of the second element are the matching eigenvectors.
std::pair<Eigen::VectorXd, Eigen::MatrixXcd> hermitian_eigensystem(
    const Eigen::MatrixXcd& h);

/// Positive-semidefinite square root; eigenvalues below zero are clamped.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& h);

/// Singular values, descending.
Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m);

/// Nuclear norm (sum of singular values).
double trace_norm(const Eigen::MatrixXcd& m);

}  // namespace remerge
