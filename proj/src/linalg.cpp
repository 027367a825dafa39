// SPDX-License-Identifier: Apache-2.0
#include "remerge/linalg.hpp"

#include <stdexcept>

#ifdef REMERGE_USE_LAPACKE
#include <lapacke.h>

#include <cstdlib>
#endif

namespace remerge {

#ifdef REMERGE_USE_LAPACKE
namespace {
// Trial-level parallelism supplies the concurrency; BLAS threading on top of
// it would make results depend on scheduling.
const bool kBlasSingleThreaded = [] {
  ::setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);
  return true;
}();
}  // namespace
#endif

#ifdef REMERGE_USE_LAPACKE
namespace {

Eigen::VectorXd lapacke_eigh(Eigen::MatrixXcd& a, char jobz) {
  const auto n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  lapack_int info = LAPACKE_zheevd(
      LAPACK_COL_MAJOR, jobz, 'L', n,
      reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info != 0) throw std::runtime_error("zheevd failed with info " + std::to_string(info));
  return w;
}

}  // namespace
#endif

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("matrix is not square");
#ifdef REMERGE_USE_LAPACKE
  Eigen::MatrixXcd a = h;
  return lapacke_eigh(a, 'N');
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return es.eigenvalues();
#endif
}

std::pair<Eigen::VectorXd, Eigen::MatrixXcd> hermitian_eigensystem(
    const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("matrix is not square");
#ifdef REMERGE_USE_LAPACKE
  Eigen::MatrixXcd a = h;
  Eigen::VectorXd w = lapacke_eigh(a, 'V');
  return {std::move(w), std::move(a)};
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
#endif
}

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& h) {
  auto [w, v] = hermitian_eigensystem(h);
  Eigen::VectorXd s = w.cwiseMax(0.0).cwiseSqrt();
  return v * s.asDiagonal() * v.adjoint();
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues();
}

double trace_norm(const Eigen::MatrixXcd& m) {
  return singular_values(m).sum();
}

}  // namespace remerge
