// SPDX-License-Identifier: Apache-2.0
#include "remerge/random.hpp"

#include <stdexcept>

namespace remerge {

Unitary haar_unitary(std::int64_t dim, RandomStream& rng) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  Eigen::MatrixXcd g(dim, dim);
  for (std::int64_t j = 0; j < dim; ++j)
    for (std::int64_t i = 0; i < dim; ++i)
      g(i, j) = cxd(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::int64_t j = 0; j < dim; ++j) {
    const cxd d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0.0) ? d / a : cxd(1.0, 0.0);
  }
  return Unitary(std::move(q));
}

PureState random_pure_state(SystemLayout layout, RandomStream& rng) {
  Eigen::VectorXcd v(layout.total_dim());
  for (std::int64_t i = 0; i < v.size(); ++i)
    v[i] = cxd(rng.normal(), rng.normal());
  v /= v.norm();
  return PureState(std::move(layout), std::move(v));
}

}  // namespace remerge
