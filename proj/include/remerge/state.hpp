// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "remerge/layout.hpp"
#include "remerge/linalg.hpp"

namespace remerge {

inline constexpr double kNormTol = 1e-9;
/// Eigenvalues below this are treated as exactly zero (rank, 0 log 0).
inline constexpr double kEigCutoff = 1e-12;

class DensityOperator;

/// Amplitude vector over a layout, row-major, unit norm within 1e-9.
class PureState {
 public:
  PureState(SystemLayout layout, Eigen::VectorXcd amplitudes);

  static PureState basis(SystemLayout layout, std::span<const std::int64_t> values);

  const SystemLayout& layout() const { return layout_; }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }
  std::int64_t dim() const { return amp_.size(); }

  DensityOperator density() const;

 private:
  SystemLayout layout_;
  Eigen::VectorXcd amp_;
};

/// Hermitian, unit-trace operator over a layout.
/// Positive semidefiniteness is enforced where a spectral decomposition
/// happens anyway (purify, entropies); require_psd() checks it on demand.
class DensityOperator {
 public:
  DensityOperator(SystemLayout layout, Eigen::MatrixXcd matrix);

  const SystemLayout& layout() const { return layout_; }
  const Eigen::MatrixXcd& matrix() const { return mat_; }
  std::int64_t dim() const { return mat_.rows(); }

  /// Throws if any eigenvalue is below -1e-9.
  void require_psd() const;

 private:
  SystemLayout layout_;
  Eigen::MatrixXcd mat_;
};

/// Square matrix with U^dag U = I within 1e-9 in Frobenius norm.
class Unitary {
 public:
  explicit Unitary(Eigen::MatrixXcd matrix);
  static Unitary identity(std::int64_t dim);

  std::int64_t dim() const { return mat_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return mat_; }

 private:
  Eigen::MatrixXcd mat_;
};

// ---- products, marginals, purification ----

/// Tensor product; register names must be disjoint (error names the clash).
PureState tensor(const PureState& a, const PureState& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

/// Reduced operator on `keep`, which ends up in original layout order.
DensityOperator partial_trace(const PureState& psi, std::span<const std::string> keep);
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::string> keep);

/// Canonical purification sum_i sqrt(lambda_i) |e_i>|i>, eigenvalues sorted
/// descending, each eigenvector phase-fixed so its first nonzero component is
/// real positive. The ancilla register is appended with dim = rank(rho).
PureState purify(const DensityOperator& rho, const std::string& anc_name);

// ---- distances ----

/// Square-root convention: F = ||sqrt(rho) sqrt(sigma)||_1, in [0, 1].
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
/// |<a|b>| for pure states on the same layout.
double fidelity(const PureState& a, const PureState& b);

/// Half trace norm of rho - sigma, in [0, 1].
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);
double trace_distance(const PureState& a, const PureState& b);

cxd inner_product(const PureState& a, const PureState& b);

/// sum_i |ii>/sqrt(d) over two fresh dim-d registers.
PureState maximally_entangled(std::int64_t d, const std::string& name_a,
                              const std::string& name_b);

// ---- layout surgery (amplitudes untouched) ----

PureState renamed(const PureState& psi, const std::string& old_name,
                  const std::string& new_name);

/// Replace one register by two adjacent ones with dims (first.dim,
/// second.dim); product must equal the original dim. Row-major order makes
/// this a pure relabeling, with `first` the slower-varying factor.
PureState split_register(const PureState& psi, const std::string& name,
                         Register first, Register second);

/// Inverse of split_register: the named registers must be adjacent and in
/// layout order.
PureState merge_registers(const PureState& psi, std::span<const std::string> names,
                          const std::string& new_name);

// ---- data movement ----

/// Reorder registers; amplitudes are permuted to match.
PureState permute_registers(const PureState& psi, std::span<const std::string> new_order);
DensityOperator permute_registers(const DensityOperator& rho,
                                  std::span<const std::string> new_order);

/// Exchange the contents of two same-dimension registers (a SWAP gate).
PureState swap_contents(const PureState& psi, const std::string& x, const std::string& y);

/// Apply u to the listed registers (row-major over the order given);
/// all other registers are untouched.
PureState apply_unitary(const PureState& psi, const Unitary& u,
                        std::span<const std::string> targets);

/// Reshape into a matrix with row index row-major over `rows` (in the order
/// given) and column index over `cols`; together they must cover the layout.
Eigen::MatrixXcd state_matrix(const PureState& psi, std::span<const std::string> rows,
                              std::span<const std::string> cols);

}  // namespace remerge
