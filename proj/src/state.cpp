// SPDX-License-Identifier: Apache-2.0
#include "remerge/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace remerge {

namespace {

// Flat offsets contributed by each joint value of the given registers,
// enumerated row-major in the order given.
std::vector<std::int64_t> offset_table(const SystemLayout& layout,
                                       std::span<const std::string> regs) {
  auto pos = layout.positions_of(regs);
  std::int64_t count = 1;
  for (auto p : pos) count *= layout.reg(p).dim;
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(count), 0);
  std::int64_t repeat = count;
  for (auto p : pos) {
    const std::int64_t d = layout.reg(p).dim;
    const std::int64_t stride = layout.stride(p);
    repeat /= d;
    // digit for register p cycles with period `repeat` within blocks of d*repeat
    for (std::int64_t i = 0; i < count; ++i)
      offsets[static_cast<std::size_t>(i)] += ((i / repeat) % d) * stride;
  }
  return offsets;
}

void check_same_layout(const SystemLayout& a, const SystemLayout& b) {
  if (!(a == b)) throw std::invalid_argument("layout mismatch");
}

}  // namespace

PureState::PureState(SystemLayout layout, Eigen::VectorXcd amplitudes)
    : layout_(std::move(layout)), amp_(std::move(amplitudes)) {
  if (amp_.size() != layout_.total_dim())
    throw std::invalid_argument("amplitude vector length does not match layout dimension");
  if (std::abs(amp_.norm() - 1.0) > kNormTol)
    throw std::invalid_argument("state is not normalized");
}

PureState PureState::basis(SystemLayout layout, std::span<const std::int64_t> values) {
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(layout.total_dim());
  amp[layout.flat_index(values)] = 1.0;
  return PureState(std::move(layout), std::move(amp));
}

DensityOperator PureState::density() const {
  return DensityOperator(layout_, amp_ * amp_.adjoint());
}

DensityOperator::DensityOperator(SystemLayout layout, Eigen::MatrixXcd matrix)
    : layout_(std::move(layout)), mat_(std::move(matrix)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() != layout_.total_dim())
    throw std::invalid_argument("matrix shape does not match layout dimension");
  if ((mat_ - mat_.adjoint()).norm() > kNormTol)
    throw std::invalid_argument("matrix is not Hermitian");
  if (std::abs(mat_.trace().real() - 1.0) > kNormTol || std::abs(mat_.trace().imag()) > kNormTol)
    throw std::invalid_argument("matrix does not have unit trace");
}

void DensityOperator::require_psd() const {
  const Eigen::VectorXd ev = hermitian_eigenvalues(mat_);
  if (ev.minCoeff() < -kNormTol)
    throw std::invalid_argument("operator is not positive semidefinite");
}

Unitary::Unitary(Eigen::MatrixXcd matrix) : mat_(std::move(matrix)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() < 1)
    throw std::invalid_argument("unitary must be a nonempty square matrix");
  const auto n = mat_.rows();
  if ((mat_.adjoint() * mat_ - Eigen::MatrixXcd::Identity(n, n)).norm() > 1e-9)
    throw std::invalid_argument("matrix is not unitary");
}

Unitary Unitary::identity(std::int64_t dim) {
  return Unitary(Eigen::MatrixXcd::Identity(dim, dim));
}

PureState tensor(const PureState& a, const PureState& b) {
  SystemLayout layout = a.layout().concat(b.layout());
  const auto da = a.dim(), db = b.dim();
  Eigen::VectorXcd amp(da * db);
  for (std::int64_t i = 0; i < da; ++i)
    amp.segment(i * db, db) = a.amplitudes()[i] * b.amplitudes();
  return PureState(std::move(layout), std::move(amp));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  SystemLayout layout = a.layout().concat(b.layout());
  const auto da = a.dim(), db = b.dim();
  Eigen::MatrixXcd m(da * db, da * db);
  for (std::int64_t i = 0; i < da; ++i)
    for (std::int64_t j = 0; j < da; ++j)
      m.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return DensityOperator(std::move(layout), std::move(m));
}

Eigen::MatrixXcd state_matrix(const PureState& psi, std::span<const std::string> rows,
                              std::span<const std::string> cols) {
  const auto& layout = psi.layout();
  if (rows.size() + cols.size() != layout.size())
    throw std::invalid_argument("rows and cols must cover every register exactly once");
  const auto row_off = offset_table(layout, rows);
  const auto col_off = offset_table(layout, cols);
  Eigen::MatrixXcd m(static_cast<std::int64_t>(row_off.size()),
                     static_cast<std::int64_t>(col_off.size()));
  const auto& amp = psi.amplitudes();
  for (std::size_t c = 0; c < col_off.size(); ++c)
    for (std::size_t r = 0; r < row_off.size(); ++r)
      m(static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)) =
          amp[row_off[r] + col_off[c]];
  return m;
}

DensityOperator partial_trace(const PureState& psi, std::span<const std::string> keep) {
  const auto& layout = psi.layout();
  SystemLayout kept = layout.subset(keep);  // original order
  std::vector<std::string> kept_names = kept.names();
  std::vector<std::string> rest;
  {
    std::unordered_set<std::string> keep_set(kept_names.begin(), kept_names.end());
    for (const auto& r : layout.registers())
      if (!keep_set.count(r.name)) rest.push_back(r.name);
  }
  Eigen::MatrixXcd m = state_matrix(psi, kept_names, rest);
  const auto dk = m.rows();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dk, dk);
  rho.selfadjointView<Eigen::Lower>().rankUpdate(m);
  rho.triangularView<Eigen::StrictlyUpper>() = rho.adjoint();
  return DensityOperator(std::move(kept), std::move(rho));
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::string> keep) {
  const auto& layout = rho.layout();
  SystemLayout kept = layout.subset(keep);
  std::vector<std::string> kept_names = kept.names();
  std::vector<std::string> rest;
  {
    std::unordered_set<std::string> keep_set(kept_names.begin(), kept_names.end());
    for (const auto& r : layout.registers())
      if (!keep_set.count(r.name)) rest.push_back(r.name);
  }
  const auto kept_off = offset_table(layout, kept_names);
  const auto rest_off = offset_table(layout, rest);
  const auto dk = static_cast<std::int64_t>(kept_off.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
  for (const auto t : rest_off)
    for (std::int64_t j = 0; j < dk; ++j)
      for (std::int64_t i = 0; i < dk; ++i)
        out(i, j) += rho.matrix()(kept_off[static_cast<std::size_t>(i)] + t,
                                  kept_off[static_cast<std::size_t>(j)] + t);
  return DensityOperator(std::move(kept), std::move(out));
}

PureState purify(const DensityOperator& rho, const std::string& anc_name) {
  auto [w, v] = hermitian_eigensystem(rho.matrix());
  if (w.minCoeff() < -kNormTol)
    throw std::invalid_argument("cannot purify: operator is not positive semidefinite");
  const auto n = w.size();
  std::vector<std::int64_t> order;  // descending, eigenvalues above cutoff
  for (std::int64_t i = n; i-- > 0;)
    if (w[i] > kEigCutoff) order.push_back(i);
  const auto rank = std::max<std::int64_t>(1, static_cast<std::int64_t>(order.size()));

  SystemLayout layout = rho.layout().concat(
      SystemLayout({Register{anc_name, rank}}));
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(n * rank);
  for (std::size_t j = 0; j < order.size(); ++j) {
    Eigen::VectorXcd vec = v.col(order[j]);
    for (std::int64_t i = 0; i < n; ++i) {
      if (std::abs(vec[i]) > 1e-9) {
        vec *= std::conj(vec[i]) / std::abs(vec[i]);
        break;
      }
    }
    const double s = std::sqrt(w[order[j]]);
    for (std::int64_t i = 0; i < n; ++i)
      amp[i * rank + static_cast<std::int64_t>(j)] = s * vec[i];
  }
  amp /= amp.norm();  // discarding sub-cutoff weight leaves at most ~1e-12 slack
  return PureState(std::move(layout), std::move(amp));
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_layout(rho.layout(), sigma.layout());
  const double f = trace_norm(psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix()));
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const PureState& a, const PureState& b) {
  return std::clamp(std::abs(inner_product(a, b)), 0.0, 1.0);
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  check_same_layout(rho.layout(), sigma.layout());
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho.matrix() - sigma.matrix());
  return std::clamp(0.5 * ev.cwiseAbs().sum(), 0.0, 1.0);
}

double trace_distance(const PureState& a, const PureState& b) {
  // pure-state formula sqrt(1 - |<a|b>|^2)
  const double f = fidelity(a, b);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

cxd inner_product(const PureState& a, const PureState& b) {
  check_same_layout(a.layout(), b.layout());
  return a.amplitudes().dot(b.amplitudes());
}

PureState maximally_entangled(std::int64_t d, const std::string& name_a,
                              const std::string& name_b) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  SystemLayout layout({Register{name_a, d}, Register{name_b, d}});
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(d * d);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::int64_t i = 0; i < d; ++i) amp[i * d + i] = s;
  return PureState(std::move(layout), std::move(amp));
}

PureState renamed(const PureState& psi, const std::string& old_name,
                  const std::string& new_name) {
  std::vector<Register> regs = psi.layout().registers();
  regs[psi.layout().index_of(old_name)].name = new_name;
  return PureState(SystemLayout(std::move(regs)), psi.amplitudes());
}

PureState split_register(const PureState& psi, const std::string& name,
                         Register first, Register second) {
  const auto pos = psi.layout().index_of(name);
  if (first.dim * second.dim != psi.layout().reg(pos).dim)
    throw std::invalid_argument("split dims do not factor register '" + name + "'");
  std::vector<Register> regs = psi.layout().registers();
  regs[pos] = first;
  regs.insert(regs.begin() + static_cast<std::ptrdiff_t>(pos) + 1, second);
  return PureState(SystemLayout(std::move(regs)), psi.amplitudes());
}

PureState merge_registers(const PureState& psi, std::span<const std::string> names,
                          const std::string& new_name) {
  if (names.empty()) throw std::invalid_argument("nothing to merge");
  const auto& layout = psi.layout();
  auto pos = layout.positions_of(names);
  std::int64_t dim = 1;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (i > 0 && pos[i] != pos[i - 1] + 1)
      throw std::invalid_argument("registers to merge must be adjacent and in order");
    dim *= layout.reg(pos[i]).dim;
  }
  std::vector<Register> regs;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (i == pos.front()) {
      regs.push_back(Register{new_name, dim});
    } else if (i > pos.front() && i <= pos.back()) {
      continue;
    } else {
      regs.push_back(layout.reg(i));
    }
  }
  return PureState(SystemLayout(std::move(regs)), psi.amplitudes());
}

PureState permute_registers(const PureState& psi, std::span<const std::string> new_order) {
  const auto& layout = psi.layout();
  if (new_order.size() != layout.size())
    throw std::invalid_argument("permutation must list every register");
  auto pos = layout.positions_of(new_order);
  std::vector<Register> regs;
  regs.reserve(pos.size());
  for (auto p : pos) regs.push_back(layout.reg(p));
  SystemLayout out_layout(std::move(regs));

  // Odometer over the old index order; tracks the permuted flat index.
  const std::size_t nreg = layout.size();
  std::vector<std::int64_t> dims(nreg), new_stride(nreg), digit(nreg, 0);
  for (std::size_t i = 0; i < nreg; ++i) dims[i] = layout.reg(i).dim;
  for (std::size_t k = 0; k < nreg; ++k) new_stride[pos[k]] = out_layout.stride(k);

  const auto& amp = psi.amplitudes();
  Eigen::VectorXcd out(amp.size());
  std::int64_t new_idx = 0;
  for (std::int64_t i = 0; i < amp.size(); ++i) {
    out[new_idx] = amp[i];
    for (std::size_t r = nreg; r-- > 0;) {
      if (++digit[r] < dims[r]) {
        new_idx += new_stride[r];
        break;
      }
      digit[r] = 0;
      new_idx -= new_stride[r] * (dims[r] - 1);
    }
  }
  return PureState(std::move(out_layout), std::move(out));
}

DensityOperator permute_registers(const DensityOperator& rho,
                                  std::span<const std::string> new_order) {
  const auto& layout = rho.layout();
  if (new_order.size() != layout.size())
    throw std::invalid_argument("permutation must list every register");
  auto pos = layout.positions_of(new_order);
  std::vector<Register> regs;
  regs.reserve(pos.size());
  for (auto p : pos) regs.push_back(layout.reg(p));
  SystemLayout out_layout(std::move(regs));

  std::vector<std::int64_t> map(static_cast<std::size_t>(rho.dim()));
  const std::size_t nreg = layout.size();
  std::vector<std::int64_t> dims(nreg), new_stride(nreg), digit(nreg, 0);
  for (std::size_t i = 0; i < nreg; ++i) dims[i] = layout.reg(i).dim;
  for (std::size_t k = 0; k < nreg; ++k) new_stride[pos[k]] = out_layout.stride(k);
  std::int64_t new_idx = 0;
  for (std::int64_t i = 0; i < rho.dim(); ++i) {
    map[static_cast<std::size_t>(i)] = new_idx;
    for (std::size_t r = nreg; r-- > 0;) {
      if (++digit[r] < dims[r]) {
        new_idx += new_stride[r];
        break;
      }
      digit[r] = 0;
      new_idx -= new_stride[r] * (dims[r] - 1);
    }
  }
  Eigen::MatrixXcd out(rho.dim(), rho.dim());
  for (std::int64_t j = 0; j < rho.dim(); ++j)
    for (std::int64_t i = 0; i < rho.dim(); ++i)
      out(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]) =
          rho.matrix()(i, j);
  return DensityOperator(std::move(out_layout), std::move(out));
}

PureState swap_contents(const PureState& psi, const std::string& x, const std::string& y) {
  const auto& layout = psi.layout();
  const auto px = layout.index_of(x), py = layout.index_of(y);
  const auto dx = layout.reg(px).dim, dy = layout.reg(py).dim;
  if (dx != dy) throw std::invalid_argument("swap requires equal dimensions");
  const auto sx = layout.stride(px), sy = layout.stride(py);
  const auto& amp = psi.amplitudes();
  Eigen::VectorXcd out(amp.size());
  for (std::int64_t i = 0; i < amp.size(); ++i) {
    const std::int64_t a = (i / sx) % dx;
    const std::int64_t b = (i / sy) % dy;
    out[i - a * sx - b * sy + b * sx + a * sy] = amp[i];
  }
  return PureState(layout, std::move(out));
}

PureState apply_unitary(const PureState& psi, const Unitary& u,
                        std::span<const std::string> targets) {
  const auto& layout = psi.layout();
  auto pos = layout.positions_of(targets);
  std::int64_t dt = 1;
  for (auto p : pos) dt *= layout.reg(p).dim;
  if (dt != u.dim())
    throw std::invalid_argument("unitary dimension does not match target registers");

  // Fast path: targets are the leading registers in layout order.
  bool leading = pos.size() <= layout.size();
  for (std::size_t i = 0; i < pos.size(); ++i)
    if (pos[i] != i) { leading = false; break; }

  if (!leading) {
    std::vector<std::string> front(targets.begin(), targets.end());
    std::unordered_set<std::string> tset(front.begin(), front.end());
    for (const auto& r : layout.registers())
      if (!tset.count(r.name)) front.push_back(r.name);
    PureState moved = permute_registers(psi, front);
    PureState applied = apply_unitary(moved, u, targets);
    return permute_registers(applied, layout.names());
  }

  const std::int64_t rest = psi.dim() / dt;
  using RowMat = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> m(psi.amplitudes().data(), dt, rest);
  Eigen::VectorXcd out(psi.dim());
  Eigen::Map<RowMat> mo(out.data(), dt, rest);
  mo.noalias() = u.matrix() * m;
  return PureState(layout, std::move(out));
}

}  // namespace remerge
