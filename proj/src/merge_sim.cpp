// SPDX-License-Identifier: Apache-2.0
#include "remerge/merge_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace remerge {

namespace {

std::string copy_name(const std::string& base, int copy) {
  return base + "#" + std::to_string(copy);
}

// rho on (kept, reference) as a Gram matrix: rows (kept, reference...), the
// reference registers in layout order.
Eigen::MatrixXcd kept_ref_matrix(const EncodedMerge& enc) {
  std::vector<std::string> rows{enc.kept_name};
  rows.insert(rows.end(), enc.reference.begin(), enc.reference.end());
  std::vector<std::string> cols{enc.sent_name};
  cols.insert(cols.end(), enc.receiver.begin(), enc.receiver.end());
  return state_matrix(enc.state, rows, cols);
}

Eigen::MatrixXcd reference_marginal(const EncodedMerge& enc) {
  return partial_trace(enc.state, enc.reference).matrix();
}

void run_indexed(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(threads, count);
  pool.reserve(static_cast<std::size_t>(nt));
  for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

PureState grouped_copies(const PureState& psi, std::span<const char> roles, int n) {
  if (n < 1) throw std::invalid_argument("copies must be >= 1");
  // Registers not matching any role are dropped if trivial, rejected otherwise.
  std::vector<Register> kept_regs;
  for (const auto& r : psi.layout().registers()) {
    const bool known =
        std::find(roles.begin(), roles.end(), r.name.front()) != roles.end();
    if (known) {
      kept_regs.push_back(r);
    } else if (r.dim != 1) {
      throw std::invalid_argument("register '" + r.name +
                                  "' has no role in this simulation");
    }
  }
  PureState trimmed(SystemLayout(kept_regs), psi.amplitudes());

  PureState acc = trimmed;
  {
    std::vector<Register> regs;
    for (const auto& r : kept_regs) regs.push_back({copy_name(r.name, 1), r.dim});
    acc = PureState(SystemLayout(regs), trimmed.amplitudes());
  }
  for (int c = 2; c <= n; ++c) {
    std::vector<Register> regs;
    for (const auto& r : kept_regs) regs.push_back({copy_name(r.name, c), r.dim});
    acc = tensor(acc, PureState(SystemLayout(regs), trimmed.amplitudes()));
  }

  std::vector<std::string> order;
  for (char role : roles)
    for (int c = 1; c <= n; ++c)
      for (const auto& r : kept_regs)
        if (r.name.front() == role) order.push_back(copy_name(r.name, c));
  acc = permute_registers(acc, order);

  std::size_t at = 0;
  for (char role : roles) {
    std::vector<std::string> block;
    for (int c = 1; c <= n; ++c)
      for (const auto& r : kept_regs)
        if (r.name.front() == role) block.push_back(copy_name(r.name, c));
    const std::string name(1, role);
    if (block.empty()) {
      // a role with no registers becomes an explicit dim-1 block
      std::vector<Register> regs = acc.layout().registers();
      regs.insert(regs.begin() + static_cast<std::ptrdiff_t>(at), Register{name, 1});
      acc = PureState(SystemLayout(regs), acc.amplitudes());
    } else {
      acc = merge_registers(acc, block, name);
    }
    ++at;
  }
  return acc;
}

EncodedMerge encode(const PureState& grouped, const std::string& payload,
                    std::span<const std::string> receiver,
                    std::span<const std::string> reference, int sent_qubits,
                    EncoderKind encoder, const Unitary& u) {
  if (sent_qubits < 0) throw std::invalid_argument("sent_qubits must be >= 0");
  if (grouped.layout().index_of(payload) != 0)
    throw std::invalid_argument("payload must be the leading register");
  const std::int64_t d_payload = grouped.layout().dim_of(payload);
  const std::int64_t d_sent = std::int64_t{1} << sent_qubits;
  const std::string sent_name = payload + "_sent";
  const std::string kept_name = payload + "_kept";

  EncodedMerge enc;
  enc.sent_name = sent_name;
  enc.kept_name = kept_name;
  enc.receiver.assign(receiver.begin(), receiver.end());
  enc.reference.assign(reference.begin(), reference.end());
  enc.sent_dim = d_sent;

  if (encoder == EncoderKind::Split) {
    if (d_payload % d_sent != 0)
      throw std::invalid_argument("sent dimension does not factor the payload");
    if (u.dim() != d_payload)
      throw std::invalid_argument("unitary dimension does not match the payload");
    enc.kept_dim = d_payload / d_sent;
    PureState mixed = apply_unitary(grouped, u, std::vector<std::string>{payload});
    enc.state = split_register(mixed, payload, Register{sent_name, d_sent},
                               Register{kept_name, enc.kept_dim});
  } else {
    if (u.dim() != d_payload * d_sent)
      throw std::invalid_argument("unitary dimension does not match payload + ancilla");
    enc.kept_dim = d_payload;
    const std::string anc = payload + "_anc";
    PureState with_anc =
        tensor(grouped, PureState::basis(SystemLayout({Register{anc, d_sent}}),
                                         std::vector<std::int64_t>{0}));
    std::vector<std::string> order{payload, anc};
    for (const auto& r : grouped.layout().registers())
      if (r.name != payload) order.push_back(r.name);
    with_anc = permute_registers(with_anc, order);
    const std::string joint = payload + "_joint";
    with_anc = merge_registers(with_anc, std::vector<std::string>{payload, anc}, joint);
    with_anc = apply_unitary(with_anc, u, std::vector<std::string>{joint});
    // the ancilla is the fast factor of the joint space
    with_anc = split_register(with_anc, joint, Register{kept_name, enc.kept_dim},
                              Register{sent_name, d_sent});
    std::vector<std::string> canonical{sent_name, kept_name};
    for (const auto& r : with_anc.layout().registers())
      if (r.name != sent_name && r.name != kept_name) canonical.push_back(r.name);
    enc.state = permute_registers(with_anc, canonical);
  }
  return enc;
}

double decoupling_error(const EncodedMerge& enc) {
  const Eigen::MatrixXcd m = kept_ref_matrix(enc);
  const Eigen::MatrixXcd ref = reference_marginal(enc);
  const auto dk = enc.kept_dim;
  const auto dr = ref.rows();
  Eigen::MatrixXcd diff = Eigen::MatrixXcd::Zero(dk * dr, dk * dr);
  diff.selfadjointView<Eigen::Lower>().rankUpdate(m);
  diff.triangularView<Eigen::StrictlyUpper>() = diff.adjoint();
  for (std::int64_t a = 0; a < dk; ++a)
    diff.block(a * dr, a * dr, dr, dr) -= ref / static_cast<double>(dk);
  const Eigen::VectorXd ev = hermitian_eigenvalues(diff);
  return std::clamp(0.5 * ev.cwiseAbs().sum(), 0.0, 1.0);
}

double uhlmann_fidelity(const EncodedMerge& enc) {
  const Eigen::MatrixXcd m = kept_ref_matrix(enc);
  const Eigen::MatrixXcd sq = psd_sqrt(reference_marginal(enc));
  const auto dk = enc.kept_dim;
  const auto dr = sq.rows();
  Eigen::MatrixXcd g(m.rows(), m.cols());
  for (std::int64_t a = 0; a < dk; ++a)
    g.middleRows(a * dr, dr).noalias() = sq * m.middleRows(a * dr, dr);
  const double f = singular_values(g).sum() / std::sqrt(static_cast<double>(dk));
  return std::clamp(f, 0.0, 1.0);
}

UhlmannDecoder uhlmann_decoder(const Eigen::MatrixXcd& m_actual,
                               const Eigen::MatrixXcd& m_target) {
  if (m_actual.rows() != m_target.rows() || m_actual.cols() != m_target.cols())
    throw std::invalid_argument("purification matrices must have equal shapes");
  const Eigen::MatrixXcd k = m_target.adjoint() * m_actual;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXcd v = svd.matrixU().conjugate() * svd.matrixV().transpose();
  const double achieved = std::abs(k.cwiseProduct(v).sum());
  return {Unitary(std::move(v)), std::clamp(achieved, 0.0, 1.0)};
}

Eigen::MatrixXcd merge_target_matrix(const PureState& grouped, const std::string& payload,
                                     std::span<const std::string> receiver,
                                     std::span<const std::string> reference,
                                     std::int64_t kept_dim) {
  std::vector<std::string> cols(receiver.begin(), receiver.end());
  cols.insert(cols.end(), reference.begin(), reference.end());
  const Eigen::MatrixXcd mpsi =
      state_matrix(grouped, std::vector<std::string>{payload}, cols);
  const std::int64_t da = mpsi.rows();
  std::int64_t d_recv = 1;
  for (const auto& r : receiver) d_recv *= grouped.layout().dim_of(r);
  const std::int64_t d_ref = mpsi.cols() / d_recv;
  const double scale = 1.0 / std::sqrt(static_cast<double>(kept_dim));

  Eigen::MatrixXcd mt =
      Eigen::MatrixXcd::Zero(kept_dim * d_ref, d_recv * da * kept_dim);
  for (std::int64_t b = 0; b < d_recv; ++b)
    for (std::int64_t a = 0; a < da; ++a)
      for (std::int64_t r = 0; r < d_ref; ++r) {
        const cxd amp = scale * mpsi(a, b * d_ref + r);
        if (amp == cxd(0.0, 0.0)) continue;
        for (std::int64_t g = 0; g < kept_dim; ++g)
          mt(g * d_ref + r, (b * da + a) * kept_dim + g) = amp;
      }
  return mt;
}

Eigen::MatrixXcd encoded_matrix_padded(const EncodedMerge& enc, std::int64_t pad_dim) {
  std::vector<std::string> rows{enc.kept_name};
  rows.insert(rows.end(), enc.reference.begin(), enc.reference.end());
  std::vector<std::string> cols(enc.receiver.begin(), enc.receiver.end());
  cols.push_back(enc.sent_name);
  const Eigen::MatrixXcd m = state_matrix(enc.state, rows, cols);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.rows(), m.cols() * pad_dim);
  for (std::int64_t c = 0; c < m.cols(); ++c) out.col(c * pad_dim) = m.col(c);
  return out;
}

UhlmannDecoder build_decoder(const EncodedMerge& enc, const PureState& grouped) {
  const std::string payload = grouped.layout().reg(0).name;
  const std::int64_t da = grouped.layout().dim_of(payload);
  if ((da * enc.kept_dim) % enc.sent_dim != 0)
    throw std::invalid_argument("decoder pad does not factor the receiver space");
  const std::int64_t pad = da * enc.kept_dim / enc.sent_dim;
  const Eigen::MatrixXcd mt =
      merge_target_matrix(grouped, payload, enc.receiver, enc.reference, enc.kept_dim);
  const Eigen::MatrixXcd mp = encoded_matrix_padded(enc, pad);
  return uhlmann_decoder(mp, mt);
}

std::vector<MergeTrialResult> run_merge(const PureState& psi, const MergeConfig& cfg,
                                        int threads) {
  if (cfg.copies < 1 || cfg.trials < 1)
    throw std::invalid_argument("copies and trials must be >= 1");
  for (const auto& r : psi.layout().registers())
    if (r.name.front() == 'C' && r.dim != 1)
      throw std::invalid_argument("merge simulation treats only A, B, R roles; "
                                  "register '" + r.name + "' must have dim 1");
  static constexpr char kRoles[] = {'A', 'B', 'R'};
  const PureState grouped = grouped_copies(psi, kRoles, cfg.copies);
  const std::vector<std::string> receiver{"B"};
  const std::vector<std::string> reference{"R"};
  const std::int64_t da = grouped.layout().dim_of("A");
  const std::int64_t u_dim =
      cfg.encoder == EncoderKind::Split ? da : da * (std::int64_t{1} << cfg.sent_qubits);

  std::vector<MergeTrialResult> results(static_cast<std::size_t>(cfg.trials));
  run_indexed(cfg.trials, threads, [&](int t) {
    RandomStream rng = RandomStream::derive(cfg.seed, static_cast<std::uint64_t>(t));
    const Unitary u = haar_unitary(u_dim, rng);
    const EncodedMerge enc =
        encode(grouped, "A", receiver, reference, cfg.sent_qubits, cfg.encoder, u);
    MergeTrialResult r;
    r.qubits_sent = cfg.sent_qubits;
    r.ebits_out = std::log2(static_cast<double>(enc.kept_dim));
    r.decoupling_error = decoupling_error(enc);
    r.uhlmann_fidelity = uhlmann_fidelity(enc);
    r.decoder_fidelity =
        cfg.idealize ? r.uhlmann_fidelity : build_decoder(enc, grouped).achieved_fidelity;
    results[static_cast<std::size_t>(t)] = r;
  });
  return results;
}

std::vector<std::vector<double>> sweep_uhlmann(const PureState& psi,
                                               std::span<const int> ks, int copies,
                                               int trials, std::uint64_t seed,
                                               EncoderKind encoder, int threads) {
  static constexpr char kRoles[] = {'A', 'B', 'R'};
  const PureState grouped = grouped_copies(psi, kRoles, copies);
  const std::vector<std::string> receiver{"B"};
  const std::vector<std::string> reference{"R"};
  const std::int64_t da = grouped.layout().dim_of("A");

  std::vector<std::vector<double>> out(ks.size(), std::vector<double>(trials, 0.0));
  run_indexed(static_cast<int>(ks.size()) * trials, threads, [&](int idx) {
    const int ki = idx / trials;
    const int t = idx % trials;
    RandomStream rng = RandomStream::derive(seed, static_cast<std::uint64_t>(t));
    const std::int64_t u_dim =
        encoder == EncoderKind::Split ? da : da * (std::int64_t{1} << ks[ki]);
    const Unitary u = haar_unitary(u_dim, rng);
    const EncodedMerge enc =
        encode(grouped, "A", receiver, reference, ks[ki], encoder, u);
    out[static_cast<std::size_t>(ki)][static_cast<std::size_t>(t)] =
        uhlmann_fidelity(enc);
  });
  return out;
}

}  // namespace remerge
