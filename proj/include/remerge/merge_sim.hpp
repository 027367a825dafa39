// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "remerge/entropy.hpp"
#include "remerge/random.hpp"
#include "remerge/state.hpp"

namespace remerge {

/// `Split` sends a 2^k-dimensional factor of the payload space itself.
/// `Ancilla` mixes the payload with a k-qubit |0...0> ancilla and sends the
/// ancilla; both realize the same asymptotic rate.
enum class EncoderKind { Split, Ancilla };

struct MergeConfig {
  int copies = 1;       // n
  int sent_qubits = 0;  // k
  EncoderKind encoder = EncoderKind::Split;
  int trials = 1;
  std::uint64_t seed = 0;
  /// Skip the explicit decoder; decoder_fidelity then reports the Uhlmann
  /// optimum directly.
  bool idealize = false;
};

struct MergeTrialResult {
  double decoupling_error = 0.0;
  double uhlmann_fidelity = 0.0;
  double decoder_fidelity = 0.0;
  int qubits_sent = 0;
  double ebits_out = 0.0;  // log2 of the kept dimension, the ebit yield once decoupled
};

/// n copies of psi with same-role registers regrouped into one block register
/// per role, laid out in the order the roles are listed. Role of a register
/// is the leading character of its name; block registers take the role letter
/// as their name.
PureState grouped_copies(const PureState& psi, std::span<const char> roles, int n);

/// A state after random-unitary encoding, partitioned for the decoupling
/// checks: the payload is split into sent/kept, `receiver` names the
/// registers of the party being merged to, `reference` everything else.
struct EncodedMerge {
  // layout: [sent, kept, ...receiver/reference in place]
  PureState state{SystemLayout{}, Eigen::VectorXcd::Ones(1)};
  std::string sent_name;
  std::string kept_name;
  std::vector<std::string> receiver;
  std::vector<std::string> reference;
  std::int64_t sent_dim = 1;
  std::int64_t kept_dim = 1;
};

/// Apply u to the payload block (plus ancilla for the ancilla encoder) and
/// repartition into sent/kept. The payload must be the leading register.
EncodedMerge encode(const PureState& grouped, const std::string& payload,
                    std::span<const std::string> receiver,
                    std::span<const std::string> reference, int sent_qubits,
                    EncoderKind encoder, const Unitary& u);

/// Trace distance of rho_{kept,reference} from pi_kept (x) rho_reference.
double decoupling_error(const EncodedMerge& enc);

/// F(rho_{kept,reference}, pi_kept (x) rho_reference): the best fidelity any
/// receiver-side isometry can reach against the merged target, since both
/// states purify those operators with the receiver holding the purifier.
double uhlmann_fidelity(const EncodedMerge& enc);

struct UhlmannDecoder {
  Unitary v;  // on the padded receiver-side space
  double achieved_fidelity = 0.0;
};

/// Optimal receiver-side unitary relating two purifications, via the singular
/// value decomposition of m_target^dag m_actual; both matrices map the
/// non-receiver side (rows) to the receiver side (columns) and must have
/// equal shapes (pad the actual side with a |0> ancilla column factor first).
UhlmannDecoder uhlmann_decoder(const Eigen::MatrixXcd& m_actual,
                               const Eigen::MatrixXcd& m_target);

/// The merged target for an encoded state: the payload content relocated to
/// the receiver, the kept register maximally entangled with a fresh receiver
/// register. Receiver-side ordering (receiver..., payload-copy, ebit-partner,
/// pad), pad in |0>.
Eigen::MatrixXcd merge_target_matrix(const PureState& grouped, const std::string& payload,
                                     std::span<const std::string> receiver,
                                     std::span<const std::string> reference,
                                     std::int64_t kept_dim);

/// Actual-state matrix aligned with merge_target_matrix: rows (kept,
/// reference...), columns (receiver..., sent, pad).
Eigen::MatrixXcd encoded_matrix_padded(const EncodedMerge& enc, std::int64_t pad_dim);

/// Build the explicit decoder for an encoded state against the merged target.
UhlmannDecoder build_decoder(const EncodedMerge& enc, const PureState& grouped);

/// Full per-trial simulation of coherent merging on psi^{(x) n}. psi's
/// registers carry role prefixes A (payload), B (receiver), R (reference);
/// a C register is only allowed with dim 1. Trial t draws its unitary from
/// RandomStream::derive(seed, t), so results are reproducible and independent
/// of the execution schedule.
std::vector<MergeTrialResult> run_merge(const PureState& psi, const MergeConfig& cfg,
                                        int threads = 1);

/// Uhlmann fidelities only, for trend scans over k: result[i][t] is trial t
/// at ks[i]. Streams follow the run_merge convention.
std::vector<std::vector<double>> sweep_uhlmann(const PureState& psi,
                                               std::span<const int> ks, int copies,
                                               int trials, std::uint64_t seed,
                                               EncoderKind encoder = EncoderKind::Split,
                                               int threads = 1);

}  // namespace remerge
