// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "remerge/ledger.hpp"
#include "remerge/merge_sim.hpp"

namespace remerge {

enum class Owner { Alice, Charlie, Bob, Reference };
std::string to_string(Owner o);
/// alice holds the A registers, charlie C, bob B; R belongs to no party.
Owner owner_of_role(char role);

struct PairFactor {
  std::string x;
  std::string y;
};

struct BasisFactor {
  std::string reg;
  std::int64_t value = 0;
};

/// A member of the registered structured family: a tensor product of
/// maximally entangled pairs and computational basis registers, with register
/// roles given by the leading name character (A, B, C or R). One-shot merging
/// is exact on these states, which is what the exact relay mode relies on.
struct StructuredState {
  std::vector<Register> registers;  // layout order
  std::vector<PairFactor> pairs;
  std::vector<BasisFactor> basis;

  /// Checks: names unique with a valid role prefix, every register in exactly
  /// one factor, pair dimensions equal and a power of two.
  void validate() const;
  PureState assemble() const;
  EntropyContext context() const;
  /// n independent copies, registers suffixed "#c" (unchanged for n = 1).
  StructuredState replicated(int copies) const;
};

enum class RelayMode { ExactStructured, Approximate };

struct RelayConfig {
  int copies = 1;
  int qubits_ac = 0;
  int qubits_cb = 0;
  int preshared_cb_ebits = 0;
  RelayMode mode = RelayMode::ExactStructured;
  int trials = 1;
  std::uint64_t seed = 0;
};

struct RelayResult {
  double fidelity_final = 0.0;
  /// Trace distance of Charlie's C marginal before step 1a vs after step 2.
  double catalyst_deviation = 0.0;
  ResourceLedger ledger;
  /// After 1b, after step 2 (the direct-send equivalence), after step 3.
  std::array<double, 3> per_step_fidelities{};
};

/// Register ownership metadata; a send is an ownership transfer plus exactly
/// one qubit-channel tally.
class OwnershipMap {
 public:
  void set(const std::string& reg, Owner o) { owners_[reg] = o; }
  Owner of(const std::string& reg) const;
  bool holds(const std::string& reg, Owner o) const { return of(reg) == o; }

 private:
  std::map<std::string, Owner> owners_;
};

/// The repackaging swap: exchange the contents of Charlie's generated-ebit
/// register and his half of a pre-shared Charlie-Bob pair. Both registers
/// must be held by Charlie and have equal dimension; marginals of all other
/// registers are untouched. Applying it twice restores the state.
PureState repackage(const PureState& global, const OwnershipMap& owners,
                    const std::string& charlie_ebit_reg,
                    const std::string& charlie_bob_reg);

/// Exact structured run: sends are explicit ownership transfers of designated
/// sub-registers, the decoder is trivial, repackaging is a register swap.
/// Deterministic; every trial yields the same result.
std::vector<RelayResult> run_relay(const StructuredState& psi, const RelayConfig& cfg,
                                   int threads = 1);

/// Approximate run on an arbitrary state (roles by register-name prefix):
/// random-unitary encoding toward Charlie, Uhlmann decode, swap, inverse
/// decode, forward send; fidelities are reported, not asserted.
std::vector<RelayResult> run_relay(const PureState& psi, const RelayConfig& cfg,
                                   int threads = 1);

struct ComparisonReport {
  std::array<double, 4> actual{};    // per-copy (Q_ac, E_ac, Q_cb, E_cb)
  std::array<double, 4> expected{};  // relay_quadruple of the single-copy context
  std::array<double, 4> residuals{};
  bool asserted = false;  // exact mode: residuals held to 1e-9
  bool pass = true;
};

ComparisonReport verify_against_rates(std::span<const RelayResult> results,
                                      const EntropyContext& ctx, RelayMode mode,
                                      int copies);

}  // namespace remerge
