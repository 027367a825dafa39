// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "remerge/state.hpp"

namespace remerge {

/// Von Neumann entropy in bits: -sum lambda log2 lambda over eigenvalues
/// above the 1e-12 cutoff.
double von_neumann_entropy(const DensityOperator& rho);

enum class Party { Alice, Charlie, Bob };
enum class Resource { QubitChannel, Ebit, Cbit };
enum class Protocol {
  Merging,
  CoherentMerging,
  Redistribution,
  Splitting,
  Relay,
  PartialMergeRepackaged,
  ReverseShannonSideInfo,
};

std::string to_string(Party p);
std::string to_string(Resource r);
std::string to_string(Protocol p);

/// Bitmask over the four roles; subsets of {A, B, C, R}.
using RoleMask = unsigned;
inline constexpr RoleMask kMaskA = 1u;
inline constexpr RoleMask kMaskB = 2u;
inline constexpr RoleMask kMaskC = 4u;
inline constexpr RoleMask kMaskR = 8u;

/// Parse a subset string like "A", "RB", "ACR". Throws on other characters.
RoleMask parse_role_mask(const std::string& s);
std::string role_mask_to_string(RoleMask m);

/// A pure state over registers grouped into the four roles A, B, C, R
/// (any group may be empty, modeling a null system). Marginal entropies are
/// memoized per subset; the cache fill is idempotent and thread-safe.
class EntropyContext {
 public:
  EntropyContext(PureState state, std::array<std::vector<std::string>, 4> groups);

  /// Groups registers by the leading character of their name, which must be
  /// one of A, B, C, R. Every role must be represented (dim-1 registers are
  /// fine); the error names the first missing role.
  static EntropyContext from_named(PureState state);

  const PureState& state() const { return state_; }
  const std::vector<std::string>& group(RoleMask single_role) const;
  std::vector<std::string> registers_of(RoleMask subset) const;
  std::int64_t dim_of(RoleMask subset) const;
  bool is_null(RoleMask subset) const { return dim_of(subset) == 1; }

  /// Marginal entropy S(subset) in bits, memoized.
  double entropy(RoleMask subset) const;
  /// S(X|Y) = S(XY) - S(Y); subsets must be disjoint.
  double conditional_entropy(RoleMask x, RoleMask y) const;
  /// I(X:Y) = S(X) + S(Y) - S(XY).
  double mutual_info(RoleMask x, RoleMask y) const;
  /// I(X:Y|Z) = S(X|Z) + S(Y|Z) - S(XY|Z).
  double cond_mutual_info(RoleMask x, RoleMask y, RoleMask z) const;

  /// Context for the AB marginal: rho_AB repurified into a fresh reference
  /// register; C becomes null. Used where plain merging needs a two-party view.
  EntropyContext ab_reduced() const;

 private:
  PureState state_;
  std::array<std::vector<std::string>, 4> groups_;
  mutable std::array<double, 16> memo_{};
  std::unique_ptr<std::array<std::once_flag, 16>> once_;
};

struct RateEntry {
  Resource resource;
  Party from;
  Party to;
  double rate;  // bits per copy; consumed > 0, produced < 0
  std::string note;
};

struct RateReport {
  Protocol protocol;
  std::vector<RateEntry> entries;

  /// Sum of rates matching (resource, from, to); ebits match either direction.
  double total(Resource resource, Party from, Party to) const;
};

/// Plain merging: S(A|B) ebits, I(A:R) classical bits Alice->Bob.
/// Requires a null C; use ab_reduced() for a general context.
RateReport merging_rates(const EntropyContext& ctx);

/// Coherent (fully quantum) merging: I(A:R)/2 qubits, I(A:B)/2 ebits gained.
RateReport coherent_merging_rates(const EntropyContext& ctx);

/// Redistribution: I(A:R|B)/2 qubits, I(A:C)/2 - I(A:B)/2 ebits.
RateReport redistribution_rates(const EntropyContext& ctx);

/// Splitting (null B): I(A:R)/2 qubits, I(A:C)/2 ebits.
RateReport splitting_rates(const EntropyContext& ctx);

/// Relay through the middle party: the four-entry report
/// (Q^{A->C}, E^{AC}, Q^{C->B}, E^{CB}).
RateReport relay_rates(const EntropyContext& ctx);

/// Display magnitudes (Q_ac, E_ac, Q_cb, E_cb) =
/// (I(A:RB)/2, I(A:C)/2, I(A:R|B)/2, I(A:C)/2 - I(A:B)/2),
/// with E_ac the produced amount counted positive.
std::array<double, 4> relay_quadruple(const EntropyContext& ctx);

/// Classical-communication accounting for merging only rho_A while rho_C
/// stays behind: repackaged I(A:R|B) cbits vs naive I(A:RC), plus the ebit
/// bookkeeping of the swap.
RateReport partial_merge_cbits(const EntropyContext& ctx);

/// Time-reversed redistribution (reverse Shannon with side information):
/// roles of B and C exchanged, channel direction reversed.
RateReport reverse_shannon_rates(const EntropyContext& ctx);

RateReport rates_for(Protocol protocol, const EntropyContext& ctx);

}  // namespace remerge
