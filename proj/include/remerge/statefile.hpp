// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "remerge/relay_sim.hpp"
#include "remerge/state.hpp"

namespace remerge {

/// A parsed state file. Family-built states of the structured kind
/// (phi_plus_pairs, basis_product) also carry their factor description,
/// which the exact relay mode needs.
struct LoadedState {
  PureState state;
  std::optional<StructuredState> structured;
};

/// Formats accepted (UTF-8 JSON):
///   {"registers": [{"name": "A", "dim": 2}, ...],
///    "amplitudes": [[re, im], ...]}            row-major, norm 1 within 1e-6
///   {"family": {"name": "ghz" | "phi_plus_pairs" | "basis_product" |
///               "random_pure", "params": {...}}}
LoadedState parse_state_text(const std::string& text);
LoadedState load_state_file(const std::string& path);

/// Raw form with registers and row-major amplitudes, numbers printed with 17
/// significant digits so the double values reload bit-exactly.
std::string serialize_state(const PureState& psi);
void save_state_file(const PureState& psi, const std::string& path);

/// GHZ over the first `parties` of (A, B, R) — with four parties (A, B, C, R).
/// Roles not spanned are present as dim-1 registers.
PureState ghz_state(int parties, std::int64_t local_dim);

}  // namespace remerge
