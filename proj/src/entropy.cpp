// SPDX-License-Identifier: Apache-2.0
#include "remerge/entropy.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace remerge {

double von_neumann_entropy(const DensityOperator& rho) {
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho.matrix());
  if (ev.minCoeff() < -kNormTol)
    throw std::invalid_argument("operator is not positive semidefinite");
  double s = 0.0;
  for (auto l : ev)
    if (l > kEigCutoff) s -= l * std::log2(l);
  return s;
}

std::string to_string(Party p) {
  switch (p) {
    case Party::Alice: return "alice";
    case Party::Charlie: return "charlie";
    case Party::Bob: return "bob";
  }
  return "?";
}

std::string to_string(Resource r) {
  switch (r) {
    case Resource::QubitChannel: return "qubit";
    case Resource::Ebit: return "ebit";
    case Resource::Cbit: return "cbit";
  }
  return "?";
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::Merging: return "merging";
    case Protocol::CoherentMerging: return "coherent_merging";
    case Protocol::Redistribution: return "redistribution";
    case Protocol::Splitting: return "splitting";
    case Protocol::Relay: return "relay";
    case Protocol::PartialMergeRepackaged: return "partial_merge_repackaged";
    case Protocol::ReverseShannonSideInfo: return "reverse_shannon_side_info";
  }
  return "?";
}

RoleMask parse_role_mask(const std::string& s) {
  RoleMask m = 0;
  for (char c : s) {
    switch (c) {
      case 'A': m |= kMaskA; break;
      case 'B': m |= kMaskB; break;
      case 'C': m |= kMaskC; break;
      case 'R': m |= kMaskR; break;
      default:
        throw std::invalid_argument(std::string("invalid subset character '") + c + "'");
    }
  }
  return m;
}

std::string role_mask_to_string(RoleMask m) {
  std::string s;
  if (m & kMaskA) s += 'A';
  if (m & kMaskB) s += 'B';
  if (m & kMaskC) s += 'C';
  if (m & kMaskR) s += 'R';
  return s;
}

namespace {

std::size_t role_index(RoleMask single) {
  switch (single) {
    case kMaskA: return 0;
    case kMaskB: return 1;
    case kMaskC: return 2;
    case kMaskR: return 3;
  }
  throw std::invalid_argument("not a single role");
}

}  // namespace

EntropyContext::EntropyContext(PureState state,
                               std::array<std::vector<std::string>, 4> groups)
    : state_(std::move(state)),
      groups_(std::move(groups)),
      once_(std::make_unique<std::array<std::once_flag, 16>>()) {
  std::unordered_set<std::string> assigned;
  for (const auto& g : groups_)
    for (const auto& name : g) {
      state_.layout().index_of(name);  // throws on unknown register
      if (!assigned.insert(name).second)
        throw std::invalid_argument("register '" + name + "' assigned to two roles");
    }
  for (const auto& r : state_.layout().registers())
    if (!assigned.count(r.name))
      throw std::invalid_argument("register '" + r.name + "' is not assigned to a role");
}

EntropyContext EntropyContext::from_named(PureState state) {
  std::array<std::vector<std::string>, 4> groups;
  static const std::string roles = "ABCR";
  for (const auto& r : state.layout().registers()) {
    const auto pos = roles.find(r.name.front());
    if (pos == std::string::npos)
      throw std::invalid_argument("register '" + r.name +
                                  "' does not start with one of A, B, C, R");
    groups[pos].push_back(r.name);
  }
  for (std::size_t i = 0; i < 4; ++i)
    if (groups[i].empty())
      throw std::invalid_argument(std::string("missing register ") + roles[i]);
  return EntropyContext(std::move(state), std::move(groups));
}

const std::vector<std::string>& EntropyContext::group(RoleMask single_role) const {
  return groups_[role_index(single_role)];
}

std::vector<std::string> EntropyContext::registers_of(RoleMask subset) const {
  std::vector<std::string> out;
  for (RoleMask bit : {kMaskA, kMaskB, kMaskC, kMaskR})
    if (subset & bit)
      out.insert(out.end(), groups_[role_index(bit)].begin(),
                 groups_[role_index(bit)].end());
  return out;
}

std::int64_t EntropyContext::dim_of(RoleMask subset) const {
  std::int64_t d = 1;
  for (const auto& name : registers_of(subset)) d *= state_.layout().dim_of(name);
  return d;
}

double EntropyContext::entropy(RoleMask subset) const {
  if (subset > 15u) throw std::invalid_argument("subset out of range");
  std::call_once((*once_)[subset], [&] {
    const auto regs = registers_of(subset);
    if (regs.empty() || dim_of(subset) == 1) {
      memo_[subset] = 0.0;
    } else {
      memo_[subset] = von_neumann_entropy(partial_trace(state_, regs));
    }
  });
  return memo_[subset];
}

double EntropyContext::conditional_entropy(RoleMask x, RoleMask y) const {
  if (x & y) throw std::invalid_argument("subsets overlap");
  return entropy(x | y) - entropy(y);
}

double EntropyContext::mutual_info(RoleMask x, RoleMask y) const {
  if (x & y) throw std::invalid_argument("subsets overlap");
  return entropy(x) + entropy(y) - entropy(x | y);
}

double EntropyContext::cond_mutual_info(RoleMask x, RoleMask y, RoleMask z) const {
  if ((x & y) | (x & z) | (y & z)) throw std::invalid_argument("subsets overlap");
  return conditional_entropy(x, z) + conditional_entropy(y, z) -
         conditional_entropy(x | y, z);
}

EntropyContext EntropyContext::ab_reduced() const {
  auto regs = registers_of(kMaskA | kMaskB);
  DensityOperator rho_ab = partial_trace(state_, regs);
  std::string anc = "Rp";
  while (rho_ab.layout().has(anc)) anc += '\'';
  PureState psi = purify(rho_ab, anc);
  std::array<std::vector<std::string>, 4> groups;
  groups[0] = group(kMaskA);
  groups[1] = group(kMaskB);
  groups[3] = {anc};
  return EntropyContext(std::move(psi), std::move(groups));
}

double RateReport::total(Resource resource, Party from, Party to) const {
  double sum = 0.0;
  for (const auto& e : entries) {
    if (e.resource != resource) continue;
    const bool forward = e.from == from && e.to == to;
    const bool reverse = e.from == to && e.to == from;
    if (forward || (resource == Resource::Ebit && reverse)) sum += e.rate;
  }
  return sum;
}

namespace {

void require_null(const EntropyContext& ctx, RoleMask role, const char* what) {
  if (!ctx.is_null(role))
    throw std::invalid_argument(std::string(what) +
                                " requires a trivial (dim-1) " +
                                role_mask_to_string(role) + " system");
}

}  // namespace

RateReport merging_rates(const EntropyContext& ctx) {
  require_null(ctx, kMaskC, "merging_rates");
  RateReport rep{Protocol::Merging, {}};
  rep.entries.push_back({Resource::Ebit, Party::Alice, Party::Bob,
                         ctx.conditional_entropy(kMaskA, kMaskB),
                         "ebits consumed (negative: produced)"});
  rep.entries.push_back({Resource::Cbit, Party::Alice, Party::Bob,
                         ctx.mutual_info(kMaskA, kMaskR), "classical bits sent"});
  return rep;
}

RateReport coherent_merging_rates(const EntropyContext& ctx) {
  require_null(ctx, kMaskC, "coherent_merging_rates");
  RateReport rep{Protocol::CoherentMerging, {}};
  rep.entries.push_back({Resource::QubitChannel, Party::Alice, Party::Bob,
                         0.5 * ctx.mutual_info(kMaskA, kMaskR), "qubits sent"});
  rep.entries.push_back({Resource::Ebit, Party::Alice, Party::Bob,
                         -0.5 * ctx.mutual_info(kMaskA, kMaskB), "ebits produced"});
  return rep;
}

RateReport redistribution_rates(const EntropyContext& ctx) {
  RateReport rep{Protocol::Redistribution, {}};
  rep.entries.push_back({Resource::QubitChannel, Party::Alice, Party::Bob,
                         0.5 * ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB),
                         "qubits sent"});
  rep.entries.push_back({Resource::Ebit, Party::Alice, Party::Bob,
                         0.5 * ctx.mutual_info(kMaskA, kMaskC) -
                             0.5 * ctx.mutual_info(kMaskA, kMaskB),
                         "ebits consumed (negative: produced)"});
  return rep;
}

RateReport splitting_rates(const EntropyContext& ctx) {
  require_null(ctx, kMaskB, "splitting_rates");
  RateReport rep{Protocol::Splitting, {}};
  rep.entries.push_back({Resource::QubitChannel, Party::Alice, Party::Bob,
                         0.5 * ctx.mutual_info(kMaskA, kMaskR), "qubits sent"});
  rep.entries.push_back({Resource::Ebit, Party::Alice, Party::Bob,
                         0.5 * ctx.mutual_info(kMaskA, kMaskC), "ebits consumed"});
  return rep;
}

RateReport relay_rates(const EntropyContext& ctx) {
  const auto q = relay_quadruple(ctx);
  RateReport rep{Protocol::Relay, {}};
  rep.entries.push_back({Resource::QubitChannel, Party::Alice, Party::Charlie, q[0],
                         "qubits Alice->Charlie"});
  rep.entries.push_back({Resource::Ebit, Party::Alice, Party::Charlie, -q[1],
                         "ebits produced Alice-Charlie (set aside by repackaging)"});
  rep.entries.push_back({Resource::QubitChannel, Party::Charlie, Party::Bob, q[2],
                         "qubits Charlie->Bob"});
  rep.entries.push_back({Resource::Ebit, Party::Charlie, Party::Bob, q[3],
                         "net ebits consumed Charlie-Bob (negative: produced)"});
  return rep;
}

std::array<double, 4> relay_quadruple(const EntropyContext& ctx) {
  return {0.5 * ctx.mutual_info(kMaskA, kMaskR | kMaskB),
          0.5 * ctx.mutual_info(kMaskA, kMaskC),
          0.5 * ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB),
          0.5 * ctx.mutual_info(kMaskA, kMaskC) -
              0.5 * ctx.mutual_info(kMaskA, kMaskB)};
}

RateReport partial_merge_cbits(const EntropyContext& ctx) {
  RateReport rep{Protocol::PartialMergeRepackaged, {}};
  const double swap = 0.5 * ctx.mutual_info(kMaskA, kMaskC);
  rep.entries.push_back({Resource::Cbit, Party::Alice, Party::Bob,
                         ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB),
                         "classical bits with repackaging"});
  rep.entries.push_back({Resource::Cbit, Party::Alice, Party::Bob,
                         ctx.mutual_info(kMaskA, kMaskR | kMaskC),
                         "classical bits naive"});
  rep.entries.push_back({Resource::Ebit, Party::Alice, Party::Bob,
                         ctx.conditional_entropy(kMaskA, kMaskB),
                         "merging ebits consumed (negative: produced)"});
  rep.entries.push_back({Resource::Ebit, Party::Charlie, Party::Bob, swap,
                         "repackaging swap: pre-shared ebits consumed"});
  rep.entries.push_back({Resource::Ebit, Party::Alice, Party::Charlie, -swap,
                         "repackaging swap: ebits retained"});
  return rep;
}

RateReport reverse_shannon_rates(const EntropyContext& ctx) {
  RateReport rep{Protocol::ReverseShannonSideInfo, {}};
  rep.entries.push_back({Resource::QubitChannel, Party::Bob, Party::Alice,
                         0.5 * ctx.cond_mutual_info(kMaskA, kMaskR, kMaskC),
                         "qubits sent (time-reversed direction)"});
  rep.entries.push_back({Resource::Ebit, Party::Bob, Party::Alice,
                         0.5 * ctx.mutual_info(kMaskA, kMaskB) -
                             0.5 * ctx.mutual_info(kMaskA, kMaskC),
                         "ebits consumed (negative: produced)"});
  return rep;
}

RateReport rates_for(Protocol protocol, const EntropyContext& ctx) {
  switch (protocol) {
    case Protocol::Merging: return merging_rates(ctx);
    case Protocol::CoherentMerging: return coherent_merging_rates(ctx);
    case Protocol::Redistribution: return redistribution_rates(ctx);
    case Protocol::Splitting: return splitting_rates(ctx);
    case Protocol::Relay: return relay_rates(ctx);
    case Protocol::PartialMergeRepackaged: return partial_merge_cbits(ctx);
    case Protocol::ReverseShannonSideInfo: return reverse_shannon_rates(ctx);
  }
  throw std::invalid_argument("unknown protocol");
}

}  // namespace remerge
