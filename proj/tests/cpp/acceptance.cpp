// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "remerge/cli.hpp"
#include "remerge/ledger.hpp"
#include "remerge/merge_sim.hpp"
#include "remerge/relay_sim.hpp"
#include "remerge/statefile.hpp"

using namespace remerge;

namespace {

struct Check {
  std::vector<std::string> failures;
  int checks = 0;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
  void expect_close(double got, double want, double tol, const std::string& what) {
    expect(std::abs(got - want) <= tol,
           what + " (got " + std::to_string(got) + ", want " + std::to_string(want) + ")");
  }
};

std::vector<PureState> random_abcr_states(int count, std::uint64_t seed) {
  std::vector<PureState> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    RandomStream rng = RandomStream::derive(seed, static_cast<std::uint64_t>(i));
    out.push_back(random_pure_state(
        SystemLayout({{"A", 2}, {"B", 2}, {"C", 2}, {"R", 2}}), rng));
  }
  return out;
}

StructuredState pairs_spec() {
  StructuredState s;
  s.registers = {{"A1", 2}, {"R", 2}, {"A2", 2}, {"C", 2}, {"B", 1}};
  s.pairs = {{"A1", "R"}, {"A2", "C"}};
  s.basis = {{"B", 0}};
  return s;
}

PureState phi_with_nulls(const std::string& a, const std::string& b) {
  PureState p = maximally_entangled(2, a, b);
  for (char role : {'A', 'B', 'C', 'R'}) {
    const std::string name(1, role);
    if (!p.layout().has(name))
      p = tensor(p, PureState::basis(SystemLayout({Register{name, 1}}),
                                     std::vector<std::int64_t>{0}));
  }
  return p;
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double stderr_of(const std::vector<double>& xs) {
  const double m = mean(xs);
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  return std::sqrt(var / (xs.size() > 1 ? xs.size() - 1 : 1) / xs.size());
}

// 1. entropy identities on 200 random four-qubit pure states
void criterion_entropy_identities(Check& c) {
  for (const auto& psi : random_abcr_states(200, 11)) {
    const EntropyContext ctx = EntropyContext::from_named(psi);
    for (RoleMask m = 1; m < 15; ++m)
      c.expect(std::abs(ctx.entropy(m) - ctx.entropy(15u & ~m)) <= 1e-9,
               "purity duality on subset " + role_mask_to_string(m));
    c.expect(std::abs(ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB) -
                      ctx.cond_mutual_info(kMaskA, kMaskR, kMaskC)) <= 1e-9,
             "I(A:R|B) = I(A:R|C)");
    c.expect(std::abs(ctx.mutual_info(kMaskA, kMaskR | kMaskC) -
                      ctx.mutual_info(kMaskA, kMaskC) -
                      ctx.cond_mutual_info(kMaskA, kMaskR, kMaskC)) <= 1e-9,
             "chain rule I(A:RC) = I(A:C) + I(A:R|C)");
    c.expect(ctx.cond_mutual_info(kMaskA, kMaskR, kMaskB) >= -1e-9,
             "I(A:R|B) nonnegative");
  }
}

// 2. rate-quadruple consistency and the C-null degeneration
void criterion_rate_quadruple(Check& c) {
  for (const auto& psi : random_abcr_states(200, 11)) {
    const EntropyContext ctx = EntropyContext::from_named(psi);
    const auto q = relay_quadruple(ctx);
    c.expect(std::abs(q[2] - (0.5 * ctx.mutual_info(kMaskA, kMaskR | kMaskC) -
                              0.5 * ctx.mutual_info(kMaskA, kMaskC))) <= 1e-9,
             "Q_cb = I(A:RC)/2 - I(A:C)/2");
  }
  for (int i = 0; i < 50; ++i) {
    RandomStream rng = RandomStream::derive(12, static_cast<std::uint64_t>(i));
    const PureState psi = tensor(
        random_pure_state(SystemLayout({{"A", 2}, {"B", 2}, {"R", 2}}), rng),
        PureState::basis(SystemLayout({{"C", 1}}), std::vector<std::int64_t>{0}));
    const EntropyContext ctx = EntropyContext::from_named(psi);
    const auto q = relay_quadruple(ctx);
    const RateReport cm = coherent_merging_rates(ctx);
    c.expect(std::abs(q[2] - cm.total(Resource::QubitChannel, Party::Alice, Party::Bob)) <=
                 1e-9 &&
             std::abs(q[3] - cm.total(Resource::Ebit, Party::Alice, Party::Bob)) <= 1e-9 &&
             std::abs(q[1]) <= 1e-9,
             "null-C relay degenerates to coherent merging");
  }
}

// 3. ledger derivations on random and structured states
void criterion_ledger_derivations(Check& c) {
  for (const auto& psi : random_abcr_states(100, 13)) {
    const EntropyContext ctx = EntropyContext::from_named(psi);
    c.expect(derive_redistribution_from_mergings(ctx).max_residual <= 1e-9,
             "relay derivation residual");
    c.expect(derive_coherent_from_merging(ctx.ab_reduced()).max_residual <= 1e-9,
             "coherent-from-merging derivation residual");
  }
  for (const PureState& psi : {phi_with_nulls("A", "R"), phi_with_nulls("A", "C"),
                               pairs_spec().assemble()}) {
    const EntropyContext ctx = EntropyContext::from_named(psi);
    c.expect(derive_redistribution_from_mergings(ctx).max_residual <= 1e-9,
             "relay derivation residual on a structured state");
  }
}

// 4. named analytic values
void criterion_named_values(Check& c) {
  {
    const auto q = relay_quadruple(pairs_spec().context());
    for (int i = 0; i < 4; ++i)
      c.expect_close(q[static_cast<std::size_t>(i)], 1.0, 1e-9,
                     "two-pair relay quadruple entry " + std::to_string(i));
  }
  {
    const RateReport rd =
        redistribution_rates(EntropyContext::from_named(phi_with_nulls("A", "C")));
    c.expect_close(rd.total(Resource::QubitChannel, Party::Alice, Party::Bob), 0.0, 1e-9,
                   "charlie-pair redistribution qubits");
    c.expect_close(rd.total(Resource::Ebit, Party::Alice, Party::Bob), 1.0, 1e-9,
                   "charlie-pair redistribution ebits");
  }
  {
    const EntropyContext ghz = EntropyContext::from_named(ghz_state(3, 2));
    const RateReport mg = merging_rates(ghz);
    c.expect_close(mg.total(Resource::Ebit, Party::Alice, Party::Bob), 0.0, 1e-9,
                   "GHZ merging ebits");
    c.expect_close(mg.total(Resource::Cbit, Party::Alice, Party::Bob), 1.0, 1e-9,
                   "GHZ merging cbits");
    const RateReport cm = coherent_merging_rates(ghz);
    c.expect_close(cm.total(Resource::QubitChannel, Party::Alice, Party::Bob), 0.5, 1e-9,
                   "GHZ coherent merging qubits");
    c.expect_close(cm.total(Resource::Ebit, Party::Alice, Party::Bob), -0.5, 1e-9,
                   "GHZ coherent merging ebit gain");
  }
}

// 5. one-shot exactness and decoder optimality on every trial
void criterion_fqsw_exactness(Check& c) {
  const PureState phi_ar = phi_with_nulls("A", "R");
  const PureState phi_ab = phi_with_nulls("A", "B");

  MergeConfig cfg;
  cfg.trials = 5;
  cfg.seed = 40;
  cfg.copies = 2;
  cfg.sent_qubits = 2;  // send-all
  for (const auto& r : run_merge(phi_ar, cfg)) {
    c.expect_close(r.uhlmann_fidelity, 1.0, 1e-9, "send-all fidelity");
    c.expect_close(r.decoder_fidelity, 1.0, 1e-9, "send-all decoder fidelity");
  }
  cfg.sent_qubits = 0;  // decoupled and maximally mixed: free
  for (const auto& r : run_merge(phi_ab, cfg)) {
    c.expect_close(r.uhlmann_fidelity, 1.0, 1e-9, "decoupled k=0 fidelity");
    c.expect_close(r.decoder_fidelity, 1.0, 1e-9, "decoupled k=0 decoder fidelity");
  }

  RandomStream rng(41);
  const PureState random_abr =
      random_pure_state(SystemLayout({{"A", 2}, {"B", 2}, {"R", 2}}), rng);
  for (const PureState& psi : {ghz_state(3, 2), random_abr}) {
    for (int n : {2, 3}) {
      cfg.copies = n;
      cfg.trials = 4;
      for (int k = 0; k <= n; ++k) {
        cfg.sent_qubits = k;
        for (const auto& r : run_merge(psi, cfg))
          c.expect(std::abs(r.decoder_fidelity - r.uhlmann_fidelity) <= 1e-6,
                   "decoder within 1e-6 of the optimum at n=" + std::to_string(n) +
                       " k=" + std::to_string(k));
      }
    }
  }
}

// 6. trend on GHZ at n=6: monotone in k, frozen gap between k=5 and k=1
void criterion_fqsw_trend(Check& c) {
  const std::vector<int> ks{1, 2, 3, 4, 5, 6};
  const auto rows = sweep_uhlmann(ghz_state(3, 2), ks, 6, 20, 606, EncoderKind::Split, 2);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double gate = 2.0 * std::hypot(stderr_of(rows[i]), stderr_of(rows[i + 1]));
    c.expect(mean(rows[i + 1]) >= mean(rows[i]) - gate,
             "mean fidelity non-decreasing from k=" + std::to_string(ks[i]));
  }
  c.expect(mean(rows[4]) - mean(rows[0]) >= 0.2,
           "fidelity at k=5 beats k=1 by the frozen 0.2 margin");
}

// 7. exact relay end to end at the rate quadruple
void criterion_relay_exact(Check& c) {
  RelayConfig cfg;
  cfg.qubits_ac = 1;
  cfg.qubits_cb = 1;
  cfg.preshared_cb_ebits = 1;
  cfg.trials = 3;
  const auto results = run_relay(pairs_spec(), cfg);
  for (const auto& r : results) {
    c.expect_close(r.fidelity_final, 1.0, 1e-9, "relay final fidelity");
    c.expect(r.catalyst_deviation <= 1e-9, "catalyst deviation");
    c.expect(r.per_step_fidelities[1] >= 1.0 - 1e-9, "step-2 direct-send equivalence");
  }
  const ComparisonReport rep = verify_against_rates(
      results, pairs_spec().context(), RelayMode::ExactStructured, 1);
  c.expect(rep.pass, "ledger equals the relay rate quadruple");
}

// 8. byte-identical outputs across repeats and thread counts
void criterion_determinism(Check& c) {
  auto run_args = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return std::pair<int, std::string>(code, out.str());
  };
  const std::string data = REMERGE_TEST_DATA_DIR;
  const std::vector<std::string> merge_base{
      "simulate", "--state", data + "/ghz.json", "--mode", "merge", "--copies", "4",
      "--sent-qubits", "1..4", "--trials", "5", "--seed", "7", "--threads"};
  std::vector<std::string> m1 = merge_base, m4 = merge_base;
  m1.push_back("1");
  m4.push_back("4");
  const auto a = run_args(m1);
  const auto b = run_args(m1);
  const auto d = run_args(m4);
  c.expect(a.first == cli::kOk, "merge sweep runs");
  c.expect(a.second == b.second, "identical seeds give identical bytes");
  c.expect(a.second == d.second, "thread counts 1 and 4 give identical bytes");

  const std::vector<std::string> relay_args{
      "simulate", "--state", data + "/pairs.json", "--mode", "relay", "--exact",
      "--sent-qubits-ac", "1", "--sent-qubits-cb", "1", "--trials", "3", "--seed", "9"};
  const auto r1 = run_args(relay_args);
  const auto r2 = run_args(relay_args);
  c.expect(r1.first == cli::kOk && r1.second == r2.second,
           "relay runs are byte-identical");
}

// 9. CLI contract: round trip and the documented exit codes
void criterion_cli_contract(Check& c) {
  RandomStream rng(91);
  const PureState psi =
      random_pure_state(SystemLayout({{"A", 2}, {"B", 2}, {"C", 2}, {"R", 2}}), rng);
  const std::string once = serialize_state(psi);
  c.expect(serialize_state(parse_state_text(once).state) == once,
           "state file round trip is bit-exact");

  auto code_of = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
  };
  const std::string data = REMERGE_TEST_DATA_DIR;
  c.expect(code_of({"rates", "--state", data + "/pairs.json", "--protocol", "relay"}) ==
               cli::kOk,
           "exit 0 on success");
  c.expect(code_of({"rates", "--state", data + "/does_not_exist.json"}) ==
               cli::kInputError,
           "exit 2 on input errors");
  c.expect(code_of({"rates", "--state", data + "/pairs.json", "--protocol", "bogus"}) ==
               cli::kInputError,
           "exit 2 on unknown protocol");
  c.expect(code_of({"simulate", "--state", data + "/ghz.json", "--mode", "merge",
                    "--copies", "9", "--sent-qubits", "1"}) == cli::kResourceError,
           "exit 3 past the amplitude cap");
}

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;  // 0: no stated budget
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "entropy identities on 200 random four-register states", 10.0,
       criterion_entropy_identities},
      {2, "relay rate-quadruple consistency and null-C degeneration", 0.0,
       criterion_rate_quadruple},
      {3, "ledger derivations reproduce the rate calculators", 10.0,
       criterion_ledger_derivations},
      {4, "named analytic rate values", 0.0, criterion_named_values},
      {5, "one-shot exactness and decoder optimality", 0.0, criterion_fqsw_exactness},
      {6, "fidelity trend in sent qubits (GHZ, n=6)", 60.0, criterion_fqsw_trend},
      {7, "exact relay end to end at the rate quadruple", 5.0, criterion_relay_exact},
      {8, "byte-identical deterministic output", 0.0, criterion_determinism},
      {9, "CLI round trip and exit codes", 0.0, criterion_cli_contract},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    std::string error;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = error.empty() && check.failures.empty();
    std::string note;
    if (cr.budget_seconds > 0.0 && seconds > cr.budget_seconds) {
      ok = false;
      note = " [over the " + std::to_string(cr.budget_seconds) + "s budget]";
    }
    std::printf("%s criterion %d: %s (%d checks, %.2fs)%s\n", ok ? "PASS" : "FAIL",
                cr.number, cr.name.c_str(), check.checks, seconds, note.c_str());
    if (!error.empty()) std::printf("     exception: %s\n", error.c_str());
    for (std::size_t i = 0; i < check.failures.size() && i < 5; ++i)
      std::printf("     %s\n", check.failures[i].c_str());
    if (check.failures.size() > 5)
      std::printf("     ... and %zu more\n", check.failures.size() - 5);
    if (!ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
