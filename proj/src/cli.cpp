// SPDX-License-Identifier: Apache-2.0
#include "remerge/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "remerge/entropy.hpp"
#include "remerge/errors.hpp"
#include "remerge/ledger.hpp"
#include "remerge/merge_sim.hpp"
#include "remerge/relay_sim.hpp"
#include "remerge/statefile.hpp"

namespace remerge::cli {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

constexpr std::uint64_t kDefaultCap = std::uint64_t{1} << 22;

// ---- rates ----

void print_report(std::ostream& out, const RateReport& rep, int indent,
                  const std::string& extra_note) {
  const std::string pad(indent, ' ');
  out << pad << "{\n" << pad << "  \"protocol\": \"" << to_string(rep.protocol) << "\",\n";
  if (!extra_note.empty())
    out << pad << "  \"note\": \"" << json_escape(extra_note) << "\",\n";
  out << pad << "  \"entries\": [\n";
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    out << pad << "    {\"resource\": \"" << to_string(e.resource) << "\", \"from\": \""
        << to_string(e.from) << "\", \"to\": \"" << to_string(e.to)
        << "\", \"rate\": " << fmt17(e.rate) << ", \"note\": \"" << json_escape(e.note)
        << "\"}" << (i + 1 < rep.entries.size() ? "," : "") << "\n";
  }
  out << pad << "  ]\n" << pad << "}";
}

Protocol protocol_from_name(const std::string& name) {
  for (Protocol p : {Protocol::Merging, Protocol::CoherentMerging,
                     Protocol::Redistribution, Protocol::Splitting, Protocol::Relay,
                     Protocol::PartialMergeRepackaged, Protocol::ReverseShannonSideInfo})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

// merging-family protocols need a two-party view; reduce when C is nontrivial
std::pair<RateReport, std::string> report_for(Protocol p, const EntropyContext& ctx) {
  if ((p == Protocol::Merging || p == Protocol::CoherentMerging) && !ctx.is_null(kMaskC)) {
    return {rates_for(p, ctx.ab_reduced()), "computed on the repurified AB marginal"};
  }
  return {rates_for(p, ctx), ""};
}

int cmd_rates(const std::string& state_path, const std::string& protocol, bool all,
              std::ostream& out) {
  const LoadedState loaded = load_state_file(state_path);
  const EntropyContext ctx = EntropyContext::from_named(loaded.state);
  if (all) {
    out << "{\n\"protocols\": [\n";
    bool first = true;
    for (Protocol p : {Protocol::Merging, Protocol::CoherentMerging,
                       Protocol::Redistribution, Protocol::Splitting, Protocol::Relay,
                       Protocol::PartialMergeRepackaged,
                       Protocol::ReverseShannonSideInfo}) {
      if (p == Protocol::Splitting && !ctx.is_null(kMaskB)) continue;  // needs null B
      if (!first) out << ",\n";
      first = false;
      const auto [rep, note] = report_for(p, ctx);
      print_report(out, rep, 2, note);
    }
    out << "\n]\n}\n";
  } else {
    const auto [rep, note] = report_for(protocol_from_name(protocol), ctx);
    print_report(out, rep, 0, note);
    out << "\n";
  }
  return kOk;
}

// ---- ledger ----

int cmd_ledger(const std::string& script_path, const std::string& state_path,
               std::ostream& out) {
  std::ifstream in(script_path);
  if (!in) throw std::invalid_argument("cannot open script file '" + script_path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const ProtocolScript script = parse_script(ss.str());
  const LoadedState loaded = load_state_file(state_path);
  const EntropyContext ctx = EntropyContext::from_named(loaded.state);
  const ResourceLedger ledger = evaluate(script, ctx);

  out << "{\n  \"tallies\": [\n";
  bool first = true;
  for (const auto& [key, rate] : ledger.tallies) {
    if (!first) out << ",\n";
    first = false;
    out << "    {\"resource\": \"" << to_string(key.kind) << "\", \"from\": \""
        << to_string(key.from) << "\", \"to\": \"" << to_string(key.to)
        << "\", \"rate\": " << fmt17(rate) << "}";
  }
  out << "\n  ],\n  \"trace\": [\n";
  for (std::size_t i = 0; i < ledger.trace.size(); ++i) {
    const auto& rec = ledger.trace[i];
    out << "    {\"step\": \"" << json_escape(rec.step) << "\", \"deltas\": [";
    for (std::size_t j = 0; j < rec.deltas.size(); ++j) {
      const auto& d = rec.deltas[j];
      if (j) out << ", ";
      out << "{\"resource\": \"" << to_string(d.key.kind) << "\", \"from\": \""
          << to_string(d.key.from) << "\", \"to\": \"" << to_string(d.key.to)
          << "\", \"rate\": " << fmt17(d.amount) << ", \"note\": \""
          << json_escape(d.note) << "\"}";
    }
    out << "]}" << (i + 1 < ledger.trace.size() ? "," : "") << "\n";
  }
  const auto got = ledger_relay_quadruple(ledger);
  const auto want = relay_quadruple(ctx);
  double residual = 0.0;
  for (int i = 0; i < 4; ++i)
    residual = std::max(residual, std::abs(got[static_cast<std::size_t>(i)] -
                                           want[static_cast<std::size_t>(i)]));
  out << "  ],\n  \"residual_vs_relay_rates\": " << fmt17(residual) << "\n}\n";
  return kOk;
}

// ---- simulate ----

std::vector<int> parse_k_spec(const std::string& spec) {
  std::vector<int> ks;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(spec.substr(0, dots));
    const int hi = std::stoi(spec.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty sent-qubits range '" + spec + "'");
    for (int k = lo; k <= hi; ++k) ks.push_back(k);
    return ks;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) ks.push_back(std::stoi(item));
  if (ks.empty()) throw std::invalid_argument("no sent-qubits given");
  return ks;
}

void check_cap(std::uint64_t required, std::uint64_t cap) {
  if (required > cap) {
    std::ostringstream msg;
    msg << "simulation needs ~" << required << " amplitudes (~"
        << (required * 16) / (1024 * 1024)
        << " MiB for one state); cap is " << cap
        << " (raise with --max-amplitudes)";
    throw FeasibilityError(msg.str(), required, cap);
  }
}

struct SimulateOptions {
  std::string state_path;
  std::string mode = "merge";
  int copies = 1;
  std::string sent_qubits = "0";
  int qubits_ac = 0;
  int qubits_cb = 0;
  int preshared = -1;  // -1: exactly what repackaging needs
  int trials = 1;
  std::uint64_t seed = 0;
  std::string encoder = "split";
  bool idealize = false;
  bool exact = false;
  bool approximate = false;
  std::string output = "csv";
  int threads = 1;
  std::uint64_t cap = kDefaultCap;
};

std::uint64_t pow_u64(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

int cmd_simulate_merge(const SimulateOptions& opt, std::ostream& out) {
  const LoadedState loaded = load_state_file(opt.state_path);
  const auto ks = parse_k_spec(opt.sent_qubits);

  std::uint64_t single = 1;
  for (const auto& r : loaded.state.layout().registers())
    single *= static_cast<std::uint64_t>(r.dim);
  std::uint64_t payload = 1;
  for (const auto& r : loaded.state.layout().registers())
    if (r.name.front() == 'A') payload *= static_cast<std::uint64_t>(r.dim);
  const std::uint64_t total_n = pow_u64(single, opt.copies);
  const std::uint64_t payload_n = pow_u64(payload, opt.copies);
  std::uint64_t required = total_n;
  if (!opt.idealize) {
    for (int k : ks) {
      const std::uint64_t dk = payload_n >> k;  // kept dim for the split encoder
      required = std::max(required, total_n * dk * dk);
    }
  }
  check_cap(required, opt.cap);

  MergeConfig cfg;
  cfg.copies = opt.copies;
  cfg.trials = opt.trials;
  cfg.seed = opt.seed;
  cfg.idealize = opt.idealize;
  cfg.encoder = opt.encoder == "ancilla" ? EncoderKind::Ancilla : EncoderKind::Split;

  const bool csv = opt.output == "csv";
  if (csv)
    out << "copies,sent_qubits,trial,decoupling_error,uhlmann_fidelity,decoder_fidelity\n";
  else
    out << "[\n";
  bool first_row = true;
  for (int k : ks) {
    cfg.sent_qubits = k;
    const auto results = run_merge(loaded.state, cfg, opt.threads);
    for (int t = 0; t < static_cast<int>(results.size()); ++t) {
      const auto& r = results[static_cast<std::size_t>(t)];
      if (csv) {
        out << opt.copies << ',' << k << ',' << t << ',' << fmt17(r.decoupling_error)
            << ',' << fmt17(r.uhlmann_fidelity) << ',' << fmt17(r.decoder_fidelity)
            << "\n";
      } else {
        if (!first_row) out << ",\n";
        first_row = false;
        out << "  {\"copies\": " << opt.copies << ", \"sent_qubits\": " << k
            << ", \"trial\": " << t << ", \"decoupling_error\": "
            << fmt17(r.decoupling_error) << ", \"uhlmann_fidelity\": "
            << fmt17(r.uhlmann_fidelity) << ", \"decoder_fidelity\": "
            << fmt17(r.decoder_fidelity) << "}";
      }
    }
  }
  if (!csv) out << "\n]\n";
  return kOk;
}

int cmd_simulate_relay(const SimulateOptions& opt, std::ostream& out) {
  const LoadedState loaded = load_state_file(opt.state_path);
  RelayConfig cfg;
  cfg.copies = opt.copies;
  cfg.qubits_ac = opt.qubits_ac;
  cfg.qubits_cb = opt.qubits_cb;
  cfg.trials = opt.trials;
  cfg.seed = opt.seed;
  cfg.mode = opt.approximate ? RelayMode::Approximate : RelayMode::ExactStructured;

  std::vector<RelayResult> results;
  if (cfg.mode == RelayMode::ExactStructured) {
    if (!loaded.structured)
      throw std::invalid_argument(
          "exact mode needs a structured family state (phi_plus_pairs or "
          "basis_product); use --approximate for other states");
    const StructuredState spec = loaded.structured->replicated(opt.copies);
    int need = 0;
    std::uint64_t dim = 1, creations = 1;
    {
      SystemLayout lay(spec.registers);
      dim = static_cast<std::uint64_t>(lay.total_dim());
      for (const auto& p : spec.pairs) {
        const auto d = static_cast<std::uint64_t>(lay.dim_of(p.x));
        const bool xa = p.x.front() == 'A', ya = p.y.front() == 'A';
        if (xa && ya) creations *= d * d;
        else if (xa || ya) {
          const char other = xa ? p.y.front() : p.x.front();
          if (other == 'C') {
            need += static_cast<int>(std::llround(std::log2(static_cast<double>(d))));
            creations *= d * d;  // the pre-shared pair
          } else if (other == 'B') {
            creations *= d * d;
          }
        }
      }
      for (const auto& b : spec.basis)
        if (b.reg.front() == 'A') creations *= static_cast<std::uint64_t>(lay.dim_of(b.reg));
    }
    check_cap(dim * creations, opt.cap);
    cfg.preshared_cb_ebits = opt.preshared >= 0 ? opt.preshared : need;
    RelayConfig base = cfg;
    base.copies = 1;  // already replicated
    results = run_relay(spec, base, opt.threads);
  } else {
    std::uint64_t single = 1, payload = 1;
    for (const auto& r : loaded.state.layout().registers()) {
      single *= static_cast<std::uint64_t>(r.dim);
      if (r.name.front() == 'A') payload *= static_cast<std::uint64_t>(r.dim);
    }
    const std::uint64_t total_n = pow_u64(single, opt.copies);
    const std::uint64_t dk = pow_u64(payload, opt.copies) >> opt.qubits_ac;
    check_cap(total_n * dk * dk * dk * dk, opt.cap);
    cfg.preshared_cb_ebits =
        opt.preshared >= 0
            ? opt.preshared
            : static_cast<int>(std::llround(std::log2(static_cast<double>(dk))));
    results = run_relay(loaded.state, cfg, opt.threads);
  }

  const bool csv = opt.output == "csv";
  if (csv)
    out << "trial,fidelity_final,catalyst_deviation,qubits_ac,qubits_cb,"
           "ebits_consumed,ebits_produced\n";
  else
    out << "[\n";
  for (int t = 0; t < static_cast<int>(results.size()); ++t) {
    const auto& r = results[static_cast<std::size_t>(t)];
    const double q_ac = r.ledger.tally(TallyKind::Qubit, Party::Alice, Party::Charlie);
    const double q_cb = r.ledger.tally(TallyKind::Qubit, Party::Charlie, Party::Bob);
    double consumed = 0.0, produced = 0.0;
    for (const auto& [key, rate] : r.ledger.tallies) {
      if (key.kind != TallyKind::Ebit && key.kind != TallyKind::EbitRetained) continue;
      if (rate > 0) consumed += rate;
      else produced -= rate;
    }
    if (csv) {
      out << t << ',' << fmt17(r.fidelity_final) << ',' << fmt17(r.catalyst_deviation)
          << ',' << fmt17(q_ac) << ',' << fmt17(q_cb) << ',' << fmt17(consumed) << ','
          << fmt17(produced) << "\n";
    } else {
      out << "  {\"trial\": " << t << ", \"fidelity_final\": " << fmt17(r.fidelity_final)
          << ", \"catalyst_deviation\": " << fmt17(r.catalyst_deviation)
          << ", \"qubits_ac\": " << fmt17(q_ac) << ", \"qubits_cb\": " << fmt17(q_cb)
          << ", \"ebits_consumed\": " << fmt17(consumed)
          << ", \"ebits_produced\": " << fmt17(produced) << "}"
          << (t + 1 < static_cast<int>(results.size()) ? "," : "") << "\n";
    }
  }
  if (!csv) out << "]\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"entropic rates, resource ledgers and one-shot simulations for "
               "merging-based state redistribution"};
  app.require_subcommand(1);

  // rates
  auto* rates = app.add_subcommand("rates", "entropic rate table for a protocol");
  std::string rates_state, rates_protocol = "redistribution";
  bool rates_all = false;
  rates->add_option("--state", rates_state, "state file (JSON)")->required();
  rates->add_option("--protocol", rates_protocol,
                    "merging|coherent_merging|redistribution|splitting|relay|"
                    "partial_merge_repackaged|reverse_shannon_side_info");
  rates->add_flag("--all", rates_all, "emit every applicable protocol");

  // ledger
  auto* ledger = app.add_subcommand("ledger", "evaluate a protocol script");
  std::string ledger_script, ledger_state;
  ledger->add_option("--script", ledger_script, "protocol script file")->required();
  ledger->add_option("--state", ledger_state, "state file (JSON)")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "one-shot merge or relay simulation");
  SimulateOptions opt;
  sim->add_option("--state", opt.state_path, "state file (JSON)")->required();
  sim->add_option("--mode", opt.mode, "merge|relay")
      ->check(CLI::IsMember({"merge", "relay"}));
  sim->add_option("--copies", opt.copies, "number of copies n")->check(CLI::PositiveNumber);
  sim->add_option("--sent-qubits", opt.sent_qubits,
                  "qubits to send (int, lo..hi range, or comma list)");
  sim->add_option("--sent-qubits-ac", opt.qubits_ac, "relay: qubits alice -> charlie");
  sim->add_option("--sent-qubits-cb", opt.qubits_cb, "relay: qubits charlie -> bob");
  sim->add_option("--preshared-ebits", opt.preshared,
                  "relay: pre-shared charlie-bob ebits (default: what repackaging needs)");
  sim->add_option("--trials", opt.trials, "trials per configuration")
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", opt.seed, "random seed");
  sim->add_option("--encoder", opt.encoder, "split|ancilla")
      ->check(CLI::IsMember({"split", "ancilla"}));
  sim->add_flag("--idealize", opt.idealize,
                "skip the explicit decoder (report the Uhlmann optimum)");
  auto* exact_flag = sim->add_flag("--exact", opt.exact, "relay: exact structured mode");
  sim->add_flag("--approximate", opt.approximate, "relay: random-unitary mode")
      ->excludes(exact_flag);
  sim->add_option("--output", opt.output, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--max-amplitudes", opt.cap, "feasibility cap on any one state vector");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (rates->parsed()) return cmd_rates(rates_state, rates_protocol, rates_all, out);
    if (ledger->parsed()) return cmd_ledger(ledger_script, ledger_state, out);
    if (opt.mode == "relay") return cmd_simulate_relay(opt, out);
    return cmd_simulate_merge(opt, out);
  } catch (const FeasibilityError& e) {
    err << "error: " << e.what() << "\n";
    return kResourceError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace remerge::cli
