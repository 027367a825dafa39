// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "remerge/entropy.hpp"
#include "remerge/errors.hpp"

namespace remerge {

// ---- protocol-script AST ----

/// One entropic quantity: S(arg1), S(arg1|cond), I(arg1:arg2) or
/// I(arg1:arg2|cond); cond == 0 means unconditioned.
struct RateQuantity {
  char kind = 'S';  // 'S' or 'I'
  RoleMask arg1 = 0;
  RoleMask arg2 = 0;
  RoleMask cond = 0;
};

struct RateTerm {
  int sign = +1;  // the first term of an expression is always +1
  bool half = false;
  RateQuantity quantity;
};

struct RateExpr {
  std::vector<RateTerm> terms;
};

double evaluate(const RateExpr& expr, const EntropyContext& ctx);

struct MergeStep { Party src; Party dst; };
struct CoherentMergeStep { Party src; Party dst; };
struct SuperdenseStep { Party src; Party dst; };
struct CoherentMeasurementStep { Party party; };
struct RepackageStep { Party party; Party with; };
struct SendQubitsStep { Party src; Party dst; RateExpr expr; };
struct RelabelStep { std::string note; };

using Step = std::variant<MergeStep, CoherentMergeStep, SuperdenseStep,
                          CoherentMeasurementStep, RepackageStep, SendQubitsStep,
                          RelabelStep>;

struct ProtocolScript {
  std::vector<Step> steps;
};

/// Parse the script grammar; throws ParseError with line/column on failure.
ProtocolScript parse_script(const std::string& text);

/// Canonical text form; parse_script(print_script(s)) is structurally s.
std::string print_script(const ProtocolScript& script);
std::string print_step(const Step& step);

// ---- resource accounting ----

enum class TallyKind { Qubit, Ebit, Cbit, EbitRetained };
std::string to_string(TallyKind k);

struct TallyKey {
  TallyKind kind;
  Party from;
  Party to;
  auto operator<=>(const TallyKey&) const = default;
};

struct Delta {
  TallyKey key;
  double amount;
  std::string note;
};

struct TraceRecord {
  std::string step;
  std::vector<Delta> deltas;
};

/// Signed rate tallies per (resource kind, directed pair) plus the ordered
/// step trace; tallies always equal the sum of trace deltas.
struct ResourceLedger {
  std::map<TallyKey, double> tallies;
  std::vector<TraceRecord> trace;

  double tally(TallyKind kind, Party from, Party to) const;
  void apply(TraceRecord record);
  /// Concatenate traces and sum tallies.
  void merge_from(const ResourceLedger& other);
};

/// Evaluates scripts against one context. Protocol state (pending classical
/// lines, produced ebit lines, repackaging credits) persists across run()
/// calls so a script can be fed in pieces.
class Evaluator {
 public:
  explicit Evaluator(const EntropyContext& ctx) : ctx_(&ctx) {}

  /// Evaluate the steps; returns the ledger contribution of this call.
  ResourceLedger run(const ProtocolScript& script);

 private:
  struct Line {
    Party from;
    Party to;
    double rate;
  };

  TraceRecord eval_step(const Step& step);

  const EntropyContext* ctx_;
  std::vector<Line> pending_cbits_;
  std::vector<Line> converted_cbits_;
  std::vector<Line> produced_ebits_;
  std::map<Party, double> credit_;
};

ResourceLedger evaluate(const ProtocolScript& script, const EntropyContext& ctx);

// ---- derivation checks ----

struct DerivationReport {
  ResourceLedger ledger;
  RateReport target;
  std::vector<std::pair<std::string, double>> residuals;
  double max_residual = 0.0;
};

/// The bundled three-step relay script (merge to the middle party, repackage,
/// merge on) and the plain-merging composition behind coherent merging.
ProtocolScript relay_script();
ProtocolScript coherent_from_merging_script();

/// Evaluate [merge; superdense; coherent_measurement] and compare the net
/// flows with coherent_merging_rates. Requires a null C.
DerivationReport derive_coherent_from_merging(const EntropyContext& ctx);

/// Evaluate the relay script and compare with relay_rates entry by entry;
/// also checks the Charlie->Bob qubit total against redistribution_rates.
DerivationReport derive_redistribution_from_mergings(const EntropyContext& ctx);

/// The four relay magnitudes as realized by a ledger:
/// (qubits a->c, ebits produced a-c incl. retained, qubits c->b, net ebits c-b).
std::array<double, 4> ledger_relay_quadruple(const ResourceLedger& ledger);

}  // namespace remerge
