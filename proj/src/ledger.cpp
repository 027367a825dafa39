// SPDX-License-Identifier: Apache-2.0
#include "remerge/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace remerge {

double evaluate(const RateExpr& expr, const EntropyContext& ctx) {
  double value = 0.0;
  for (const auto& t : expr.terms) {
    double q;
    if (t.quantity.kind == 'S') {
      q = t.quantity.cond
              ? ctx.conditional_entropy(t.quantity.arg1, t.quantity.cond)
              : ctx.entropy(t.quantity.arg1);
    } else {
      q = t.quantity.cond
              ? ctx.cond_mutual_info(t.quantity.arg1, t.quantity.arg2, t.quantity.cond)
              : ctx.mutual_info(t.quantity.arg1, t.quantity.arg2);
    }
    value += t.sign * (t.half ? 0.5 : 1.0) * q;
  }
  return value;
}

// ---- lexer ----

namespace {

enum class TokKind { Word, Arrow, Half, Plus, Minus, LParen, RParen, Bar, Colon,
                     Subset, Quant, String };

struct Token {
  TokKind kind;
  std::string text;
  int column;  // 1-based
};

std::vector<Token> lex_line(const std::string& line, int line_no) {
  std::vector<Token> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const int col = static_cast<int>(i) + 1;
    if (c == ' ' || c == '\t' || c == '\r') { ++i; continue; }
    if (c == '#') break;
    if (c == '"') {
      const auto end = line.find('"', i + 1);
      if (end == std::string::npos)
        throw ParseError("unterminated string", line_no, col);
      toks.push_back({TokKind::String, line.substr(i + 1, end - i - 1), col});
      i = end + 1;
      continue;
    }
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      toks.push_back({TokKind::Arrow, "->", col});
      i += 2;
      continue;
    }
    if (c == '1' && line.compare(i, 3, "1/2") == 0) {
      toks.push_back({TokKind::Half, "1/2", col});
      i += 3;
      continue;
    }
    if (c == '+') { toks.push_back({TokKind::Plus, "+", col}); ++i; continue; }
    if (c == '-') { toks.push_back({TokKind::Minus, "-", col}); ++i; continue; }
    if (c == '(') { toks.push_back({TokKind::LParen, "(", col}); ++i; continue; }
    if (c == ')') { toks.push_back({TokKind::RParen, ")", col}); ++i; continue; }
    if (c == '|') { toks.push_back({TokKind::Bar, "|", col}); ++i; continue; }
    if (c == ':') { toks.push_back({TokKind::Colon, ":", col}); ++i; continue; }
    if (c >= 'A' && c <= 'Z') {
      std::size_t j = i;
      while (j < line.size() && line[j] >= 'A' && line[j] <= 'Z') ++j;
      std::string run = line.substr(i, j - i);
      if (run == "S" || run == "I") {
        toks.push_back({TokKind::Quant, run, col});
      } else {
        for (std::size_t k = 0; k < run.size(); ++k)
          if (run[k] != 'A' && run[k] != 'B' && run[k] != 'C' && run[k] != 'R')
            throw ParseError(std::string("invalid subset character '") + run[k] + "'",
                             line_no, col + static_cast<int>(k));
        toks.push_back({TokKind::Subset, run, col});
      }
      i = j;
      continue;
    }
    if ((c >= 'a' && c <= 'z') || c == '_') {
      std::size_t j = i;
      while (j < line.size() && ((line[j] >= 'a' && line[j] <= 'z') || line[j] == '_'))
        ++j;
      toks.push_back({TokKind::Word, line.substr(i, j - i), col});
      i = j;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_no, col);
  }
  return toks;
}

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line_no, int line_len)
      : toks_(std::move(toks)), line_(line_no), end_col_(line_len + 1) {}

  bool done() const { return pos_ >= toks_.size(); }

  Step parse_step() {
    const Token& head = expect(TokKind::Word, "step keyword");
    Step step = [&]() -> Step {
      if (head.text == "merge") return MergeStep{party(), (arrow(), party())};
      if (head.text == "coherent_merge")
        return CoherentMergeStep{party(), (arrow(), party())};
      if (head.text == "superdense") return SuperdenseStep{party(), (arrow(), party())};
      if (head.text == "coherent_measurement") return CoherentMeasurementStep{party()};
      if (head.text == "repackage") {
        Party p = party();
        const Token& w = expect(TokKind::Word, "'with'");
        if (w.text != "with") throw ParseError("expected 'with'", line_, w.column);
        return RepackageStep{p, party()};
      }
      if (head.text == "send_qubits") {
        Party s = party();
        arrow();
        Party d = party();
        return SendQubitsStep{s, d, rate_expr()};
      }
      if (head.text == "relabel")
        return RelabelStep{expect(TokKind::String, "quoted note").text};
      throw ParseError("unknown keyword '" + head.text + "'", line_, head.column);
    }();
    if (!done())
      throw ParseError("unexpected trailing input '" + toks_[pos_].text + "'", line_,
                       toks_[pos_].column);
    return step;
  }

 private:
  const Token& expect(TokKind kind, const std::string& what) {
    if (done()) throw ParseError("expected " + what, line_, end_col_);
    const Token& t = toks_[pos_];
    if (t.kind != kind) throw ParseError("expected " + what, line_, t.column);
    ++pos_;
    return t;
  }

  void arrow() { expect(TokKind::Arrow, "'->'"); }

  Party party() {
    const Token& t = expect(TokKind::Word, "party");
    if (t.text == "alice") return Party::Alice;
    if (t.text == "charlie") return Party::Charlie;
    if (t.text == "bob") return Party::Bob;
    throw ParseError("unknown party '" + t.text + "'", line_, t.column);
  }

  RateQuantity quantity() {
    const Token& q = expect(TokKind::Quant, "S(...) or I(...)");
    RateQuantity out;
    out.kind = q.text[0];
    expect(TokKind::LParen, "'('");
    out.arg1 = parse_role_mask(expect(TokKind::Subset, "subset").text);
    if (out.kind == 'I') {
      expect(TokKind::Colon, "':'");
      out.arg2 = parse_role_mask(expect(TokKind::Subset, "subset").text);
    }
    if (!done() && toks_[pos_].kind == TokKind::Bar) {
      ++pos_;
      out.cond = parse_role_mask(expect(TokKind::Subset, "subset").text);
    }
    expect(TokKind::RParen, "')'");
    return out;
  }

  RateTerm term(int sign) {
    RateTerm t;
    t.sign = sign;
    if (!done() && toks_[pos_].kind == TokKind::Half) {
      t.half = true;
      ++pos_;
    }
    t.quantity = quantity();
    return t;
  }

  RateExpr rate_expr() {
    RateExpr expr;
    expr.terms.push_back(term(+1));
    while (!done() &&
           (toks_[pos_].kind == TokKind::Plus || toks_[pos_].kind == TokKind::Minus)) {
      const int sign = toks_[pos_].kind == TokKind::Plus ? +1 : -1;
      ++pos_;
      expr.terms.push_back(term(sign));
    }
    return expr;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
  int end_col_;
};

}  // namespace

ProtocolScript parse_script(const std::string& text) {
  ProtocolScript script;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = lex_line(line, line_no);
    if (toks.empty()) continue;  // blank or comment-only line
    LineParser p(std::move(toks), line_no, static_cast<int>(line.size()));
    script.steps.push_back(p.parse_step());
  }
  return script;
}

namespace {

std::string print_quantity(const RateQuantity& q) {
  std::string s(1, q.kind);
  s += '(';
  s += role_mask_to_string(q.arg1);
  if (q.kind == 'I') {
    s += ':';
    s += role_mask_to_string(q.arg2);
  }
  if (q.cond) {
    s += '|';
    s += role_mask_to_string(q.cond);
  }
  s += ')';
  return s;
}

std::string print_expr(const RateExpr& expr) {
  std::string s;
  for (std::size_t i = 0; i < expr.terms.size(); ++i) {
    const auto& t = expr.terms[i];
    if (i > 0) s += t.sign > 0 ? " + " : " - ";
    if (t.half) s += "1/2 ";
    s += print_quantity(t.quantity);
  }
  return s;
}

}  // namespace

std::string print_step(const Step& step) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MergeStep>)
          return "merge " + to_string(s.src) + " -> " + to_string(s.dst);
        else if constexpr (std::is_same_v<T, CoherentMergeStep>)
          return "coherent_merge " + to_string(s.src) + " -> " + to_string(s.dst);
        else if constexpr (std::is_same_v<T, SuperdenseStep>)
          return "superdense " + to_string(s.src) + " -> " + to_string(s.dst);
        else if constexpr (std::is_same_v<T, CoherentMeasurementStep>)
          return "coherent_measurement " + to_string(s.party);
        else if constexpr (std::is_same_v<T, RepackageStep>)
          return "repackage " + to_string(s.party) + " with " + to_string(s.with);
        else if constexpr (std::is_same_v<T, SendQubitsStep>)
          return "send_qubits " + to_string(s.src) + " -> " + to_string(s.dst) + " " +
                 print_expr(s.expr);
        else
          return "relabel \"" + s.note + "\"";
      },
      step);
}

std::string print_script(const ProtocolScript& script) {
  std::string out;
  for (const auto& s : script.steps) {
    out += print_step(s);
    out += '\n';
  }
  return out;
}

// ---- ledger ----

std::string to_string(TallyKind k) {
  switch (k) {
    case TallyKind::Qubit: return "qubit";
    case TallyKind::Ebit: return "ebit";
    case TallyKind::Cbit: return "cbit";
    case TallyKind::EbitRetained: return "ebit_retained";
  }
  return "?";
}

double ResourceLedger::tally(TallyKind kind, Party from, Party to) const {
  const auto it = tallies.find(TallyKey{kind, from, to});
  return it == tallies.end() ? 0.0 : it->second;
}

void ResourceLedger::apply(TraceRecord record) {
  for (const auto& d : record.deltas) tallies[d.key] += d.amount;
  trace.push_back(std::move(record));
}

void ResourceLedger::merge_from(const ResourceLedger& other) {
  for (const auto& [k, v] : other.tallies) tallies[k] += v;
  trace.insert(trace.end(), other.trace.begin(), other.trace.end());
}

namespace {

RoleMask payload_mask() { return kMaskA; }

RoleMask side_system(Party p) {
  switch (p) {
    case Party::Bob: return kMaskB;
    case Party::Charlie: return kMaskC;
    case Party::Alice:
      throw std::invalid_argument("the payload cannot be merged toward alice");
  }
  return 0;
}

RoleMask environment_of(Party receiver) {
  return (kMaskA | kMaskB | kMaskC | kMaskR) & ~payload_mask() & ~side_system(receiver);
}

}  // namespace

TraceRecord Evaluator::eval_step(const Step& step) {
  TraceRecord rec{print_step(step), {}};
  const EntropyContext& ctx = *ctx_;

  if (const auto* s = std::get_if<MergeStep>(&step)) {
    const double e = ctx.conditional_entropy(payload_mask(), side_system(s->dst));
    const double c = ctx.mutual_info(payload_mask(), environment_of(s->dst));
    rec.deltas.push_back({{TallyKind::Ebit, s->src, s->dst}, e,
                          "ebits consumed by merging (negative: produced)"});
    rec.deltas.push_back({{TallyKind::Cbit, s->src, s->dst}, c, "measurement record sent"});
    pending_cbits_.push_back({s->src, s->dst, c});
  } else if (const auto* s = std::get_if<CoherentMergeStep>(&step)) {
    const double naive = 0.5 * ctx.mutual_info(payload_mask(), environment_of(s->dst));
    double use = 0.0;
    if (auto it = credit_.find(s->dst); it != credit_.end()) {
      use = std::min(it->second, naive);
      it->second -= use;
    }
    const double gain = 0.5 * ctx.mutual_info(payload_mask(), side_system(s->dst));
    rec.deltas.push_back({{TallyKind::Qubit, s->src, s->dst}, naive - use,
                          use > 0.0 ? "qubits sent (after repackaging credit)"
                                    : "qubits sent"});
    rec.deltas.push_back({{TallyKind::Ebit, s->src, s->dst}, -gain, "ebits produced"});
    produced_ebits_.push_back({s->src, s->dst, gain});
  } else if (const auto* s = std::get_if<SuperdenseStep>(&step)) {
    auto it = std::find_if(pending_cbits_.rbegin(), pending_cbits_.rend(),
                           [&](const Line& l) { return l.from == s->src && l.to == s->dst; });
    if (it == pending_cbits_.rend())
      throw std::invalid_argument("superdense with no pending cbit line from " +
                                  to_string(s->src) + " to " + to_string(s->dst));
    const double r = it->rate;
    pending_cbits_.erase(std::next(it).base());
    rec.deltas.push_back({{TallyKind::Cbit, s->src, s->dst}, -r,
                          "classical line sent through the quantum channel"});
    rec.deltas.push_back({{TallyKind::Qubit, s->src, s->dst}, 0.5 * r, "qubits sent"});
    rec.deltas.push_back({{TallyKind::Ebit, s->src, s->dst}, 0.5 * r,
                          "superdense coding ebits consumed"});
    converted_cbits_.push_back({s->src, s->dst, r});
  } else if (const auto* s = std::get_if<CoherentMeasurementStep>(&step)) {
    auto find_in = [&](std::vector<Line>& lines) {
      return std::find_if(lines.rbegin(), lines.rend(),
                          [&](const Line& l) { return l.from == s->party; });
    };
    std::vector<Line>* src = &converted_cbits_;
    auto it = find_in(*src);
    if (it == src->rend()) {
      src = &pending_cbits_;
      it = find_in(*src);
      if (it == src->rend())
        throw std::invalid_argument("coherent_measurement with no classical line at " +
                                    to_string(s->party));
    }
    // The record is held twice, |x>|x>; sharing one half leaves ebits at the
    // full classical rate (half of the doubled record).
    const Line line = *it;
    src->erase(std::next(it).base());
    rec.deltas.push_back({{TallyKind::Ebit, line.from, line.to}, -line.rate,
                          "measurement record |x>|x> left as shared entanglement"});
  } else if (const auto* s = std::get_if<RepackageStep>(&step)) {
    auto it = std::find_if(produced_ebits_.rbegin(), produced_ebits_.rend(),
                           [&](const Line& l) {
                             return l.from == s->party || l.to == s->party;
                           });
    if (it == produced_ebits_.rend())
      throw std::invalid_argument("repackage with no prior produced-ebit line involving " +
                                  to_string(s->party));
    const Line line = *it;
    produced_ebits_.erase(std::next(it).base());
    rec.deltas.push_back({{TallyKind::Ebit, s->party, s->with}, line.rate,
                          "pre-shared ebits consumed by the swap"});
    rec.deltas.push_back({{TallyKind::Ebit, line.from, line.to}, line.rate,
                          "generated ebits reclassified"});
    rec.deltas.push_back({{TallyKind::EbitRetained, line.from, line.to}, -line.rate,
                          "set aside as retained output"});
    credit_[s->with] += line.rate;
  } else if (const auto* s = std::get_if<SendQubitsStep>(&step)) {
    rec.deltas.push_back({{TallyKind::Qubit, s->src, s->dst}, evaluate(s->expr, ctx),
                          "qubits sent"});
  } else if (const auto* s = std::get_if<RelabelStep>(&step)) {
    (void)s;  // bookkeeping note only, no resource flow
  }
  return rec;
}

ResourceLedger Evaluator::run(const ProtocolScript& script) {
  ResourceLedger ledger;
  for (const auto& step : script.steps) ledger.apply(eval_step(step));
  return ledger;
}

ResourceLedger evaluate(const ProtocolScript& script, const EntropyContext& ctx) {
  Evaluator ev(ctx);
  return ev.run(script);
}

// ---- derivations ----

ProtocolScript relay_script() {
  return parse_script(
      "coherent_merge alice -> charlie\n"
      "repackage charlie with bob\n"
      "coherent_merge charlie -> bob\n");
}

ProtocolScript coherent_from_merging_script() {
  return parse_script(
      "merge alice -> bob\n"
      "superdense alice -> bob\n"
      "coherent_measurement alice\n");
}

DerivationReport derive_coherent_from_merging(const EntropyContext& ctx) {
  DerivationReport rep;
  rep.ledger = evaluate(coherent_from_merging_script(), ctx);
  rep.target = coherent_merging_rates(ctx);
  const double q = rep.ledger.tally(TallyKind::Qubit, Party::Alice, Party::Bob);
  const double e = rep.ledger.tally(TallyKind::Ebit, Party::Alice, Party::Bob);
  const double c = rep.ledger.tally(TallyKind::Cbit, Party::Alice, Party::Bob);
  rep.residuals = {
      {"qubits", std::abs(q - rep.target.total(Resource::QubitChannel, Party::Alice,
                                               Party::Bob))},
      {"ebits", std::abs(e - rep.target.total(Resource::Ebit, Party::Alice, Party::Bob))},
      {"cbits", std::abs(c)},
  };
  for (const auto& [name, r] : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);
  return rep;
}

std::array<double, 4> ledger_relay_quadruple(const ResourceLedger& ledger) {
  return {
      ledger.tally(TallyKind::Qubit, Party::Alice, Party::Charlie),
      -(ledger.tally(TallyKind::Ebit, Party::Alice, Party::Charlie) +
        ledger.tally(TallyKind::EbitRetained, Party::Alice, Party::Charlie)),
      ledger.tally(TallyKind::Qubit, Party::Charlie, Party::Bob),
      ledger.tally(TallyKind::Ebit, Party::Charlie, Party::Bob),
  };
}

DerivationReport derive_redistribution_from_mergings(const EntropyContext& ctx) {
  DerivationReport rep;
  rep.ledger = evaluate(relay_script(), ctx);
  rep.target = relay_rates(ctx);
  const auto got = ledger_relay_quadruple(rep.ledger);
  const auto want = relay_quadruple(ctx);
  static const char* names[4] = {"qubits_ac", "ebits_ac", "qubits_cb", "ebits_cb"};
  for (int i = 0; i < 4; ++i)
    rep.residuals.emplace_back(names[i], std::abs(got[i] - want[i]));
  const double q_redist =
      redistribution_rates(ctx).total(Resource::QubitChannel, Party::Alice, Party::Bob);
  rep.residuals.emplace_back("qubits_cb_vs_redistribution", std::abs(got[2] - q_redist));
  for (const auto& [name, r] : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);
  return rep;
}

}  // namespace remerge
