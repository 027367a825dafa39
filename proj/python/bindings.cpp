// SPDX-License-Identifier: Apache-2.0
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "remerge/entropy.hpp"
#include "remerge/ledger.hpp"
#include "remerge/merge_sim.hpp"
#include "remerge/relay_sim.hpp"
#include "remerge/statefile.hpp"

namespace py = pybind11;
using namespace remerge;

namespace {

SystemLayout layout_from_list(const std::vector<std::pair<std::string, std::int64_t>>& regs) {
  std::vector<Register> rs;
  rs.reserve(regs.size());
  for (const auto& [name, dim] : regs) rs.push_back({name, dim});
  return SystemLayout(std::move(rs));
}

py::dict entry_dict(const RateEntry& e) {
  py::dict d;
  d["resource"] = to_string(e.resource);
  d["from"] = to_string(e.from);
  d["to"] = to_string(e.to);
  d["rate"] = e.rate;
  d["note"] = e.note;
  return d;
}

py::dict report_dict(const RateReport& rep) {
  py::dict d;
  d["protocol"] = to_string(rep.protocol);
  py::list entries;
  for (const auto& e : rep.entries) entries.append(entry_dict(e));
  d["entries"] = entries;
  return d;
}

py::dict ledger_dict(const ResourceLedger& ledger) {
  py::dict d;
  py::list tallies;
  for (const auto& [key, rate] : ledger.tallies) {
    py::dict t;
    t["resource"] = to_string(key.kind);
    t["from"] = to_string(key.from);
    t["to"] = to_string(key.to);
    t["rate"] = rate;
    tallies.append(t);
  }
  d["tallies"] = tallies;
  py::list trace;
  for (const auto& rec : ledger.trace) {
    py::dict r;
    r["step"] = rec.step;
    py::list deltas;
    for (const auto& del : rec.deltas) {
      py::dict x;
      x["resource"] = to_string(del.key.kind);
      x["from"] = to_string(del.key.from);
      x["to"] = to_string(del.key.to);
      x["rate"] = del.amount;
      x["note"] = del.note;
      deltas.append(x);
    }
    r["deltas"] = deltas;
    trace.append(r);
  }
  d["trace"] = trace;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "entropic rates, resource ledgers and one-shot simulations for "
            "merging-based state redistribution";

  py::class_<SystemLayout>(m, "SystemLayout")
      .def(py::init(&layout_from_list), py::arg("registers"))
      .def_property_readonly("total_dim", &SystemLayout::total_dim)
      .def("names", &SystemLayout::names)
      .def("dim_of", &SystemLayout::dim_of);

  py::class_<PureState>(m, "PureState")
      .def(py::init([](const std::vector<std::pair<std::string, std::int64_t>>& regs,
                       const Eigen::VectorXcd& amp) {
             return PureState(layout_from_list(regs), amp);
           }),
           py::arg("registers"), py::arg("amplitudes"))
      .def_property_readonly("layout", &PureState::layout)
      .def_property_readonly("amplitudes",
                             [](const PureState& s) { return s.amplitudes(); })
      .def_property_readonly("dim", &PureState::dim)
      .def("density", &PureState::density);

  py::class_<DensityOperator>(m, "DensityOperator")
      .def_property_readonly("layout", &DensityOperator::layout)
      .def_property_readonly("matrix",
                             [](const DensityOperator& r) { return r.matrix(); })
      .def_property_readonly("dim", &DensityOperator::dim);

  py::class_<Unitary>(m, "Unitary")
      .def(py::init<Eigen::MatrixXcd>(), py::arg("matrix"))
      .def_static("identity", &Unitary::identity)
      .def_property_readonly("dim", &Unitary::dim)
      .def_property_readonly("matrix", [](const Unitary& u) { return u.matrix(); });

  m.def("tensor",
        py::overload_cast<const PureState&, const PureState&>(&tensor));
  m.def("partial_trace",
        [](const PureState& psi, const std::vector<std::string>& keep) {
          return partial_trace(psi, keep);
        });
  m.def("purify", &purify, py::arg("rho"), py::arg("ancilla_name") = "E");
  m.def("fidelity",
        py::overload_cast<const DensityOperator&, const DensityOperator&>(&fidelity));
  m.def("state_fidelity",
        py::overload_cast<const PureState&, const PureState&>(&fidelity));
  m.def("trace_distance",
        py::overload_cast<const DensityOperator&, const DensityOperator&>(
            &trace_distance));
  m.def("maximally_entangled", &maximally_entangled, py::arg("dim"), py::arg("name_a"),
        py::arg("name_b"));
  m.def("ghz_state", &ghz_state, py::arg("parties") = 3, py::arg("local_dim") = 2);
  m.def("haar_unitary", [](std::int64_t dim, std::uint64_t seed) {
    RandomStream rng(seed);
    return haar_unitary(dim, rng);
  });
  m.def("random_pure_state",
        [](const std::vector<std::pair<std::string, std::int64_t>>& regs,
           std::uint64_t seed) {
          RandomStream rng(seed);
          return random_pure_state(layout_from_list(regs), rng);
        });
  m.def("von_neumann_entropy", &von_neumann_entropy);

  py::class_<EntropyContext>(m, "EntropyContext")
      .def_static("from_named", &EntropyContext::from_named)
      .def("entropy",
           [](const EntropyContext& c, const std::string& subset) {
             return c.entropy(parse_role_mask(subset));
           })
      .def("conditional_entropy",
           [](const EntropyContext& c, const std::string& x, const std::string& y) {
             return c.conditional_entropy(parse_role_mask(x), parse_role_mask(y));
           })
      .def("mutual_info",
           [](const EntropyContext& c, const std::string& x, const std::string& y) {
             return c.mutual_info(parse_role_mask(x), parse_role_mask(y));
           })
      .def("cond_mutual_info",
           [](const EntropyContext& c, const std::string& x, const std::string& y,
              const std::string& z) {
             return c.cond_mutual_info(parse_role_mask(x), parse_role_mask(y),
                                       parse_role_mask(z));
           })
      .def("ab_reduced", &EntropyContext::ab_reduced);

  m.def("merging_rates", [](const EntropyContext& c) { return report_dict(merging_rates(c)); });
  m.def("coherent_merging_rates",
        [](const EntropyContext& c) { return report_dict(coherent_merging_rates(c)); });
  m.def("redistribution_rates",
        [](const EntropyContext& c) { return report_dict(redistribution_rates(c)); });
  m.def("splitting_rates",
        [](const EntropyContext& c) { return report_dict(splitting_rates(c)); });
  m.def("relay_rates", [](const EntropyContext& c) { return report_dict(relay_rates(c)); });
  m.def("relay_quadruple", [](const EntropyContext& c) {
    const auto q = relay_quadruple(c);
    return py::make_tuple(q[0], q[1], q[2], q[3]);
  });
  m.def("partial_merge_cbits",
        [](const EntropyContext& c) { return report_dict(partial_merge_cbits(c)); });
  m.def("reverse_shannon_rates",
        [](const EntropyContext& c) { return report_dict(reverse_shannon_rates(c)); });

  m.def("evaluate_script", [](const std::string& text, const EntropyContext& ctx) {
    return ledger_dict(evaluate(parse_script(text), ctx));
  });
  m.def("print_script",
        [](const std::string& text) { return print_script(parse_script(text)); });
  m.def("derive_coherent_from_merging", [](const EntropyContext& ctx) {
    const auto rep = derive_coherent_from_merging(ctx);
    py::dict d;
    d["ledger"] = ledger_dict(rep.ledger);
    d["max_residual"] = rep.max_residual;
    return d;
  });
  m.def("derive_redistribution_from_mergings", [](const EntropyContext& ctx) {
    const auto rep = derive_redistribution_from_mergings(ctx);
    py::dict d;
    d["ledger"] = ledger_dict(rep.ledger);
    d["max_residual"] = rep.max_residual;
    return d;
  });

  m.def(
      "run_merge",
      [](const PureState& psi, int copies, int sent_qubits, int trials,
         std::uint64_t seed, const std::string& encoder, bool idealize, int threads) {
        MergeConfig cfg;
        cfg.copies = copies;
        cfg.sent_qubits = sent_qubits;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.idealize = idealize;
        cfg.encoder = encoder == "ancilla" ? EncoderKind::Ancilla : EncoderKind::Split;
        py::list rows;
        for (const auto& r : run_merge(psi, cfg, threads)) {
          py::dict d;
          d["decoupling_error"] = r.decoupling_error;
          d["uhlmann_fidelity"] = r.uhlmann_fidelity;
          d["decoder_fidelity"] = r.decoder_fidelity;
          d["qubits_sent"] = r.qubits_sent;
          d["ebits_out"] = r.ebits_out;
          rows.append(d);
        }
        return rows;
      },
      py::arg("psi"), py::arg("copies") = 1, py::arg("sent_qubits") = 0,
      py::arg("trials") = 1, py::arg("seed") = 0, py::arg("encoder") = "split",
      py::arg("idealize") = false, py::arg("threads") = 1);

  m.def(
      "run_relay_exact",
      [](const std::string& state_json, int copies, int qubits_ac, int qubits_cb,
         int preshared, int trials, std::uint64_t seed) {
        const LoadedState loaded = parse_state_text(state_json);
        if (!loaded.structured)
          throw std::invalid_argument("exact relay needs a structured family state");
        RelayConfig cfg;
        cfg.copies = copies;
        cfg.qubits_ac = qubits_ac;
        cfg.qubits_cb = qubits_cb;
        cfg.preshared_cb_ebits = preshared;
        cfg.trials = trials;
        cfg.seed = seed;
        py::list rows;
        for (const auto& r : run_relay(*loaded.structured, cfg)) {
          py::dict d;
          d["fidelity_final"] = r.fidelity_final;
          d["catalyst_deviation"] = r.catalyst_deviation;
          d["per_step_fidelities"] = py::make_tuple(r.per_step_fidelities[0],
                                                    r.per_step_fidelities[1],
                                                    r.per_step_fidelities[2]);
          d["ledger"] = ledger_dict(r.ledger);
          rows.append(d);
        }
        return rows;
      },
      py::arg("state_json"), py::arg("copies") = 1, py::arg("qubits_ac") = 0,
      py::arg("qubits_cb") = 0, py::arg("preshared") = 0, py::arg("trials") = 1,
      py::arg("seed") = 0);

  m.def("parse_state_text", [](const std::string& text) {
    return parse_state_text(text).state;
  });
  m.def("serialize_state", &serialize_state);
}
