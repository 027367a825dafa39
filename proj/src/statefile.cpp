// SPDX-License-Identifier: Apache-2.0
#include "remerge/statefile.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace remerge {

namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

PureState assemble_with_fill(StructuredState& s) {
  // every role must be present for the rate calculators; fill with dim-1 registers
  std::string have;
  for (const auto& r : s.registers) have += r.name.front();
  for (char role : {'A', 'B', 'C', 'R'})
    if (have.find(role) == std::string::npos) {
      s.registers.push_back({std::string(1, role), 1});
      s.basis.push_back({std::string(1, role), 0});
    }
  return s.assemble();
}

LoadedState from_family(const json& fam) {
  const std::string name = fam.at("name").get<std::string>();
  const json params = fam.value("params", json::object());

  if (name == "ghz") {
    const int parties = params.value("parties", 3);
    const std::int64_t d = params.value("local_dim", std::int64_t{2});
    return {ghz_state(parties, d), std::nullopt};
  }

  if (name == "phi_plus_pairs") {
    if (!params.contains("pairs"))
      throw std::invalid_argument("phi_plus_pairs needs a 'pairs' list");
    const std::int64_t default_dim = params.value("dim", std::int64_t{2});
    StructuredState s;
    for (const auto& p : params.at("pairs")) {
      if (!p.is_array() || p.size() < 2)
        throw std::invalid_argument("each pair must be [name, name] or [name, name, dim]");
      const auto x = p.at(0).get<std::string>();
      const auto y = p.at(1).get<std::string>();
      const std::int64_t d = p.size() > 2 ? p.at(2).get<std::int64_t>() : default_dim;
      s.registers.push_back({x, d});
      s.registers.push_back({y, d});
      s.pairs.push_back({x, y});
    }
    PureState psi = assemble_with_fill(s);
    return {std::move(psi), std::move(s)};
  }

  if (name == "basis_product") {
    if (!params.contains("registers"))
      throw std::invalid_argument("basis_product needs a 'registers' list");
    StructuredState s;
    for (const auto& r : params.at("registers")) {
      const auto reg_name = r.at("name").get<std::string>();
      s.registers.push_back({reg_name, r.value("dim", std::int64_t{2})});
      s.basis.push_back({reg_name, r.value("value", std::int64_t{0})});
    }
    PureState psi = assemble_with_fill(s);
    return {std::move(psi), std::move(s)};
  }

  if (name == "random_pure") {
    if (!params.contains("dims"))
      throw std::invalid_argument("random_pure needs a 'dims' object");
    std::vector<Register> regs;
    for (const auto& [k, v] : params.at("dims").items())  // alphabetical key order
      regs.push_back({k, v.get<std::int64_t>()});
    const auto seed = params.value("seed", std::uint64_t{0});
    RandomStream rng(seed);
    return {random_pure_state(SystemLayout(std::move(regs)), rng), std::nullopt};
  }

  throw std::invalid_argument("unknown family '" + name + "'");
}

}  // namespace

LoadedState parse_state_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("state file is not valid JSON: ") + e.what());
  }
  try {
    if (j.contains("family")) return from_family(j.at("family"));
    if (!j.contains("registers") || !j.contains("amplitudes"))
      throw std::invalid_argument(
          "state file needs either 'family' or 'registers' + 'amplitudes'");
    std::vector<Register> regs;
    for (const auto& r : j.at("registers"))
      regs.push_back({r.at("name").get<std::string>(), r.at("dim").get<std::int64_t>()});
    SystemLayout layout(std::move(regs));
    const auto& amps = j.at("amplitudes");
    if (static_cast<std::int64_t>(amps.size()) != layout.total_dim())
      throw std::invalid_argument("amplitude count does not match register dimensions");
    Eigen::VectorXcd v(layout.total_dim());
    std::int64_t i = 0;
    for (const auto& a : amps) {
      if (!a.is_array() || a.size() != 2)
        throw std::invalid_argument("amplitudes must be [re, im] pairs");
      v[i++] = cxd(a.at(0).get<double>(), a.at(1).get<double>());
    }
    const double norm = v.norm();
    if (std::abs(norm - 1.0) > 1e-6)
      throw std::invalid_argument("state norm is " + fmt17(norm) +
                                  ", more than 1e-6 away from 1");
    v /= norm;
    return {PureState(std::move(layout), std::move(v)), std::nullopt};
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed state file: ") + e.what());
  }
}

LoadedState load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open state file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_state_text(ss.str());
}

std::string serialize_state(const PureState& psi) {
  std::string out = "{\n  \"registers\": [";
  const auto& regs = psi.layout().registers();
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (i) out += ", ";
    out += "{\"name\": \"" + regs[i].name + "\", \"dim\": " + std::to_string(regs[i].dim) + "}";
  }
  out += "],\n  \"amplitudes\": [\n";
  for (std::int64_t i = 0; i < psi.dim(); ++i) {
    const cxd a = psi.amplitudes()[i];
    out += "    [" + fmt17(a.real()) + ", " + fmt17(a.imag()) + "]";
    out += i + 1 < psi.dim() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_state_file(const PureState& psi, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write state file '" + path + "'");
  out << serialize_state(psi);
}

PureState ghz_state(int parties, std::int64_t local_dim) {
  if (parties < 2 || parties > 4)
    throw std::invalid_argument("ghz family supports 2 to 4 parties");
  if (local_dim < 2) throw std::invalid_argument("local_dim must be >= 2");
  static const char* span2[] = {"A", "B"};
  static const char* span3[] = {"A", "B", "R"};
  static const char* span4[] = {"A", "B", "C", "R"};
  const char** span = parties == 2 ? span2 : parties == 3 ? span3 : span4;

  std::vector<Register> regs;
  for (const char* role : {"A", "B", "C", "R"}) {
    bool spanned = false;
    for (int i = 0; i < parties; ++i)
      if (std::string(span[i]) == role) spanned = true;
    regs.push_back({role, spanned ? local_dim : 1});
  }
  SystemLayout layout(std::move(regs));
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(layout.total_dim());
  const double s = 1.0 / std::sqrt(static_cast<double>(local_dim));
  for (std::int64_t v = 0; v < local_dim; ++v) {
    std::vector<std::int64_t> values;
    for (const auto& r : layout.registers()) values.push_back(r.dim == 1 ? 0 : v);
    amp[layout.flat_index(values)] = s;
  }
  return PureState(std::move(layout), std::move(amp));
}

}  // namespace remerge
