// SPDX-License-Identifier: Apache-2.0
#include "remerge/layout.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace remerge {

SystemLayout::SystemLayout(std::vector<Register> registers)
    : registers_(std::move(registers)) {
  std::unordered_set<std::string> seen;
  for (const auto& r : registers_) {
    if (r.name.empty()) throw std::invalid_argument("register name must be non-empty");
    if (r.dim < 1) throw std::invalid_argument("register '" + r.name + "' has dim < 1");
    if (!seen.insert(r.name).second)
      throw std::invalid_argument("duplicate register name '" + r.name + "'");
  }
  total_dim_ = 1;
  for (const auto& r : registers_) {
    if (total_dim_ > std::numeric_limits<std::int64_t>::max() / r.dim)
      throw std::invalid_argument("layout dimension overflow");
    total_dim_ *= r.dim;
  }
  strides_.assign(registers_.size(), 1);
  for (std::size_t i = registers_.size(); i-- > 0;) {
    if (i + 1 < registers_.size())
      strides_[i] = strides_[i + 1] * registers_[i + 1].dim;
  }
}

bool SystemLayout::has(const std::string& name) const {
  return std::any_of(registers_.begin(), registers_.end(),
                     [&](const Register& r) { return r.name == name; });
}

std::size_t SystemLayout::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < registers_.size(); ++i)
    if (registers_[i].name == name) return i;
  throw std::invalid_argument("unknown register '" + name + "'");
}

std::int64_t SystemLayout::dim_of(const std::string& name) const {
  return registers_[index_of(name)].dim;
}

std::vector<std::string> SystemLayout::names() const {
  std::vector<std::string> out;
  out.reserve(registers_.size());
  for (const auto& r : registers_) out.push_back(r.name);
  return out;
}

std::vector<std::size_t> SystemLayout::positions_of(
    std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second)
      throw std::invalid_argument("register '" + n + "' listed twice");
    out.push_back(index_of(n));
  }
  return out;
}

SystemLayout SystemLayout::subset(std::span<const std::string> names) const {
  auto pos = positions_of(names);
  std::sort(pos.begin(), pos.end());
  std::vector<Register> regs;
  regs.reserve(pos.size());
  for (auto p : pos) regs.push_back(registers_[p]);
  return SystemLayout(std::move(regs));
}

SystemLayout SystemLayout::complement(std::span<const std::string> names) const {
  auto pos = positions_of(names);
  std::unordered_set<std::size_t> drop(pos.begin(), pos.end());
  std::vector<Register> regs;
  for (std::size_t i = 0; i < registers_.size(); ++i)
    if (!drop.count(i)) regs.push_back(registers_[i]);
  return SystemLayout(std::move(regs));
}

std::int64_t SystemLayout::dim_of_subset(std::span<const std::string> names) const {
  std::int64_t d = 1;
  for (auto p : positions_of(names)) d *= registers_[p].dim;
  return d;
}

SystemLayout SystemLayout::concat(const SystemLayout& other) const {
  std::vector<Register> regs = registers_;
  for (const auto& r : other.registers_) {
    if (has(r.name))
      throw std::invalid_argument("register name collision on '" + r.name + "'");
    regs.push_back(r);
  }
  return SystemLayout(std::move(regs));
}

std::int64_t SystemLayout::flat_index(std::span<const std::int64_t> values) const {
  if (values.size() != registers_.size())
    throw std::invalid_argument("value count does not match register count");
  std::int64_t idx = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0 || values[i] >= registers_[i].dim)
      throw std::out_of_range("value out of range for register '" +
                              registers_[i].name + "'");
    idx += values[i] * strides_[i];
  }
  return idx;
}

bool SystemLayout::operator==(const SystemLayout& other) const {
  if (registers_.size() != other.registers_.size()) return false;
  for (std::size_t i = 0; i < registers_.size(); ++i)
    if (registers_[i].name != other.registers_[i].name ||
        registers_[i].dim != other.registers_[i].dim)
      return false;
  return true;
}

}  // namespace remerge
