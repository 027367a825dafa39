// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace remerge {

struct Register {
  std::string name;
  std::int64_t dim = 1;
};

/// Ordered, named registers with local dimensions.
///
/// The register order is fixed at construction and defines the row-major
/// indexing contract: the first register is the slowest-varying index.
/// Names are unique; dims are >= 1 (dim-1 registers model null systems).
class SystemLayout {
 public:
  SystemLayout() = default;
  explicit SystemLayout(std::vector<Register> registers);

  std::size_t size() const { return registers_.size(); }
  bool empty() const { return registers_.empty(); }
  const Register& reg(std::size_t i) const { return registers_[i]; }
  const std::vector<Register>& registers() const { return registers_; }
  std::int64_t total_dim() const { return total_dim_; }

  bool has(const std::string& name) const;
  /// Position of a register; throws std::invalid_argument for unknown names.
  std::size_t index_of(const std::string& name) const;
  std::int64_t dim_of(const std::string& name) const;

  /// Row-major stride of register i (product of dims of later registers).
  std::int64_t stride(std::size_t i) const { return strides_[i]; }

  std::vector<std::string> names() const;

  /// Positions of the given registers, ordered as given (duplicates rejected).
  std::vector<std::size_t> positions_of(std::span<const std::string> names) const;

  /// The given registers in their original layout order.
  SystemLayout subset(std::span<const std::string> names) const;
  /// All registers not named, in original order.
  SystemLayout complement(std::span<const std::string> names) const;
  /// Product of dims over the given registers.
  std::int64_t dim_of_subset(std::span<const std::string> names) const;

  /// Concatenation; register names must stay unique.
  SystemLayout concat(const SystemLayout& other) const;

  /// Flat index of a joint value assignment (row-major).
  std::int64_t flat_index(std::span<const std::int64_t> values) const;

  bool operator==(const SystemLayout& other) const;

 private:
  std::vector<Register> registers_;
  std::vector<std::int64_t> strides_;
  std::int64_t total_dim_ = 1;
};

}  // namespace remerge
