// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace remerge {

/// Protocol-script parse failure with a source position (1-based).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A requested computation exceeds the configured resource cap.
class FeasibilityError : public std::runtime_error {
 public:
  FeasibilityError(std::string msg, std::uint64_t required_amplitudes,
                   std::uint64_t cap)
      : std::runtime_error(std::move(msg)),
        required_amplitudes_(required_amplitudes),
        cap_(cap) {}

  std::uint64_t required_amplitudes() const noexcept { return required_amplitudes_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t required_amplitudes_;
  std::uint64_t cap_;
};

}  // namespace remerge
