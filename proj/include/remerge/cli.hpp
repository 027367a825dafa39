// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace remerge::cli {

/// Exit codes: 0 success, 2 input error, 3 resource/feasibility error.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;
inline constexpr int kResourceError = 3;

/// Run the command line (argv without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace remerge::cli
