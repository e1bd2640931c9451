#pragma once

#include "dlneb/trainer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dlneb::cli {

// Exit codes: 0 pass, 1 fail (including assumption refusals and divergence), 2 usage or config error.
enum ExitCode { kPass = 0, kFail = 1, kUsage = 2 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Qualitative checks on a section-4 table: optimal-centre runs converge linearly
// (rate < 1, R^2 >= 0.98); suboptimal-centre runs stay within 1e-3 of the saddle
// value for L >= 4 and end within 1e-2 of the global value for L = 2.
struct Section4Check {
    bool pass = true;
    std::vector<std::string> failures;
};
Section4Check assess_section4(const std::vector<Section4Row>& rows);

} // namespace dlneb::cli
