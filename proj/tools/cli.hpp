#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fblcap::cli {

enum ExitCode : int {
  kOk = 0,
  kArgumentError = 2,
  kDomainError = 3,
  kIoError = 4,
};

/// Runs the experiment CLI. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fblcap::cli
