#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace procscore::detail {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs argv[0] (looked up on PATH) without a shell, feeding `input` to its
// stdin and capturing stdout and stderr.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input = {});

}  // namespace procscore::detail
