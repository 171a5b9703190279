#pragma once

#include <string_view>
#include <vector>

namespace procscore {

// Marks which lines of `before` are removed and which lines of `after` are
// inserted by a shortest edit script (equivalently, a longest common
// subsequence). A modified line shows up as one removal plus one insertion.
struct LineDiff {
  std::vector<bool> removed;
  std::vector<bool> inserted;
};

LineDiff diff_lines(const std::vector<std::string_view>& before, const std::vector<std::string_view>& after);

// Splits on '\n'; a trailing newline does not start an extra line and a
// trailing '\r' is dropped from each line.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace procscore
