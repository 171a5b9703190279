#include "procscore/line_diff.hpp"

#include <string>
#include <unordered_map>

namespace procscore {
namespace {

// Myers' O(ND) bisection (forward and reverse searches meeting at a middle
// snake), recursing on both halves. Operates on interned line ids.
class Differ {
 public:
  Differ(const std::vector<int>& a, const std::vector<int>& b, LineDiff& out) : a_(a), b_(b), out_(out) {}

  void run(long a_lo, long a_hi, long b_lo, long b_hi) {
    while (a_lo < a_hi && b_lo < b_hi && a_[a_lo] == b_[b_lo]) {
      ++a_lo;
      ++b_lo;
    }
    while (a_lo < a_hi && b_lo < b_hi && a_[a_hi - 1] == b_[b_hi - 1]) {
      --a_hi;
      --b_hi;
    }
    if (a_lo == a_hi) {
      for (long j = b_lo; j < b_hi; ++j) out_.inserted[j] = true;
      return;
    }
    if (b_lo == b_hi) {
      for (long i = a_lo; i < a_hi; ++i) out_.removed[i] = true;
      return;
    }
    bisect(a_lo, a_hi, b_lo, b_hi);
  }

 private:
  void bisect(long a_lo, long a_hi, long b_lo, long b_hi) {
    const long n = a_hi - a_lo;
    const long m = b_hi - b_lo;
    const long max_d = (n + m + 1) / 2;
    const long offset = max_d;
    const long length = 2 * max_d + 2;
    std::vector<long> forward(static_cast<std::size_t>(length), -1);
    std::vector<long> reverse(static_cast<std::size_t>(length), -1);
    forward[offset + 1] = 0;
    reverse[offset + 1] = 0;
    const long delta = n - m;
    const bool front = (delta % 2) != 0;
    long k1_start = 0, k1_end = 0, k2_start = 0, k2_end = 0;
    const auto A = [&](long i) { return a_[a_lo + i]; };
    const auto B = [&](long j) { return b_[b_lo + j]; };

    for (long d = 0; d < max_d; ++d) {
      for (long k1 = -d + k1_start; k1 <= d - k1_end; k1 += 2) {
        const long k1_off = offset + k1;
        long x1 = (k1 == -d || (k1 != d && forward[k1_off - 1] < forward[k1_off + 1])) ? forward[k1_off + 1]
                                                                                      : forward[k1_off - 1] + 1;
        long y1 = x1 - k1;
        while (x1 < n && y1 < m && A(x1) == B(y1)) {
          ++x1;
          ++y1;
        }
        forward[k1_off] = x1;
        if (x1 > n) {
          k1_end += 2;
        } else if (y1 > m) {
          k1_start += 2;
        } else if (front) {
          const long k2_off = offset + delta - k1;
          if (k2_off >= 0 && k2_off < length && reverse[k2_off] != -1 && x1 >= n - reverse[k2_off]) {
            split(a_lo, a_hi, b_lo, b_hi, x1, y1);
            return;
          }
        }
      }
      for (long k2 = -d + k2_start; k2 <= d - k2_end; k2 += 2) {
        const long k2_off = offset + k2;
        long x2 = (k2 == -d || (k2 != d && reverse[k2_off - 1] < reverse[k2_off + 1])) ? reverse[k2_off + 1]
                                                                                      : reverse[k2_off - 1] + 1;
        long y2 = x2 - k2;
        while (x2 < n && y2 < m && A(n - x2 - 1) == B(m - y2 - 1)) {
          ++x2;
          ++y2;
        }
        reverse[k2_off] = x2;
        if (x2 > n) {
          k2_end += 2;
        } else if (y2 > m) {
          k2_start += 2;
        } else if (!front) {
          const long k1_off = offset + delta - k2;
          if (k1_off >= 0 && k1_off < length && forward[k1_off] != -1) {
            const long x1 = forward[k1_off];
            const long y1 = offset + x1 - k1_off;
            if (x1 >= n - x2) {
              split(a_lo, a_hi, b_lo, b_hi, x1, y1);
              return;
            }
          }
        }
      }
    }
    for (long i = a_lo; i < a_hi; ++i) out_.removed[i] = true;
    for (long j = b_lo; j < b_hi; ++j) out_.inserted[j] = true;
  }

  void split(long a_lo, long a_hi, long b_lo, long b_hi, long x, long y) {
    run(a_lo, a_lo + x, b_lo, b_lo + y);
    run(a_lo + x, a_hi, b_lo + y, b_hi);
  }

  const std::vector<int>& a_;
  const std::vector<int>& b_;
  LineDiff& out_;
};

}  // namespace

LineDiff diff_lines(const std::vector<std::string_view>& before, const std::vector<std::string_view>& after) {
  std::unordered_map<std::string_view, int> ids;
  const auto intern = [&](const std::vector<std::string_view>& lines) {
    std::vector<int> out;
    out.reserve(lines.size());
    for (auto line : lines) out.push_back(ids.emplace(line, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const auto a = intern(before);
  const auto b = intern(after);
  LineDiff out{std::vector<bool>(a.size(), false), std::vector<bool>(b.size(), false)};
  Differ(a, b, out).run(0, static_cast<long>(a.size()), 0, static_cast<long>(b.size()));
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

}  // namespace procscore
