#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "procscore/classification.hpp"
#include "procscore/random.hpp"

namespace procscore::testing {

// Generative process for labeled commit histories: a first-order Markov
// chain over activities, class-conditional Gaussian features and log-normal
// sojourn times per class.
struct ChainProcess {
  std::array<std::array<double, 3>, 3> transition{};
  std::array<double, 3> lines_mean{};
  std::array<double, 3> lines_sd{};
  std::array<double, 3> density_mean{};
  std::array<double, 3> density_sd{};
  std::array<double, 3> log_sojourn_mean{};
  double log_sojourn_sd = 1.0;
};

struct SyntheticHistory {
  std::vector<CommitRecord> records;
  std::vector<Activity> labels;
  std::unordered_map<std::string, Activity> label_map;
};

inline SyntheticHistory generate_history(const ChainProcess& process, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticHistory h;
  std::size_t state = static_cast<std::size_t>(rng.uniform_int(0, 2));
  std::int64_t time = 1'500'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double u = rng.uniform();
      double acc = 0;
      std::size_t next = 2;
      for (std::size_t j = 0; j < 3; ++j) {
        acc += process.transition[state][j];
        if (u < acc) {
          next = j;
          break;
        }
      }
      state = next;
    }
    CommitRecord r;
    r.id = "s" + std::to_string(seed) + "-" + std::to_string(i);
    if (i > 0) {
      r.parent_ids = {h.records.back().id};
      const auto sojourn = static_cast<std::int64_t>(
          std::exp(process.log_sojourn_mean[state] + process.log_sojourn_sd * rng.normal()));
      r.sojourn_seconds = sojourn;
      time += sojourn;
    } else {
      r.is_initial = true;
    }
    r.author_timestamp = time;
    const auto lines = std::max<std::int64_t>(
        0, std::llround(process.lines_mean[state] + process.lines_sd[state] * rng.normal()));
    // Gross size is chosen so that net/gross lands near the drawn density.
    const double target = std::clamp(process.density_mean[state] + process.density_sd[state] * rng.normal(), 0.05, 1.0);
    r.lines_added_net = lines;
    r.lines_added_gross = lines > 0 ? std::max<std::int64_t>(lines, std::llround(static_cast<double>(lines) / target)) : 5;
    r.density = compute_density(r.gross_lines(), r.net_lines());
    const auto label = static_cast<Activity>(state);
    h.records.push_back(std::move(r));
    h.labels.push_back(label);
    h.label_map.emplace(h.records.back().id, label);
  }
  return h;
}

inline FeatureSchema synthetic_schema() { return FeatureSchema({"lines_added_net", "density"}); }

}  // namespace procscore::testing
