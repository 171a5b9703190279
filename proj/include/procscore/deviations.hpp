#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "procscore/activity_curve.hpp"
#include "procscore/error.hpp"
#include "procscore/stats.hpp"

namespace procscore {

enum class DeviationKind { SegmentCorrelation, SegmentJsd, SegmentArea };

std::string_view to_string(DeviationKind kind);
// Accepts "corr", "jsd", "area" and the full enumerator names.
DeviationKind parse_deviation_kind(std::string_view text);

inline constexpr int kDefaultSegmentGrid = 256;

// Pearson sample correlation; 0 when either vector is (numerically) constant.
template <typename A, typename B>
typename A::Scalar pearson(const Eigen::DenseBase<A>& x, const Eigen::DenseBase<B>& y) {
  using S = typename A::Scalar;
  require(x.size() == y.size(), ErrorKind::LengthMismatch, "pearson needs equal lengths");
  require(x.size() >= 2, ErrorKind::InvalidGrid, "pearson needs at least two points");
  const auto n = static_cast<S>(x.size());
  const auto dx = (x.derived().array() - x.derived().mean()).eval();
  const auto dy = (y.derived().array() - y.derived().mean()).eval();
  const S sxx = dx.square().sum();
  const S syy = dy.square().sum();
  const auto negligible = [n](S ss, S scale) {
    const S tol = S(1e-12) * std::max(S(1), scale);
    return ss <= n * tol * tol;
  };
  if (negligible(sxx, x.derived().cwiseAbs().maxCoeff()) || negligible(syy, y.derived().cwiseAbs().maxCoeff()))
    return S(0);
  return std::clamp((dx * dy).sum() / std::sqrt(sxx * syy), S(-1), S(1));
}

// Jensen-Shannon divergence (natural log) of the two nonnegative vectors after
// normalizing each to sum to one. Throws ZeroMassSegment if either sums to 0.
template <typename A, typename B>
typename A::Scalar jensen_shannon(const Eigen::DenseBase<A>& p_raw, const Eigen::DenseBase<B>& q_raw) {
  using S = typename A::Scalar;
  require(p_raw.size() == q_raw.size(), ErrorKind::LengthMismatch, "jensen_shannon needs equal lengths");
  const S sp = p_raw.derived().sum();
  const S sq = q_raw.derived().sum();
  require(sp > S(0) && sq > S(0), ErrorKind::ZeroMassSegment, "curve has no mass on the segment");
  S total = 0;
  for (Eigen::Index i = 0; i < p_raw.size(); ++i) {
    const S p = p_raw.derived()(i) / sp;
    const S q = q_raw.derived()(i) / sq;
    const S m = (p + q) / S(2);
    // Summed as one term so swapping p and q rounds identically.
    const S tp = p > S(0) ? p * std::log(p / m) : S(0);
    const S tq = q > S(0) ? q * std::log(q / m) : S(0);
    total += tp + tq;
  }
  return std::clamp(total / S(2), S(0), S(constants::ln2));
}

inline double neg_log_jsd(double divergence) { return -std::log(std::max(divergence, 1e-300)); }

// Trapezoidal integral of |a - b| over equispaced samples `step` apart.
template <typename A, typename B>
typename A::Scalar trapezoid_abs_area(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b,
                                      typename A::Scalar step) {
  require(a.size() == b.size() && a.size() >= 2, ErrorKind::LengthMismatch, "area needs equal lengths >= 2");
  const auto d = (a.derived().array() - b.derived().array()).abs().eval();
  return step * (d.sum() - (d(0) + d(d.size() - 1)) / 2);
}

// f on n equispaced points of the segment, endpoints included.
template <typename F>
VectorXd segment_samples(const F& f, const Segment& segment, int n) {
  segment.validate();
  require(n >= 2, ErrorKind::InvalidGrid, "segment grid needs at least two points");
  VectorXd out(n);
  const double step = (segment.b - segment.a) / (n - 1);
  for (int i = 0; i < n; ++i) out(i) = f(i + 1 == n ? segment.b : segment.a + step * i);
  return out;
}

namespace detail {
inline void require_feature_grid(int n) {
  require(n >= 8, ErrorKind::InvalidGrid, "deviation grids need at least 8 points, got " + std::to_string(n));
}
}  // namespace detail

template <typename F, typename G>
double segment_correlation(const F& pm, const G& p, const Segment& segment, int n = kDefaultSegmentGrid) {
  detail::require_feature_grid(n);
  return pearson(segment_samples(pm, segment, n), segment_samples(p, segment, n));
}

template <typename F, typename G>
double segment_jsd(const F& pm, const G& p, const Segment& segment, int n = kDefaultSegmentGrid) {
  detail::require_feature_grid(n);
  return jensen_shannon(segment_samples(pm, segment, n), segment_samples(p, segment, n));
}

template <typename F, typename G>
double segment_area(const F& pm, const G& p, const Segment& segment, int n = kDefaultSegmentGrid) {
  detail::require_feature_grid(n);
  return trapezoid_abs_area(segment_samples(pm, segment, n), segment_samples(p, segment, n),
                            (segment.b - segment.a) / (n - 1));
}

template <typename F, typename G>
double deviation(DeviationKind kind, const F& pm, const G& p, const Segment& segment, int n = kDefaultSegmentGrid) {
  switch (kind) {
    case DeviationKind::SegmentCorrelation: return segment_correlation(pm, p, segment, n);
    case DeviationKind::SegmentJsd: return segment_jsd(pm, p, segment, n);
    case DeviationKind::SegmentArea: return segment_area(pm, p, segment, n);
  }
  fail(ErrorKind::InvalidConfig, "unknown deviation kind");
}

// One entry of the feature-definition file:
// {"id", "activity", "kind", "segment": [a, b], "grid"}. Extra keys such as
// "ideal" are left for the scoring layer.
struct FeatureDef {
  std::string id;
  std::string activity;
  DeviationKind kind = DeviationKind::SegmentArea;
  Segment segment;
  int grid = kDefaultSegmentGrid;

  // id when set, otherwise "<kind>:<activity>:<a>-<b>".
  std::string name() const;
};

FeatureDef feature_def_from_json(const nlohmann::json& entry);
nlohmann::json to_json(const FeatureDef& def);
std::vector<FeatureDef> parse_feature_defs(const nlohmann::json& doc);

struct DeviationValue {
  std::string id;
  DeviationKind kind = DeviationKind::SegmentArea;
  Segment segment;
  double raw = 0;
  int grid_points = 0;
};

using CurveSet = std::map<std::string, ActivityCurve>;

// Deviation of every definition, in order; MissingActivity when either side
// lacks the referenced activity.
std::vector<DeviationValue> compute_all(const CurveSet& process_model, const CurveSet& project,
                                        std::span<const FeatureDef> defs);
std::vector<DeviationValue> compute_all(const ProcessModel& pm, const CurveSet& project,
                                        std::span<const FeatureDef> defs);

}  // namespace procscore
