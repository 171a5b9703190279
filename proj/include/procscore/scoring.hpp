#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "procscore/activity_curve.hpp"
#include "procscore/deviations.hpp"
#include "procscore/kde.hpp"

namespace procscore {

enum class IdealKind { Utopian, PracticalFromSamples, UserDefined };
enum class SampleStatistic { Supremum, Infimum, Expectation, Mode, Median };

std::string_view to_string(SampleStatistic s);
SampleStatistic parse_sample_statistic(std::string_view text);

struct IdealValue {
  IdealKind kind = IdealKind::Utopian;
  double value = 0;  // Utopian and UserDefined
  SampleStatistic statistic = SampleStatistic::Median;

  static IdealValue utopian(double v) { return {IdealKind::Utopian, v, SampleStatistic::Median}; }
  static IdealValue user_defined(double v) { return {IdealKind::UserDefined, v, SampleStatistic::Median}; }
  static IdealValue practical(SampleStatistic s) { return {IdealKind::PracticalFromSamples, 0, s}; }

  nlohmann::json to_json() const;
  // {"kind": "utopian"|"user", "value": v} or {"kind": "practical", "statistic": "sup"|...}.
  static IdealValue from_json(const nlohmann::json& doc);
};

// corr -> utopian 1; jsd -> supremum of -ln(divergence); area -> utopian 0.
IdealValue default_ideal(DeviationKind kind);

// Value actually scored for a raw deviation: -ln(d) for divergences, the raw
// value otherwise.
double score_input(DeviationKind kind, double raw);

// Sample-based kinds need a non-empty sample (EmptySamples); the mode is the
// argmax of a KDE over the samples on a 1024-point grid.
double resolve_ideal(const IdealValue& ideal, std::span<const double> samples);

// Smooth complementary CDF of the calibration distances D_j = |x_j - i|:
// score(x) = (1/N) sum_j Phi((D_j - |x - i|) / h).
class ScoreTransform {
 public:
  ScoreTransform() = default;
  ScoreTransform(std::string feature_id, double ideal, VectorXd distances, double bandwidth);

  double operator()(double x) const;
  double score_distance(double d) const;

  template <typename Derived>
  VectorXd scores(const Eigen::DenseBase<Derived>& xs) const {
    VectorXd out(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) out(i) = (*this)(static_cast<double>(xs.derived()(i)));
    return out;
  }

  const std::string& feature_id() const { return feature_id_; }
  double ideal() const { return ideal_; }
  const VectorXd& distances() const { return distances_; }
  double bandwidth() const { return bandwidth_; }
  Eigen::Index size() const { return distances_.size(); }

  nlohmann::json to_json() const;
  static ScoreTransform from_json(const nlohmann::json& doc);

 private:
  std::string feature_id_;
  double ideal_ = 0;
  VectorXd distances_;
  double bandwidth_ = 1;
};

inline double to_score(const ScoreTransform& transform, double x) { return transform(x); }

// Resolves the ideal on the raw values, stores the sorted distances and fits
// the bandwidth on them. Fewer than two values raise TooFewSamples; a
// zero-variance distance sample raises DegenerateSample.
ScoreTransform calibrate(std::span<const double> raw_values, const IdealValue& ideal,
                         const BandwidthRule& rule = SheatherJones{}, std::string feature_id = {});

template <typename Derived>
double ks_uniformity(const Eigen::DenseBase<Derived>& scores) {
  return ks_uniform_statistic(scores);
}

struct CalibrationConfig {
  std::size_t n_processes = 10000;
  std::uint64_t seed = 1;
  std::size_t events_min = 5;
  std::size_t events_max = 30;
  BandwidthRule curve_bandwidth = SheatherJones{};
  BandwidthRule transform_bandwidth = SheatherJones{};

  // Throws InvalidConfig unless n_processes >= 10 and 1 <= min <= max.
  void validate() const;

  nlohmann::json to_json() const;
  static CalibrationConfig from_json(const nlohmann::json& doc);
};

// Random process `index`: m ~ U{min..max} events at i.i.d. uniform times with
// i.i.d. uniform (0, 1] weights, pushed through build_curve. Depends only on
// (seed, index).
ActivityCurve simulate_process(const CalibrationConfig& config, std::size_t index);
std::vector<ActivityCurve> simulate_processes(const CalibrationConfig& config);

// A deviation definition paired with the ideal used to score it.
struct ScoredFeature {
  FeatureDef def;
  IdealValue ideal;
};

// Reads feature definitions with an optional "ideal" object per entry
// (default_ideal otherwise).
std::vector<ScoredFeature> parse_scored_features(const nlohmann::json& doc);

struct CalibrationResult {
  std::vector<ScoreTransform> transforms;
  // Score inputs observed per feature, in process index order.
  std::vector<std::vector<double>> samples;
};

// Simulates the configured processes and, per feature, compares each one
// with the process-model curve of the feature's activity, then calibrates.
CalibrationResult calibrate_features(const CalibrationConfig& config, const ProcessModel& pm,
                                     std::span<const ScoredFeature> features);

// Same, on already simulated curves (e.g. a prefix of a larger run).
CalibrationResult calibrate_features(std::span<const ActivityCurve> simulated, const ProcessModel& pm,
                                     std::span<const ScoredFeature> features, const BandwidthRule& rule);

// CSV: feature_id, n, ideal, bandwidth, min_distance, max_distance.
std::string calibration_report_csv(std::span<const ScoreTransform> transforms,
                                   const std::vector<std::string>& preamble = {});

}  // namespace procscore
