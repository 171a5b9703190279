#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "procscore/deviations.hpp"
#include "procscore/scoring.hpp"

namespace procscore {

struct ProjectFeatures {
  std::string project_id;
  std::vector<std::string> names;
  VectorXd values;
};

// [mass:<a>:<s> for every activity and segment] ++ [div:<a1>-<a2>:<s> for
// every unordered activity pair and segment] ++ extras (named by their id).
ProjectFeatures build_features(std::string project_id, const CurveSet& curves, std::span<const Segment> segments,
                               std::span<const std::string> activities, std::span<const DeviationValue> extras = {},
                               int grid = kDefaultSegmentGrid);

// Rows are instances.
struct Dataset {
  std::vector<std::string> names;
  MatrixXd x;
  VectorXd y;

  Eigen::Index size() const { return x.rows(); }
};

// Column means and sample standard deviations of a training population;
// constant columns keep sd = 1 so they map to zero.
struct Standardization {
  VectorXd mean;
  VectorXd sd;

  static Standardization fit(const MatrixXd& x);
  template <typename Derived>
  MatrixXd apply(const Eigen::MatrixBase<Derived>& x) const {
    return ((x.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array()).matrix();
  }
};

struct GroundTruth {
  std::string project_id;
  double severity = 0;  // 0..10

  double scaled() const { return severity / 10.0; }
};

// CSV with columns project_id, severity.
std::vector<GroundTruth> read_ground_truth(std::string_view csv_text);

// CSV whose header is project_id followed by the feature names.
std::string feature_matrix_csv(std::span<const ProjectFeatures> projects, const std::vector<std::string>& preamble = {});
std::vector<ProjectFeatures> read_feature_matrix(std::string_view csv_text);

// Joins features with ground truth by project id, in feature order; projects
// without a severity are skipped.
Dataset make_dataset(std::span<const ProjectFeatures> projects, std::span<const GroundTruth> truth);

// Appends n_new synthetic instances: base x, neighbor x_nn among its k
// nearest (Euclidean, z-standardized) and u ~ U(0, 1) give
// x + u (x_nn - x) with the target interpolated by the same u.
Dataset smote_regression(const Dataset& data, int k, std::size_t n_new, std::uint64_t seed);

enum class RegressorKind { Knn, Ridge, ZeroRule };

struct RegressorSpec {
  RegressorKind kind = RegressorKind::Ridge;
  int k = 5;
  double lambda = 1.0;
  bool standardize = true;

  void validate() const;
  nlohmann::json to_json() const;
  // {"kind": "knn"|"ridge"|"zero_rule", "k", "lambda", "standardize"}.
  static RegressorSpec from_json(const nlohmann::json& doc);
};

// Severity regressor; predictions are clamped to [0, 10].
class Regressor {
 public:
  const RegressorSpec& spec() const { return spec_; }
  const Standardization& standardization() const { return scaling_; }

  double predict(const VectorXd& features) const;
  VectorXd predict(const MatrixXd& features) const;

  nlohmann::json to_json() const;
  static Regressor from_json(const nlohmann::json& doc);

  friend Regressor fit_regressor(const RegressorSpec& spec, const Dataset& data);

 private:
  double predict_raw(const VectorXd& z) const;

  RegressorSpec spec_;
  Standardization scaling_;
  MatrixXd train_x_;  // knn: preprocessed training inputs
  VectorXd train_y_;
  VectorXd coef_;     // ridge
  double intercept_ = 0;
};

// Ridge with lambda = 0 on rank-deficient inputs raises SingularSystem.
Regressor fit_regressor(const RegressorSpec& spec, const Dataset& data);

double rmse(const VectorXd& predicted, const VectorXd& truth);

struct LoocvOptions {
  int repeats = 1;
  std::uint64_t seed = 1;
  // Synthetic instances added to every training fold (0 disables SMOTE).
  std::size_t smote_new = 0;
  int smote_k = 5;
};

struct LoocvResult {
  std::vector<double> rmses;  // one per repeat
  double mean = 0;
  double sd = 0;
  double median = 0;
  // mean -/+ {1, 2, 3} sd.
  std::array<std::pair<double, double>, 3> bands{};
};

LoocvResult loocv(const Dataset& data, const RegressorSpec& spec, const LoocvOptions& options = {});

// Mean increase of the RMSE when one column is permuted, floored at zero and
// normalized to sum to one (uniform when every increase is zero).
VectorXd permutation_importance(const Regressor& model, const Dataset& data, int repeats, std::uint64_t seed);

struct WeightedScores {
  VectorXd weighted;
  double dot = 0;
  double average = 0;
};

// Elementwise products, their sum and the plain mean of the scores; the
// importances must sum to one within 1e-6.
template <typename A, typename B>
WeightedScores weighted_scores(const Eigen::MatrixBase<A>& scores, const Eigen::MatrixBase<B>& importances) {
  require(scores.size() == importances.size(), ErrorKind::LengthMismatch, "one importance per score");
  require(scores.size() > 0, ErrorKind::LengthMismatch, "no scores");
  require(std::abs(importances.sum() - 1.0) <= 1e-6 && (importances.array() >= 0.0).all(),
          ErrorKind::InvalidDistribution, "importances must be nonnegative and sum to one");
  WeightedScores out;
  out.weighted = scores.cwiseProduct(importances).template cast<double>();
  out.dot = out.weighted.sum();
  out.average = static_cast<double>(scores.mean());
  return out;
}

// Mean squared difference between 0/1 predictions and outcome probabilities.
double brier_score(std::span<const double> predictions, std::span<const double> probabilities);

struct FeatureReport {
  std::string name;
  double raw = 0;
  std::optional<double> z;
  double score = 0;
  double importance = 0;
  double weighted_score = 0;

  bool operator==(const FeatureReport&) const = default;
};

struct AssessmentReport {
  std::string project_id;
  std::optional<double> predicted_severity;
  std::vector<FeatureReport> features;  // declaration order
  double average_score = 0;
  double weighted_total = 0;
  std::vector<std::string> order_by_score;
  std::vector<std::string> order_by_weighted_score;

  nlohmann::json to_json() const;
  static AssessmentReport from_json(const nlohmann::json& doc);
  // Columns feature, raw, z, score, weighted_score, importance, rows sorted
  // by descending weighted score, then the severity line.
  std::string table() const;

  bool operator==(const AssessmentReport&) const = default;
};

// Assembles a report from per-feature values already computed. Orderings are
// descending and stable, so ties keep declaration order.
AssessmentReport make_report(std::string project_id, const std::vector<std::string>& names,
                             std::span<const double> raw, std::span<const double> scores,
                             std::span<const double> importances, std::span<const std::optional<double>> z = {},
                             std::optional<double> severity = std::nullopt);

// Full pipeline for one project: deviations against the process model,
// scores through the matching transforms (MissingTransform otherwise),
// weighted scores and, if a model is given, z-values and predicted severity.
// The model must have been trained on the features' raw deviation values.
AssessmentReport assess(std::string project_id, const CurveSet& project, const ProcessModel& pm,
                        std::span<const FeatureDef> defs, std::span<const ScoreTransform> transforms,
                        std::span<const double> importances, const Regressor* model = nullptr);

}  // namespace procscore
