#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "procscore/kde.hpp"
#include "procscore/repo_mining.hpp"

namespace procscore {

enum class Activity { Adaptive = 0, Corrective = 1, Perfective = 2 };

inline constexpr std::array<Activity, 3> kActivities{Activity::Adaptive, Activity::Corrective, Activity::Perfective};
inline constexpr std::size_t kNumActivities = kActivities.size();

inline std::size_t index_of(Activity a) { return static_cast<std::size_t>(a); }
std::string_view to_string(Activity a);
// One-letter code used by the labeled CSV: a, c or p.
char activity_code(Activity a);
// Accepts the one-letter codes and the full names, case-insensitively.
Activity parse_activity(std::string_view text);

// Ordered list of CommitRecord fields turned into model inputs. Known names:
// every numeric counter, "density", "sojourn_seconds" (0 when absent),
// "has_sojourn" (0/1 companion), "log_sojourn" (log(1 + s)), and
// "<keyword>_count" for any mined keyword.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names);

  static FeatureSchema default_schema();

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
};

VectorXd featurize(const CommitRecord& record, const FeatureSchema& schema);

// Majority-class baseline; ties go to the earlier class in Activity order.
struct ZeroRule {
  Activity majority = Activity::Adaptive;
  Activity predict() const { return majority; }
};

ZeroRule zero_rule_fit(std::span<const Activity> labels);

struct KeywordRuleOptions {
  // Commits that add no net lines are never adaptive.
  bool net_empty_rule = false;
};

// First matching rule wins: corrective words (fix, bug, error, fail), then
// adaptive words (implement, add, feature, new), then perfective words
// (refactor, clean, style, format, rename, doc); Perfective otherwise.
Activity keyword_rule(const CommitRecord& record, const KeywordRuleOptions& options = {});

// Consecutive commits, oldest first, each linked to the previous one through
// its first parent. The last commit is the principal commit. Labels are
// optional per element; training requires all of them.
struct CommitChain {
  std::vector<CommitRecord> commits;
  std::vector<std::optional<Activity>> labels;

  std::size_t size() const { return commits.size(); }
  const CommitRecord& principal() const { return commits.back(); }
  // Throws InvariantViolation on broken links, merges or label-count mismatch.
  void validate() const;
};

struct JcdOptions {
  int order = 1;
  BandwidthRule bandwidth = SheatherJones{};
  bool use_sojourn = true;
  // Exclude Adaptive for principal commits without net additions.
  bool net_empty_rule = false;
};

// Joint-conditional-density chain classifier. The principal commit's
// activity is scored by the transition term P(c | previous k labels) (the
// class prior when k = 0), the class-conditional feature densities
// (independent univariate KDEs), and the density of log(1 + sojourn) for the
// (previous label, label) pair.
class JcdModel {
 public:
  struct Prediction {
    Activity label = Activity::Perfective;
    std::array<double, kNumActivities> posterior{};
  };

  int order() const { return options_.order; }
  const JcdOptions& options() const { return options_; }
  const FeatureSchema& schema() const { return schema_; }
  const std::array<double, kNumActivities>& priors() const { return priors_; }
  const std::array<bool, kNumActivities>& present() const { return present_; }
  // Row = context index (base-3 encoding of the k previous labels, oldest
  // label most significant), column = next label.
  const MatrixXd& transitions() const { return transitions_; }
  const VectorXd& context_prior() const { return context_prior_; }
  const GaussianKde<double>& feature_density(Activity a, std::size_t feature) const;

  nlohmann::json to_json() const;
  static JcdModel from_json(const nlohmann::json& doc);

  friend JcdModel fit_jcd(const std::vector<CommitChain>& chains, const JcdOptions& options,
                          const FeatureSchema& schema);
  friend Prediction predict_jcd_marginal(const JcdModel& model, const CommitChain& chain);

 private:
  double feature_log_density(Activity a, const VectorXd& x) const;
  std::optional<double> sojourn_log_density(std::optional<Activity> from, Activity to, const CommitRecord& c) const;

  JcdOptions options_;
  FeatureSchema schema_;
  std::array<bool, kNumActivities> present_{};
  std::array<double, kNumActivities> priors_{};
  MatrixXd transitions_;
  VectorXd context_prior_;
  std::array<std::vector<GaussianKde<double>>, kNumActivities> densities_;
  std::array<std::optional<GaussianKde<double>>, kNumActivities> sojourn_by_class_;
  std::array<std::array<std::optional<GaussianKde<double>>, kNumActivities>, kNumActivities> sojourn_by_pair_;
};

// Every chain needs more than `order` commits and full labels. Classes that
// never occur get zero posterior; a class that occurs fewer than three times
// raises InsufficientData.
JcdModel fit_jcd(const std::vector<CommitChain>& chains, const JcdOptions& options, const FeatureSchema& schema);

// Requires chain.size() > order (OrderMismatch otherwise). Unlabeled
// predecessors are marginalized out.
JcdModel::Prediction predict_jcd(const JcdModel& model, const CommitChain& chain);

// Like predict_jcd but accepts chains shorter than the model order: missing
// predecessors are treated as unobserved.
JcdModel::Prediction predict_jcd_marginal(const JcdModel& model, const CommitChain& chain);

struct DiscreteHmm {
  VectorXd initial;
  MatrixXd transition;
  MatrixXd emission;

  Eigen::Index states() const { return initial.size(); }
  Eigen::Index symbols() const { return emission.cols(); }
  // Throws InvalidDistribution unless shapes agree and every distribution is
  // nonnegative and sums to one within 1e-12.
  void validate() const;
};

// Log-likelihood of the observation sequence (scaled forward recursion).
double hmm_forward(const DiscreteHmm& hmm, std::span<const int> observations);

// Most probable state path; ties resolve to the lowest state index.
std::vector<int> hmm_viterbi(const DiscreteHmm& hmm, std::span<const int> observations);

// Maximum-likelihood estimate from fully observed sequences with an additive
// pseudocount on every count table.
DiscreteHmm fit_hmm_supervised(const std::vector<std::vector<int>>& states,
                               const std::vector<std::vector<int>>& observations, int n_states, int n_symbols,
                               double pseudocount = 1.0);

struct ClassifierMetrics {
  double accuracy = 0;
  double kappa = 0;
  // Rows are true classes, columns predicted classes.
  Eigen::Matrix<long, 3, 3> confusion = Eigen::Matrix<long, 3, 3>::Zero();

  nlohmann::json to_json() const;
};

ClassifierMetrics evaluate(std::span<const Activity> predictions, std::span<const Activity> truths);

// Reads the optional "label" column of a commit CSV (a, c, p; empty cells are
// unlabeled).
std::unordered_map<std::string, Activity> read_labels(std::string_view csv_text);

// Builds the chain ending at `id` by walking first parents, keeping at most
// `order` predecessors and stopping at merges, initial commits or commits
// missing from the dataset.
CommitChain chain_ending_at(const std::unordered_map<std::string, const CommitRecord*>& by_id,
                            const std::unordered_map<std::string, Activity>& labels, const std::string& id,
                            int order);

// Fully labeled training chains of length order + 1, one per labeled
// non-merge commit with enough labeled history.
std::vector<CommitChain> training_chains(const std::vector<CommitRecord>& records,
                                         const std::unordered_map<std::string, Activity>& labels, int order);

}  // namespace procscore
