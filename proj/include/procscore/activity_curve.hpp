#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "procscore/kde.hpp"

namespace procscore {

// A point in normalized project time carrying a nonnegative weight (1 for
// commits, spent hours for issue-tracking records).
struct Event {
  double time = 0;
  double weight = 1;
};

// Closed subinterval [a, b] of project time with 0 <= a < b <= 1.
struct Segment {
  double a = 0;
  double b = 1;
  std::string label;

  // Throws InvalidSegment unless 0 <= a < b <= 1.
  void validate() const;
  std::string name() const;  // label, or "a-b" when unlabeled
};

// Probability density over project time [0, 1]: a convex combination of
// Gaussian kernel groups, each reflected at both ends of the interval
// (evaluated with every mirror image that is not negligible), so every curve
// integrates to exactly one on [0, 1].
class ActivityCurve {
 public:
  struct Component {
    double weight = 1;
    double bandwidth = 0.1;
    VectorXd times;
    VectorXd weights;  // sums to one within the component
  };

  ActivityCurve() = default;
  explicit ActivityCurve(std::vector<Component> components);

  // Density at x; zero outside [0, 1].
  double density(double x) const;
  double operator()(double x) const { return density(x); }

  // Closed-form integral of the density over [0, x]. Throws OutOfDomain
  // unless 0 <= x <= 1.
  double cumulative(double x) const;

  const std::vector<Component>& components() const { return components_; }

  nlohmann::json to_json() const;
  static ActivityCurve from_json(const nlohmann::json& doc);

 private:
  std::vector<Component> components_;
};

// Affine map of the timestamps onto [0, 1] (min -> 0, max -> 1).
// Throws DegenerateTimeRange when fewer than two distinct values exist.
std::vector<double> normalize_project_time(std::span<const double> timestamps);

// Weight-normalized, boundary-reflected Gaussian KDE of the events. The
// bandwidth rule sees the event times; when they are too few or identical
// the Silverman scale of a uniform spread on [0, 1] is used instead.
ActivityCurve build_curve(std::span<const Event> events, const BandwidthRule& rule = SheatherJones{});

double cumulative(const ActivityCurve& curve, double x);

// Convex combination sum_i w_i f_i with weights normalized to sum to one.
ActivityCurve mixture(std::span<const ActivityCurve> curves, std::span<const double> weights);

// Integral of the curve over the segment.
double activity_mass(const ActivityCurve& curve, const Segment& segment);

enum class IssueActivity { Requirements, Development, Descoping };

std::string_view to_string(IssueActivity a);
IssueActivity parse_issue_activity(std::string_view text);

struct IssueRecord {
  IssueActivity activity = IssueActivity::Development;
  double timestamp = 0;  // raw (e.g. UTC seconds) until normalized
  double hours = 1;
};

// Issue CSV with columns activity (req|dev|desc), timestamp, hours.
std::vector<IssueRecord> read_issues(std::string_view csv_text);

// Severity-weighted mixtures of several projects' curves, per activity.
struct ProcessModel {
  std::map<std::string, ActivityCurve> curves;
  std::vector<double> project_weights;

  const ActivityCurve& at(const std::string& activity) const;

  nlohmann::json to_json() const;
  static ProcessModel from_json(const nlohmann::json& doc);
};

// Every project must provide every activity the first project provides.
ProcessModel build_process_model(const std::vector<std::map<std::string, ActivityCurve>>& projects,
                                 std::span<const double> weights);

// CSV with header x,f,F sampled on `n` equispaced points of [0, 1].
std::string curve_table_csv(const ActivityCurve& curve, int n, const std::vector<std::string>& preamble = {});

// Decorative SVG line plot of several named curves.
std::string curves_svg(const std::map<std::string, ActivityCurve>& curves, int n = 512);

}  // namespace procscore
