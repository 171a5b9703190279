#include "procscore/activity_curve.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "procscore/csv.hpp"

namespace procscore {
namespace {

// Kernels farther than this many bandwidths from [0, 1] contribute nothing
// representable in double precision.
constexpr double kReach = 38.0;

// Calls visit(center) for every mirror image of t (t + 2m and -t + 2m) whose
// kernel reaches into [0, 1].
template <typename Visit>
void for_each_image(double t, double h, Visit&& visit) {
  const double lo = -kReach * h;
  const double hi = 1.0 + kReach * h;
  for (double m = std::ceil((lo - t) / 2.0); t + 2.0 * m <= hi; m += 1.0) visit(t + 2.0 * m);
  for (double m = std::ceil((lo + t) / 2.0); -t + 2.0 * m <= hi; m += 1.0) visit(-t + 2.0 * m);
}

double uniform_fallback_bandwidth(std::size_t n) {
  return 0.9 * (1.0 / std::sqrt(12.0)) * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -0.2);
}

}  // namespace

void Segment::validate() const {
  require(std::isfinite(a) && std::isfinite(b) && 0.0 <= a && a < b && b <= 1.0, ErrorKind::InvalidSegment,
          "segment [" + format_double(a) + ", " + format_double(b) + "]");
}

std::string Segment::name() const { return label.empty() ? format_double(a) + "-" + format_double(b) : label; }

ActivityCurve::ActivityCurve(std::vector<Component> components) : components_(std::move(components)) {
  require(!components_.empty(), ErrorKind::NoEvents, "curve without components");
  double total = 0;
  for (const auto& c : components_) {
    require(c.bandwidth > 0.0 && std::isfinite(c.bandwidth), ErrorKind::InvalidConfig, "curve bandwidth must be positive");
    require(c.times.size() == c.weights.size() && c.times.size() > 0, ErrorKind::NoEvents, "component without events");
    require(c.weight >= 0.0, ErrorKind::InvalidConfig, "negative component weight");
    total += c.weight;
  }
  require(total > 0.0, ErrorKind::AllZeroWeights, "curve components all have zero weight");
  for (auto& c : components_) c.weight /= total;
}

double ActivityCurve::density(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  double total = 0;
  for (const auto& c : components_) {
    if (c.weight == 0.0) continue;
    double sum = 0;
    for (Eigen::Index i = 0; i < c.times.size(); ++i) {
      const double w = c.weights(i);
      if (w == 0.0) continue;
      double local = 0;
      for_each_image(c.times(i), c.bandwidth, [&](double center) {
        const double z = (x - center) / c.bandwidth;
        if (std::abs(z) < kReach) local += normal_pdf(z);
      });
      sum += w * local;
    }
    total += c.weight * sum / c.bandwidth;
  }
  return total;
}

double ActivityCurve::cumulative(double x) const {
  require(x >= 0.0 && x <= 1.0, ErrorKind::OutOfDomain, "cumulative needs x in [0, 1], got " + format_double(x));
  double total = 0;
  for (const auto& c : components_) {
    if (c.weight == 0.0) continue;
    double sum = 0;
    for (Eigen::Index i = 0; i < c.times.size(); ++i) {
      const double w = c.weights(i);
      if (w == 0.0) continue;
      double local = 0;
      for_each_image(c.times(i), c.bandwidth, [&](double center) {
        local += normal_cdf((x - center) / c.bandwidth) - normal_cdf(-center / c.bandwidth);
      });
      sum += w * local;
    }
    total += c.weight * sum;
  }
  return std::clamp(total, 0.0, 1.0);
}

nlohmann::json ActivityCurve::to_json() const {
  nlohmann::json doc;
  doc["components"] = nlohmann::json::array();
  for (const auto& c : components_) {
    nlohmann::json entry;
    entry["weight"] = c.weight;
    entry["bandwidth"] = c.bandwidth;
    entry["times"] = to_std_vector(c.times);
    entry["weights"] = to_std_vector(c.weights);
    doc["components"].push_back(std::move(entry));
  }
  return doc;
}

ActivityCurve ActivityCurve::from_json(const nlohmann::json& doc) {
  std::vector<Component> components;
  try {
    for (const auto& entry : doc.at("components")) {
      Component c;
      c.weight = entry.at("weight").get<double>();
      c.bandwidth = entry.at("bandwidth").get<double>();
      c.times = to_vector(entry.at("times").get<std::vector<double>>());
      c.weights = to_vector(entry.at("weights").get<std::vector<double>>());
      components.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("curve JSON: ") + e.what());
  }
  return ActivityCurve(std::move(components));
}

std::vector<double> normalize_project_time(std::span<const double> timestamps) {
  require(timestamps.size() >= 2, ErrorKind::DegenerateTimeRange, "need at least two timestamps");
  const auto [lo, hi] = std::minmax_element(timestamps.begin(), timestamps.end());
  const double min = *lo;
  const double span = *hi - *lo;
  require(span > 0.0 && std::isfinite(span), ErrorKind::DegenerateTimeRange, "all timestamps are equal");
  std::vector<double> out;
  out.reserve(timestamps.size());
  for (double t : timestamps) out.push_back(std::clamp((t - min) / span, 0.0, 1.0));
  return out;
}

ActivityCurve build_curve(std::span<const Event> events, const BandwidthRule& rule) {
  require(!events.empty(), ErrorKind::NoEvents, "no events");
  VectorXd times(static_cast<Eigen::Index>(events.size()));
  VectorXd weights(static_cast<Eigen::Index>(events.size()));
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    require(e.time >= 0.0 && e.time <= 1.0, ErrorKind::OutOfDomain, "event time outside [0, 1]");
    require(e.weight >= 0.0 && std::isfinite(e.weight), ErrorKind::InvalidConfig, "event weight must be nonnegative");
    times(static_cast<Eigen::Index>(i)) = e.time;
    weights(static_cast<Eigen::Index>(i)) = e.weight;
  }
  const double total = weights.sum();
  require(total > 0.0, ErrorKind::ZeroTotalWeight, "events carry no weight");
  weights /= total;

  double h = 0;
  try {
    h = select_bandwidth(rule, times);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateSample) throw;
    h = uniform_fallback_bandwidth(events.size());
  }
  return ActivityCurve({ActivityCurve::Component{1.0, h, std::move(times), std::move(weights)}});
}

double cumulative(const ActivityCurve& curve, double x) { return curve.cumulative(x); }

ActivityCurve mixture(std::span<const ActivityCurve> curves, std::span<const double> weights) {
  require(curves.size() == weights.size(), ErrorKind::LengthMismatch, "one weight per curve");
  require(!curves.empty(), ErrorKind::AllZeroWeights, "empty mixture");
  double total = 0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), ErrorKind::InvalidConfig, "mixture weights must be nonnegative");
    total += w;
  }
  require(total > 0.0, ErrorKind::AllZeroWeights, "all mixture weights are zero");
  std::vector<ActivityCurve::Component> components;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (weights[i] == 0.0) continue;
    for (auto c : curves[i].components()) {
      c.weight *= weights[i] / total;
      components.push_back(std::move(c));
    }
  }
  return ActivityCurve(std::move(components));
}

double activity_mass(const ActivityCurve& curve, const Segment& segment) {
  segment.validate();
  return std::clamp(curve.cumulative(segment.b) - curve.cumulative(segment.a), 0.0, 1.0);
}

std::string_view to_string(IssueActivity a) {
  switch (a) {
    case IssueActivity::Requirements: return "req";
    case IssueActivity::Development: return "dev";
    case IssueActivity::Descoping: return "desc";
  }
  return "unknown";
}

IssueActivity parse_issue_activity(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto a : {IssueActivity::Requirements, IssueActivity::Development, IssueActivity::Descoping})
    if (lower == to_string(a)) return a;
  fail(ErrorKind::ParseError, "unknown issue activity: '" + std::string(text) + "'");
}

std::vector<IssueRecord> read_issues(std::string_view csv_text) {
  const auto table = parse_csv(csv_text);
  const auto activity_col = table.require_column("activity");
  const auto time_col = table.require_column("timestamp");
  const auto hours_col = table.require_column("hours");
  std::vector<IssueRecord> issues;
  for (const auto& row : table.rows) {
    IssueRecord issue{parse_issue_activity(row[activity_col]), parse_double(row[time_col]), parse_double(row[hours_col])};
    require(issue.hours > 0.0, ErrorKind::ParseError, "issue hours must be positive");
    issues.push_back(issue);
  }
  return issues;
}

const ActivityCurve& ProcessModel::at(const std::string& activity) const {
  const auto it = curves.find(activity);
  require(it != curves.end(), ErrorKind::MissingActivity, "process model has no activity '" + activity + "'");
  return it->second;
}

nlohmann::json ProcessModel::to_json() const {
  nlohmann::json doc;
  doc["project_weights"] = project_weights;
  doc["curves"] = nlohmann::json::object();
  for (const auto& [name, curve] : curves) doc["curves"][name] = curve.to_json();
  return doc;
}

ProcessModel ProcessModel::from_json(const nlohmann::json& doc) {
  ProcessModel pm;
  try {
    if (doc.contains("project_weights")) pm.project_weights = doc.at("project_weights").get<std::vector<double>>();
    for (const auto& [name, curve] : doc.at("curves").items()) pm.curves.emplace(name, ActivityCurve::from_json(curve));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("process model JSON: ") + e.what());
  }
  return pm;
}

ProcessModel build_process_model(const std::vector<std::map<std::string, ActivityCurve>>& projects,
                                 std::span<const double> weights) {
  require(!projects.empty(), ErrorKind::NoEvents, "no projects");
  require(projects.size() == weights.size(), ErrorKind::LengthMismatch, "one weight per project");
  ProcessModel pm;
  const double total = [&] {
    double t = 0;
    for (double w : weights) t += w;
    return t;
  }();
  require(total > 0.0, ErrorKind::AllZeroWeights, "all project weights are zero");
  for (double w : weights) pm.project_weights.push_back(w / total);
  for (const auto& [activity, first_curve] : projects.front()) {
    std::vector<ActivityCurve> curves;
    for (const auto& project : projects) {
      const auto it = project.find(activity);
      require(it != project.end(), ErrorKind::MissingActivity, "project lacks activity '" + activity + "'");
      curves.push_back(it->second);
    }
    pm.curves.emplace(activity, mixture(curves, weights));
  }
  return pm;
}

std::string curve_table_csv(const ActivityCurve& curve, int n, const std::vector<std::string>& preamble) {
  require(n >= 2, ErrorKind::InvalidGrid, "curve table needs at least two grid points");
  CsvTable table;
  table.header = {"x", "f", "F"};
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    table.rows.push_back({format_double(x), format_double(curve.density(x)), format_double(curve.cumulative(x))});
  }
  return to_csv(table, preamble);
}

std::string curves_svg(const std::map<std::string, ActivityCurve>& curves, int n) {
  constexpr double width = 640, height = 360, pad = 30;
  static const char* palette[] = {"#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910", "#17202a"};
  double top = 0;
  std::map<std::string, std::vector<double>> sampled;
  for (const auto& [name, curve] : curves) {
    auto& ys = sampled[name];
    for (int i = 0; i < n; ++i) {
      ys.push_back(curve.density(static_cast<double>(i) / (n - 1)));
      top = std::max(top, ys.back());
    }
  }
  if (top <= 0.0) top = 1.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::size_t color = 0;
  for (const auto& [name, ys] : sampled) {
    svg << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << palette[color % 6] << "\" points=\"";
    for (int i = 0; i < n; ++i) {
      const double px = pad + (width - 2 * pad) * i / (n - 1);
      const double py = height - pad - (height - 2 * pad) * ys[static_cast<std::size_t>(i)] / top;
      svg << px << ',' << py << ' ';
    }
    svg << "\"/>\n<text x=\"" << pad + 10 << "\" y=\"" << pad + 14 * (color + 1) << "\" font-size=\"12\" fill=\""
        << palette[color % 6] << "\">" << name << "</text>\n";
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace procscore
