#include "procscore/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "procscore/csv.hpp"
#include "procscore/random.hpp"

namespace procscore {

std::string_view to_string(SampleStatistic s) {
  switch (s) {
    case SampleStatistic::Supremum: return "sup";
    case SampleStatistic::Infimum: return "inf";
    case SampleStatistic::Expectation: return "expectation";
    case SampleStatistic::Mode: return "mode";
    case SampleStatistic::Median: return "median";
  }
  return "unknown";
}

SampleStatistic parse_sample_statistic(std::string_view text) {
  for (auto s : {SampleStatistic::Supremum, SampleStatistic::Infimum, SampleStatistic::Expectation,
                 SampleStatistic::Mode, SampleStatistic::Median})
    if (text == to_string(s)) return s;
  fail(ErrorKind::InvalidConfig, "unknown sample statistic: '" + std::string(text) + "'");
}

nlohmann::json IdealValue::to_json() const {
  switch (kind) {
    case IdealKind::Utopian: return {{"kind", "utopian"}, {"value", value}};
    case IdealKind::UserDefined: return {{"kind", "user"}, {"value", value}};
    case IdealKind::PracticalFromSamples: return {{"kind", "practical"}, {"statistic", to_string(statistic)}};
  }
  return {};
}

IdealValue IdealValue::from_json(const nlohmann::json& doc) {
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "utopian") return utopian(doc.at("value").get<double>());
    if (kind == "user") return user_defined(doc.at("value").get<double>());
    if (kind == "practical") return practical(parse_sample_statistic(doc.at("statistic").get<std::string>()));
    fail(ErrorKind::InvalidConfig, "unknown ideal kind: '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, std::string("ideal value: ") + e.what());
  }
}

IdealValue default_ideal(DeviationKind kind) {
  switch (kind) {
    case DeviationKind::SegmentCorrelation: return IdealValue::utopian(1.0);
    case DeviationKind::SegmentJsd: return IdealValue::practical(SampleStatistic::Supremum);
    case DeviationKind::SegmentArea: return IdealValue::utopian(0.0);
  }
  return {};
}

double score_input(DeviationKind kind, double raw) {
  return kind == DeviationKind::SegmentJsd ? neg_log_jsd(raw) : raw;
}

double resolve_ideal(const IdealValue& ideal, std::span<const double> samples) {
  double value = ideal.value;
  if (ideal.kind == IdealKind::PracticalFromSamples) {
    require(!samples.empty(), ErrorKind::EmptySamples, "practical ideal needs calibration samples");
    const Eigen::Map<const VectorXd> x(samples.data(), static_cast<Eigen::Index>(samples.size()));
    switch (ideal.statistic) {
      case SampleStatistic::Supremum: value = x.maxCoeff(); break;
      case SampleStatistic::Infimum: value = x.minCoeff(); break;
      case SampleStatistic::Expectation: value = x.mean(); break;
      case SampleStatistic::Median: value = median(x); break;
      case SampleStatistic::Mode:
        value = x.size() < 2 || x.maxCoeff() == x.minCoeff() ? x(0) : GaussianKde<double>::fit(x, SheatherJones{}).mode();
        break;
    }
  }
  require(std::isfinite(value), ErrorKind::InvalidConfig, "ideal value is not finite");
  return value;
}

ScoreTransform::ScoreTransform(std::string feature_id, double ideal, VectorXd distances, double bandwidth)
    : feature_id_(std::move(feature_id)), ideal_(ideal), distances_(std::move(distances)), bandwidth_(bandwidth) {
  require(distances_.size() >= 1, ErrorKind::TooFewSamples, "score transform needs a distance");
  require(bandwidth_ > 0.0 && std::isfinite(bandwidth_), ErrorKind::InvalidConfig, "bandwidth must be positive");
  require(std::isfinite(ideal_), ErrorKind::InvalidConfig, "ideal value is not finite");
  require((distances_.array() >= 0.0).all(), ErrorKind::InvalidConfig, "distances must be nonnegative");
  std::sort(distances_.begin(), distances_.end());
}

double ScoreTransform::score_distance(double d) const {
  double sum = 0;
  for (Eigen::Index j = 0; j < distances_.size(); ++j) sum += normal_cdf((distances_(j) - d) / bandwidth_);
  return sum / static_cast<double>(distances_.size());
}

double ScoreTransform::operator()(double x) const {
  require(std::isfinite(x), ErrorKind::OutOfDomain, "score of a non-finite value");
  return score_distance(std::abs(x - ideal_));
}

nlohmann::json ScoreTransform::to_json() const {
  return {{"feature_id", feature_id_},
          {"ideal", ideal_},
          {"distances", to_std_vector(distances_)},
          {"bandwidth", bandwidth_},
          {"n", distances_.size()}};
}

ScoreTransform ScoreTransform::from_json(const nlohmann::json& doc) {
  try {
    auto distances = doc.at("distances").get<std::vector<double>>();
    if (doc.contains("n"))
      require(doc.at("n").get<std::size_t>() == distances.size(), ErrorKind::ParseError,
              "transform n disagrees with its distances");
    return ScoreTransform(doc.at("feature_id").get<std::string>(), doc.at("ideal").get<double>(),
                          to_vector(distances), doc.at("bandwidth").get<double>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("transform JSON: ") + e.what());
  }
}

ScoreTransform calibrate(std::span<const double> raw_values, const IdealValue& ideal, const BandwidthRule& rule,
                         std::string feature_id) {
  require(raw_values.size() >= 2, ErrorKind::TooFewSamples, "calibration needs at least two values");
  const double i = resolve_ideal(ideal, raw_values);
  VectorXd d(static_cast<Eigen::Index>(raw_values.size()));
  for (std::size_t j = 0; j < raw_values.size(); ++j) {
    require(std::isfinite(raw_values[j]), ErrorKind::InvalidConfig, "non-finite calibration value");
    d(static_cast<Eigen::Index>(j)) = std::abs(raw_values[j] - i);
  }
  const double h = select_bandwidth(rule, d);
  return ScoreTransform(std::move(feature_id), i, std::move(d), h);
}

void CalibrationConfig::validate() const {
  require(n_processes >= 10, ErrorKind::InvalidConfig, "calibration needs at least 10 processes");
  require(events_min >= 1 && events_min <= events_max, ErrorKind::InvalidConfig, "events range must be 1 <= min <= max");
}

nlohmann::json CalibrationConfig::to_json() const {
  return {{"n_processes", n_processes},
          {"seed", seed},
          {"events", {events_min, events_max}},
          {"curve_bandwidth", to_string(curve_bandwidth)},
          {"transform_bandwidth", to_string(transform_bandwidth)}};
}

CalibrationConfig CalibrationConfig::from_json(const nlohmann::json& doc) {
  CalibrationConfig c;
  try {
    if (doc.contains("n_processes")) c.n_processes = doc.at("n_processes").get<std::size_t>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("events")) {
      const auto range = doc.at("events").get<std::vector<std::size_t>>();
      require(range.size() == 2, ErrorKind::InvalidConfig, "events must be [min, max]");
      c.events_min = range[0];
      c.events_max = range[1];
    }
    if (doc.contains("curve_bandwidth")) c.curve_bandwidth = parse_bandwidth_rule(doc.at("curve_bandwidth").get<std::string>());
    if (doc.contains("transform_bandwidth"))
      c.transform_bandwidth = parse_bandwidth_rule(doc.at("transform_bandwidth").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, std::string("calibration config: ") + e.what());
  }
  c.validate();
  return c;
}

ActivityCurve simulate_process(const CalibrationConfig& config, std::size_t index) {
  Rng rng(config.seed, index);
  const auto m = static_cast<std::size_t>(rng.uniform_int(config.events_min, config.events_max));
  std::vector<Event> events(m);
  for (auto& e : events) {
    e.time = rng.uniform();
    e.weight = rng.uniform_open_closed();
  }
  return build_curve(events, config.curve_bandwidth);
}

std::vector<ActivityCurve> simulate_processes(const CalibrationConfig& config) {
  config.validate();
  std::vector<ActivityCurve> out;
  out.reserve(config.n_processes);
  for (std::size_t j = 0; j < config.n_processes; ++j) out.push_back(simulate_process(config, j));
  return out;
}

std::vector<ScoredFeature> parse_scored_features(const nlohmann::json& doc) {
  const auto& items = doc.is_object() && doc.contains("features") ? doc.at("features") : doc;
  require(items.is_array(), ErrorKind::InvalidConfig, "feature definitions must be a JSON array");
  std::vector<ScoredFeature> out;
  for (const auto& entry : items) {
    ScoredFeature f{feature_def_from_json(entry), {}};
    f.ideal = entry.contains("ideal") ? IdealValue::from_json(entry.at("ideal")) : default_ideal(f.def.kind);
    out.push_back(std::move(f));
  }
  return out;
}

CalibrationResult calibrate_features(std::span<const ActivityCurve> simulated, const ProcessModel& pm,
                                     std::span<const ScoredFeature> features, const BandwidthRule& rule) {
  CalibrationResult result;
  for (const auto& feature : features) {
    const auto& def = feature.def;
    const auto& reference = pm.at(def.activity);
    std::vector<double> values;
    values.reserve(simulated.size());
    for (const auto& curve : simulated)
      values.push_back(score_input(def.kind, deviation(def.kind, reference, curve, def.segment, def.grid)));
    result.transforms.push_back(calibrate(values, feature.ideal, rule, def.name()));
    result.samples.push_back(std::move(values));
  }
  return result;
}

CalibrationResult calibrate_features(const CalibrationConfig& config, const ProcessModel& pm,
                                     std::span<const ScoredFeature> features) {
  const auto simulated = simulate_processes(config);
  return calibrate_features(simulated, pm, features, config.transform_bandwidth);
}

std::string calibration_report_csv(std::span<const ScoreTransform> transforms, const std::vector<std::string>& preamble) {
  CsvTable table;
  table.header = {"feature_id", "n", "ideal", "bandwidth", "min_distance", "max_distance"};
  for (const auto& t : transforms)
    table.rows.push_back({t.feature_id(), std::to_string(t.size()), format_double(t.ideal()),
                          format_double(t.bandwidth()), format_double(t.distances().minCoeff()),
                          format_double(t.distances().maxCoeff())});
  return to_csv(table, preamble);
}

}  // namespace procscore
