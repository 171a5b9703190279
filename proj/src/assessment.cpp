#include "procscore/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/QR>

#include "procscore/csv.hpp"
#include "procscore/random.hpp"

namespace procscore {
namespace {

std::vector<std::size_t> stable_descending(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

std::string_view to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::Knn: return "knn";
    case RegressorKind::Ridge: return "ridge";
    case RegressorKind::ZeroRule: return "zero_rule";
  }
  return "unknown";
}

RegressorKind parse_regressor_kind(std::string_view text) {
  for (auto k : {RegressorKind::Knn, RegressorKind::Ridge, RegressorKind::ZeroRule})
    if (text == to_string(k)) return k;
  fail(ErrorKind::InvalidConfig, "unknown regressor kind: '" + std::string(text) + "'");
}

// Indices of the k nearest rows of z to row `self` (excluding it), ties by
// lower index.
std::vector<Eigen::Index> nearest_rows(const MatrixXd& z, Eigen::Index self, int k) {
  std::vector<std::pair<double, Eigen::Index>> dist;
  for (Eigen::Index j = 0; j < z.rows(); ++j)
    if (j != self) dist.emplace_back((z.row(j) - z.row(self)).squaredNorm(), j);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
  return out;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> optional_from_json(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

ProjectFeatures build_features(std::string project_id, const CurveSet& curves, std::span<const Segment> segments,
                               std::span<const std::string> activities, std::span<const DeviationValue> extras,
                               int grid) {
  require(!segments.empty(), ErrorKind::InvalidConfig, "build_features needs at least one segment");
  std::vector<const ActivityCurve*> resolved;
  for (const auto& a : activities) {
    const auto it = curves.find(a);
    require(it != curves.end(), ErrorKind::MissingActivity, "project '" + project_id + "' lacks activity '" + a + "'");
    resolved.push_back(&it->second);
  }
  ProjectFeatures out{std::move(project_id), {}, {}};
  std::vector<double> values;
  for (std::size_t i = 0; i < activities.size(); ++i)
    for (const auto& s : segments) {
      out.names.push_back("mass:" + activities[i] + ":" + s.name());
      values.push_back(activity_mass(*resolved[i], s));
    }
  for (std::size_t i = 0; i < activities.size(); ++i)
    for (std::size_t j = i + 1; j < activities.size(); ++j)
      for (const auto& s : segments) {
        out.names.push_back("div:" + activities[i] + "-" + activities[j] + ":" + s.name());
        values.push_back(segment_jsd(*resolved[i], *resolved[j], s, grid));
      }
  for (const auto& e : extras) {
    out.names.push_back(e.id);
    values.push_back(e.raw);
  }
  const std::set<std::string> unique(out.names.begin(), out.names.end());
  require(unique.size() == out.names.size(), ErrorKind::InvalidConfig, "feature names are not unique");
  out.values = to_vector(values);
  return out;
}

Standardization Standardization::fit(const MatrixXd& x) {
  Standardization s;
  s.mean = x.colwise().mean().transpose();
  s.sd = VectorXd::Ones(x.cols());
  if (x.rows() < 2) return s;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = sample_sd(x.col(j));
    if (sd > 0.0 && std::isfinite(sd)) s.sd(j) = sd;
  }
  return s;
}

std::vector<GroundTruth> read_ground_truth(std::string_view csv_text) {
  const auto table = parse_csv(csv_text);
  const auto id_col = table.require_column("project_id");
  const auto sev_col = table.require_column("severity");
  std::vector<GroundTruth> out;
  for (const auto& row : table.rows) {
    GroundTruth g{row[id_col], parse_double(row[sev_col])};
    require(g.severity >= 0.0 && g.severity <= 10.0, ErrorKind::OutOfDomain,
            "severity of '" + g.project_id + "' outside [0, 10]");
    out.push_back(std::move(g));
  }
  return out;
}

std::string feature_matrix_csv(std::span<const ProjectFeatures> projects, const std::vector<std::string>& preamble) {
  require(!projects.empty(), ErrorKind::EmptyDataset, "no projects");
  CsvTable table;
  table.header = {"project_id"};
  table.header.insert(table.header.end(), projects.front().names.begin(), projects.front().names.end());
  for (const auto& p : projects) {
    require(p.names == projects.front().names, ErrorKind::LengthMismatch, "projects disagree on feature names");
    std::vector<std::string> row{p.project_id};
    for (double v : p.values) row.push_back(format_double(v));
    table.rows.push_back(std::move(row));
  }
  return to_csv(table, preamble);
}

std::vector<ProjectFeatures> read_feature_matrix(std::string_view csv_text) {
  const auto table = parse_csv(csv_text);
  const auto id_col = table.require_column("project_id");
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (c != id_col) names.push_back(table.header[c]);
  std::vector<ProjectFeatures> out;
  for (const auto& row : table.rows) {
    ProjectFeatures p{row[id_col], names, VectorXd(static_cast<Eigen::Index>(names.size()))};
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < row.size(); ++c)
      if (c != id_col) p.values(j++) = parse_double(row[c]);
    out.push_back(std::move(p));
  }
  return out;
}

Dataset make_dataset(std::span<const ProjectFeatures> projects, std::span<const GroundTruth> truth) {
  require(!projects.empty(), ErrorKind::EmptyDataset, "no projects");
  Dataset d;
  d.names = projects.front().names;
  std::vector<VectorXd> rows;
  std::vector<double> targets;
  for (const auto& p : projects) {
    require(p.names == d.names, ErrorKind::LengthMismatch, "projects disagree on feature names");
    const auto it = std::find_if(truth.begin(), truth.end(), [&](const GroundTruth& g) { return g.project_id == p.project_id; });
    if (it == truth.end()) continue;
    rows.push_back(p.values);
    targets.push_back(it->severity);
  }
  require(!rows.empty(), ErrorKind::EmptyDataset, "no project has a ground-truth severity");
  d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) d.x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  d.y = to_vector(targets);
  return d;
}

Dataset smote_regression(const Dataset& data, int k, std::size_t n_new, std::uint64_t seed) {
  require(k >= 1 && data.size() > k, ErrorKind::TooFewInstances, "SMOTE needs more instances than neighbors");
  const MatrixXd z = Standardization::fit(data.x).apply(data.x);
  std::vector<std::vector<Eigen::Index>> neighbors(static_cast<std::size_t>(data.size()));
  Dataset out{data.names, MatrixXd(data.size() + static_cast<Eigen::Index>(n_new), data.x.cols()),
              VectorXd(data.size() + static_cast<Eigen::Index>(n_new))};
  out.x.topRows(data.size()) = data.x;
  out.y.head(data.size()) = data.y;
  for (std::size_t j = 0; j < n_new; ++j) {
    Rng rng(seed, j);
    const auto base = static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<std::uint64_t>(data.size() - 1)));
    auto& nn = neighbors[static_cast<std::size_t>(base)];
    if (nn.empty()) nn = nearest_rows(z, base, k);
    const auto other = nn[static_cast<std::size_t>(rng.uniform_int(0, nn.size() - 1))];
    const double u = rng.uniform();
    const auto row = data.size() + static_cast<Eigen::Index>(j);
    out.x.row(row) = data.x.row(base) + u * (data.x.row(other) - data.x.row(base));
    out.y(row) = data.y(base) + u * (data.y(other) - data.y(base));
  }
  return out;
}

void RegressorSpec::validate() const {
  require(k >= 1, ErrorKind::InvalidConfig, "knn needs k >= 1");
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::InvalidConfig, "ridge needs lambda >= 0");
}

nlohmann::json RegressorSpec::to_json() const {
  return {{"kind", to_string(kind)}, {"k", k}, {"lambda", lambda}, {"standardize", standardize}};
}

RegressorSpec RegressorSpec::from_json(const nlohmann::json& doc) {
  RegressorSpec s;
  try {
    if (doc.contains("kind")) s.kind = parse_regressor_kind(doc.at("kind").get<std::string>());
    if (doc.contains("k")) s.k = doc.at("k").get<int>();
    if (doc.contains("lambda")) s.lambda = doc.at("lambda").get<double>();
    if (doc.contains("standardize")) s.standardize = doc.at("standardize").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, std::string("regressor spec: ") + e.what());
  }
  s.validate();
  return s;
}

Regressor fit_regressor(const RegressorSpec& spec, const Dataset& data) {
  spec.validate();
  require(data.size() >= 1 && data.y.size() == data.size(), ErrorKind::TooFewInstances, "no training instances");
  Regressor m;
  m.spec_ = spec;
  if (spec.standardize) {
    m.scaling_ = Standardization::fit(data.x);
  } else {
    m.scaling_.mean = VectorXd::Zero(data.x.cols());
    m.scaling_.sd = VectorXd::Ones(data.x.cols());
  }
  switch (spec.kind) {
    case RegressorKind::ZeroRule: m.intercept_ = data.y.mean(); break;
    case RegressorKind::Knn:
      m.train_x_ = m.scaling_.apply(data.x);
      m.train_y_ = data.y;
      break;
    case RegressorKind::Ridge: {
      const MatrixXd z = m.scaling_.apply(data.x);
      const VectorXd center = z.colwise().mean().transpose();
      const MatrixXd zc = z.rowwise() - center.transpose();
      const double y_mean = data.y.mean();
      const VectorXd yc = data.y.array() - y_mean;
      if (spec.lambda == 0.0) {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(zc);
        require(qr.rank() == zc.cols(), ErrorKind::SingularSystem, "ridge with lambda = 0 on collinear features");
        m.coef_ = qr.solve(yc);
      } else {
        const MatrixXd gram = zc.transpose() * zc + spec.lambda * MatrixXd::Identity(zc.cols(), zc.cols());
        m.coef_ = gram.ldlt().solve(zc.transpose() * yc);
      }
      m.intercept_ = y_mean - center.dot(m.coef_);
      break;
    }
  }
  return m;
}

double Regressor::predict_raw(const VectorXd& z) const {
  switch (spec_.kind) {
    case RegressorKind::ZeroRule: return intercept_;
    case RegressorKind::Ridge: return intercept_ + coef_.dot(z);
    case RegressorKind::Knn: {
      std::vector<std::pair<double, Eigen::Index>> dist;
      for (Eigen::Index j = 0; j < train_x_.rows(); ++j)
        dist.emplace_back((train_x_.row(j).transpose() - z).squaredNorm(), j);
      const auto take = std::min<std::size_t>(static_cast<std::size_t>(spec_.k), dist.size());
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
      double sum = 0;
      for (std::size_t i = 0; i < take; ++i) sum += train_y_(dist[i].second);
      return sum / static_cast<double>(take);
    }
  }
  return intercept_;
}

double Regressor::predict(const VectorXd& features) const {
  require(features.size() == scaling_.mean.size(), ErrorKind::LengthMismatch, "feature count differs from training");
  const VectorXd z = (features - scaling_.mean).cwiseQuotient(scaling_.sd);
  return std::clamp(predict_raw(z), 0.0, 10.0);
}

VectorXd Regressor::predict(const MatrixXd& features) const {
  VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) out(i) = predict(VectorXd(features.row(i).transpose()));
  return out;
}

nlohmann::json Regressor::to_json() const {
  nlohmann::json doc{{"spec", spec_.to_json()},
                     {"mean", to_std_vector(scaling_.mean)},
                     {"sd", to_std_vector(scaling_.sd)},
                     {"intercept", intercept_},
                     {"coef", to_std_vector(coef_)},
                     {"train_y", to_std_vector(train_y_)}};
  doc["train_x"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < train_x_.rows(); ++i) doc["train_x"].push_back(to_std_vector(train_x_.row(i)));
  return doc;
}

Regressor Regressor::from_json(const nlohmann::json& doc) {
  Regressor m;
  try {
    m.spec_ = RegressorSpec::from_json(doc.at("spec"));
    m.scaling_.mean = to_vector(doc.at("mean").get<std::vector<double>>());
    m.scaling_.sd = to_vector(doc.at("sd").get<std::vector<double>>());
    m.intercept_ = doc.at("intercept").get<double>();
    m.coef_ = to_vector(doc.at("coef").get<std::vector<double>>());
    m.train_y_ = to_vector(doc.at("train_y").get<std::vector<double>>());
    const auto rows = doc.at("train_x").get<std::vector<std::vector<double>>>();
    m.train_x_.resize(static_cast<Eigen::Index>(rows.size()), m.scaling_.mean.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].size() == static_cast<std::size_t>(m.scaling_.mean.size()), ErrorKind::ParseError,
              "regressor training row has the wrong width");
      m.train_x_.row(static_cast<Eigen::Index>(i)) = to_vector(rows[i]).transpose();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("regressor JSON: ") + e.what());
  }
  require(m.scaling_.sd.size() == m.scaling_.mean.size(), ErrorKind::ParseError, "regressor scaling sizes differ");
  return m;
}

double rmse(const VectorXd& predicted, const VectorXd& truth) {
  require(predicted.size() == truth.size() && truth.size() > 0, ErrorKind::LengthMismatch, "rmse needs equal lengths");
  return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(truth.size()));
}

LoocvResult loocv(const Dataset& data, const RegressorSpec& spec, const LoocvOptions& options) {
  const auto n = data.size();
  require(n >= 2, ErrorKind::TooFewInstances, "leave-one-out needs at least two instances");
  require(options.repeats >= 1, ErrorKind::InvalidConfig, "loocv needs at least one repeat");
  LoocvResult result;
  for (int r = 0; r < options.repeats; ++r) {
    VectorXd predicted(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Dataset train{data.names, MatrixXd(n - 1, data.x.cols()), VectorXd(n - 1)};
      train.x << data.x.topRows(i), data.x.bottomRows(n - i - 1);
      train.y << data.y.head(i), data.y.tail(n - i - 1);
      if (options.smote_new > 0) {
        const auto fold_seed = splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(r) * 1000003ULL +
                                                                    static_cast<std::uint64_t>(i)));
        train = smote_regression(train, std::min<int>(options.smote_k, static_cast<int>(n - 2)), options.smote_new,
                                 fold_seed);
      }
      predicted(i) = fit_regressor(spec, train).predict(VectorXd(data.x.row(i).transpose()));
    }
    result.rmses.push_back(rmse(predicted, data.y));
  }
  const auto v = to_vector(result.rmses);
  result.mean = v.mean();
  result.sd = v.size() > 1 && v.maxCoeff() > v.minCoeff() ? sample_sd(v) : 0.0;
  result.median = median(v);
  for (int s = 1; s <= 3; ++s) result.bands[static_cast<std::size_t>(s - 1)] = {result.mean - s * result.sd, result.mean + s * result.sd};
  return result;
}

VectorXd permutation_importance(const Regressor& model, const Dataset& data, int repeats, std::uint64_t seed) {
  require(data.size() >= 3, ErrorKind::TooFewInstances, "permutation importance needs at least three instances");
  require(repeats >= 1, ErrorKind::InvalidConfig, "permutation importance needs at least one repeat");
  const double baseline = rmse(model.predict(data.x), data.y);
  const auto p = data.x.cols();
  VectorXd importance = VectorXd::Zero(p);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(data.size()));
  for (Eigen::Index j = 0; j < p; ++j) {
    double total = 0;
    for (int r = 0; r < repeats; ++r) {
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng(seed, static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(repeats) + static_cast<std::uint64_t>(r));
      rng.shuffle(perm);
      MatrixXd shuffled = data.x;
      for (Eigen::Index i = 0; i < data.size(); ++i) shuffled(i, j) = data.x(perm[static_cast<std::size_t>(i)], j);
      total += rmse(model.predict(shuffled), data.y) - baseline;
    }
    importance(j) = std::max(0.0, total / repeats);
  }
  const double sum = importance.sum();
  if (sum <= 0.0) return VectorXd::Constant(p, 1.0 / static_cast<double>(p));
  return importance / sum;
}

double brier_score(std::span<const double> predictions, std::span<const double> probabilities) {
  require(predictions.size() == probabilities.size(), ErrorKind::LengthMismatch, "one probability per prediction");
  require(!predictions.empty(), ErrorKind::LengthMismatch, "brier score of nothing");
  double sum = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    require(predictions[i] == 0.0 || predictions[i] == 1.0, ErrorKind::OutOfDomain, "predictions must be 0 or 1");
    require(probabilities[i] >= 0.0 && probabilities[i] <= 1.0, ErrorKind::OutOfDomain, "probabilities must be in [0, 1]");
    const double d = predictions[i] - probabilities[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

nlohmann::json AssessmentReport::to_json() const {
  nlohmann::json doc{{"project_id", project_id},
                     {"predicted_severity", optional_json(predicted_severity)},
                     {"average_score", average_score},
                     {"weighted_total", weighted_total},
                     {"order_by_score", order_by_score},
                     {"order_by_weighted_score", order_by_weighted_score}};
  doc["features"] = nlohmann::json::array();
  for (const auto& f : features)
    doc["features"].push_back({{"feature", f.name},
                               {"raw", f.raw},
                               {"z", optional_json(f.z)},
                               {"score", f.score},
                               {"weighted_score", f.weighted_score},
                               {"importance", f.importance}});
  return doc;
}

AssessmentReport AssessmentReport::from_json(const nlohmann::json& doc) {
  AssessmentReport r;
  try {
    r.project_id = doc.at("project_id").get<std::string>();
    r.predicted_severity = optional_from_json(doc.at("predicted_severity"));
    r.average_score = doc.at("average_score").get<double>();
    r.weighted_total = doc.at("weighted_total").get<double>();
    r.order_by_score = doc.at("order_by_score").get<std::vector<std::string>>();
    r.order_by_weighted_score = doc.at("order_by_weighted_score").get<std::vector<std::string>>();
    for (const auto& f : doc.at("features"))
      r.features.push_back({f.at("feature").get<std::string>(), f.at("raw").get<double>(), optional_from_json(f.at("z")),
                            f.at("score").get<double>(), f.at("importance").get<double>(),
                            f.at("weighted_score").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("report JSON: ") + e.what());
  }
  return r;
}

std::string AssessmentReport::table() const {
  std::ostringstream out;
  std::size_t width = std::string_view("feature").size();
  for (const auto& f : features) width = std::max(width, f.name.size());
  const auto cell = [&](double v) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(5) << v;
    return c.str();
  };
  out << std::left << std::setw(static_cast<int>(width)) << "feature";
  for (const char* h : {"raw", "z", "score", "weighted_score", "importance"}) out << "  " << std::right << std::setw(14) << h;
  out << '\n';
  for (const auto& name : order_by_weighted_score) {
    const auto& f = *std::find_if(features.begin(), features.end(), [&](const FeatureReport& x) { return x.name == name; });
    out << std::left << std::setw(static_cast<int>(width)) << f.name << std::right;
    out << "  " << std::setw(14) << cell(f.raw);
    out << "  " << std::setw(14) << (f.z ? cell(*f.z) : std::string("-"));
    out << "  " << std::setw(14) << cell(f.score);
    out << "  " << std::setw(14) << cell(f.weighted_score);
    out << "  " << std::setw(14) << cell(f.importance) << '\n';
  }
  out << "average score: " << cell(average_score) << '\n';
  out << "weighted total: " << cell(weighted_total) << '\n';
  out << "predicted severity: ";
  if (predicted_severity) {
    out << std::fixed << std::setprecision(2) << *predicted_severity;
  } else {
    out << "n/a";
  }
  out << '\n';
  return out.str();
}

AssessmentReport make_report(std::string project_id, const std::vector<std::string>& names,
                             std::span<const double> raw, std::span<const double> scores,
                             std::span<const double> importances, std::span<const std::optional<double>> z,
                             std::optional<double> severity) {
  require(raw.size() == names.size() && scores.size() == names.size() && importances.size() == names.size() &&
              (z.empty() || z.size() == names.size()),
          ErrorKind::LengthMismatch, "report columns differ in length");
  const Eigen::Map<const VectorXd> s(scores.data(), static_cast<Eigen::Index>(scores.size()));
  const Eigen::Map<const VectorXd> w(importances.data(), static_cast<Eigen::Index>(importances.size()));
  const auto ws = weighted_scores(s, w);
  AssessmentReport r;
  r.project_id = std::move(project_id);
  r.predicted_severity = severity;
  r.average_score = ws.average;
  r.weighted_total = ws.dot;
  for (std::size_t i = 0; i < names.size(); ++i)
    r.features.push_back({names[i], raw[i], z.empty() ? std::nullopt : z[i], scores[i], importances[i],
                          ws.weighted(static_cast<Eigen::Index>(i))});
  for (auto i : stable_descending(scores)) r.order_by_score.push_back(names[i]);
  const auto weighted = to_std_vector(ws.weighted);
  for (auto i : stable_descending(weighted)) r.order_by_weighted_score.push_back(names[i]);
  return r;
}

AssessmentReport assess(std::string project_id, const CurveSet& project, const ProcessModel& pm,
                        std::span<const FeatureDef> defs, std::span<const ScoreTransform> transforms,
                        std::span<const double> importances, const Regressor* model) {
  require(importances.size() == defs.size(), ErrorKind::LengthMismatch, "one importance per feature");
  const auto deviations = compute_all(pm, project, defs);
  std::vector<std::string> names;
  std::vector<double> raw, scores;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const auto name = defs[i].name();
    const auto it = std::find_if(transforms.begin(), transforms.end(),
                                 [&](const ScoreTransform& t) { return t.feature_id() == name; });
    require(it != transforms.end(), ErrorKind::MissingTransform, "no transform for feature '" + name + "'");
    names.push_back(name);
    raw.push_back(deviations[i].raw);
    scores.push_back((*it)(score_input(defs[i].kind, deviations[i].raw)));
  }
  std::vector<std::optional<double>> z;
  std::optional<double> severity;
  if (model) {
    const auto x = to_vector(raw);
    const auto& scaling = model->standardization();
    require(scaling.mean.size() == x.size(), ErrorKind::LengthMismatch, "model was trained on other features");
    for (Eigen::Index j = 0; j < x.size(); ++j) z.push_back((x(j) - scaling.mean(j)) / scaling.sd(j));
    severity = model->predict(x);
  }
  return make_report(std::move(project_id), names, raw, scores, importances, z, severity);
}

}  // namespace procscore
