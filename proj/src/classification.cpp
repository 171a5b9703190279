#include "procscore/classification.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "procscore/csv.hpp"

namespace procscore {
namespace {

constexpr double kDensityFloor = 1e-12;

std::optional<double> record_field(const CommitRecord& r, std::string_view name) {
  static const std::map<std::string_view, std::int64_t CommitRecord::*, std::less<>> counters{
      {"files_added_gross", &CommitRecord::files_added_gross},
      {"files_modified_gross", &CommitRecord::files_modified_gross},
      {"files_deleted_gross", &CommitRecord::files_deleted_gross},
      {"files_renamed_gross", &CommitRecord::files_renamed_gross},
      {"files_added_net", &CommitRecord::files_added_net},
      {"files_modified_net", &CommitRecord::files_modified_net},
      {"files_deleted_net", &CommitRecord::files_deleted_net},
      {"files_renamed_net", &CommitRecord::files_renamed_net},
      {"files_binary", &CommitRecord::files_binary},
      {"lines_added_gross", &CommitRecord::lines_added_gross},
      {"lines_deleted_gross", &CommitRecord::lines_deleted_gross},
      {"lines_added_net", &CommitRecord::lines_added_net},
      {"lines_deleted_net", &CommitRecord::lines_deleted_net},
  };
  if (const auto it = counters.find(name); it != counters.end()) return static_cast<double>(r.*(it->second));
  if (name == "density") return r.density;
  if (name == "sojourn_seconds") return r.sojourn_seconds ? static_cast<double>(*r.sojourn_seconds) : 0.0;
  if (name == "has_sojourn") return r.sojourn_seconds ? 1.0 : 0.0;
  if (name == "log_sojourn") return r.sojourn_seconds ? std::log1p(static_cast<double>(*r.sojourn_seconds)) : 0.0;
  constexpr std::string_view suffix = "_count";
  if (name.size() > suffix.size() && name.substr(name.size() - suffix.size()) == suffix) {
    const auto keyword = name.substr(0, name.size() - suffix.size());
    if (const auto it = r.keyword_counts.find(std::string(keyword)); it != r.keyword_counts.end())
      return static_cast<double>(it->second);
  }
  return std::nullopt;
}

bool is_known_field(std::string_view name) {
  CommitRecord probe;
  if (record_field(probe, name)) return true;
  constexpr std::string_view suffix = "_count";
  return name.size() > suffix.size() && name.substr(name.size() - suffix.size()) == suffix;
}

std::size_t context_count(int order) {
  std::size_t n = 1;
  for (int i = 0; i < order; ++i) n *= kNumActivities;
  return n;
}

std::size_t context_index(std::span<const Activity> labels) {
  std::size_t idx = 0;
  for (auto a : labels) idx = idx * kNumActivities + index_of(a);
  return idx;
}

std::vector<Activity> context_labels(std::size_t idx, int order) {
  std::vector<Activity> labels(static_cast<std::size_t>(order));
  for (int i = order - 1; i >= 0; --i) {
    labels[static_cast<std::size_t>(i)] = static_cast<Activity>(idx % kNumActivities);
    idx /= kNumActivities;
  }
  return labels;
}

double robust_bandwidth(const BandwidthRule& rule, const VectorXd& samples, const VectorXd& pooled) {
  if (const auto* fixed = std::get_if<FixedBandwidth>(&rule)) return fixed->h;
  for (const VectorXd* candidate : {&samples, &pooled}) {
    if (candidate->size() < 2) continue;
    try {
      return select_bandwidth(rule, *candidate);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSample) throw;
    }
  }
  return 1.0;
}

double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double sum = 0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

nlohmann::json kde_to_json(const GaussianKde<double>& kde) {
  return {{"bandwidth", kde.bandwidth()}, {"samples", to_std_vector(kde.samples())}};
}

GaussianKde<double> kde_from_json(const nlohmann::json& doc) {
  return GaussianKde<double>(to_vector(doc.at("samples").get<std::vector<double>>()), doc.at("bandwidth").get<double>());
}

}  // namespace

std::string_view to_string(Activity a) {
  switch (a) {
    case Activity::Adaptive: return "adaptive";
    case Activity::Corrective: return "corrective";
    case Activity::Perfective: return "perfective";
  }
  return "unknown";
}

char activity_code(Activity a) { return to_string(a)[0]; }

Activity parse_activity(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto a : kActivities)
    if (lower == to_string(a) || (lower.size() == 1 && lower[0] == activity_code(a))) return a;
  fail(ErrorKind::ParseError, "unknown activity label: '" + std::string(text) + "'");
}

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
  for (const auto& name : names_)
    require(is_known_field(name), ErrorKind::SchemaFieldUnknown, "unknown feature field: " + name);
}

FeatureSchema FeatureSchema::default_schema() {
  std::vector<std::string> names{"files_added_net", "files_modified_net", "files_deleted_net", "files_renamed_net",
                                 "lines_added_net", "lines_deleted_net",  "density",           "log_sojourn"};
  for (const char* kw : {"fix", "bug", "add", "implement", "refactor", "test", "remove", "update"})
    names.push_back(std::string(kw) + "_count");
  return FeatureSchema(std::move(names));
}

VectorXd featurize(const CommitRecord& record, const FeatureSchema& schema) {
  require(!record.is_merge, ErrorKind::InvariantViolation, "merge commits are not featurized: " + record.id);
  VectorXd x(static_cast<Eigen::Index>(schema.size()));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto value = record_field(record, schema.names()[i]);
    require(value.has_value(), ErrorKind::SchemaFieldUnknown,
            "record " + record.id + " has no field " + schema.names()[i]);
    x(static_cast<Eigen::Index>(i)) = *value;
  }
  return x;
}

ZeroRule zero_rule_fit(std::span<const Activity> labels) {
  require(!labels.empty(), ErrorKind::EmptyTrainingSet, "zero-rule needs labels");
  std::array<std::size_t, kNumActivities> counts{};
  for (auto a : labels) ++counts[index_of(a)];
  const auto best = std::max_element(counts.begin(), counts.end());  // first maximum wins ties
  return ZeroRule{static_cast<Activity>(best - counts.begin())};
}

Activity keyword_rule(const CommitRecord& record, const KeywordRuleOptions& options) {
  static const std::vector<std::string> corrective{"fix", "bug", "error", "fail"};
  static const std::vector<std::string> adaptive{"implement", "add", "feature", "new"};
  static const std::vector<std::string> perfective{"refactor", "clean", "style", "format", "rename", "doc"};
  const auto mentions = [&](const std::vector<std::string>& words) {
    const auto counts = count_keywords(record.message, words);
    return std::any_of(counts.begin(), counts.end(), [](const auto& kv) { return kv.second > 0; });
  };
  const bool adaptive_allowed = !(options.net_empty_rule && record.lines_added_net == 0);
  if (mentions(corrective)) return Activity::Corrective;
  if (adaptive_allowed && mentions(adaptive)) return Activity::Adaptive;
  if (mentions(perfective)) return Activity::Perfective;
  return Activity::Perfective;
}

void CommitChain::validate() const {
  require(!commits.empty(), ErrorKind::InvariantViolation, "empty commit chain");
  require(labels.size() == commits.size(), ErrorKind::InvariantViolation, "chain labels do not match commits");
  for (std::size_t i = 0; i < commits.size(); ++i) {
    require(!commits[i].is_merge, ErrorKind::InvariantViolation, "merge commit in chain: " + commits[i].id);
    if (i > 0)
      require(!commits[i].parent_ids.empty() && commits[i].parent_ids.front() == commits[i - 1].id,
              ErrorKind::InvariantViolation, "broken first-parent link at " + commits[i].id);
  }
}

const GaussianKde<double>& JcdModel::feature_density(Activity a, std::size_t feature) const {
  require(present_[index_of(a)], ErrorKind::InvariantViolation, "class absent from training");
  return densities_[index_of(a)].at(feature);
}

double JcdModel::feature_log_density(Activity a, const VectorXd& x) const {
  double total = 0;
  const auto& per_feature = densities_[index_of(a)];
  for (std::size_t f = 0; f < per_feature.size(); ++f)
    total += std::log(std::max(per_feature[f].pdf(x(static_cast<Eigen::Index>(f))), kDensityFloor));
  return total;
}

std::optional<double> JcdModel::sojourn_log_density(std::optional<Activity> from, Activity to,
                                                    const CommitRecord& c) const {
  if (!options_.use_sojourn || !c.sojourn_seconds) return std::nullopt;
  const GaussianKde<double>* kde = nullptr;
  if (from && sojourn_by_pair_[index_of(*from)][index_of(to)]) kde = &*sojourn_by_pair_[index_of(*from)][index_of(to)];
  else if (sojourn_by_class_[index_of(to)]) kde = &*sojourn_by_class_[index_of(to)];
  if (!kde) return std::nullopt;
  return std::log(std::max(kde->pdf(std::log1p(static_cast<double>(*c.sojourn_seconds))), kDensityFloor));
}

JcdModel fit_jcd(const std::vector<CommitChain>& chains, const JcdOptions& options, const FeatureSchema& schema) {
  require(options.order >= 0 && options.order <= 3, ErrorKind::InvalidConfig, "JCD order must be 0..3");
  require(!chains.empty(), ErrorKind::EmptyTrainingSet, "no training chains");
  const auto k = static_cast<std::size_t>(options.order);

  JcdModel model;
  model.options_ = options;
  model.schema_ = schema;

  std::array<std::vector<VectorXd>, kNumActivities> features;
  std::array<std::vector<double>, kNumActivities> sojourn_class;
  std::array<std::array<std::vector<double>, kNumActivities>, kNumActivities> sojourn_pair;
  const std::size_t n_contexts = context_count(options.order);
  MatrixXd counts = MatrixXd::Zero(static_cast<Eigen::Index>(n_contexts), kNumActivities);

  for (const auto& chain : chains) {
    chain.validate();
    require(chain.size() > k, ErrorKind::OrderMismatch, "training chain shorter than order + 1");
    std::vector<Activity> window;
    for (std::size_t i = chain.size() - k - 1; i < chain.size(); ++i) {
      require(chain.labels[i].has_value(), ErrorKind::InvariantViolation, "training chain has unlabeled commits");
      window.push_back(*chain.labels[i]);
    }
    const Activity label = window.back();
    const auto c = index_of(label);
    const auto ctx = context_index(std::span<const Activity>(window).first(k));
    counts(static_cast<Eigen::Index>(ctx), static_cast<Eigen::Index>(c)) += 1.0;
    features[c].push_back(featurize(chain.principal(), schema));
    if (const auto& s = chain.principal().sojourn_seconds) {
      const double v = std::log1p(static_cast<double>(*s));
      sojourn_class[c].push_back(v);
      if (k > 0) sojourn_pair[index_of(window[k - 1])][c].push_back(v);
    }
  }

  std::size_t n_present = 0;
  double total = 0;
  for (std::size_t c = 0; c < kNumActivities; ++c) {
    const auto n = features[c].size();
    model.present_[c] = n > 0;
    if (n > 0) {
      require(n >= 3, ErrorKind::InsufficientData,
              std::string("class ") + std::string(to_string(static_cast<Activity>(c))) + " has fewer than 3 examples");
      ++n_present;
    }
    total += static_cast<double>(n);
  }
  for (std::size_t c = 0; c < kNumActivities; ++c)
    model.priors_[c] = static_cast<double>(features[c].size()) / total;

  // Add-one smoothing over classes seen in training.
  model.transitions_ = MatrixXd::Zero(static_cast<Eigen::Index>(n_contexts), kNumActivities);
  model.context_prior_ = VectorXd::Zero(static_cast<Eigen::Index>(n_contexts));
  double context_total = 0;
  for (std::size_t ctx = 0; ctx < n_contexts; ++ctx) {
    const auto labels = context_labels(ctx, options.order);
    const bool valid = std::all_of(labels.begin(), labels.end(), [&](Activity a) { return model.present_[index_of(a)]; });
    if (!valid) continue;
    const auto row = static_cast<Eigen::Index>(ctx);
    const double row_total = counts.row(row).sum();
    for (std::size_t c = 0; c < kNumActivities; ++c)
      if (model.present_[c])
        model.transitions_(row, static_cast<Eigen::Index>(c)) =
            (counts(row, static_cast<Eigen::Index>(c)) + 1.0) / (row_total + static_cast<double>(n_present));
    model.context_prior_(row) = row_total + 1.0;
    context_total += row_total + 1.0;
  }
  model.context_prior_ /= context_total;

  const auto n_features = static_cast<Eigen::Index>(schema.size());
  for (Eigen::Index f = 0; f < n_features; ++f) {
    std::vector<double> pooled_values;
    for (const auto& per_class : features)
      for (const auto& x : per_class) pooled_values.push_back(x(f));
    const VectorXd pooled = to_vector(pooled_values);
    for (std::size_t c = 0; c < kNumActivities; ++c) {
      if (!model.present_[c]) continue;
      VectorXd samples(static_cast<Eigen::Index>(features[c].size()));
      for (std::size_t i = 0; i < features[c].size(); ++i) samples(static_cast<Eigen::Index>(i)) = features[c][i](f);
      model.densities_[c].emplace_back(samples, robust_bandwidth(options.bandwidth, samples, pooled));
    }
  }

  std::vector<double> all_sojourn;
  for (const auto& s : sojourn_class) all_sojourn.insert(all_sojourn.end(), s.begin(), s.end());
  const VectorXd pooled_sojourn = to_vector(all_sojourn);
  for (std::size_t c = 0; c < kNumActivities; ++c) {
    if (!sojourn_class[c].empty()) {
      const VectorXd samples = to_vector(sojourn_class[c]);
      model.sojourn_by_class_[c].emplace(samples, robust_bandwidth(options.bandwidth, samples, pooled_sojourn));
    }
    for (std::size_t from = 0; from < kNumActivities; ++from)
      if (sojourn_pair[from][c].size() >= 2) {
        const VectorXd samples = to_vector(sojourn_pair[from][c]);
        model.sojourn_by_pair_[from][c].emplace(samples, robust_bandwidth(options.bandwidth, samples, pooled_sojourn));
      }
  }
  return model;
}

JcdModel::Prediction predict_jcd(const JcdModel& model, const CommitChain& chain) {
  require(chain.size() > static_cast<std::size_t>(model.order()), ErrorKind::OrderMismatch,
          "chain of length " + std::to_string(chain.size()) + " for a model of order " + std::to_string(model.order()));
  return predict_jcd_marginal(model, chain);
}

JcdModel::Prediction predict_jcd_marginal(const JcdModel& model, const CommitChain& chain) {
  chain.validate();
  const auto k = static_cast<std::size_t>(model.order());
  const auto& principal = chain.principal();
  const VectorXd x = featurize(principal, model.schema_);

  // Predecessor slots, oldest first; slots before the chain start are empty.
  const std::size_t available = std::min(k, chain.size() - 1);
  std::vector<const CommitRecord*> slot_commit(k, nullptr);
  std::vector<std::optional<Activity>> slot_label(k);
  std::vector<VectorXd> slot_features(k);
  for (std::size_t s = 0; s < available; ++s) {
    const std::size_t slot = k - available + s;
    const std::size_t idx = chain.size() - 1 - available + s;
    slot_commit[slot] = &chain.commits[idx];
    slot_label[slot] = chain.labels[idx];
    if (!slot_label[slot]) slot_features[slot] = featurize(chain.commits[idx], model.schema_);
  }

  const bool sojourn_usable = std::all_of(kActivities.begin(), kActivities.end(), [&](Activity a) {
    return !model.present_[index_of(a)] || model.sojourn_log_density(std::nullopt, a, principal).has_value();
  });
  const bool exclude_adaptive = model.options_.net_empty_rule && principal.lines_added_net == 0;

  std::array<double, kNumActivities> log_score;
  log_score.fill(-std::numeric_limits<double>::infinity());
  for (auto candidate : kActivities) {
    const auto c = index_of(candidate);
    if (!model.present_[c] || (exclude_adaptive && candidate == Activity::Adaptive)) continue;
    std::vector<double> terms;
    if (k == 0) {
      terms.push_back(std::log(model.priors_[c]) +
                      (sojourn_usable ? *model.sojourn_log_density(std::nullopt, candidate, principal) : 0.0));
    }
    for (std::size_t ctx = 0; k > 0 && ctx < context_count(model.order()); ++ctx) {
      const auto labels = context_labels(ctx, model.order());
      bool consistent = true;
      double term = 0;
      for (std::size_t slot = 0; slot < k && consistent; ++slot) {
        if (!model.present_[index_of(labels[slot])]) consistent = false;
        else if (slot_label[slot] && *slot_label[slot] != labels[slot]) consistent = false;
        else if (slot_commit[slot] && !slot_label[slot]) term += model.feature_log_density(labels[slot], slot_features[slot]);
      }
      if (!consistent) continue;
      const auto row = static_cast<Eigen::Index>(ctx);
      term += std::log(model.context_prior_(row)) + std::log(model.transitions_(row, static_cast<Eigen::Index>(c)));
      if (sojourn_usable) {
        std::optional<Activity> from;
        if (slot_commit[k - 1]) from = labels[k - 1];
        term += *model.sojourn_log_density(from, candidate, principal);
      }
      terms.push_back(term);
    }
    log_score[c] = log_sum_exp(terms) + model.feature_log_density(candidate, x);
  }

  JcdModel::Prediction prediction;
  const double top = *std::max_element(log_score.begin(), log_score.end());
  require(std::isfinite(top), ErrorKind::InvariantViolation, "no admissible class for " + principal.id);
  double norm = 0;
  for (std::size_t c = 0; c < kNumActivities; ++c) {
    prediction.posterior[c] = std::isfinite(log_score[c]) ? std::exp(log_score[c] - top) : 0.0;
    norm += prediction.posterior[c];
  }
  std::size_t best = 0;
  for (std::size_t c = 0; c < kNumActivities; ++c) {
    prediction.posterior[c] /= norm;
    if (prediction.posterior[c] > prediction.posterior[best]) best = c;
  }
  prediction.label = static_cast<Activity>(best);
  return prediction;
}

nlohmann::json JcdModel::to_json() const {
  nlohmann::json doc;
  doc["order"] = options_.order;
  doc["bandwidth_rule"] = to_string(options_.bandwidth);
  doc["use_sojourn"] = options_.use_sojourn;
  doc["net_empty_rule"] = options_.net_empty_rule;
  doc["schema"] = schema_.names();
  doc["present"] = present_;
  doc["priors"] = priors_;
  doc["transitions"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < transitions_.rows(); ++r)
    doc["transitions"].push_back(to_std_vector(transitions_.row(r).transpose().eval()));
  doc["context_prior"] = to_std_vector(context_prior_);
  doc["densities"] = nlohmann::json::object();
  doc["sojourn_by_class"] = nlohmann::json::object();
  doc["sojourn_by_pair"] = nlohmann::json::object();
  for (auto a : kActivities) {
    const std::string key(1, activity_code(a));
    auto& list = doc["densities"][key] = nlohmann::json::array();
    for (const auto& kde : densities_[index_of(a)]) list.push_back(kde_to_json(kde));
    if (sojourn_by_class_[index_of(a)]) doc["sojourn_by_class"][key] = kde_to_json(*sojourn_by_class_[index_of(a)]);
    for (auto to : kActivities)
      if (const auto& kde = sojourn_by_pair_[index_of(a)][index_of(to)])
        doc["sojourn_by_pair"][key + std::string(1, activity_code(to))] = kde_to_json(*kde);
  }
  return doc;
}

JcdModel JcdModel::from_json(const nlohmann::json& doc) {
  JcdModel model;
  try {
    model.options_.order = doc.at("order").get<int>();
    model.options_.bandwidth = parse_bandwidth_rule(doc.at("bandwidth_rule").get<std::string>());
    model.options_.use_sojourn = doc.at("use_sojourn").get<bool>();
    model.options_.net_empty_rule = doc.at("net_empty_rule").get<bool>();
    model.schema_ = FeatureSchema(doc.at("schema").get<std::vector<std::string>>());
    model.present_ = doc.at("present").get<std::array<bool, kNumActivities>>();
    model.priors_ = doc.at("priors").get<std::array<double, kNumActivities>>();
    const auto rows = doc.at("transitions").get<std::vector<std::vector<double>>>();
    require(rows.size() == context_count(model.options_.order), ErrorKind::ParseError, "transition table size");
    model.transitions_.resize(static_cast<Eigen::Index>(rows.size()), kNumActivities);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      require(rows[r].size() == kNumActivities, ErrorKind::ParseError, "transition row size");
      for (std::size_t c = 0; c < kNumActivities; ++c)
        model.transitions_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    model.context_prior_ = to_vector(doc.at("context_prior").get<std::vector<double>>());
    for (auto a : kActivities) {
      const std::string key(1, activity_code(a));
      for (const auto& kde : doc.at("densities").at(key)) model.densities_[index_of(a)].push_back(kde_from_json(kde));
      require(!model.present_[index_of(a)] || model.densities_[index_of(a)].size() == model.schema_.size(),
              ErrorKind::ParseError, "density count does not match schema");
      if (doc.at("sojourn_by_class").contains(key))
        model.sojourn_by_class_[index_of(a)] = kde_from_json(doc.at("sojourn_by_class").at(key));
      for (auto to : kActivities) {
        const auto pair_key = key + std::string(1, activity_code(to));
        if (doc.at("sojourn_by_pair").contains(pair_key))
          model.sojourn_by_pair_[index_of(a)][index_of(to)] = kde_from_json(doc.at("sojourn_by_pair").at(pair_key));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("JCD model JSON: ") + e.what());
  }
  return model;
}

void DiscreteHmm::validate() const {
  const auto n = initial.size();
  require(n > 0, ErrorKind::InvalidDistribution, "HMM needs at least one state");
  require(transition.rows() == n && transition.cols() == n, ErrorKind::InvalidDistribution, "transition shape");
  require(emission.rows() == n && emission.cols() > 0, ErrorKind::InvalidDistribution, "emission shape");
  const auto is_distribution = [](const auto& v) {
    return (v.array() >= 0.0).all() && std::abs(v.sum() - 1.0) <= 1e-12;
  };
  require(is_distribution(initial), ErrorKind::InvalidDistribution, "initial probabilities");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(is_distribution(transition.row(i)), ErrorKind::InvalidDistribution, "transition row " + std::to_string(i));
    require(is_distribution(emission.row(i)), ErrorKind::InvalidDistribution, "emission row " + std::to_string(i));
  }
}

namespace {

void check_observations(const DiscreteHmm& hmm, std::span<const int> observations) {
  for (int o : observations)
    require(o >= 0 && o < hmm.symbols(), ErrorKind::OutOfDomain, "observation outside the alphabet");
}

}  // namespace

double hmm_forward(const DiscreteHmm& hmm, std::span<const int> observations) {
  hmm.validate();
  check_observations(hmm, observations);
  if (observations.empty()) return 0.0;
  VectorXd alpha = hmm.initial.cwiseProduct(hmm.emission.col(observations[0]));
  double log_likelihood = 0;
  for (std::size_t t = 0;; ++t) {
    const double scale = alpha.sum();
    if (scale <= 0.0) return -std::numeric_limits<double>::infinity();
    log_likelihood += std::log(scale);
    alpha /= scale;
    if (t + 1 == observations.size()) break;
    alpha = (hmm.transition.transpose() * alpha).cwiseProduct(hmm.emission.col(observations[t + 1]));
  }
  return log_likelihood;
}

std::vector<int> hmm_viterbi(const DiscreteHmm& hmm, std::span<const int> observations) {
  hmm.validate();
  check_observations(hmm, observations);
  if (observations.empty()) return {};
  const auto n = hmm.states();
  const auto T = observations.size();
  const auto safe_log = [](double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); };

  MatrixXd delta(n, static_cast<Eigen::Index>(T));
  Eigen::MatrixXi back(n, static_cast<Eigen::Index>(T));
  for (Eigen::Index s = 0; s < n; ++s) delta(s, 0) = safe_log(hmm.initial(s)) + safe_log(hmm.emission(s, observations[0]));
  for (std::size_t t = 1; t < T; ++t) {
    const auto col = static_cast<Eigen::Index>(t);
    for (Eigen::Index s = 0; s < n; ++s) {
      Eigen::Index best = 0;
      double best_score = delta(0, col - 1) + safe_log(hmm.transition(0, s));
      for (Eigen::Index r = 1; r < n; ++r) {
        const double score = delta(r, col - 1) + safe_log(hmm.transition(r, s));
        if (score > best_score) {
          best_score = score;
          best = r;
        }
      }
      delta(s, col) = best_score + safe_log(hmm.emission(s, observations[t]));
      back(s, col) = static_cast<int>(best);
    }
  }
  std::vector<int> path(T);
  Eigen::Index last = 0;
  for (Eigen::Index s = 1; s < n; ++s)
    if (delta(s, static_cast<Eigen::Index>(T - 1)) > delta(last, static_cast<Eigen::Index>(T - 1))) last = s;
  path[T - 1] = static_cast<int>(last);
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back(path[t], static_cast<Eigen::Index>(t));
  return path;
}

DiscreteHmm fit_hmm_supervised(const std::vector<std::vector<int>>& states,
                               const std::vector<std::vector<int>>& observations, int n_states, int n_symbols,
                               double pseudocount) {
  require(states.size() == observations.size(), ErrorKind::LengthMismatch, "state and observation sequence counts");
  require(n_states > 0 && n_symbols > 0 && pseudocount >= 0.0, ErrorKind::InvalidConfig, "HMM dimensions");
  VectorXd initial = VectorXd::Constant(n_states, pseudocount);
  MatrixXd transition = MatrixXd::Constant(n_states, n_states, pseudocount);
  MatrixXd emission = MatrixXd::Constant(n_states, n_symbols, pseudocount);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    const auto& o = observations[i];
    require(s.size() == o.size(), ErrorKind::LengthMismatch, "sequence " + std::to_string(i));
    for (std::size_t t = 0; t < s.size(); ++t) {
      require(s[t] >= 0 && s[t] < n_states && o[t] >= 0 && o[t] < n_symbols, ErrorKind::OutOfDomain, "index range");
      if (t == 0) initial(s[t]) += 1.0;
      else transition(s[t - 1], s[t]) += 1.0;
      emission(s[t], o[t]) += 1.0;
    }
  }
  const auto normalize_rows = [](MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double total = m.row(r).sum();
      if (total > 0.0) m.row(r) /= total;
      else m.row(r).setConstant(1.0 / static_cast<double>(m.cols()));
    }
  };
  require(initial.sum() > 0.0, ErrorKind::EmptyTrainingSet, "no sequences and zero pseudocount");
  initial /= initial.sum();
  normalize_rows(transition);
  normalize_rows(emission);
  return DiscreteHmm{initial, transition, emission};
}

nlohmann::json ClassifierMetrics::to_json() const {
  nlohmann::json doc;
  doc["accuracy"] = accuracy;
  doc["kappa"] = kappa;
  doc["labels"] = {"a", "c", "p"};
  doc["confusion"] = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) doc["confusion"].push_back({confusion(r, 0), confusion(r, 1), confusion(r, 2)});
  return doc;
}

ClassifierMetrics evaluate(std::span<const Activity> predictions, std::span<const Activity> truths) {
  require(predictions.size() == truths.size(), ErrorKind::LengthMismatch, "predictions and truths differ in length");
  require(!predictions.empty(), ErrorKind::LengthMismatch, "nothing to evaluate");
  ClassifierMetrics m;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    ++m.confusion(static_cast<Eigen::Index>(index_of(truths[i])), static_cast<Eigen::Index>(index_of(predictions[i])));
  const double n = static_cast<double>(predictions.size());
  const double observed = static_cast<double>(m.confusion.trace()) / n;
  double chance = 0;
  for (int c = 0; c < 3; ++c)
    chance += (static_cast<double>(m.confusion.row(c).sum()) / n) * (static_cast<double>(m.confusion.col(c).sum()) / n);
  m.accuracy = observed;
  // Both raters using one single class gives chance agreement 1; perfect
  // agreement then counts as kappa 1.
  m.kappa = chance < 1.0 ? (observed - chance) / (1.0 - chance) : (observed == 1.0 ? 1.0 : 0.0);
  return m;
}

std::unordered_map<std::string, Activity> read_labels(std::string_view csv_text) {
  const auto table = parse_csv(csv_text);
  const auto id_col = table.require_column("id");
  const auto label_col = table.require_column("label");
  std::unordered_map<std::string, Activity> labels;
  for (const auto& row : table.rows)
    if (!row[label_col].empty()) labels[row[id_col]] = parse_activity(row[label_col]);
  return labels;
}

CommitChain chain_ending_at(const std::unordered_map<std::string, const CommitRecord*>& by_id,
                            const std::unordered_map<std::string, Activity>& labels, const std::string& id,
                            int order) {
  const auto lookup_label = [&](const std::string& commit) -> std::optional<Activity> {
    const auto it = labels.find(commit);
    return it == labels.end() ? std::nullopt : std::optional<Activity>(it->second);
  };
  const auto it = by_id.find(id);
  require(it != by_id.end(), ErrorKind::InvariantViolation, "unknown commit " + id);
  require(!it->second->is_merge, ErrorKind::InvariantViolation, "chains cannot end at a merge: " + id);
  std::vector<const CommitRecord*> reversed{it->second};
  while (static_cast<int>(reversed.size()) <= order) {
    const auto* current = reversed.back();
    if (current->parent_ids.empty()) break;
    const auto parent = by_id.find(current->parent_ids.front());
    if (parent == by_id.end() || parent->second->is_merge) break;
    reversed.push_back(parent->second);
  }
  CommitChain chain;
  for (auto r = reversed.rbegin(); r != reversed.rend(); ++r) {
    chain.commits.push_back(**r);
    chain.labels.push_back(lookup_label((*r)->id));
  }
  return chain;
}

std::vector<CommitChain> training_chains(const std::vector<CommitRecord>& records,
                                         const std::unordered_map<std::string, Activity>& labels, int order) {
  std::unordered_map<std::string, const CommitRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<CommitChain> chains;
  for (const auto& r : records) {
    if (r.is_merge || !labels.count(r.id)) continue;
    auto chain = chain_ending_at(by_id, labels, r.id, order);
    const bool complete = chain.size() == static_cast<std::size_t>(order) + 1 &&
                          std::all_of(chain.labels.begin(), chain.labels.end(), [](const auto& l) { return l.has_value(); });
    if (complete) chains.push_back(std::move(chain));
  }
  return chains;
}

}  // namespace procscore
