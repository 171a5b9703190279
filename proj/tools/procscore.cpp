// procscore command-line front end. Every subcommand reads its section of a
// JSON run configuration; --seed, --out and --format override the matching
// top-level keys. Exit codes: 0 success, 2 input error, 1 internal error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "procscore/activity_curve.hpp"
#include "procscore/assessment.hpp"
#include "procscore/classification.hpp"
#include "procscore/csv.hpp"
#include "procscore/deviations.hpp"
#include "procscore/repo_mining.hpp"
#include "procscore/scoring.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace procscore;

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Run {
  json config;
  fs::path base;
  fs::path out;
  std::uint64_t seed = 1;
  DatasetFormat format = DatasetFormat::Csv;
  std::string hash;

  const json& section(const std::string& name) const {
    static const json empty = json::object();
    return config.contains(name) ? config.at(name) : empty;
  }

  std::vector<std::string> provenance() const { return {"config_hash=" + hash, "seed=" + std::to_string(seed)}; }
  json provenance_json() const { return {{"config_hash", hash}, {"seed", seed}}; }

  fs::path path(const json& sec, const std::string& key) const {
    require(sec.contains(key), ErrorKind::InvalidConfig, "missing config entry '" + key + "'");
    const fs::path p = sec.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
  }
  std::optional<fs::path> optional_path(const json& sec, const std::string& key) const {
    if (!sec.contains(key) || sec.at(key).is_null()) return std::nullopt;
    return path(sec, key);
  }

  void write(const std::string& name, std::string_view content) const {
    fs::create_directories(out);
    write_file(out / name, content);
  }
  void write_json(const std::string& name, json doc) const {
    doc["provenance"] = provenance_json();
    write(name, doc.dump(2) + "\n");
  }
};

json read_json(const fs::path& p) {
  const auto text = read_file(p);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, p.string() + ": " + e.what());
  }
}

// Records that break the dataset invariants are bad input, not a bug here.
std::vector<CommitRecord> load_commits(const fs::path& p) {
  try {
    return import_dataset(p);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvariantViolation) throw;
    fail(ErrorKind::ParseError, p.string() + ": " + e.what());
  }
}

template <typename T>
T value_or(const json& sec, const std::string& key, T fallback) {
  return sec.contains(key) ? sec.at(key).get<T>() : fallback;
}

// Inline array or path to a feature-definition file.
json feature_document(const Run& run, const json& sec) {
  require(sec.contains("features"), ErrorKind::InvalidConfig, "missing config entry 'features'");
  return sec.at("features").is_string() ? read_json(run.path(sec, "features")) : sec.at("features");
}

std::string file_stem(std::string id) {
  for (auto& c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  return id;
}

// -- mine --------------------------------------------------------------------

void cmd_mine(const Run& run) {
  const auto& sec = run.section("mine");
  MiningOptions options;
  options.revision = value_or<std::string>(sec, "revision", "HEAD");
  if (sec.contains("keywords")) options.keywords = sec.at("keywords").get<std::vector<std::string>>();
  if (const auto profile = run.optional_path(sec, "profile")) options.profile = LanguageProfile::from_json(read_json(*profile));
  const auto repo = run.path(sec, "repo");
  require(fs::exists(repo), ErrorKind::RepositoryNotFound, "no such path: " + repo.string());
  const auto records = mine_repository(repo, options);
  fs::create_directories(run.out);
  const auto name = run.format == DatasetFormat::Csv ? "commits.csv" : "commits.json";
  export_dataset(records, run.out / name, run.format, run.provenance());
  std::cout << records.size() << " commits -> " << (run.out / name).string() << "\n";
}

// -- classify ----------------------------------------------------------------

JcdOptions jcd_options(const json& sec) {
  JcdOptions o;
  o.order = value_or(sec, "order", 1);
  o.bandwidth = parse_bandwidth_rule(value_or<std::string>(sec, "bandwidth", "sj"));
  o.use_sojourn = value_or(sec, "use_sojourn", true);
  o.net_empty_rule = value_or(sec, "net_empty_rule", false);
  return o;
}

void cmd_classify(const Run& run) {
  const auto& sec = run.section("classify");
  const auto records = load_commits(run.path(sec, "commits"));
  std::unordered_map<std::string, Activity> labels;
  if (const auto p = run.optional_path(sec, "labels")) labels = read_labels(read_file(*p));

  JcdModel model;
  if (const auto p = run.optional_path(sec, "model")) {
    const auto doc = read_json(*p);
    model = JcdModel::from_json(doc.contains("model") ? doc.at("model") : doc);
  } else {
    require(!labels.empty(), ErrorKind::InvalidConfig, "classify needs a trained model or a labels file");
    const auto schema = sec.contains("schema") ? FeatureSchema(sec.at("schema").get<std::vector<std::string>>())
                                               : FeatureSchema::default_schema();
    const auto options = jcd_options(sec);
    model = fit_jcd(training_chains(records, labels, options.order), options, schema);
    run.write_json("model.json", {{"model", model.to_json()}});
  }

  std::unordered_map<std::string, const CommitRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  CsvTable table;
  table.header = {"id", "label", "p_adaptive", "p_corrective", "p_perfective"};
  json rows = json::array();
  std::vector<Activity> predicted, truth;
  for (const auto& r : records) {
    if (r.is_merge) continue;
    auto chain = chain_ending_at(by_id, labels, r.id, model.order());
    chain.labels.back().reset();
    const auto pred = predict_jcd_marginal(model, chain);
    table.rows.push_back({r.id, std::string(1, activity_code(pred.label)), format_double(pred.posterior[0]),
                          format_double(pred.posterior[1]), format_double(pred.posterior[2])});
    rows.push_back({{"id", r.id}, {"label", to_string(pred.label)}, {"posterior", pred.posterior}});
    if (const auto it = labels.find(r.id); it != labels.end()) {
      predicted.push_back(pred.label);
      truth.push_back(it->second);
    }
  }
  if (run.format == DatasetFormat::Csv) run.write("predictions.csv", to_csv(table, run.provenance()));
  else run.write_json("predictions.json", {{"predictions", rows}});
  if (!truth.empty()) {
    const auto metrics = evaluate(predicted, truth);
    run.write_json("metrics.json", {{"metrics", metrics.to_json()}, {"n", truth.size()}});
    std::cout << "accuracy " << metrics.accuracy << ", kappa " << metrics.kappa << " on " << truth.size() << " labeled commits\n";
  }
  std::cout << table.rows.size() << " commits classified\n";
}

// -- curves ------------------------------------------------------------------

void write_curve_set(const Run& run, const CurveSet& curves, int grid, bool svg) {
  json doc{{"curves", json::object()}};
  for (const auto& [name, curve] : curves) {
    run.write("curve_" + file_stem(name) + ".csv", curve_table_csv(curve, grid, run.provenance()));
    doc["curves"][name] = curve.to_json();
  }
  run.write_json("curves.json", doc);
  if (svg) run.write("curves.svg", curves_svg(curves, grid));
}

void cmd_curves(const Run& run) {
  const auto& sec = run.section("curves");
  const int grid = value_or(sec, "grid", 512);
  const bool svg = value_or(sec, "svg", false);
  const auto rule = parse_bandwidth_rule(value_or<std::string>(sec, "bandwidth", "sj"));

  if (sec.contains("projects")) {
    // Severity-weighted process model from per-project curve files.
    std::vector<std::map<std::string, ActivityCurve>> projects;
    std::vector<double> weights;
    for (const auto& entry : sec.at("projects")) {
      projects.push_back(ProcessModel::from_json(read_json(run.path(entry, "curves"))).curves);
      weights.push_back(entry.at("weight").get<double>());
    }
    const auto pm = build_process_model(projects, weights);
    run.write_json("process_model.json", pm.to_json());
    write_curve_set(run, pm.curves, grid, svg);
    std::cout << "process model of " << projects.size() << " projects\n";
    return;
  }

  std::map<std::string, std::vector<double>> times, weights;
  if (const auto commits = run.optional_path(sec, "commits")) {
    const auto records = load_commits(*commits);
    const auto labels = read_labels(read_file(run.path(sec, "labels")));
    std::vector<double> stamps;
    std::vector<Activity> acts;
    for (const auto& r : records) {
      const auto it = labels.find(r.id);
      if (r.is_merge || it == labels.end()) continue;
      stamps.push_back(static_cast<double>(r.author_timestamp));
      acts.push_back(it->second);
    }
    const auto t = normalize_project_time(stamps);
    for (std::size_t i = 0; i < t.size(); ++i) {
      times[std::string(to_string(acts[i]))].push_back(t[i]);
      weights[std::string(to_string(acts[i]))].push_back(1.0);
    }
  }
  if (const auto issues_path = run.optional_path(sec, "issues")) {
    const auto issues = read_issues(read_file(*issues_path));
    std::vector<double> stamps;
    for (const auto& i : issues) stamps.push_back(i.timestamp);
    const auto t = normalize_project_time(stamps);
    for (std::size_t i = 0; i < t.size(); ++i) {
      times[std::string(to_string(issues[i].activity))].push_back(t[i]);
      weights[std::string(to_string(issues[i].activity))].push_back(issues[i].hours);
    }
  }
  require(!times.empty(), ErrorKind::InvalidConfig, "curves needs commits with labels, issues or projects");
  CurveSet curves;
  for (const auto& [name, ts] : times) {
    std::vector<Event> events;
    for (std::size_t i = 0; i < ts.size(); ++i) events.push_back({ts[i], weights[name][i]});
    curves.emplace(name, build_curve(events, rule));
  }
  write_curve_set(run, curves, grid, svg);
  std::cout << curves.size() << " activity curves on " << grid << " points\n";
}

// -- calibrate / simulate ----------------------------------------------------

CalibrationConfig calibration_config(const Run& run, const json& sec) {
  json doc = json::object();
  for (const auto* key : {"n_processes", "events", "curve_bandwidth", "transform_bandwidth"})
    if (sec.contains(key)) doc[key] = sec.at(key);
  doc["seed"] = run.seed;
  return CalibrationConfig::from_json(doc);
}

void cmd_calibrate(const Run& run) {
  const auto& sec = run.section("calibrate");
  const auto features = parse_scored_features(feature_document(run, sec));
  require(!features.empty(), ErrorKind::InvalidConfig, "no feature definitions");
  const auto config = calibration_config(run, sec);
  const auto pm = ProcessModel::from_json(read_json(run.path(sec, "process_model")));
  const auto result = calibrate_features(config, pm, features);
  json all = json::array();
  for (const auto& t : result.transforms) {
    auto doc = t.to_json();
    run.write_json("transform_" + file_stem(t.feature_id()) + ".json", doc);
    all.push_back(std::move(doc));
  }
  run.write_json("transforms.json", {{"calibration", config.to_json()}, {"transforms", all}});
  run.write("calibration_report.csv", calibration_report_csv(result.transforms, run.provenance()));
  std::cout << result.transforms.size() << " transforms from " << config.n_processes << " simulated processes\n";
}

void cmd_simulate(const Run& run) {
  const auto& sec = run.section("simulate");
  json doc = sec;
  if (!doc.contains("n_processes")) doc["n_processes"] = 100;
  const auto config = calibration_config(run, doc);
  const auto curves = simulate_processes(config);
  if (run.format == DatasetFormat::Json) {
    json list = json::array();
    for (const auto& c : curves) list.push_back(c.to_json());
    run.write_json("simulated.json", {{"calibration", config.to_json()}, {"curves", list}});
  } else {
    const int grid = value_or(sec, "grid", 64);
    require(grid >= 2, ErrorKind::InvalidGrid, "grid needs at least two points");
    CsvTable table;
    table.header = {"process", "x", "f"};
    for (std::size_t j = 0; j < curves.size(); ++j)
      for (int i = 0; i < grid; ++i) {
        const double x = static_cast<double>(i) / (grid - 1);
        table.rows.push_back({std::to_string(j), format_double(x), format_double(curves[j](x))});
      }
    run.write("simulated.csv", to_csv(table, run.provenance()));
  }
  std::cout << curves.size() << " random processes\n";
}

// -- assess ------------------------------------------------------------------

std::vector<ScoreTransform> load_transforms(const fs::path& p) {
  const auto doc = read_json(p);
  std::vector<ScoreTransform> out;
  if (doc.is_object() && doc.contains("transforms")) {
    for (const auto& t : doc.at("transforms")) out.push_back(ScoreTransform::from_json(t));
  } else if (doc.is_array()) {
    for (const auto& t : doc) out.push_back(ScoreTransform::from_json(t));
  } else {
    out.push_back(ScoreTransform::from_json(doc));
  }
  return out;
}

void cmd_assess(const Run& run) {
  const auto& sec = run.section("assess");
  std::vector<FeatureDef> defs;
  for (const auto& f : parse_scored_features(feature_document(run, sec))) defs.push_back(f.def);
  require(!defs.empty(), ErrorKind::InvalidConfig, "no feature definitions");
  std::vector<ScoreTransform> transforms;
  for (const auto& p : sec.at("transforms").is_array() ? sec.at("transforms") : json::array({sec.at("transforms")})) {
    const fs::path path = p.get<std::string>();
    const auto more = load_transforms(path.is_absolute() ? path : run.base / path);
    transforms.insert(transforms.end(), more.begin(), more.end());
  }
  const auto pm = ProcessModel::from_json(read_json(run.path(sec, "process_model")));
  const auto project = ProcessModel::from_json(read_json(run.path(sec, "project"))).curves;

  std::optional<Regressor> model;
  std::optional<VectorXd> learned;
  if (const auto p = run.optional_path(sec, "model")) {
    const auto doc = read_json(*p);
    model = Regressor::from_json(doc.contains("model") ? doc.at("model") : doc);
  } else if (sec.contains("training")) {
    const auto& training = sec.at("training");
    const auto features = read_feature_matrix(read_file(run.path(training, "features")));
    const auto truth = read_ground_truth(read_file(run.path(training, "truth")));
    const auto data = make_dataset(features, truth);
    std::vector<std::string> names;
    for (const auto& d : defs) names.push_back(d.name());
    require(data.names == names, ErrorKind::InvalidConfig, "training columns must match the feature definitions");
    const auto spec = training.contains("regressor") ? RegressorSpec::from_json(training.at("regressor")) : RegressorSpec{};
    model = fit_regressor(spec, data);
    run.write_json("regressor.json", {{"model", model->to_json()}});
    if (data.size() >= 3) learned = permutation_importance(*model, data, value_or(training, "importance_repeats", 20), run.seed);
  }

  std::vector<double> importances;
  if (sec.contains("importances")) importances = sec.at("importances").get<std::vector<double>>();
  else if (learned) importances = to_std_vector(*learned);
  else importances.assign(defs.size(), 1.0 / static_cast<double>(defs.size()));

  const auto report = assess(value_or<std::string>(sec, "project_id", "project"), project, pm, defs, transforms,
                             importances, model ? &*model : nullptr);
  run.write_json("report.json", report.to_json());
  std::string table;
  for (const auto& line : run.provenance()) table += "# " + line + "\n";
  table += report.table();
  run.write("report.txt", table);
  std::cout << report.table();
}

int exit_code(ErrorKind kind) { return kind == ErrorKind::InvariantViolation ? 1 : 2; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procscore: repository mining, activity curves and process-conformance scoring"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out, format;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--format", format, "csv or json (overrides the config)")->check(CLI::IsMember({"csv", "json"}));

  const std::map<std::string, std::pair<std::string, void (*)(const Run&)>> commands{
      {"mine", {"mine a git repository into a commit dataset", cmd_mine}},
      {"classify", {"train or apply the commit classifier", cmd_classify}},
      {"curves", {"activity curves of a project, or a process model", cmd_curves}},
      {"calibrate", {"fit score transforms on simulated processes", cmd_calibrate}},
      {"assess", {"score a project against a process model", cmd_assess}},
      {"simulate", {"sample random processes", cmd_simulate}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Run run;
    run.config = json::object();
    if (!config_path.empty()) {
      run.config = read_json(config_path);
      require(run.config.is_object(), ErrorKind::InvalidConfig, "configuration must be a JSON object");
      run.base = fs::path(config_path).parent_path();
    }
    if (seed) run.config["seed"] = *seed;
    if (!out.empty()) run.config["out"] = out;
    if (!format.empty()) run.config["format"] = format;
    run.seed = value_or<std::uint64_t>(run.config, "seed", 1);
    run.out = value_or<std::string>(run.config, "out", ".");
    // Paths in the config file are relative to it; --out is relative to the cwd.
    if (out.empty() && run.out.is_relative()) run.out = run.base / run.out;
    run.format = parse_dataset_format(value_or<std::string>(run.config, "format", "csv"));
    // The output location does not change any result, so it stays out of the hash.
    auto hashed = run.config;
    hashed.erase("out");
    run.hash = hex(fnv1a(hashed.dump()));
    commands.at(app.get_subcommands().front()->get_name()).second(run);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error: configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
