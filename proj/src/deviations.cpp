#include "procscore/deviations.hpp"

#include "procscore/csv.hpp"

namespace procscore {

std::string_view to_string(DeviationKind kind) {
  switch (kind) {
    case DeviationKind::SegmentCorrelation: return "corr";
    case DeviationKind::SegmentJsd: return "jsd";
    case DeviationKind::SegmentArea: return "area";
  }
  return "unknown";
}

DeviationKind parse_deviation_kind(std::string_view text) {
  if (text == "corr" || text == "SegmentCorrelation") return DeviationKind::SegmentCorrelation;
  if (text == "jsd" || text == "SegmentJSD" || text == "SegmentJsd") return DeviationKind::SegmentJsd;
  if (text == "area" || text == "SegmentArea") return DeviationKind::SegmentArea;
  fail(ErrorKind::InvalidConfig, "unknown deviation kind: '" + std::string(text) + "'");
}

std::string FeatureDef::name() const {
  if (!id.empty()) return id;
  return std::string(to_string(kind)) + ":" + activity + ":" + format_double(segment.a) + "-" +
         format_double(segment.b);
}

FeatureDef feature_def_from_json(const nlohmann::json& entry) {
  FeatureDef def;
  try {
    def.activity = entry.at("activity").get<std::string>();
    def.kind = parse_deviation_kind(entry.at("kind").get<std::string>());
    const auto& seg = entry.at("segment");
    require(seg.is_array() && seg.size() == 2, ErrorKind::InvalidConfig, "segment must be [a, b]");
    def.segment.a = seg[0].get<double>();
    def.segment.b = seg[1].get<double>();
    if (entry.contains("grid")) def.grid = entry.at("grid").get<int>();
    if (entry.contains("id")) def.id = entry.at("id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, std::string("feature definition: ") + e.what());
  }
  def.segment.validate();
  detail::require_feature_grid(def.grid);
  return def;
}

nlohmann::json to_json(const FeatureDef& def) {
  nlohmann::json entry{{"activity", def.activity},
                       {"kind", to_string(def.kind)},
                       {"segment", {def.segment.a, def.segment.b}},
                       {"grid", def.grid}};
  if (!def.id.empty()) entry["id"] = def.id;
  return entry;
}

std::vector<FeatureDef> parse_feature_defs(const nlohmann::json& doc) {
  const auto& items = doc.is_object() && doc.contains("features") ? doc.at("features") : doc;
  require(items.is_array(), ErrorKind::InvalidConfig, "feature definitions must be a JSON array");
  std::vector<FeatureDef> defs;
  for (const auto& entry : items) defs.push_back(feature_def_from_json(entry));
  return defs;
}

std::vector<DeviationValue> compute_all(const CurveSet& process_model, const CurveSet& project,
                                        std::span<const FeatureDef> defs) {
  const auto lookup = [](const CurveSet& set, const std::string& activity, const char* side) -> const ActivityCurve& {
    const auto it = set.find(activity);
    require(it != set.end(), ErrorKind::MissingActivity, std::string(side) + " lacks activity '" + activity + "'");
    return it->second;
  };
  std::vector<DeviationValue> out;
  out.reserve(defs.size());
  for (const auto& def : defs) {
    const auto& pm = lookup(process_model, def.activity, "process model");
    const auto& p = lookup(project, def.activity, "project");
    out.push_back({def.name(), def.kind, def.segment, deviation(def.kind, pm, p, def.segment, def.grid), def.grid});
  }
  return out;
}

std::vector<DeviationValue> compute_all(const ProcessModel& pm, const CurveSet& project,
                                        std::span<const FeatureDef> defs) {
  return compute_all(pm.curves, project, defs);
}

}  // namespace procscore
