#include "procscore/csv.hpp"
#include "procscore/error.hpp"
#include "procscore/repo_mining.hpp"

namespace procscore {
namespace {

struct CounterField {
  const char* name;
  std::int64_t CommitRecord::*member;
};

constexpr CounterField kCounters[] = {
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

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(sep);
    out += items[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(sep, start);
    out.emplace_back(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string encode_keywords(const std::map<std::string, std::int64_t>& counts) {
  std::vector<std::string> parts;
  for (const auto& [word, count] : counts) parts.push_back(word + "=" + std::to_string(count));
  return join(parts, ';');
}

std::map<std::string, std::int64_t> decode_keywords(std::string_view text) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& part : split(text, ';')) {
    const auto eq = part.find('=');
    require(eq != std::string::npos, ErrorKind::ParseError, "bad keyword count entry: " + part);
    counts[part.substr(0, eq)] = parse_int(std::string_view(part).substr(eq + 1));
  }
  return counts;
}

bool parse_flag(std::string_view text) {
  require(text == "0" || text == "1", ErrorKind::ParseError, "flag must be 0 or 1: " + std::string(text));
  return text == "1";
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view text) {
  if (text == "csv") return DatasetFormat::Csv;
  if (text == "json") return DatasetFormat::Json;
  fail(ErrorKind::InvalidConfig, "unknown format: " + std::string(text));
}

const std::vector<std::string>& commit_csv_header() {
  static const std::vector<std::string> header = [] {
    std::vector<std::string> h{"id", "parent_ids", "author_timestamp", "message"};
    for (const auto& field : kCounters) h.emplace_back(field.name);
    for (const char* name : {"keyword_counts", "density", "is_merge", "is_initial", "sojourn_seconds"}) h.emplace_back(name);
    return h;
  }();
  return header;
}

std::string commits_to_csv(const std::vector<CommitRecord>& records) {
  CsvTable table;
  table.header = commit_csv_header();
  for (const auto& r : records) {
    std::vector<std::string> row{r.id, join(r.parent_ids, ' '), std::to_string(r.author_timestamp), r.message};
    for (const auto& field : kCounters) row.push_back(std::to_string(r.*field.member));
    row.push_back(encode_keywords(r.keyword_counts));
    row.push_back(format_double(r.density));
    row.push_back(r.is_merge ? "1" : "0");
    row.push_back(r.is_initial ? "1" : "0");
    row.push_back(r.sojourn_seconds ? std::to_string(*r.sojourn_seconds) : "");
    table.rows.push_back(std::move(row));
  }
  return to_csv(table);
}

std::vector<CommitRecord> commits_from_csv(std::string_view text) {
  const auto table = parse_csv(text);
  std::vector<std::size_t> columns;
  for (const auto& name : commit_csv_header()) columns.push_back(table.require_column(name));
  std::vector<CommitRecord> records;
  for (const auto& row : table.rows) {
    CommitRecord r;
    std::size_t c = 0;
    const auto next = [&]() -> const std::string& { return row[columns[c++]]; };
    r.id = next();
    r.parent_ids = split(next(), ' ');
    r.author_timestamp = parse_int(next());
    r.message = next();
    for (const auto& field : kCounters) r.*field.member = parse_int(next());
    r.keyword_counts = decode_keywords(next());
    r.density = parse_double(next());
    r.is_merge = parse_flag(next());
    r.is_initial = parse_flag(next());
    if (const auto& sojourn = next(); !sojourn.empty()) r.sojourn_seconds = parse_int(sojourn);
    validate_record(r);
    records.push_back(std::move(r));
  }
  return records;
}

nlohmann::json commits_to_json(const std::vector<CommitRecord>& records) {
  auto out = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json o;
    o["id"] = r.id;
    o["parent_ids"] = r.parent_ids;
    o["author_timestamp"] = r.author_timestamp;
    o["message"] = r.message;
    for (const auto& field : kCounters) o[field.name] = r.*field.member;
    o["keyword_counts"] = r.keyword_counts;
    o["density"] = r.density;
    o["is_merge"] = r.is_merge;
    o["is_initial"] = r.is_initial;
    o["sojourn_seconds"] = r.sojourn_seconds ? nlohmann::json(*r.sojourn_seconds) : nlohmann::json(nullptr);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<CommitRecord> commits_from_json(const nlohmann::json& doc) {
  const auto& items = doc.is_object() && doc.contains("records") ? doc.at("records") : doc;
  require(items.is_array(), ErrorKind::ParseError, "commit dataset JSON must be an array of records");
  std::vector<CommitRecord> records;
  try {
    for (const auto& o : items) {
      CommitRecord r;
      r.id = o.at("id").get<std::string>();
      r.parent_ids = o.at("parent_ids").get<std::vector<std::string>>();
      r.author_timestamp = o.at("author_timestamp").get<std::int64_t>();
      r.message = o.at("message").get<std::string>();
      for (const auto& field : kCounters) r.*field.member = o.at(field.name).get<std::int64_t>();
      r.keyword_counts = o.at("keyword_counts").get<std::map<std::string, std::int64_t>>();
      r.density = o.at("density").get<double>();
      r.is_merge = o.at("is_merge").get<bool>();
      r.is_initial = o.at("is_initial").get<bool>();
      if (!o.at("sojourn_seconds").is_null()) r.sojourn_seconds = o.at("sojourn_seconds").get<std::int64_t>();
      validate_record(r);
      records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("commit dataset JSON: ") + e.what());
  }
  return records;
}

void export_dataset(const std::vector<CommitRecord>& records, const std::filesystem::path& path,
                    DatasetFormat format, const std::vector<std::string>& preamble) {
  require(!records.empty(), ErrorKind::EmptyDataset, "nothing to export");
  if (format == DatasetFormat::Csv) {
    std::string text;
    for (const auto& line : preamble) text += "# " + line + "\r\n";
    write_file(path, text + commits_to_csv(records));
    return;
  }
  auto doc = commits_to_json(records);
  if (!preamble.empty()) doc = nlohmann::json{{"provenance", preamble}, {"records", std::move(doc)}};
  write_file(path, doc.dump(2) + "\n");
}

std::vector<CommitRecord> import_dataset(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    try {
      return commits_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
  }
  return commits_from_csv(text);
}

}  // namespace procscore
