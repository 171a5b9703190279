#include "procscore/repo_mining.hpp"

#include <algorithm>
#include <cctype>

#include "procscore/error.hpp"
#include "procscore/line_diff.hpp"

namespace procscore {
namespace {

CommentSyntax c_like() { return {{"//"}, {{"/*", "*/"}}}; }
CommentSyntax hash_like() { return {{"#"}, {}}; }
CommentSyntax markup() { return {{}, {{"<!--", "-->"}}}; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

LanguageProfile::LanguageProfile(std::map<std::string, CommentSyntax> by_extension, CommentSyntax fallback)
    : by_extension_(by_extension.begin(), by_extension.end()), fallback_(std::move(fallback)) {
  const auto check = [](const CommentSyntax& syntax) {
    for (const auto& [open, close] : syntax.block_pairs)
      require(!open.empty() && !close.empty(), ErrorKind::InvalidConfig, "empty block comment delimiter");
    auto markers = syntax.line_markers;
    std::sort(markers.begin(), markers.end());
    require(std::adjacent_find(markers.begin(), markers.end()) == markers.end(), ErrorKind::InvalidConfig,
            "duplicate line comment marker");
    require(std::none_of(markers.begin(), markers.end(), [](const auto& m) { return m.empty(); }),
            ErrorKind::InvalidConfig, "empty line comment marker");
  };
  for (const auto& [ext, syntax] : by_extension_) check(syntax);
  check(fallback_);
}

LanguageProfile LanguageProfile::default_profile() {
  std::map<std::string, CommentSyntax> table;
  for (const char* ext : {"c",  "h",     "cc",    "cpp",  "cxx",   "hpp", "hh",   "hxx", "ipp",    "inl",
                          "cu", "java",  "js",    "mjs",  "jsx",   "ts",  "tsx",  "cs",  "go",     "rs",
                          "kt", "kts",   "scala", "groovy", "swift", "dart", "m",  "mm",  "proto",  "gradle",
                          "v",  "sv",    "zig",   "glsl", "hlsl"})
    table[ext] = c_like();
  for (const char* ext : {"css", "scss", "less"}) table[ext] = {{}, {{"/*", "*/"}}};
  table["scss"].line_markers = {"//"};
  table["less"].line_markers = {"//"};
  table["php"] = {{"//", "#"}, {{"/*", "*/"}}};
  for (const char* ext : {"py",   "pyw", "sh",       "bash",       "zsh",  "fish", "rb",   "pl",     "pm",
                          "r",    "jl",  "yaml",     "yml",        "toml", "cmake", "mk",  "makefile", "dockerfile",
                          "conf", "cfg", "properties", "tf",       "nix",  "ps1",  "gitignore", "cmakelists.txt"})
    table[ext] = hash_like();
  for (const char* ext : {"html", "htm", "xml", "xhtml", "svg", "md", "markdown", "xsd", "xsl", "plist"})
    table[ext] = markup();
  table["vue"] = {{"//"}, {{"<!--", "-->"}, {"/*", "*/"}}};
  table["sql"] = {{"--"}, {{"/*", "*/"}}};
  table["lua"] = {{"--"}, {{"--[[", "]]"}}};
  table["hs"] = {{"--"}, {{"{-", "-}"}}};
  for (const char* ext : {"ada", "adb", "ads", "vhd", "vhdl"}) table[ext] = {{"--"}, {}};
  table["tex"] = {{"%"}, {}};
  table["erl"] = {{"%"}, {}};
  table["ini"] = {{";", "#"}, {}};
  table["bat"] = {{"rem ", "::"}, {}};
  table["ml"] = {{}, {{"(*", "*)"}}};
  return LanguageProfile(std::move(table), CommentSyntax{{"#", "//"}, {}});
}

LanguageProfile LanguageProfile::from_json(const nlohmann::json& doc) {
  const auto parse_syntax = [](const nlohmann::json& entry) {
    CommentSyntax syntax;
    if (entry.contains("line")) syntax.line_markers = entry.at("line").get<std::vector<std::string>>();
    if (entry.contains("block"))
      for (const auto& pair : entry.at("block")) {
        require(pair.is_array() && pair.size() == 2, ErrorKind::InvalidConfig, "block comment pair must be [open, close]");
        syntax.block_pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    return syntax;
  };
  try {
    std::map<std::string, CommentSyntax> table;
    for (const auto& [ext, entry] : doc.at("extensions").items()) table[lowercase(ext)] = parse_syntax(entry);
    CommentSyntax fallback = doc.contains("fallback") ? parse_syntax(doc.at("fallback")) : CommentSyntax{{"#", "//"}, {}};
    return LanguageProfile(std::move(table), std::move(fallback));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidConfig, std::string("language profile: ") + e.what());
  }
}

nlohmann::json LanguageProfile::to_json() const {
  const auto dump = [](const CommentSyntax& syntax) {
    nlohmann::json entry;
    entry["line"] = syntax.line_markers;
    entry["block"] = nlohmann::json::array();
    for (const auto& [open, close] : syntax.block_pairs) entry["block"].push_back({open, close});
    return entry;
  };
  nlohmann::json doc;
  doc["extensions"] = nlohmann::json::object();
  for (const auto& [ext, syntax] : by_extension_) doc["extensions"][ext] = dump(syntax);
  doc["fallback"] = dump(fallback_);
  return doc;
}

const CommentSyntax& LanguageProfile::syntax_for(std::string_view extension) const {
  const auto it = by_extension_.find(extension);
  return it == by_extension_.end() ? fallback_ : it->second;
}

std::string extension_of(std::string_view path) {
  const auto slash = path.find_last_of('/');
  const auto name = lowercase(slash == std::string_view::npos ? path : path.substr(slash + 1));
  if (name == "makefile" || name == "dockerfile" || name == "cmakelists.txt" || name == ".gitignore")
    return name == ".gitignore" ? "gitignore" : name;
  const auto dot = name.find_last_of('.');
  if (dot == std::string::npos || dot + 1 == name.size()) return "";
  return name.substr(dot + 1);
}

ClassifiedLine classify_line(std::string_view line, const LanguageProfile& profile, std::string_view extension,
                             CommentState state) {
  return classify_line(line, profile.syntax_for(extension), state);
}

ClassifiedLine classify_line(std::string_view line, const CommentSyntax& syntax, CommentState state) {
  bool has_code = false;
  bool has_text = false;
  std::size_t pos = 0;
  const auto starts_with = [&](std::string_view token) { return line.substr(pos, token.size()) == token; };

  while (pos < line.size()) {
    if (state.open_block) {
      const auto& close = syntax.block_pairs[*state.open_block].second;
      const auto end = line.find(close, pos);
      if (end == std::string_view::npos) {
        has_text = has_text || std::any_of(line.begin() + static_cast<long>(pos), line.end(), [](char c) { return !is_space(c); });
        break;
      }
      has_text = true;
      pos = end + close.size();
      state.open_block.reset();
      continue;
    }
    if (is_space(line[pos])) {
      ++pos;
      continue;
    }
    has_text = true;

    // Longest matching comment token wins, so "--[[" beats "--".
    std::size_t best_len = 0;
    std::optional<std::size_t> best_block;
    bool best_is_line = false;
    for (const auto& marker : syntax.line_markers)
      if (marker.size() > best_len && starts_with(marker)) {
        best_len = marker.size();
        best_is_line = true;
        best_block.reset();
      }
    for (std::size_t b = 0; b < syntax.block_pairs.size(); ++b) {
      const auto& open = syntax.block_pairs[b].first;
      if (open.size() > best_len && starts_with(open)) {
        best_len = open.size();
        best_is_line = false;
        best_block = b;
      }
    }
    if (best_is_line) break;
    if (best_block) {
      state.open_block = best_block;
      pos += best_len;
      continue;
    }

    has_code = true;
    if (line[pos] == '"') {
      ++pos;
      while (pos < line.size() && line[pos] != '"') pos += (line[pos] == '\\') ? 2 : 1;
    }
    ++pos;
  }

  if (!has_text) return {LineClass::Blank, state};
  return {has_code ? LineClass::Code : LineClass::Comment, state};
}

std::vector<LineClass> classify_lines(const std::vector<std::string_view>& lines, const CommentSyntax& syntax) {
  std::vector<LineClass> out;
  out.reserve(lines.size());
  CommentState state;
  for (auto line : lines) {
    const auto classified = classify_line(line, syntax, state);
    out.push_back(classified.line_class);
    state = classified.state;
  }
  return out;
}

void require_text(std::string_view content) {
  require(content.find('\0') == std::string_view::npos, ErrorKind::UnsupportedBinaryContent, "content has NUL bytes");
  std::size_t i = 0;
  while (i < content.size()) {
    const auto c = static_cast<unsigned char>(content[i]);
    std::size_t extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c & 0xE0) == 0xC0 && c >= 0xC2) extra = 1;
    else if ((c & 0xF0) == 0xE0) extra = 2;
    else if ((c & 0xF8) == 0xF0 && c <= 0xF4) extra = 3;
    else fail(ErrorKind::UnsupportedBinaryContent, "invalid UTF-8 lead byte");
    require(i + extra < content.size(), ErrorKind::UnsupportedBinaryContent, "truncated UTF-8 sequence");
    for (std::size_t k = 1; k <= extra; ++k)
      require((static_cast<unsigned char>(content[i + k]) & 0xC0) == 0x80, ErrorKind::UnsupportedBinaryContent,
              "invalid UTF-8 continuation byte");
    i += extra + 1;
  }
}

LineStats diff_net_stats(const std::optional<std::string_view>& old_text,
                         const std::optional<std::string_view>& new_text, const LanguageProfile& profile,
                         std::string_view extension) {
  require(old_text.has_value() || new_text.has_value(), ErrorKind::InvariantViolation,
          "diff needs at least one side");
  if (old_text) require_text(*old_text);
  if (new_text) require_text(*new_text);

  const auto& syntax = profile.syntax_for(extension);
  const auto before = split_lines(old_text.value_or(std::string_view{}));
  const auto after = split_lines(new_text.value_or(std::string_view{}));
  const auto before_classes = classify_lines(before, syntax);
  const auto after_classes = classify_lines(after, syntax);
  const auto diff = diff_lines(before, after);

  LineStats stats;
  for (std::size_t i = 0; i < before.size(); ++i)
    if (diff.removed[i]) {
      ++stats.deleted_gross;
      if (before_classes[i] == LineClass::Code) ++stats.deleted_net;
    }
  for (std::size_t j = 0; j < after.size(); ++j)
    if (diff.inserted[j]) {
      ++stats.added_gross;
      if (after_classes[j] == LineClass::Code) ++stats.added_net;
    }
  return stats;
}

double compute_density(std::int64_t gross_lines, std::int64_t net_lines) {
  require(gross_lines >= 0 && net_lines >= 0, ErrorKind::InvariantViolation, "negative line count");
  require(net_lines <= gross_lines, ErrorKind::InvariantViolation,
          "net size " + std::to_string(net_lines) + " exceeds gross size " + std::to_string(gross_lines));
  if (gross_lines == 0) return 0.0;
  return static_cast<double>(net_lines) / static_cast<double>(gross_lines);
}

std::vector<std::string> default_keywords() {
  return {"fix",    "bug",  "feature", "implement", "add",     "refactor", "clean",   "test",  "doc",    "merge",
          "update", "remove", "improve", "error",   "fail",    "change",   "release", "style", "format", "rename"};
}

std::map<std::string, std::int64_t> count_keywords(std::string_view message, const std::vector<std::string>& keywords) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& keyword : keywords) counts[keyword] = 0;
  std::string token;
  const auto flush = [&] {
    if (token.empty()) return;
    if (const auto it = counts.find(token); it != counts.end()) ++it->second;
    token.clear();
  };
  for (char c : message) {
    if (std::isalnum(static_cast<unsigned char>(c))) token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else flush();
  }
  flush();
  return counts;
}

void validate_record(const CommitRecord& r) {
  const auto pair_ok = [](std::int64_t net, std::int64_t gross) { return net >= 0 && net <= gross; };
  require(pair_ok(r.files_added_net, r.files_added_gross) && pair_ok(r.files_modified_net, r.files_modified_gross) &&
              pair_ok(r.files_deleted_net, r.files_deleted_gross) && pair_ok(r.files_renamed_net, r.files_renamed_gross) &&
              pair_ok(r.lines_added_net, r.lines_added_gross) && pair_ok(r.lines_deleted_net, r.lines_deleted_gross),
          ErrorKind::InvariantViolation, "net counter exceeds gross counter in " + r.id);
  require(r.density >= 0.0 && r.density <= 1.0, ErrorKind::InvariantViolation, "density out of range in " + r.id);
  require(r.density == compute_density(r.gross_lines(), r.net_lines()), ErrorKind::InvariantViolation,
          "density does not match line counters in " + r.id);
  require(r.is_merge == (r.parent_ids.size() >= 2), ErrorKind::InvariantViolation, "merge flag mismatch in " + r.id);
  require(r.is_initial == r.parent_ids.empty(), ErrorKind::InvariantViolation, "initial flag mismatch in " + r.id);
  if (r.is_initial)
    require(r.files_modified_gross == 0 && r.files_deleted_gross == 0 && r.files_renamed_gross == 0 &&
                r.lines_deleted_gross == 0 && !r.sojourn_seconds,
            ErrorKind::InvariantViolation, "initial commit with non-additions in " + r.id);
  if (r.sojourn_seconds) require(*r.sojourn_seconds >= 0, ErrorKind::InvariantViolation, "negative sojourn in " + r.id);
}

}  // namespace procscore
