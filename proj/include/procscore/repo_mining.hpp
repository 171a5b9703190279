#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace procscore {

enum class LineClass { Code, Comment, Blank };

struct CommentSyntax {
  std::vector<std::string> line_markers;
  std::vector<std::pair<std::string, std::string>> block_pairs;
};

// Comment syntax keyed by lowercase file extension (without the dot).
// Extensions without an entry use the fallback syntax.
class LanguageProfile {
 public:
  LanguageProfile() = default;
  LanguageProfile(std::map<std::string, CommentSyntax> by_extension, CommentSyntax fallback);

  // //, /* */, #, <!-- -->, -- for the usual extensions; # and // otherwise.
  static LanguageProfile default_profile();
  static LanguageProfile from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  const CommentSyntax& syntax_for(std::string_view extension) const;

 private:
  std::map<std::string, CommentSyntax, std::less<>> by_extension_;
  CommentSyntax fallback_;
};

// Lowercased extension of a path ("src/a.CPP" -> "cpp"); files such as
// "Makefile" or "CMakeLists.txt" map to their own names.
std::string extension_of(std::string_view path);

// Which block comment, if any, is still open at the end of a line.
struct CommentState {
  std::optional<std::size_t> open_block;

  bool in_block() const { return open_block.has_value(); }
  friend bool operator==(const CommentState&, const CommentState&) = default;
};

struct ClassifiedLine {
  LineClass line_class;
  CommentState state;
};

// Blank iff nothing but whitespace; Comment iff every non-blank character
// belongs to a comment; Code otherwise (mixed lines count as code).
ClassifiedLine classify_line(std::string_view line, const LanguageProfile& profile, std::string_view extension,
                             CommentState state = {});
ClassifiedLine classify_line(std::string_view line, const CommentSyntax& syntax, CommentState state = {});

std::vector<LineClass> classify_lines(const std::vector<std::string_view>& lines, const CommentSyntax& syntax);

struct LineStats {
  std::int64_t added_gross = 0;
  std::int64_t deleted_gross = 0;
  std::int64_t added_net = 0;
  std::int64_t deleted_net = 0;

  friend bool operator==(const LineStats&, const LineStats&) = default;
};

// Throws UnsupportedBinaryContent for NUL bytes or invalid UTF-8.
void require_text(std::string_view content);

// Gross counts come from a shortest-edit line diff; net counts drop changed
// lines that classify as Comment or Blank. An absent side is an empty file.
LineStats diff_net_stats(const std::optional<std::string_view>& old_text,
                         const std::optional<std::string_view>& new_text, const LanguageProfile& profile,
                         std::string_view extension);

// net / gross, or 0 when nothing changed. Throws InvariantViolation if
// net exceeds gross.
double compute_density(std::int64_t gross_lines, std::int64_t net_lines);

std::vector<std::string> default_keywords();

// Case-insensitive whole-word counts; the message is split at every
// non-alphanumeric character.
std::map<std::string, std::int64_t> count_keywords(std::string_view message, const std::vector<std::string>& keywords);

struct CommitRecord {
  std::string id;
  std::vector<std::string> parent_ids;
  std::int64_t author_timestamp = 0;
  std::string message;

  std::int64_t files_added_gross = 0;
  std::int64_t files_modified_gross = 0;
  std::int64_t files_deleted_gross = 0;
  std::int64_t files_renamed_gross = 0;
  std::int64_t files_added_net = 0;
  std::int64_t files_modified_net = 0;
  std::int64_t files_deleted_net = 0;
  std::int64_t files_renamed_net = 0;
  // Files whose content could not be decoded as text; they count toward the
  // file counters but contribute no lines.
  std::int64_t files_binary = 0;

  std::int64_t lines_added_gross = 0;
  std::int64_t lines_deleted_gross = 0;
  std::int64_t lines_added_net = 0;
  std::int64_t lines_deleted_net = 0;

  std::map<std::string, std::int64_t> keyword_counts;
  double density = 0;
  bool is_merge = false;
  bool is_initial = false;
  std::optional<std::int64_t> sojourn_seconds;

  std::int64_t gross_lines() const { return lines_added_gross + lines_deleted_gross; }
  std::int64_t net_lines() const { return lines_added_net + lines_deleted_net; }

  friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

// Checks the record invariants (net <= gross, density range and consistency,
// merge/initial flags, additions-only initial commits).
void validate_record(const CommitRecord& record);

struct MiningOptions {
  LanguageProfile profile = LanguageProfile::default_profile();
  std::vector<std::string> keywords = default_keywords();
  std::string revision = "HEAD";
};

// One record per commit reachable from the revision, parents before
// children (git's topological order, oldest first). Merge commits are kept
// with is_merge set and zero counters. Requires a `git` executable on PATH.
std::vector<CommitRecord> mine_repository(const std::filesystem::path& repo, const MiningOptions& options = {});

enum class DatasetFormat { Csv, Json };

DatasetFormat parse_dataset_format(std::string_view text);

// Fixed CSV header of the commit dataset, in column order.
const std::vector<std::string>& commit_csv_header();

std::string commits_to_csv(const std::vector<CommitRecord>& records);
std::vector<CommitRecord> commits_from_csv(std::string_view text);
nlohmann::json commits_to_json(const std::vector<CommitRecord>& records);
std::vector<CommitRecord> commits_from_json(const nlohmann::json& doc);

// Throws EmptyDataset for an empty list and IoError when the file cannot be
// written. `preamble` lines are written first, each prefixed with '#'
// (CSV only; the JSON form stores them under "provenance").
void export_dataset(const std::vector<CommitRecord>& records, const std::filesystem::path& path,
                    DatasetFormat format, const std::vector<std::string>& preamble = {});
std::vector<CommitRecord> import_dataset(const std::filesystem::path& path);

}  // namespace procscore
