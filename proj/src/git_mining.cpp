#include <algorithm>
#include <unordered_map>

#include "procscore/error.hpp"
#include "procscore/repo_mining.hpp"
#include "process.hpp"

namespace procscore {
namespace {

class GitRepository {
 public:
  explicit GitRepository(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    require(std::filesystem::is_directory(path_, ec), ErrorKind::RepositoryNotFound, path_.string());
    const auto probe = git({"rev-parse", "--git-dir"});
    require(probe.exit_code == 0, ErrorKind::RepositoryNotFound, path_.string() + ": " + probe.err);
  }

  detail::ProcessResult git(std::vector<std::string> args, std::string_view input = {}) const {
    args.insert(args.begin(), {"git", "-C", path_.string(), "-c", "core.quotepath=off"});
    return detail::run_process(args, input);
  }

  std::string git_or_throw(std::vector<std::string> args, ErrorKind kind, std::string_view input = {}) const {
    auto result = git(args, input);
    require(result.exit_code == 0, kind, "git " + args.front() + " failed: " + result.err);
    return std::move(result.out);
  }

  // Blob contents keyed by object id, fetched in one cat-file round trip.
  std::unordered_map<std::string, std::string> blobs(const std::vector<std::string>& ids) const {
    std::unordered_map<std::string, std::string> out;
    if (ids.empty()) return out;
    std::string request;
    for (const auto& id : ids) request += id + "\n";
    const auto raw = git_or_throw({"cat-file", "--batch"}, ErrorKind::CorruptObject, request);
    std::size_t pos = 0;
    for (const auto& id : ids) {
      const auto eol = raw.find('\n', pos);
      require(eol != std::string::npos, ErrorKind::CorruptObject, id);
      const std::string header = raw.substr(pos, eol - pos);
      require(header.find(" missing") == std::string::npos, ErrorKind::CorruptObject, "missing object " + id);
      const auto space = header.find_last_of(' ');
      const auto size = static_cast<std::size_t>(parse_int(header.substr(space + 1)));
      require(eol + 1 + size <= raw.size(), ErrorKind::CorruptObject, "truncated object " + id);
      out.emplace(id, raw.substr(eol + 1, size));
      pos = eol + 1 + size + 1;
    }
    return out;
  }

 private:
  static long long parse_int(const std::string& text) {
    try {
      return std::stoll(text);
    } catch (const std::logic_error&) {
      fail(ErrorKind::CorruptObject, "bad object header: " + text);
    }
  }

  std::filesystem::path path_;
};

struct FileChange {
  char status = 'M';
  std::string old_id;
  std::string new_id;
  std::string old_mode;
  std::string new_mode;
  std::string path;
};

bool is_null_id(const std::string& id) { return id.find_first_not_of('0') == std::string::npos; }

// Parses `git diff-tree --raw -z` output.
std::vector<FileChange> parse_raw_diff(const std::string& raw, const std::string& commit) {
  std::vector<FileChange> changes;
  std::size_t pos = 0;
  const auto next_field = [&]() {
    const auto end = raw.find('\0', pos);
    require(end != std::string::npos, ErrorKind::CorruptObject, "malformed diff for " + commit);
    std::string field = raw.substr(pos, end - pos);
    pos = end + 1;
    return field;
  };
  while (pos < raw.size()) {
    const std::string meta = next_field();
    require(!meta.empty() && meta[0] == ':', ErrorKind::CorruptObject, "malformed diff header for " + commit);
    // ":old_mode new_mode old_id new_id status"
    std::vector<std::string> parts;
    std::size_t start = 1;
    while (start <= meta.size()) {
      auto space = meta.find(' ', start);
      if (space == std::string::npos) space = meta.size();
      parts.push_back(meta.substr(start, space - start));
      start = space + 1;
    }
    require(parts.size() == 5, ErrorKind::CorruptObject, "malformed diff header for " + commit);
    FileChange change{parts[4][0], parts[2], parts[3], parts[0], parts[1], {}};
    change.path = next_field();
    if (change.status == 'R' || change.status == 'C') change.path = next_field();
    changes.push_back(std::move(change));
  }
  return changes;
}

void add_file_change(CommitRecord& record, const FileChange& change,
                     const std::unordered_map<std::string, std::string>& contents, const LanguageProfile& profile) {
  const bool is_gitlink = change.old_mode == "160000" || change.new_mode == "160000";
  std::optional<std::string_view> before;
  std::optional<std::string_view> after;
  if (!is_null_id(change.old_id) && change.status != 'A' && change.status != 'C' && !is_gitlink)
    before = contents.at(change.old_id);
  if (!is_null_id(change.new_id) && change.status != 'D' && !is_gitlink) after = contents.at(change.new_id);

  LineStats stats;
  bool binary = is_gitlink;
  if (!binary && (before || after)) {
    try {
      stats = diff_net_stats(before, after, profile, extension_of(change.path));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnsupportedBinaryContent) throw;
      binary = true;
    }
  }
  if (binary) {
    stats = {};
    ++record.files_binary;
  }

  const bool net_changed = stats.added_net + stats.deleted_net > 0;
  const auto bump = [&](std::int64_t& gross, std::int64_t& net) {
    ++gross;
    if (net_changed) ++net;
  };
  switch (change.status) {
    case 'A':
    case 'C':
      bump(record.files_added_gross, record.files_added_net);
      break;
    case 'D':
      bump(record.files_deleted_gross, record.files_deleted_net);
      break;
    case 'R':
      bump(record.files_renamed_gross, record.files_renamed_net);
      break;
    default:
      bump(record.files_modified_gross, record.files_modified_net);
  }
  record.lines_added_gross += stats.added_gross;
  record.lines_deleted_gross += stats.deleted_gross;
  record.lines_added_net += stats.added_net;
  record.lines_deleted_net += stats.deleted_net;
}

struct CommitMeta {
  std::int64_t timestamp = 0;
  std::string message;
};

std::string trim_trailing(std::string text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) text.pop_back();
  return text;
}

}  // namespace

std::vector<CommitRecord> mine_repository(const std::filesystem::path& repo_path, const MiningOptions& options) {
  const GitRepository repo(repo_path);

  const auto order = repo.git({"rev-list", "--topo-order", "--reverse", "--parents", options.revision});
  require(order.exit_code == 0 && !order.out.empty(), ErrorKind::RepositoryNotFound,
          repo_path.string() + " has no commits at " + options.revision);

  std::unordered_map<std::string, CommitMeta> metas;
  {
    const auto log = repo.git_or_throw({"log", "--format=%H%x00%at%x00%B%x00%x01", options.revision},
                                       ErrorKind::CorruptObject);
    std::size_t pos = 0;
    while (pos < log.size()) {
      while (pos < log.size() && (log[pos] == '\n' || log[pos] == '\x01')) ++pos;
      if (pos >= log.size()) break;
      const auto a = log.find('\0', pos);
      const auto b = log.find('\0', a + 1);
      const auto c = log.find('\0', b + 1);
      require(a != std::string::npos && b != std::string::npos && c != std::string::npos, ErrorKind::CorruptObject,
              "malformed git log output");
      CommitMeta meta;
      try {
        meta.timestamp = std::stoll(log.substr(a + 1, b - a - 1));
      } catch (const std::logic_error&) {
        fail(ErrorKind::CorruptObject, "bad timestamp for " + log.substr(pos, a - pos));
      }
      meta.message = trim_trailing(log.substr(b + 1, c - b - 1));
      metas.emplace(log.substr(pos, a - pos), std::move(meta));
      pos = c + 1;
    }
  }

  std::vector<CommitRecord> records;
  std::unordered_map<std::string, std::int64_t> timestamps;
  std::size_t line_start = 0;
  while (line_start < order.out.size()) {
    auto line_end = order.out.find('\n', line_start);
    if (line_end == std::string::npos) line_end = order.out.size();
    const std::string line = order.out.substr(line_start, line_end - line_start);
    line_start = line_end + 1;
    if (line.empty()) continue;

    CommitRecord record;
    std::size_t start = 0;
    bool first = true;
    while (start <= line.size()) {
      auto space = line.find(' ', start);
      if (space == std::string::npos) space = line.size();
      auto token = line.substr(start, space - start);
      if (first) record.id = std::move(token);
      else record.parent_ids.push_back(std::move(token));
      first = false;
      start = space + 1;
    }
    const auto meta = metas.find(record.id);
    require(meta != metas.end(), ErrorKind::CorruptObject, "no metadata for " + record.id);
    record.author_timestamp = meta->second.timestamp;
    record.message = meta->second.message;
    record.keyword_counts = count_keywords(record.message, options.keywords);
    record.is_merge = record.parent_ids.size() >= 2;
    record.is_initial = record.parent_ids.empty();
    timestamps[record.id] = record.author_timestamp;
    if (!record.is_initial) {
      const auto parent = timestamps.find(record.parent_ids.front());
      require(parent != timestamps.end(), ErrorKind::CorruptObject, "parent of " + record.id + " not seen before it");
      record.sojourn_seconds = std::max<std::int64_t>(0, record.author_timestamp - parent->second);
    }

    if (!record.is_merge) {
      std::vector<std::string> args{"diff-tree", "-r", "-M", "--raw", "-z", "--no-abbrev", "--no-commit-id"};
      if (record.is_initial) {
        args.push_back("--root");
      } else {
        args.push_back(record.parent_ids.front());
      }
      args.push_back(record.id);
      const auto changes = parse_raw_diff(repo.git_or_throw(args, ErrorKind::CorruptObject), record.id);
      std::vector<std::string> wanted;
      for (const auto& change : changes)
        for (const auto* id : {&change.old_id, &change.new_id})
          if (!is_null_id(*id) && change.old_mode != "160000" && change.new_mode != "160000") wanted.push_back(*id);
      std::sort(wanted.begin(), wanted.end());
      wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
      const auto contents = repo.blobs(wanted);
      for (const auto& change : changes) add_file_change(record, change, contents, options.profile);
    }
    record.density = compute_density(record.gross_lines(), record.net_lines());
    validate_record(record);
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace procscore
