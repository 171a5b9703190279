#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "procscore/csv.hpp"
#include "procscore/line_diff.hpp"
#include "procscore/repo_mining.hpp"

using namespace procscore;
using procscore::testing::GitFixture;
using procscore::testing::TempDir;

namespace {

const CommentSyntax kC{{"//"}, {{"/*", "*/"}}};

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvariantViolation;
}

// Length of the longest common subsequence by dynamic programming.
std::size_t lcs_length(const std::vector<std::string_view>& a, const std::vector<std::string_view>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
  return t[a.size()][b.size()];
}

}  // namespace

TEST_CASE("line classification") {
  CHECK(classify_line("// todo", kC).line_class == LineClass::Comment);
  CHECK(classify_line("   ", kC).line_class == LineClass::Blank);
  CHECK(classify_line("", kC).line_class == LineClass::Blank);
  CHECK(classify_line("x = 1; // c", kC).line_class == LineClass::Code);
  CHECK(classify_line("/* a */ /* b */", kC).line_class == LineClass::Comment);
  CHECK(classify_line("s = \"// not a comment\";", kC).line_class == LineClass::Code);

  const auto open = classify_line("/* begins", kC);
  CHECK(open.line_class == LineClass::Comment);
  CHECK(open.state.in_block());
  const auto inside = classify_line("   still comment", kC, open.state);
  CHECK(inside.line_class == LineClass::Comment);
  CHECK(inside.state.in_block());
  const auto blank_inside = classify_line("", kC, open.state);
  CHECK(blank_inside.line_class == LineClass::Blank);
  CHECK(blank_inside.state.in_block());
  const auto close = classify_line(" ends */ int y;", kC, open.state);
  CHECK(close.line_class == LineClass::Code);
  CHECK_FALSE(close.state.in_block());

  const auto profile = LanguageProfile::default_profile();
  CHECK(classify_line("# note", profile, "py").line_class == LineClass::Comment);
  CHECK(classify_line("# note", profile, "cpp").line_class == LineClass::Code);
  CHECK(classify_line("<!-- x -->", profile, "md").line_class == LineClass::Comment);
  CHECK(classify_line("-- q", profile, "sql").line_class == LineClass::Comment);
  CHECK(classify_line("// unknown ext", profile, "zzz").line_class == LineClass::Comment);
  CHECK(extension_of("src/A.CPP") == "cpp");
  CHECK(extension_of("dir.d/Makefile") == "makefile");
  CHECK(extension_of("LICENSE") == "");
}

TEST_CASE("language profile round-trips through JSON") {
  const auto profile = LanguageProfile::default_profile();
  const auto again = LanguageProfile::from_json(profile.to_json());
  CHECK(again.to_json() == profile.to_json());
  const auto custom = LanguageProfile::from_json(nlohmann::json::parse(R"({"extensions": {"foo": {"line": [";"]}}})"));
  CHECK(classify_line("; c", custom, "foo").line_class == LineClass::Comment);
  CHECK(kind_of([] { LanguageProfile::from_json(nlohmann::json::parse(R"({"extensions": {"x": {"block": [["", "*/"]]}}})")); }) ==
        ErrorKind::InvalidConfig);
}

TEST_CASE("line diff is a shortest edit script") {
  const std::vector<std::vector<std::string>> texts = {
      {"a", "b", "c", "d"}, {"a", "x", "c", "d", "e"}, {}, {"d", "c", "b", "a"}, {"a", "a", "b", "a", "a"}, {"b"}};
  for (const auto& before_s : texts)
    for (const auto& after_s : texts) {
      const std::vector<std::string_view> before(before_s.begin(), before_s.end());
      const std::vector<std::string_view> after(after_s.begin(), after_s.end());
      const auto diff = diff_lines(before, after);
      const auto removed = static_cast<std::size_t>(std::count(diff.removed.begin(), diff.removed.end(), true));
      const auto inserted = static_cast<std::size_t>(std::count(diff.inserted.begin(), diff.inserted.end(), true));
      const auto common = lcs_length(before, after);
      CHECK(removed == before.size() - common);
      CHECK(inserted == after.size() - common);
      std::vector<std::string_view> kept_before, kept_after;
      for (std::size_t i = 0; i < before.size(); ++i)
        if (!diff.removed[i]) kept_before.push_back(before[i]);
      for (std::size_t i = 0; i < after.size(); ++i)
        if (!diff.inserted[i]) kept_after.push_back(after[i]);
      CHECK(kept_before == kept_after);
    }
  CHECK(split_lines("a\r\nb\n").size() == 2);
  CHECK(split_lines("a\n\n").size() == 2);
  CHECK(split_lines("").empty());
}

TEST_CASE("net and gross line statistics") {
  const auto profile = LanguageProfile::default_profile();
  const std::string file = "/* c1 */\nint a;\n\nint b;\n// c2\nint c;\nint d;\n";
  CHECK(diff_net_stats(std::nullopt, std::string_view(file), profile, "c") == LineStats{7, 0, 4, 0});
  CHECK(diff_net_stats(std::string_view(file), std::string_view(file), profile, "c") == LineStats{0, 0, 0, 0});
  CHECK(diff_net_stats(std::string_view("a;\nb;\nc;\n"), std::nullopt, profile, "c") == LineStats{0, 3, 0, 3});

  // Commenting out keeps the wrapped line in common; only delimiters change.
  const std::string before = "int x;\n";
  const std::string after = "/*\nint x;\n*/\n";
  CHECK(diff_net_stats(std::string_view(before), std::string_view(after), profile, "c") == LineStats{2, 0, 0, 0});
  const std::string edited = "/*\nint y;\n*/\n";
  CHECK(diff_net_stats(std::string_view(after), std::string_view(edited), profile, "c") == LineStats{1, 1, 0, 0});

  CHECK(kind_of([&] { diff_net_stats(std::string_view("a\0b", 3), std::nullopt, profile, "c"); }) ==
        ErrorKind::UnsupportedBinaryContent);
  CHECK(kind_of([] { require_text("\xff\xfe"); }) == ErrorKind::UnsupportedBinaryContent);
  CHECK_NOTHROW(require_text("caf\xc3\xa9"));
}

TEST_CASE("density") {
  CHECK(compute_density(10, 6) == doctest::Approx(0.6));
  CHECK(compute_density(0, 0) == 0.0);
  CHECK(compute_density(5, 5) == 1.0);
  CHECK(kind_of([] { compute_density(3, 4); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("keyword counting") {
  CHECK(count_keywords("Fix typo; fix build", {"fix"}).at("fix") == 2);
  CHECK(count_keywords("", {"fix"}).at("fix") == 0);
  CHECK(count_keywords("prefix bug", {"fix"}).at("fix") == 0);
  const auto words = default_keywords();
  CHECK(words.size() == 20);
  CHECK(std::find(words.begin(), words.end(), "implement") != words.end());
}

TEST_CASE("record validation") {
  CommitRecord r;
  r.id = "a";
  r.is_initial = true;
  r.lines_added_gross = 4;
  r.lines_added_net = 2;
  r.files_added_gross = 1;
  r.files_added_net = 1;
  r.density = 0.5;
  CHECK_NOTHROW(validate_record(r));
  auto bad = r;
  bad.files_modified_gross = 1;
  CHECK(kind_of([&] { validate_record(bad); }) == ErrorKind::InvariantViolation);
  bad = r;
  bad.lines_added_net = 5;
  CHECK(kind_of([&] { validate_record(bad); }) == ErrorKind::InvariantViolation);
  bad = r;
  bad.density = 0.7;
  CHECK(kind_of([&] { validate_record(bad); }) == ErrorKind::InvariantViolation);
  bad = r;
  bad.parent_ids = {"p", "q"};
  CHECK(kind_of([&] { validate_record(bad); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("mining a hand-built repository") {
  TempDir tmp("mine");
  GitFixture repo(tmp / "repo");
  repo.write("main.c", "/* header */\nint main() {\n  return 0;\n}\n\n// end\n");
  const auto c1 = repo.commit("Initial import", 1000000);
  repo.write("main.c", "/* header */\nint main() {\n  int x = 1; /* inline */\n  return x;\n}\n\n// end\n// more\n");
  repo.write("notes.py", "# comment\nx = 1\n\n");
  const auto c2 = repo.commit("Add notes and fix main", 1000600);
  repo.write("main.c", "/* header */\nint main() {\n  int x = 1; /* inline */\n  return x;\n}\n\n// the end\n// more\n");
  repo.remove("notes.py");
  const auto c3 = repo.commit("Clean up", 1003600);

  const auto records = mine_repository(repo.root());
  REQUIRE(records.size() == 3);
  const auto& r1 = records[0];
  const auto& r2 = records[1];
  const auto& r3 = records[2];
  CHECK(r1.id == c1);
  CHECK(r2.id == c2);
  CHECK(r3.id == c3);

  CHECK(r1.is_initial);
  CHECK(r1.parent_ids.empty());
  CHECK_FALSE(r1.sojourn_seconds.has_value());
  CHECK(r1.lines_added_gross == 6);
  CHECK(r1.lines_added_net == 3);
  CHECK(r1.lines_deleted_gross == 0);
  CHECK(r1.files_added_gross == 1);
  CHECK(r1.files_modified_gross + r1.files_deleted_gross + r1.files_renamed_gross == 0);
  CHECK(r1.density == 0.5);

  CHECK(r2.parent_ids == std::vector<std::string>{c1});
  CHECK(r2.sojourn_seconds == 600);
  CHECK(r2.lines_added_gross == 6);
  CHECK(r2.lines_added_net == 3);
  CHECK(r2.lines_deleted_gross == 1);
  CHECK(r2.lines_deleted_net == 1);
  CHECK(r2.files_added_gross == 1);
  CHECK(r2.files_modified_gross == 1);
  CHECK(r2.files_modified_net == 1);
  CHECK(r2.density == 4.0 / 7.0);
  CHECK(r2.keyword_counts.at("add") == 1);
  CHECK(r2.keyword_counts.at("fix") == 1);
  CHECK(r2.keyword_counts.at("bug") == 0);

  CHECK(r3.sojourn_seconds == 3000);
  CHECK(r3.lines_added_gross == 1);
  CHECK(r3.lines_added_net == 0);
  CHECK(r3.lines_deleted_gross == 4);
  CHECK(r3.lines_deleted_net == 1);
  CHECK(r3.files_modified_gross == 1);
  CHECK(r3.files_modified_net == 0);
  CHECK(r3.files_deleted_gross == 1);
  CHECK(r3.files_deleted_net == 1);
  CHECK(r3.density == 0.2);

  for (const auto& r : records) {
    CHECK_NOTHROW(validate_record(r));
    CHECK(r.density == compute_density(r.gross_lines(), r.net_lines()));
  }
  CHECK(mine_repository(repo.root()) == records);
}

TEST_CASE("merges, renames and binary files") {
  TempDir tmp("merge");
  GitFixture repo(tmp / "repo");
  repo.write("a.txt", "one\ntwo\nthree\n");
  repo.commit("start", 2000000);
  repo.git({"checkout", "-q", "-b", "side"});
  repo.write("b.txt", "side\n");
  repo.commit("side work", 2000100);
  repo.git({"checkout", "-q", "main"});
  repo.git({"mv", "a.txt", "c.txt"});
  std::string blob("\x89PNG\0\0\x01", 7);
  repo.write("image.png", blob);
  repo.commit("rename and image", 2000200);
  repo.git({"merge", "-q", "--no-ff", "-m", "merge side", "side"});

  const auto records = mine_repository(repo.root());
  REQUIRE(records.size() == 4);
  const auto merge = std::find_if(records.begin(), records.end(), [](const CommitRecord& r) { return r.is_merge; });
  REQUIRE(merge != records.end());
  CHECK(merge->parent_ids.size() == 2);
  CHECK(merge->gross_lines() == 0);
  CHECK(merge->files_added_gross == 0);
  const auto rename = std::find_if(records.begin(), records.end(), [](const CommitRecord& r) { return r.message.rfind("rename", 0) == 0; });
  REQUIRE(rename != records.end());
  CHECK(rename->files_renamed_gross == 1);
  CHECK(rename->files_binary == 1);
  CHECK(rename->files_added_gross == 1);
  CHECK(rename->gross_lines() == 0);
  for (const auto& r : records) CHECK_NOTHROW(validate_record(r));
}

TEST_CASE("mining errors") {
  TempDir tmp("missing");
  CHECK(kind_of([&] { mine_repository(tmp / "nope"); }) == ErrorKind::RepositoryNotFound);
  CHECK(kind_of([&] { mine_repository(tmp.path()); }) == ErrorKind::RepositoryNotFound);
}

TEST_CASE("dataset export and import round-trip") {
  CommitRecord a;
  a.id = "aaa";
  a.author_timestamp = 5;
  a.message = "first, \"quoted\"\nline two";
  a.is_initial = true;
  a.lines_added_gross = 3;
  a.lines_added_net = 1;
  a.files_added_gross = a.files_added_net = 1;
  a.density = 1.0 / 3.0;
  a.keyword_counts = {{"fix", 0}, {"add", 2}};
  CommitRecord b = a;
  b.id = "bbb";
  b.parent_ids = {"aaa"};
  b.is_initial = false;
  b.sojourn_seconds = 42;
  b.lines_deleted_gross = 2;
  b.files_modified_gross = 1;
  b.density = 1.0 / 5.0;
  const std::vector<CommitRecord> records{a, b};

  TempDir tmp("io");
  for (auto format : {DatasetFormat::Csv, DatasetFormat::Json}) {
    const auto path = tmp / (format == DatasetFormat::Csv ? "d.csv" : "d.json");
    export_dataset(records, path, format, {"seed=1"});
    CHECK(import_dataset(path) == records);
  }
  export_dataset({a}, tmp / "one.csv", DatasetFormat::Csv);
  const auto table = parse_csv(procscore::testing::read_text(tmp / "one.csv"));
  CHECK(table.rows.size() == 1);
  CHECK(table.header == commit_csv_header());
  CHECK(kind_of([&] { export_dataset({}, tmp / "e.csv", DatasetFormat::Csv); }) == ErrorKind::EmptyDataset);
  CHECK(kind_of([&] { export_dataset(records, "/proc/forbidden/x.csv", DatasetFormat::Csv); }) == ErrorKind::IoError);
}
