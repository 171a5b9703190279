#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "process.hpp"
#include "procscore/error.hpp"

namespace procscore::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "procscore") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Thin wrapper running git in a scratch repository with a fixed identity.
class GitFixture {
 public:
  explicit GitFixture(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
    git({"init", "-q"});
    git({"checkout", "-q", "-b", "main"});
  }

  std::string git(const std::vector<std::string>& args) const {
    std::vector<std::string> argv{"git", "-C", root_.string(), "-c", "user.name=Fixture", "-c",
                                  "user.email=fixture@example.org", "-c", "commit.gpgsign=false", "-c",
                                  "init.defaultBranch=main"};
    argv.insert(argv.end(), args.begin(), args.end());
    const auto result = detail::run_process(argv);
    if (result.exit_code != 0) fail(ErrorKind::IoError, "git failed: " + result.err);
    return result.out;
  }

  void write(const std::string& name, const std::string& text) const { write_text(root_ / name, text); }
  void remove(const std::string& name) const { git({"rm", "-q", name}); }

  // Commits everything with the given author time (UTC seconds); returns the id.
  std::string commit(const std::string& message, long long timestamp) const {
    git({"add", "-A"});
    git({"commit", "-q", "--allow-empty", "-m", message, "--date=@" + std::to_string(timestamp) + " +0000"});
    return head();
  }

  std::string head() const {
    auto id = git({"rev-parse", "HEAD"});
    while (!id.empty() && (id.back() == '\n' || id.back() == '\r')) id.pop_back();
    return id;
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace procscore::testing
