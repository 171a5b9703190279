#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <csignal>
#include <cerrno>

#include "procscore/error.hpp"

extern char** environ;

namespace procscore::detail {
namespace {

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    require(::pipe2(fds, O_CLOEXEC) == 0, ErrorKind::IoError, "pipe() failed");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input) {
  ::signal(SIGPIPE, SIG_IGN);
  Pipe in, out, err;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.fds[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out.fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err.fds[1], STDERR_FILENO);

  std::vector<std::string> args = argv;
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  cargs.push_back(nullptr);

  pid_t pid = 0;
  const int spawn_rc = posix_spawnp(&pid, cargs[0], &actions, nullptr, cargs.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  require(spawn_rc == 0, ErrorKind::IoError, "cannot spawn " + args[0]);
  in.close_read();
  out.close_write();
  err.close_write();

  ProcessResult result;
  std::size_t written = 0;
  if (input.empty()) in.close_write();
  else ::fcntl(in.fds[1], F_SETFL, O_NONBLOCK);

  std::array<char, 65536> buffer{};
  while (out.fds[0] >= 0 || err.fds[0] >= 0) {
    std::array<pollfd, 3> fds{};
    nfds_t count = 0;
    if (out.fds[0] >= 0) fds[count++] = {out.fds[0], POLLIN, 0};
    if (err.fds[0] >= 0) fds[count++] = {err.fds[0], POLLIN, 0};
    if (in.fds[1] >= 0) fds[count++] = {in.fds[1], POLLOUT, 0};
    if (::poll(fds.data(), count, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (nfds_t i = 0; i < count; ++i) {
      if (!fds[i].revents) continue;
      if (fds[i].fd == in.fds[1]) {
        const auto n = ::write(in.fds[1], input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (n < 0 && errno != EAGAIN) written = input.size();
        if (written >= input.size()) in.close_write();
        continue;
      }
      const auto n = ::read(fds[i].fd, buffer.data(), buffer.size());
      if (n > 0) {
        (fds[i].fd == out.fds[0] ? result.out : result.err).append(buffer.data(), static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        if (fds[i].fd == out.fds[0]) out.close_read();
        else err.close_read();
      }
    }
  }
  in.close_write();

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace procscore::detail
