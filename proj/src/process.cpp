#include "cbt/process.hpp"

#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>
#include <fcntl.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <map>

#include "cbt/errors.hpp"

extern char** environ;

namespace cbt {
namespace {

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe(fd) != 0) throw ProcessingError(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() { closeAll(); }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;
  void close(int end) {
    if (fd[end] >= 0) ::close(fd[end]);
    fd[end] = -1;
  }
  void closeAll() {
    close(0);
    close(1);
  }
};

}  // namespace

ProcessResult runProcess(const std::vector<std::string>& argv, const EnvOverrides& env) {
  if (argv.empty()) throw ProcessingError("runProcess: empty argv");

  std::map<std::string, std::string> merged;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    merged[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  for (const auto& [k, v] : env) merged[k] = v;
  std::vector<std::string> env_strings;
  env_strings.reserve(merged.size());
  for (const auto& [k, v] : merged) env_strings.push_back(k + "=" + v);

  std::vector<char*> c_argv;
  for (const auto& a : argv) c_argv.push_back(const_cast<char*>(a.c_str()));
  c_argv.push_back(nullptr);
  std::vector<char*> c_env;
  for (const auto& e : env_strings) c_env.push_back(const_cast<char*>(e.c_str()));
  c_env.push_back(nullptr);

  Pipe out_pipe;
  Pipe err_pipe;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe.fd[1], 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe.fd[1], 2);
  posix_spawn_file_actions_addclose(&actions, out_pipe.fd[0]);
  posix_spawn_file_actions_addclose(&actions, err_pipe.fd[0]);

  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, c_argv[0], &actions, nullptr, c_argv.data(), c_env.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw ProcessingError("cannot run " + argv[0] + ": " + std::strerror(rc));
  out_pipe.close(1);
  err_pipe.close(1);

  ProcessResult result;
  std::array<pollfd, 2> fds{{{out_pipe.fd[0], POLLIN, 0}, {err_pipe.fd[0], POLLIN, 0}}};
  std::array<std::string*, 2> sinks{&result.out, &result.err};
  std::array<char, 65536> buf{};
  int open_fds = 2;
  while (open_fds > 0) {
    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const auto n = ::read(fds[i].fd, buf.data(), buf.size());
      if (n > 0) {
        sinks[i]->append(buf.data(), static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

ProcessResult GitRepo::tryRun(const std::vector<std::string>& args, const EnvOverrides& env) const {
  std::vector<std::string> argv = {"git",         "-C", path_.string(), "-c", "core.autocrlf=false",
                                   "-c",          "core.hooksPath=/dev/null", "-c", "commit.gpgsign=false",
                                   "-c",          "core.quotepath=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  EnvOverrides full = {{"GIT_CONFIG_NOSYSTEM", "1"}, {"LC_ALL", "C"}};
  full.insert(full.end(), env.begin(), env.end());
  return runProcess(argv, full);
}

std::string GitRepo::run(const std::vector<std::string>& args, const EnvOverrides& env) const {
  auto r = tryRun(args, env);
  if (r.exit_code != 0) {
    std::string cmd = "git";
    for (const auto& a : args) cmd += " " + a;
    throw GitError(cmd + " failed (" + std::to_string(r.exit_code) + "): " + r.err);
  }
  return std::move(r.out);
}

}  // namespace cbt
