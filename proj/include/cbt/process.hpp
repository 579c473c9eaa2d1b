#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cbt {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

using EnvOverrides = std::vector<std::pair<std::string, std::string>>;

/// Runs argv[0] (PATH lookup) without a shell, capturing stdout and stderr.
ProcessResult runProcess(const std::vector<std::string>& argv, const EnvOverrides& env = {});

/// Thin wrapper over the git CLI bound to one work tree. Every call pins the
/// configuration that affects content (no autocrlf, no hooks, no signing).
class GitRepo {
 public:
  explicit GitRepo(std::filesystem::path work_tree) : path_(std::move(work_tree)) {}

  const std::filesystem::path& path() const { return path_; }

  /// Runs `git <args>`; throws GitError on a non-zero exit.
  std::string run(const std::vector<std::string>& args, const EnvOverrides& env = {}) const;
  ProcessResult tryRun(const std::vector<std::string>& args, const EnvOverrides& env = {}) const;

 private:
  std::filesystem::path path_;
};

}  // namespace cbt
