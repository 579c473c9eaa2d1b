#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "cbt/history.hpp"
#include "cbt/untangle.hpp"

namespace cbt::testing {

std::filesystem::path fixturePath(const std::string& name);
FineHistory loadRunningExample();

/// Expected final text of StateMachine.java in the running example fixture.
extern const char* const kRunningExampleAfter;
extern const char* const kRunningExampleBefore;

/// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Beads with random timestamps and annotations but trivial hunks; enough for
/// metric and clustering tests.
std::vector<ChangeBead> randomAnnotatedBeads(std::mt19937& rng, std::size_t n);
DistanceConfig randomConfig(std::mt19937& rng);

struct EditHistoryOptions {
  std::size_t files = 2;
  std::size_t beads = 20;
  /// Probability that a bead opens an unparseable window, which later beads close.
  double unparseable_rate = 0.0;
};

/// Replayable history over small Java-like files. Every inserted line is unique,
/// so line texts identify the bead that wrote them.
FineHistory randomEditHistory(std::mt19937& rng, const EditHistoryOptions& options);

/// Random set partition of the beads, normalized.
Partition randomPartition(std::mt19937& rng, const FineHistory& history, std::size_t max_clusters);

}  // namespace cbt::testing
