#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbt/change_model.hpp"

namespace cbt {

struct HistoryOrigin {
  std::string source;
  std::string format;  // "git" or "change-log"
  std::optional<std::string> root_commit;
  std::vector<std::string> commit_ids;  // one per bead, git only
  std::optional<std::int64_t> base_timestamp;
};

/// A base snapshot plus the ordered fine-grained changes made on top of it.
struct FineHistory {
  Snapshot base;
  std::vector<ChangeBead> beads;
  HistoryOrigin origin;

  Snapshot finalSnapshot() const { return snapshotAt(beads, base, beads.size()); }
};

struct IngestOptions {
  /// fnmatch(3) pattern applied to repository-relative paths.
  std::string source_filter = "*.java";
  std::string branch = "HEAD";
};

bool matchesSourceFilter(const std::string& path, const std::string& pattern);

/// Replays every bead from the base; throws ReplayError on the first mismatch.
void validateReplay(const FineHistory& history);

FineHistory ingestGit(const std::filesystem::path& repo, const IngestOptions& options = {});

/// Parses Change-Log v1 text (line-delimited JSON).
FineHistory parseChangeLog(std::string_view content, const std::string& source = "<memory>",
                           const IngestOptions& options = {});
FineHistory ingestChangeLog(const std::filesystem::path& path, const IngestOptions& options = {});

/// Serializes to Change-Log v1. Beads must be single-file.
std::string writeChangeLog(const FineHistory& history);

/// Directory inputs are Git repositories; anything else is read as a change log.
FineHistory ingest(const std::filesystem::path& input, const IngestOptions& options = {});

}  // namespace cbt
