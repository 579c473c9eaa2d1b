#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cbt/change_model.hpp"
#include "cbt/history.hpp"

namespace cbt {

struct PlannedCommit {
  ClusterId cluster_id;
  std::vector<BeadId> bead_ids;
  std::vector<Hunk> hunks;  // relative to the snapshot left by the previous commit
  std::int64_t first_timestamp = 0;
  std::int64_t last_timestamp = 0;
  std::int64_t commit_timestamp = 0;  // last_timestamp clamped to be non-decreasing
  std::vector<std::string> classes;   // sorted, unique
  std::vector<std::string> methods;   // sorted, unique location labels
};

struct ExportPlan {
  Snapshot base;
  std::int64_t base_timestamp = 0;
  std::vector<PlannedCommit> commits;
};

/// Orders the clusters so every bead follows the beads whose lines it deletes,
/// breaking ties by earliest bead. Throws CyclicClusterDependency when no such
/// order exists.
ExportPlan planExport(const FineHistory& history, const Partition& partition);

inline constexpr std::string_view kDefaultMessageTemplate =
    "Cluster {cluster_id}: {bead_count} change(s) in {methods}\n\nClasses: {classes}\nTime: {time_range}\n";

/// Expands {cluster_id}, {bead_count}, {classes}, {methods} and {time_range}.
/// Other brace groups are copied unchanged.
std::string renderMessage(std::string_view message_template, const PlannedCommit& commit);

/// "2020-09-13T12:26:40Z"
std::string formatUtc(std::int64_t epoch_seconds);

/// Snapshots after the base and after each planned commit, applied with exact matching.
std::vector<Snapshot> replayPlan(const ExportPlan& plan);

struct ExportResult {
  std::vector<std::string> commit_ids;  // root commit first
  std::vector<std::string> messages;    // one per planned commit
};

/// Writes a fresh repository at `out`: the base as root commit, then one commit
/// per planned cluster. Also writes the portable bundle `export.json` next to the
/// work tree (excluded from Git). Throws OutputExists if `out` is a non-empty path.
ExportResult exportGit(const ExportPlan& plan, const std::filesystem::path& out,
                       std::string_view message_template = kDefaultMessageTemplate);

}  // namespace cbt
