#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbt/change_model.hpp"
#include "cbt/history.hpp"
#include "cbt/provenance.hpp"

namespace cbt {

enum class DiffLineKind { Context, Added, Removed };

struct DiffLine {
  DiffLineKind kind = DiffLineKind::Context;
  std::string text;
  std::string file;
  std::optional<ClusterId> owner;  // set for added/removed lines
  std::optional<BeadId> bead;      // bead that inserted (added) or deleted (removed) the line
  std::optional<std::size_t> base_line;
  std::optional<std::size_t> result_line;
};

/// Unified diff of a cluster selection whose changed lines carry their owning cluster.
struct AugmentedDiff {
  std::vector<DiffLine> lines;
};

struct MapPoint {
  BeadId bead_id;
  std::int64_t x = 0;   // timestamp, epoch seconds
  std::size_t y = 0;    // lane
  ClusterId cluster_id;
  std::string label;
};

/// Partition plus the id/color cursors; the unit stored on the undo stacks.
struct TailoringState {
  Partition partition;
  std::uint32_t next_cluster_id = 1;
  std::size_t next_color_index = 0;

  bool operator==(const TailoringState&) const = default;
};

/// Mutable tailoring state over one history. Not internally synchronized: callers
/// serialize mutations and must not read concurrently with a mutation.
class ClusterSession {
 public:
  ClusterSession(std::shared_ptr<const FineHistory> history, Partition initial);
  ClusterSession(std::shared_ptr<const FineHistory> history, TailoringState state, std::uint64_t revision = 0);

  const FineHistory& history() const { return *history_; }
  const LineWeave& weave() const { return *weave_; }
  const Partition& partition() const { return state_.partition; }
  const TailoringState& state() const { return state_; }
  std::uint64_t revision() const { return revision_; }

  /// Moves `beads` out of `cluster` into a new cluster; returns its id.
  ClusterId splitCluster(ClusterId cluster, std::span<const BeadId> beads);
  /// Unites the clusters under the id and color of the one holding the earliest bead.
  ClusterId mergeClusters(std::span<const ClusterId> ids);

  bool canUndo() const { return !undo_.empty(); }
  bool canRedo() const { return !redo_.empty(); }
  void undo();
  void redo();

  /// Diff of the selected clusters' beads replayed on the snapshot before their
  /// earliest bead. `context` limits unchanged lines around changes; nullopt keeps all.
  AugmentedDiff augmentedDiff(std::span<const ClusterId> selected, std::optional<std::size_t> context = 3) const;

  std::vector<MapPoint> projectBeads() const;

  const ChangeBead& bead(BeadId id) const;

 private:
  void commit(TailoringState next);

  std::shared_ptr<const FineHistory> history_;
  std::shared_ptr<const LineWeave> weave_;
  TailoringState state_;
  std::vector<TailoringState> undo_;
  std::vector<TailoringState> redo_;
  std::uint64_t revision_ = 0;
};

/// "Class.method(...)" without the package, falling back to the class or file.
std::string locationLabel(const ChangeBead& bead);

}  // namespace cbt
