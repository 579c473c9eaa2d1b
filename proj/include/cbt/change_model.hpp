#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbt {

struct BeadId {
  std::uint32_t value = 0;
  auto operator<=>(const BeadId&) const = default;
};

struct ClusterId {
  std::uint32_t value = 0;
  auto operator<=>(const ClusterId&) const = default;
};

/// A file body split on '\n'. The last element is the unterminated tail, which is
/// empty for newline-terminated text, so splitLines/joinLines round-trip exactly.
using Lines = std::vector<std::string>;

Lines splitLines(std::string_view text);
std::string joinLines(const Lines& lines);

/// A contiguous replacement in one file. start_line_before is 1-based in the
/// pre-change file; for pure insertions it is the line the insertion lands before.
struct Hunk {
  std::string file;
  std::size_t start_line_before = 1;
  Lines deleted;
  Lines inserted;

  bool operator==(const Hunk&) const = default;
};

/// One fine-grained change (micro-commit).
struct ChangeBead {
  BeadId id;
  std::size_t seq = 0;
  std::int64_t timestamp = 0;
  std::vector<Hunk> hunks;
  std::optional<std::string> enclosing_class;
  std::optional<std::string> enclosing_method;

  const std::string& file() const { return hunks.front().file; }
  bool operator==(const ChangeBead&) const = default;
};

struct Snapshot {
  std::map<std::string, std::string> files;

  bool operator==(const Snapshot&) const = default;
};

/// Fixed cluster palette, indexed by cluster creation order modulo its size.
inline constexpr std::array<std::string_view, 12> kPalette = {
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#42d4f4", "#f032e6", "#bfef45", "#fabed4", "#469990", "#9a6324",
};

std::string paletteColor(std::size_t creation_index);

struct Cluster {
  ClusterId id;
  std::vector<BeadId> bead_ids;
  std::string color;

  bool operator==(const Cluster&) const = default;
};

struct Partition {
  std::vector<Cluster> clusters;

  bool operator==(const Partition&) const = default;

  const Cluster* find(ClusterId id) const;
  Cluster* find(ClusterId id);
  /// Cluster holding `bead`, or nullptr.
  const Cluster* clusterOf(BeadId bead) const;
};

/// Sorts bead ids inside clusters and clusters by their earliest bead. Bead ids
/// are strictly increasing in seq order, so id order is seq order.
void normalize(Partition& partition);

/// Throws ProcessingError unless `partition` is a seq-sorted set partition of `beads`.
void validatePartition(const Partition& partition, std::span<const ChangeBead> beads);

/// Checks the bead-sequence invariants: dense seq, increasing ids, monotone
/// timestamps, non-empty well-formed hunks, method implies class.
void validateBeads(std::span<const ChangeBead> beads);

/// Exact-match application of hunks (ascending start, non-overlapping, all
/// relative to `base`). Files missing from `base` are treated as empty text.
Snapshot applyHunks(const Snapshot& base, std::span<const Hunk> hunks);
Snapshot applyHunks(const Snapshot& base, const ChangeBead& bead);

/// base with beads seq 0..k-1 applied.
Snapshot snapshotAt(std::span<const ChangeBead> history, const Snapshot& base, std::size_t k);

}  // namespace cbt
