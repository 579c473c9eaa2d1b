#pragma once

#include <optional>
#include <vector>

#include "cbt/history.hpp"

namespace cbt {

enum class SquashDirection { Forward, Backward };

/// One group of beads folded together. `absorbed_seqs` are original positions of
/// the beads whose post-change snapshot did not parse; `survivor` keeps its id.
/// A survivor is absent when the group's net effect was empty and it was dropped.
struct SquashEntry {
  std::vector<BeadId> absorbed;
  std::vector<std::size_t> absorbed_seqs;
  std::optional<BeadId> survivor;
  std::optional<std::size_t> survivor_seq;  // original position
  SquashDirection direction = SquashDirection::Forward;
};

struct SquashReport {
  std::vector<SquashEntry> entries;
};

struct PreprocessResult {
  FineHistory history;
  SquashReport report;
};

/// Folds every maximal run of beads with an unparseable post-snapshot into the
/// next bead that restores parseability (a trailing run folds backward into the
/// last parseable bead). The final snapshot is preserved byte for byte.
PreprocessResult squashUnparseable(const FineHistory& history);

}  // namespace cbt
