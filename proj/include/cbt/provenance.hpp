#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbt/history.hpp"

namespace cbt {

/// Line-identity view of a history. Every line that ever existed in a file gets a
/// slot in one per-file order (the weave) that agrees with the line order of every
/// snapshot of the history. Any subset of beads can then be replayed by selecting
/// the lines alive under that subset, with no line-number arithmetic.
///
/// A line inserted by bead v and deleted by bead u makes u depend on v: u is
/// replayable only when v has been applied.
class LineWeave {
 public:
  struct Line {
    std::string text;
    std::optional<std::size_t> inserted_by;  // bead seq; empty for base lines
    std::optional<std::size_t> deleted_by;
  };

  using Mask = std::vector<bool>;  // indexed by bead seq

  explicit LineWeave(const FineHistory& history);

  std::size_t beadCount() const { return touched_.size(); }
  const std::map<std::string, std::vector<Line>>& files() const { return files_; }
  const std::set<std::string>& touchedFiles(std::size_t seq) const { return touched_[seq]; }

  /// Beads that inserted a line `seq` deletes, ascending.
  const std::vector<std::size_t>& dependencies(std::size_t seq) const { return deps_[seq]; }

  bool alive(const Line& line, const Mask& applied) const;
  bool fileExists(const std::string& file, const Mask& applied) const;

  /// Snapshot after applying exactly the beads in `applied` (in any order that
  /// respects dependencies).
  Snapshot render(const Mask& applied) const;

  /// Hunks turning render(before) into render(after), derived from line identity
  /// rather than text matching. Files are visited in path order.
  std::vector<Hunk> diff(const Mask& before, const Mask& after) const;

  /// First bead (ascending seq) among `applying` with a dependency outside
  /// `available`, paired with that dependency. `available` includes `applying`.
  std::optional<std::pair<std::size_t, std::size_t>> firstUnmetDependency(const std::vector<std::size_t>& applying,
                                                                          const Mask& available) const;

  /// Mask with beads seq < k set.
  Mask prefix(std::size_t k) const;

 private:
  std::map<std::string, std::vector<Line>> files_;
  std::set<std::string> base_files_;
  std::vector<std::set<std::string>> touched_;
  std::vector<std::vector<std::size_t>> deps_;
};

}  // namespace cbt
