#include "cbt/preprocess.hpp"

#include <set>

#include "cbt/errors.hpp"
#include "cbt/line_diff.hpp"
#include "cbt/structure.hpp"

namespace cbt {
namespace {

/// Tracks which files of the evolving snapshot fail to parse.
class ParseTracker {
 public:
  explicit ParseTracker(const Snapshot& s) {
    for (const auto& [path, text] : s.files)
      if (!parses(text)) failing_.insert(path);
  }

  void update(const Snapshot& s, const std::set<std::string>& touched) {
    for (const auto& path : touched) {
      const auto it = s.files.find(path);
      if (it == s.files.end() || parses(it->second))
        failing_.erase(path);
      else
        failing_.insert(path);
    }
  }

  bool ok() const { return failing_.empty(); }
  std::string describe() const { return failing_.empty() ? std::string{} : *failing_.begin(); }

 private:
  std::set<std::string> failing_;
};

std::set<std::string> touchedFiles(const ChangeBead& bead) {
  std::set<std::string> out;
  for (const auto& h : bead.hunks) out.insert(h.file);
  return out;
}

}  // namespace

PreprocessResult squashUnparseable(const FineHistory& input) {
  const auto& beads = input.beads;
  std::vector<Snapshot> snaps;
  snaps.reserve(beads.size() + 1);
  snaps.push_back(input.base);
  std::vector<bool> parseable;
  parseable.reserve(beads.size() + 1);

  ParseTracker tracker(input.base);
  parseable.push_back(tracker.ok());
  if (!tracker.ok()) throw AllUnparseable("base snapshot does not parse (" + tracker.describe() + ")");
  for (const auto& bead : beads) {
    snaps.push_back(applyHunks(snaps.back(), bead));
    tracker.update(snaps.back(), touchedFiles(bead));
    parseable.push_back(tracker.ok());
  }

  PreprocessResult result;
  result.history.base = input.base;
  result.history.origin = input.origin;
  result.history.origin.commit_ids.clear();
  auto& out = result.history.beads;
  std::vector<std::size_t> out_original;  // original seq of each output bead

  auto merged = [&](std::size_t from_snapshot, std::size_t to_snapshot, const ChangeBead& identity) {
    ChangeBead b;
    b.id = identity.id;
    b.timestamp = identity.timestamp;
    b.hunks = diffSnapshotFiles(snaps[from_snapshot], snaps[to_snapshot]);
    return b;
  };

  std::size_t run_start = 0;  // original seq of the first bead in the open unparseable run
  bool in_run = false;
  for (std::size_t k = 0; k < beads.size(); ++k) {
    const bool ok = parseable[k + 1];
    if (!ok) {
      if (!in_run) run_start = k;
      in_run = true;
      continue;
    }
    if (!in_run) {
      out.push_back(beads[k]);
      out_original.push_back(k);
      continue;
    }
    ChangeBead b = merged(run_start, k + 1, beads[k]);
    SquashEntry entry;
    for (std::size_t j = run_start; j < k; ++j) {
      entry.absorbed.push_back(beads[j].id);
      entry.absorbed_seqs.push_back(j);
    }
    entry.direction = SquashDirection::Forward;
    if (!b.hunks.empty()) {
      entry.survivor = b.id;
      entry.survivor_seq = k;
      out.push_back(std::move(b));
      out_original.push_back(k);
    } else {
      entry.absorbed.push_back(beads[k].id);
      entry.absorbed_seqs.push_back(k);
    }
    result.report.entries.push_back(std::move(entry));
    in_run = false;
  }

  if (in_run) {
    // Trailing run: fold backward into the last surviving bead, or keep the run's
    // last bead as the sole carrier when nothing before it survived.
    SquashEntry entry;
    entry.direction = SquashDirection::Backward;
    std::size_t from_snapshot = 0;
    const ChangeBead* identity = &beads.back();
    std::optional<std::size_t> survivor_original;
    if (!out.empty()) {
      survivor_original = out_original.back();
      identity = &beads[*survivor_original];
      from_snapshot = *survivor_original;
      // The survivor may itself be a forward squash; start from its run's pre-snapshot.
      for (const auto& e : result.report.entries)
        if (e.survivor_seq == survivor_original && !e.absorbed_seqs.empty()) from_snapshot = e.absorbed_seqs.front();
      out.pop_back();
      out_original.pop_back();
    } else {
      from_snapshot = run_start;
      survivor_original = beads.size() - 1;
    }
    for (std::size_t j = run_start; j < beads.size(); ++j) {
      if (j == survivor_original) continue;
      entry.absorbed.push_back(beads[j].id);
      entry.absorbed_seqs.push_back(j);
    }
    ChangeBead b = merged(from_snapshot, beads.size(), *identity);
    if (!b.hunks.empty()) {
      entry.survivor = b.id;
      entry.survivor_seq = survivor_original;
      out.push_back(std::move(b));
      out_original.push_back(*survivor_original);
    }
    result.report.entries.push_back(std::move(entry));
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].seq = i;
    if (!input.origin.commit_ids.empty()) result.history.origin.commit_ids.push_back(input.origin.commit_ids[out_original[i]]);
  }
  if (out.empty()) throw AllUnparseable("history reduces to no changes");
  return result;
}

}  // namespace cbt
