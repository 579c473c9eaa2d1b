#include "cbt/session.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "cbt/errors.hpp"

namespace cbt {

std::string locationLabel(const ChangeBead& bead) {
  if (!bead.enclosing_class) return bead.file();
  const std::string& cls = *bead.enclosing_class;
  const auto dot = cls.rfind('.');
  const std::string simple = dot == std::string::npos ? cls : cls.substr(dot + 1);
  if (!bead.enclosing_method) return simple;
  const std::string& m = *bead.enclosing_method;
  if (m.size() > cls.size() && m.compare(0, cls.size(), cls) == 0 && m[cls.size()] == '.')
    return simple + m.substr(cls.size());
  return m;
}

ClusterSession::ClusterSession(std::shared_ptr<const FineHistory> history, Partition initial)
    : history_(std::move(history)), weave_(std::make_shared<const LineWeave>(*history_)) {
  normalize(initial);
  validatePartition(initial, history_->beads);
  std::uint32_t max_id = 0;
  for (const auto& c : initial.clusters) max_id = std::max(max_id, c.id.value);
  state_.next_cluster_id = max_id + 1;
  state_.next_color_index = initial.clusters.size();
  state_.partition = std::move(initial);
}

ClusterSession::ClusterSession(std::shared_ptr<const FineHistory> history, TailoringState state, std::uint64_t revision)
    : history_(std::move(history)),
      weave_(std::make_shared<const LineWeave>(*history_)),
      state_(std::move(state)),
      revision_(revision) {
  normalize(state_.partition);
  validatePartition(state_.partition, history_->beads);
  for (const auto& c : state_.partition.clusters)
    if (c.id.value >= state_.next_cluster_id) throw ProcessingError("cluster id cursor is behind existing ids");
}

const ChangeBead& ClusterSession::bead(BeadId id) const {
  const auto& beads = history_->beads;
  const auto it = std::lower_bound(beads.begin(), beads.end(), id,
                                   [](const ChangeBead& b, BeadId v) { return b.id < v; });
  if (it == beads.end() || it->id != id) throw InvalidRequest("unknown bead " + std::to_string(id.value));
  return *it;
}

void ClusterSession::commit(TailoringState next) {
  normalize(next.partition);
  validatePartition(next.partition, history_->beads);
  undo_.push_back(std::move(state_));
  redo_.clear();
  state_ = std::move(next);
  ++revision_;
}

ClusterId ClusterSession::splitCluster(ClusterId cluster, std::span<const BeadId> beads) {
  const Cluster* source = state_.partition.find(cluster);
  if (!source) throw UnknownCluster(cluster.value);
  std::set<BeadId> extract(beads.begin(), beads.end());
  if (extract.empty()) throw NotProperSubset("empty selection");
  for (BeadId b : extract)
    if (!std::binary_search(source->bead_ids.begin(), source->bead_ids.end(), b))
      throw NotProperSubset("bead " + std::to_string(b.value) + " is not in cluster " + std::to_string(cluster.value));
  if (extract.size() == source->bead_ids.size()) throw NotProperSubset("selection is the whole cluster");

  TailoringState next = state_;
  Cluster* kept = next.partition.find(cluster);
  std::erase_if(kept->bead_ids, [&](BeadId b) { return extract.contains(b); });
  const ClusterId new_id{next.next_cluster_id++};
  next.partition.clusters.push_back({new_id, {extract.begin(), extract.end()}, paletteColor(next.next_color_index++)});
  commit(std::move(next));
  return new_id;
}

ClusterId ClusterSession::mergeClusters(std::span<const ClusterId> ids) {
  const std::set<ClusterId> unique(ids.begin(), ids.end());
  for (ClusterId id : unique)
    if (!state_.partition.find(id)) throw UnknownCluster(id.value);
  if (unique.size() < 2) throw FewerThanTwo();

  TailoringState next = state_;
  const Cluster* survivor = nullptr;
  std::vector<BeadId> united;
  for (const auto& c : next.partition.clusters) {
    if (!unique.contains(c.id)) continue;
    if (!survivor || c.bead_ids.front() < survivor->bead_ids.front()) survivor = &c;
    united.insert(united.end(), c.bead_ids.begin(), c.bead_ids.end());
  }
  std::sort(united.begin(), united.end());
  Cluster merged{survivor->id, std::move(united), survivor->color};
  std::erase_if(next.partition.clusters, [&](const Cluster& c) { return unique.contains(c.id); });
  next.partition.clusters.push_back(std::move(merged));
  const ClusterId result = next.partition.clusters.back().id;
  commit(std::move(next));
  return result;
}

void ClusterSession::undo() {
  if (undo_.empty()) throw NothingToUndo("undo");
  redo_.push_back(std::move(state_));
  state_ = std::move(undo_.back());
  undo_.pop_back();
  ++revision_;
}

void ClusterSession::redo() {
  if (redo_.empty()) throw NothingToUndo("redo");
  undo_.push_back(std::move(state_));
  state_ = std::move(redo_.back());
  redo_.pop_back();
  ++revision_;
}

AugmentedDiff ClusterSession::augmentedDiff(std::span<const ClusterId> selected, std::optional<std::size_t> context) const {
  if (selected.empty()) throw InvalidRequest("select at least one cluster");
  std::map<std::size_t, ClusterId> owner_of_seq;  // selected beads only
  std::map<BeadId, std::size_t> seq_of;
  for (const auto& b : history_->beads) seq_of[b.id] = b.seq;
  for (ClusterId id : selected) {
    const Cluster* c = state_.partition.find(id);
    if (!c) throw UnknownCluster(id.value);
    for (BeadId b : c->bead_ids) owner_of_seq[seq_of.at(b)] = c->id;
  }

  std::vector<std::size_t> seqs;
  for (const auto& [seq, owner] : owner_of_seq) seqs.push_back(seq);
  const std::size_t first = seqs.front();
  const auto base_mask = weave_->prefix(first);
  auto result_mask = base_mask;
  for (std::size_t s : seqs) result_mask[s] = true;
  if (const auto conflict = weave_->firstUnmetDependency(seqs, result_mask))
    throw SelectionPatchConflict(conflict->first, conflict->second);

  std::set<std::string> files;
  for (std::size_t s : seqs) files.insert(weave_->touchedFiles(s).begin(), weave_->touchedFiles(s).end());

  AugmentedDiff diff;
  for (const auto& file : files) {
    const auto& lines = weave_->files().at(file);
    const bool in_base_file = weave_->fileExists(file, base_mask);
    std::vector<DiffLine> out;
    std::size_t base_no = 0;
    std::size_t result_no = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto& l = lines[i];
      const bool in_base = in_base_file && weave_->alive(l, base_mask);
      const bool in_result = weave_->alive(l, result_mask);
      if (!in_base && !in_result) continue;
      DiffLine d;
      d.file = file;
      d.text = l.text;
      if (in_base && in_result) {
        d.kind = DiffLineKind::Context;
        d.base_line = ++base_no;
        d.result_line = ++result_no;
      } else if (in_base) {
        d.kind = DiffLineKind::Removed;
        d.base_line = ++base_no;
        d.owner = owner_of_seq.at(*l.deleted_by);
        d.bead = history_->beads[*l.deleted_by].id;
      } else {
        d.kind = DiffLineKind::Added;
        d.result_line = ++result_no;
        d.owner = owner_of_seq.at(*l.inserted_by);
        d.bead = history_->beads[*l.inserted_by].id;
      }
      out.push_back(std::move(d));
    }
    // The empty piece after a final newline is not a line of its own.
    if (!out.empty() && out.back().kind == DiffLineKind::Context && out.back().text.empty()) out.pop_back();

    if (context) {
      std::vector<bool> keep(out.size(), false);
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].kind == DiffLineKind::Context) continue;
        const std::size_t lo = i >= *context ? i - *context : 0;
        const std::size_t hi = std::min(out.size() - 1, i + *context);
        for (std::size_t j = lo; j <= hi; ++j) keep[j] = true;
      }
      for (std::size_t i = 0; i < out.size(); ++i)
        if (keep[i]) diff.lines.push_back(std::move(out[i]));
    } else {
      diff.lines.insert(diff.lines.end(), std::make_move_iterator(out.begin()), std::make_move_iterator(out.end()));
    }
  }
  return diff;
}

std::vector<MapPoint> ClusterSession::projectBeads() const {
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> lanes;
  std::map<BeadId, ClusterId> cluster_of;
  for (const auto& c : state_.partition.clusters)
    for (BeadId b : c.bead_ids) cluster_of[b] = c.id;

  std::vector<MapPoint> points;
  for (const auto& b : history_->beads) {
    // Absent class/method keys use a NUL marker so they never collide with a name.
    const auto key = std::make_tuple(b.file(), b.enclosing_class.value_or(std::string(1, '\0')),
                                     b.enclosing_method.value_or(std::string(1, '\0')));
    const auto [it, inserted] = lanes.try_emplace(key, lanes.size());
    points.push_back({b.id, b.timestamp, it->second, cluster_of.at(b.id), locationLabel(b)});
  }
  return points;
}

}  // namespace cbt
