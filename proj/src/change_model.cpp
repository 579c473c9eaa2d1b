#include "cbt/change_model.hpp"

#include <algorithm>
#include <set>

#include "cbt/errors.hpp"

namespace cbt {

Lines splitLines(std::string_view text) {
  Lines lines;
  std::size_t pos = 0;
  while (true) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(pos));
      break;
    }
    lines.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string joinLines(const Lines& lines) {
  std::string out;
  std::size_t total = lines.size();
  for (const auto& l : lines) total += l.size();
  out.reserve(total);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

std::string paletteColor(std::size_t creation_index) {
  return std::string(kPalette[creation_index % kPalette.size()]);
}

const Cluster* Partition::find(ClusterId id) const {
  for (const auto& c : clusters)
    if (c.id == id) return &c;
  return nullptr;
}

Cluster* Partition::find(ClusterId id) {
  for (auto& c : clusters)
    if (c.id == id) return &c;
  return nullptr;
}

const Cluster* Partition::clusterOf(BeadId bead) const {
  for (const auto& c : clusters)
    if (std::binary_search(c.bead_ids.begin(), c.bead_ids.end(), bead)) return &c;
  return nullptr;
}

void normalize(Partition& partition) {
  for (auto& c : partition.clusters) std::sort(c.bead_ids.begin(), c.bead_ids.end());
  std::stable_sort(partition.clusters.begin(), partition.clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.bead_ids.empty() || b.bead_ids.empty()) return a.bead_ids.size() > b.bead_ids.size();
    return a.bead_ids.front() < b.bead_ids.front();
  });
}

void validatePartition(const Partition& partition, std::span<const ChangeBead> beads) {
  std::set<BeadId> expected;
  for (const auto& b : beads) expected.insert(b.id);
  std::set<BeadId> seen;
  std::set<ClusterId> ids;
  const BeadId* previous_first = nullptr;
  for (const auto& c : partition.clusters) {
    if (!ids.insert(c.id).second) throw ProcessingError("duplicate cluster id " + std::to_string(c.id.value));
    if (c.bead_ids.empty()) throw ProcessingError("cluster " + std::to_string(c.id.value) + " is empty");
    for (std::size_t i = 0; i < c.bead_ids.size(); ++i) {
      if (i && !(c.bead_ids[i - 1] < c.bead_ids[i]))
        throw ProcessingError("cluster " + std::to_string(c.id.value) + " is not seq-sorted");
      if (!expected.contains(c.bead_ids[i]))
        throw ProcessingError("cluster " + std::to_string(c.id.value) + " names unknown bead " +
                              std::to_string(c.bead_ids[i].value));
      if (!seen.insert(c.bead_ids[i]).second)
        throw ProcessingError("bead " + std::to_string(c.bead_ids[i].value) + " is in two clusters");
    }
    if (previous_first && !(*previous_first < c.bead_ids.front()))
      throw ProcessingError("clusters are not ordered by earliest bead");
    previous_first = &c.bead_ids.front();
  }
  if (seen.size() != expected.size()) throw ProcessingError("partition does not cover every bead");
}

void validateBeads(std::span<const ChangeBead> beads) {
  for (std::size_t i = 0; i < beads.size(); ++i) {
    const auto& b = beads[i];
    const auto where = "bead seq " + std::to_string(i) + ": ";
    if (b.seq != i) throw ProcessingError(where + "seq values are not dense");
    if (i && !(beads[i - 1].id < b.id)) throw ProcessingError(where + "ids are not increasing");
    if (i && beads[i - 1].timestamp > b.timestamp) throw ProcessingError(where + "timestamps decrease");
    if (b.hunks.empty()) throw ProcessingError(where + "no hunks");
    for (const auto& h : b.hunks) {
      if (h.deleted.empty() && h.inserted.empty()) throw ProcessingError(where + "empty hunk");
      if (h.start_line_before < 1) throw ProcessingError(where + "hunk start below 1");
    }
    if (b.enclosing_method && !b.enclosing_class) throw ProcessingError(where + "method without class");
  }
}

Snapshot applyHunks(const Snapshot& base, std::span<const Hunk> hunks) {
  Snapshot out = base;
  std::map<std::string, std::vector<const Hunk*>> by_file;
  for (const auto& h : hunks) by_file[h.file].push_back(&h);

  for (auto& [file, file_hunks] : by_file) {
    std::stable_sort(file_hunks.begin(), file_hunks.end(),
                     [](const Hunk* a, const Hunk* b) { return a->start_line_before < b->start_line_before; });
    const auto it = base.files.find(file);
    const Lines before = splitLines(it == base.files.end() ? std::string_view{} : std::string_view{it->second});
    Lines after;
    after.reserve(before.size());
    std::size_t cursor = 0;  // 0-based index into `before` of the next uncopied line
    for (const Hunk* h : file_hunks) {
      if (h->deleted.empty() && h->inserted.empty()) throw PatchMismatch(file, h->start_line_before, "empty hunk");
      const std::size_t start = h->start_line_before - 1;
      if (h->start_line_before < 1 || start > before.size())
        throw PatchMismatch(file, h->start_line_before, "hunk starts outside the file");
      if (start < cursor) throw PatchMismatch(file, h->start_line_before, "hunk overlaps the previous hunk");
      if (start + h->deleted.size() > before.size())
        throw PatchMismatch(file, h->start_line_before, "deletion runs past the end of the file");
      for (std::size_t i = 0; i < h->deleted.size(); ++i) {
        if (before[start + i] != h->deleted[i])
          throw PatchMismatch(file, h->start_line_before + i,
                              "expected '" + h->deleted[i] + "', found '" + before[start + i] + "'");
      }
      after.insert(after.end(), before.begin() + static_cast<std::ptrdiff_t>(cursor),
                   before.begin() + static_cast<std::ptrdiff_t>(start));
      after.insert(after.end(), h->inserted.begin(), h->inserted.end());
      cursor = start + h->deleted.size();
    }
    after.insert(after.end(), before.begin() + static_cast<std::ptrdiff_t>(cursor), before.end());
    out.files[file] = joinLines(after);
  }
  return out;
}

Snapshot applyHunks(const Snapshot& base, const ChangeBead& bead) { return applyHunks(base, bead.hunks); }

Snapshot snapshotAt(std::span<const ChangeBead> history, const Snapshot& base, std::size_t k) {
  if (k > history.size())
    throw ProcessingError("snapshot index " + std::to_string(k) + " beyond history of " +
                          std::to_string(history.size()));
  Snapshot s = base;
  for (std::size_t i = 0; i < k; ++i) s = applyHunks(s, history[i]);
  return s;
}

}  // namespace cbt
