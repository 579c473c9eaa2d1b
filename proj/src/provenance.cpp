#include "cbt/provenance.hpp"

#include <algorithm>

#include "cbt/errors.hpp"

namespace cbt {

LineWeave::LineWeave(const FineHistory& history)
    : touched_(history.beads.size()), deps_(history.beads.size()) {
  for (const auto& [path, text] : history.base.files) {
    base_files_.insert(path);
    auto& weave = files_[path];
    for (auto& l : splitLines(text)) weave.push_back({std::move(l), std::nullopt, std::nullopt});
  }

  for (const auto& bead : history.beads) {
    const std::size_t seq = bead.seq;
    std::map<std::string, std::vector<const Hunk*>> by_file;
    for (const auto& h : bead.hunks) by_file[h.file].push_back(&h);

    for (auto& [path, hunks] : by_file) {
      touched_[seq].insert(path);
      auto& weave = files_[path];
      if (weave.empty()) weave.push_back({std::string{}, std::nullopt, std::nullopt});  // new file: empty text
      std::stable_sort(hunks.begin(), hunks.end(),
                       [](const Hunk* a, const Hunk* b) { return a->start_line_before < b->start_line_before; });

      // Weave slots of the lines alive before this bead.
      std::vector<std::size_t> alive;
      for (std::size_t i = 0; i < weave.size(); ++i)
        if (!weave[i].deleted_by) alive.push_back(i);

      std::map<std::size_t, std::vector<std::string>> inserts_before;  // alive index -> new lines
      std::vector<std::size_t> deletes;
      std::size_t cursor = 0;
      for (const Hunk* h : hunks) {
        const std::size_t start = h->start_line_before - 1;
        if (h->start_line_before < 1 || start > alive.size() || start < cursor ||
            start + h->deleted.size() > alive.size())
          throw PatchMismatch(path, h->start_line_before, "hunk outside the file");
        for (std::size_t k = 0; k < h->deleted.size(); ++k) {
          const auto& line = weave[alive[start + k]];
          if (line.text != h->deleted[k]) throw PatchMismatch(path, h->start_line_before + k, "deleted line differs");
          deletes.push_back(alive[start + k]);
        }
        cursor = start + h->deleted.size();
        auto& bucket = inserts_before[cursor];
        bucket.insert(bucket.end(), h->inserted.begin(), h->inserted.end());
      }

      for (std::size_t slot : deletes) {
        weave[slot].deleted_by = seq;
        if (const auto& by = weave[slot].inserted_by) deps_[seq].push_back(*by);
      }

      std::vector<Line> rebuilt;
      rebuilt.reserve(weave.size() + inserts_before.size());
      auto emit = [&](std::size_t alive_index) {
        const auto it = inserts_before.find(alive_index);
        if (it == inserts_before.end()) return;
        for (auto& text : it->second) rebuilt.push_back({std::move(text), seq, std::nullopt});
      };
      std::size_t next_alive = 0;
      for (std::size_t i = 0; i < weave.size(); ++i) {
        if (next_alive < alive.size() && alive[next_alive] == i) emit(next_alive++);
        rebuilt.push_back(std::move(weave[i]));
      }
      emit(alive.size());
      weave = std::move(rebuilt);
    }
    auto& d = deps_[seq];
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
}

bool LineWeave::alive(const Line& line, const Mask& applied) const {
  const bool present = !line.inserted_by || applied[*line.inserted_by];
  const bool removed = line.deleted_by && applied[*line.deleted_by];
  return present && !removed;
}

bool LineWeave::fileExists(const std::string& file, const Mask& applied) const {
  if (base_files_.contains(file)) return true;
  for (std::size_t seq = 0; seq < touched_.size(); ++seq)
    if (applied[seq] && touched_[seq].contains(file)) return true;
  return false;
}

Snapshot LineWeave::render(const Mask& applied) const {
  Snapshot s;
  for (const auto& [path, weave] : files_) {
    if (!fileExists(path, applied)) continue;
    Lines lines;
    for (const auto& l : weave)
      if (alive(l, applied)) lines.push_back(l.text);
    s.files[path] = joinLines(lines);
  }
  return s;
}

std::vector<Hunk> LineWeave::diff(const Mask& before, const Mask& after) const {
  std::vector<Hunk> hunks;
  for (const auto& [path, weave] : files_) {
    // A file absent from a side renders as its lone virtual line, which alive() reports anyway.
    std::optional<Hunk> open;
    std::size_t before_line = 0;
    auto close = [&] {
      if (open) hunks.push_back(std::move(*open));
      open.reset();
    };
    for (const auto& l : weave) {
      const bool in_before = alive(l, before);
      const bool in_after = alive(l, after);
      if (in_before && in_after) {
        close();
        ++before_line;
        continue;
      }
      if (!in_before && !in_after) continue;
      if (!open) open = Hunk{path, before_line + 1, {}, {}};
      if (in_before) {
        open->deleted.push_back(l.text);
        ++before_line;
      } else {
        open->inserted.push_back(l.text);
      }
    }
    close();
  }
  return hunks;
}

std::optional<std::pair<std::size_t, std::size_t>> LineWeave::firstUnmetDependency(
    const std::vector<std::size_t>& applying, const Mask& available) const {
  std::vector<std::size_t> sorted = applying;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t seq : sorted)
    for (std::size_t dep : deps_[seq])
      if (!available[dep]) return std::make_pair(seq, dep);
  return std::nullopt;
}

LineWeave::Mask LineWeave::prefix(std::size_t k) const {
  Mask m(touched_.size(), false);
  for (std::size_t i = 0; i < k && i < m.size(); ++i) m[i] = true;
  return m;
}

}  // namespace cbt
