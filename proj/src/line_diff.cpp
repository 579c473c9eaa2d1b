#include "cbt/line_diff.hpp"

#include <algorithm>
#include <cstdint>

#include "cbt/errors.hpp"

namespace cbt {
namespace {

/// Myers forward search over the trimmed middle section; returns the script for it.
std::vector<EditOp> myers(const Lines& a, std::size_t a_lo, std::size_t a_hi, const Lines& b, std::size_t b_lo,
                          std::size_t b_hi) {
  const auto n = static_cast<std::int64_t>(a_hi - a_lo);
  const auto m = static_cast<std::int64_t>(b_hi - b_lo);
  std::vector<EditOp> ops;
  if (n == 0 || m == 0) {
    ops.insert(ops.end(), static_cast<std::size_t>(n), EditOp::Delete);
    ops.insert(ops.end(), static_cast<std::size_t>(m), EditOp::Insert);
    return ops;
  }

  const std::int64_t max = n + m;
  const std::int64_t offset = max;
  std::vector<std::int64_t> v(static_cast<std::size_t>(2 * max + 2), 0);
  std::vector<std::vector<std::int64_t>> trace;

  std::int64_t final_d = -1;
  for (std::int64_t d = 0; d <= max; ++d) {
    trace.push_back(v);
    for (std::int64_t k = -d; k <= d; k += 2) {
      std::int64_t x;
      if (k == -d || (k != d && v[k - 1 + offset] < v[k + 1 + offset]))
        x = v[k + 1 + offset];
      else
        x = v[k - 1 + offset] + 1;
      std::int64_t y = x - k;
      while (x < n && y < m && a[a_lo + x] == b[b_lo + y]) {
        ++x;
        ++y;
      }
      v[k + offset] = x;
      if (x >= n && y >= m) {
        final_d = d;
        break;
      }
    }
    if (final_d >= 0) break;
  }

  // Backtrack from (n, m) through the saved frontiers.
  std::int64_t x = n;
  std::int64_t y = m;
  for (std::int64_t d = final_d; d > 0; --d) {
    const auto& vd = trace[static_cast<std::size_t>(d)];
    const std::int64_t k = x - y;
    std::int64_t prev_k;
    if (k == -d || (k != d && vd[k - 1 + offset] < vd[k + 1 + offset]))
      prev_k = k + 1;
    else
      prev_k = k - 1;
    const std::int64_t prev_x = vd[prev_k + offset];
    const std::int64_t prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y) {
      ops.push_back(EditOp::Keep);
      --x;
      --y;
    }
    ops.push_back(x == prev_x ? EditOp::Insert : EditOp::Delete);
    x = prev_x;
    y = prev_y;
  }
  while (x > 0 && y > 0) {
    ops.push_back(EditOp::Keep);
    --x;
    --y;
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

}  // namespace

std::vector<EditOp> editScript(const Lines& before, const Lines& after) {
  std::size_t prefix = 0;
  while (prefix < before.size() && prefix < after.size() && before[prefix] == after[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < before.size() - prefix && suffix < after.size() - prefix &&
         before[before.size() - 1 - suffix] == after[after.size() - 1 - suffix])
    ++suffix;

  std::vector<EditOp> ops(prefix, EditOp::Keep);
  auto middle = myers(before, prefix, before.size() - suffix, after, prefix, after.size() - suffix);
  ops.insert(ops.end(), middle.begin(), middle.end());
  ops.insert(ops.end(), suffix, EditOp::Keep);
  return ops;
}

std::vector<Hunk> diffLines(const Lines& before, const Lines& after, const std::string& file) {
  const auto ops = editScript(before, after);
  std::vector<Hunk> hunks;
  std::size_t ia = 0;
  std::size_t ib = 0;
  std::size_t i = 0;
  while (i < ops.size()) {
    if (ops[i] == EditOp::Keep) {
      ++ia;
      ++ib;
      ++i;
      continue;
    }
    Hunk h;
    h.file = file;
    h.start_line_before = ia + 1;
    while (i < ops.size() && ops[i] != EditOp::Keep) {
      if (ops[i] == EditOp::Delete)
        h.deleted.push_back(before[ia++]);
      else
        h.inserted.push_back(after[ib++]);
      ++i;
    }
    hunks.push_back(std::move(h));
  }
  return hunks;
}

std::vector<Hunk> diffSnapshots(std::string_view before, std::string_view after, const std::string& file) {
  return diffLines(splitLines(before), splitLines(after), file);
}

std::vector<Hunk> diffSnapshotFiles(const Snapshot& before, const Snapshot& after) {
  for (const auto& [path, text] : before.files)
    if (!after.files.contains(path)) throw ProcessingError("file disappeared: " + path);
  std::vector<Hunk> out;
  for (const auto& [path, text] : after.files) {
    const auto it = before.files.find(path);
    const std::string_view old_text = it == before.files.end() ? std::string_view{} : std::string_view{it->second};
    if (it != before.files.end() && old_text == text) continue;
    auto hunks = diffSnapshots(old_text, text, path);
    out.insert(out.end(), std::make_move_iterator(hunks.begin()), std::make_move_iterator(hunks.end()));
  }
  return out;
}

}  // namespace cbt
