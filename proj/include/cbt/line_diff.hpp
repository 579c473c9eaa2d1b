#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cbt/change_model.hpp"

namespace cbt {

enum class EditOp { Keep, Delete, Insert };

/// Shortest edit script between two line sequences (Myers' O(ND) algorithm).
std::vector<EditOp> editScript(const Lines& before, const Lines& after);

/// Minimal line-level hunks turning `before` into `after`. Changes separated by at
/// least one unchanged line become separate hunks.
std::vector<Hunk> diffLines(const Lines& before, const Lines& after, const std::string& file = {});

std::vector<Hunk> diffSnapshots(std::string_view before, std::string_view after, const std::string& file = {});

/// Hunks for every file whose text differs, in path order. A file absent on one
/// side is diffed as empty text. Files may not disappear.
std::vector<Hunk> diffSnapshotFiles(const Snapshot& before, const Snapshot& after);

}  // namespace cbt
