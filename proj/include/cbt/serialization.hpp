#pragma once

#include <nlohmann/json.hpp>

#include "cbt/change_model.hpp"
#include "cbt/exporter.hpp"
#include "cbt/preprocess.hpp"
#include "cbt/session.hpp"
#include "cbt/untangle.hpp"

namespace cbt {

using Json = nlohmann::ordered_json;

/// Hunk fields follow the change-log convention: start, del, ins (+ file when asked).
Json toJson(const Hunk& hunk, bool with_file = true);
Hunk hunkFromJson(const Json& j, const std::string& file);

Json toJson(const ChangeBead& bead);
Json toJson(const Cluster& cluster);
Json toJson(const Partition& partition);

/// Accepts a bare cluster array or any object with a "partition" or "clusters"
/// array (analysis files, session sidecars, API payloads). Missing colors are
/// filled from the palette by position. Throws InputError on malformed input.
Partition partitionFromJson(const Json& j);

Json toJson(const DistanceConfig& cfg);
/// Overlays the fields present in `j` onto `base`; unknown fields are rejected.
DistanceConfig configFromJson(const Json& j, DistanceConfig base = {});

Json toJson(const SquashReport& report);
Json toJson(const AugmentedDiff& diff, const Partition& partition);
Json toJson(const MapPoint& point);

Json toJson(const TailoringState& state);
TailoringState tailoringStateFromJson(const Json& j);

/// The portable export bundle: plan order, per-commit hunks and messages.
Json bundleToJson(const ExportPlan& plan, const ExportResult& result);

}  // namespace cbt
