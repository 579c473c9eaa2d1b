#pragma once

#include <filesystem>
#include <memory>

#include "cbt/history.hpp"
#include "cbt/preprocess.hpp"
#include "cbt/serialization.hpp"
#include "cbt/untangle.hpp"

namespace cbt {

struct Analysis {
  std::shared_ptr<const FineHistory> history;  // preprocessed and annotated
  SquashReport squash;
  DistanceConfig config;
  Partition partition;  // initial clusters
};

/// Preprocess, annotate and cluster an ingested history.
Analysis analyze(const FineHistory& raw, const DistanceConfig& config);
Analysis analyze(const std::filesystem::path& input, const DistanceConfig& config, const IngestOptions& options = {});

Json toJson(const Analysis& analysis);

/// Where a session over `input` is persisted: "<input>.cbt-session.json".
std::filesystem::path sidecarPath(const std::filesystem::path& input);

}  // namespace cbt
