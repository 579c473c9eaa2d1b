#include "cbt/pipeline.hpp"

#include "cbt/structure.hpp"

namespace cbt {

Analysis analyze(const FineHistory& raw, const DistanceConfig& config) {
  validate(config);
  auto pre = squashUnparseable(raw);
  auto history = std::make_shared<const FineHistory>(annotateBeads(std::move(pre.history)));
  Analysis a;
  a.partition = initialClusters(*history, config);
  a.history = std::move(history);
  a.squash = std::move(pre.report);
  a.config = config;
  return a;
}

Analysis analyze(const std::filesystem::path& input, const DistanceConfig& config, const IngestOptions& options) {
  return analyze(ingest(input, options), config);
}

Json toJson(const Analysis& analysis) {
  const auto& origin = analysis.history->origin;
  Json beads = Json::array();
  for (const auto& b : analysis.history->beads) {
    Json j = toJson(b);
    if (b.seq < origin.commit_ids.size()) j["commit"] = origin.commit_ids[b.seq];
    beads.push_back(std::move(j));
  }
  return {{"version", 1},
          {"source", origin.source},
          {"format", origin.format},
          {"config", toJson(analysis.config)},
          {"beads", std::move(beads)},
          {"partition", toJson(analysis.partition)},
          {"squash_report", toJson(analysis.squash)}};
}

std::filesystem::path sidecarPath(const std::filesystem::path& input) {
  auto p = input.lexically_normal();
  if (!p.has_filename()) p = p.parent_path();  // "repo/" names the directory itself
  return p.string() + ".cbt-session.json";
}

}  // namespace cbt
