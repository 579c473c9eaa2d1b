#include "cbt/serialization.hpp"

#include <set>

#include "cbt/errors.hpp"

namespace cbt {

namespace {

template <typename T>
T require(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string(what) + " is missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string(what) + " has a malformed \"" + key + "\"");
  }
}

Json optionalString(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

const char* kindName(DiffLineKind kind) {
  switch (kind) {
    case DiffLineKind::Added:
      return "added";
    case DiffLineKind::Removed:
      return "removed";
    case DiffLineKind::Context:
      break;
  }
  return "context";
}

}  // namespace

Json toJson(const Hunk& hunk, bool with_file) {
  Json j = Json::object();
  if (with_file) j["file"] = hunk.file;
  j["start"] = hunk.start_line_before;
  j["del"] = hunk.deleted;
  j["ins"] = hunk.inserted;
  return j;
}

Hunk hunkFromJson(const Json& j, const std::string& file) {
  Hunk h;
  h.file = j.contains("file") ? require<std::string>(j, "file", "hunk") : file;
  h.start_line_before = require<std::size_t>(j, "start", "hunk");
  h.deleted = require<Lines>(j, "del", "hunk");
  h.inserted = require<Lines>(j, "ins", "hunk");
  return h;
}

Json toJson(const ChangeBead& bead) {
  Json hunks = Json::array();
  for (const auto& h : bead.hunks) hunks.push_back(toJson(h));
  return {{"id", bead.id.value},
          {"seq", bead.seq},
          {"ts", bead.timestamp},
          {"file", bead.file()},
          {"class", optionalString(bead.enclosing_class)},
          {"method", optionalString(bead.enclosing_method)},
          {"hunks", std::move(hunks)}};
}

Json toJson(const Cluster& cluster) {
  Json beads = Json::array();
  for (BeadId b : cluster.bead_ids) beads.push_back(b.value);
  return {{"id", cluster.id.value}, {"color", cluster.color}, {"bead_ids", std::move(beads)}};
}

Json toJson(const Partition& partition) {
  Json out = Json::array();
  for (const auto& c : partition.clusters) out.push_back(toJson(c));
  return out;
}

Partition partitionFromJson(const Json& j) {
  const Json* clusters = &j;
  if (j.is_object()) {
    if (j.contains("partition"))
      clusters = &j.at("partition");
    else if (j.contains("clusters"))
      clusters = &j.at("clusters");
  }
  if (!clusters->is_array()) throw InputError("partition must be an array of clusters");
  Partition p;
  std::size_t index = 0;
  for (const auto& c : *clusters) {
    Cluster cluster;
    cluster.id = ClusterId{require<std::uint32_t>(c, "id", "cluster")};
    for (auto b : require<std::vector<std::uint32_t>>(c, "bead_ids", "cluster")) cluster.bead_ids.push_back(BeadId{b});
    cluster.color = c.contains("color") ? require<std::string>(c, "color", "cluster") : paletteColor(index);
    p.clusters.push_back(std::move(cluster));
    ++index;
  }
  return p;
}

Json toJson(const DistanceConfig& cfg) {
  return {{"alpha_time", cfg.alpha_time},
          {"alpha_entries", cfg.alpha_entries},
          {"alpha_same_class", cfg.alpha_same_class},
          {"alpha_same_method", cfg.alpha_same_method},
          {"time_cap", cfg.time_cap},
          {"entries_cap", cfg.entries_cap},
          {"theta", cfg.theta}};
}

DistanceConfig configFromJson(const Json& j, DistanceConfig cfg) {
  if (!j.is_object()) throw InputError("distance config must be a JSON object");
  const std::pair<const char*, double*> fields[] = {
      {"alpha_time", &cfg.alpha_time},       {"alpha_entries", &cfg.alpha_entries},
      {"alpha_same_class", &cfg.alpha_same_class}, {"alpha_same_method", &cfg.alpha_same_method},
      {"time_cap", &cfg.time_cap},           {"entries_cap", &cfg.entries_cap},
      {"theta", &cfg.theta}};
  std::set<std::string> known;
  for (const auto& [key, slot] : fields) {
    known.insert(key);
    if (!j.contains(key)) continue;
    if (!j.at(key).is_number()) throw InputError(std::string("config field \"") + key + "\" must be a number");
    *slot = j.at(key).get<double>();
  }
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw InputError("unknown config field \"" + key + "\"");
  validate(cfg);
  return cfg;
}

Json toJson(const SquashReport& report) {
  Json out = Json::array();
  for (const auto& e : report.entries) {
    Json absorbed = Json::array();
    for (BeadId b : e.absorbed) absorbed.push_back(b.value);
    out.push_back({{"direction", e.direction == SquashDirection::Forward ? "forward" : "backward"},
                   {"absorbed", std::move(absorbed)},
                   {"absorbed_seqs", e.absorbed_seqs},
                   {"survivor", e.survivor ? Json(e.survivor->value) : Json(nullptr)}});
  }
  return out;
}

Json toJson(const AugmentedDiff& diff, const Partition& partition) {
  Json lines = Json::array();
  for (const auto& l : diff.lines) {
    Json j = {{"kind", kindName(l.kind)}, {"file", l.file}, {"text", l.text}};
    j["owner"] = l.owner ? Json(l.owner->value) : Json(nullptr);
    const Cluster* owner = l.owner ? partition.find(*l.owner) : nullptr;
    j["color"] = owner ? Json(owner->color) : Json(nullptr);
    j["bead"] = l.bead ? Json(l.bead->value) : Json(nullptr);
    j["base_line"] = l.base_line ? Json(*l.base_line) : Json(nullptr);
    j["result_line"] = l.result_line ? Json(*l.result_line) : Json(nullptr);
    lines.push_back(std::move(j));
  }
  return {{"lines", std::move(lines)}};
}

Json toJson(const MapPoint& point) {
  return {{"bead_id", point.bead_id.value},
          {"x", point.x},
          {"y", point.y},
          {"cluster_id", point.cluster_id.value},
          {"label", point.label}};
}

Json toJson(const TailoringState& state) {
  return {{"next_cluster_id", state.next_cluster_id},
          {"next_color_index", state.next_color_index},
          {"partition", toJson(state.partition)}};
}

TailoringState tailoringStateFromJson(const Json& j) {
  TailoringState s;
  s.partition = partitionFromJson(j);
  s.next_cluster_id = require<std::uint32_t>(j, "next_cluster_id", "session state");
  s.next_color_index = require<std::size_t>(j, "next_color_index", "session state");
  return s;
}

Json bundleToJson(const ExportPlan& plan, const ExportResult& result) {
  Json order = Json::array();
  Json commits = Json::array();
  for (std::size_t i = 0; i < plan.commits.size(); ++i) {
    const auto& c = plan.commits[i];
    order.push_back(c.cluster_id.value);
    Json beads = Json::array();
    for (BeadId b : c.bead_ids) beads.push_back(b.value);
    Json hunks = Json::array();
    for (const auto& h : c.hunks) hunks.push_back(toJson(h));
    Json entry = {{"cluster_id", c.cluster_id.value},
                  {"bead_ids", std::move(beads)},
                  {"ts", c.commit_timestamp},
                  {"message", i < result.messages.size() ? Json(result.messages[i]) : Json(nullptr)},
                  {"hunks", std::move(hunks)}};
    if (i + 1 < result.commit_ids.size()) entry["commit"] = result.commit_ids[i + 1];
    commits.push_back(std::move(entry));
  }
  return {{"version", 1},
          {"base", plan.base.files},
          {"base_ts", plan.base_timestamp},
          {"order", std::move(order)},
          {"commits", std::move(commits)}};
}

}  // namespace cbt
