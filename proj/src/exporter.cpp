#include "cbt/exporter.hpp"

#include <algorithm>
#include <ctime>
#include <limits>
#include <fstream>
#include <map>
#include <queue>
#include <set>

#include "cbt/errors.hpp"
#include "cbt/process.hpp"
#include "cbt/provenance.hpp"
#include "cbt/serialization.hpp"
#include "cbt/session.hpp"

namespace cbt {

namespace fs = std::filesystem;

CyclicClusterDependency::CyclicClusterDependency(std::vector<std::uint32_t> clusters, std::uint32_t bead,
                                                 std::uint32_t depends_on)
    : SessionError(409, "CyclicClusterDependency", [&] {
        std::string ids;
        for (auto c : clusters) ids += (ids.empty() ? "" : ", ") + std::to_string(c);
        return "clusters {" + ids + "} depend on each other (bead " + std::to_string(bead) + " needs bead " +
               std::to_string(depends_on) + "); merge them or re-split";
      }()),
      clusters_(std::move(clusters)),
      bead_(bead),
      depends_on_(depends_on) {}

namespace {

struct Edge {
  std::size_t bead_seq;
  std::size_t dep_seq;
};

/// Walks predecessor edges among the clusters Kahn's algorithm could not place
/// until one repeats, yielding a cycle in dependency order.
[[noreturn]] void reportCycle(const FineHistory& history, const Partition& partition,
                              const std::vector<std::map<std::size_t, Edge>>& preds,
                              const std::vector<std::size_t>& indegree) {
  std::size_t node = 0;
  while (indegree[node] == 0) ++node;
  std::vector<std::size_t> path;
  std::map<std::size_t, std::size_t> position;
  while (!position.contains(node)) {
    position[node] = path.size();
    path.push_back(node);
    for (const auto& [p, edge] : preds[node])
      if (indegree[p] > 0) {
        node = p;
        break;
      }
  }
  std::vector<std::size_t> cycle(path.begin() + static_cast<std::ptrdiff_t>(position[node]), path.end());
  std::reverse(cycle.begin(), cycle.end());  // predecessors first
  std::vector<std::uint32_t> ids;
  for (std::size_t c : cycle) ids.push_back(partition.clusters[c].id.value);
  const Edge& witness = preds[cycle[1 % cycle.size()]].at(cycle[0]);
  throw CyclicClusterDependency(std::move(ids), history.beads[witness.bead_seq].id.value,
                                history.beads[witness.dep_seq].id.value);
}

std::string joinOrDash(const std::vector<std::string>& items) {
  if (items.empty()) return "-";
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

void checkRelativePath(const std::string& path) {
  const fs::path p(path);
  if (p.empty() || p.is_absolute()) throw InputError("refusing to write outside the export: " + path);
  for (const auto& part : p)
    if (part == "..") throw InputError("refusing to write outside the export: " + path);
}

void writeFile(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw ProcessingError("cannot write " + path.string());
}

}  // namespace

ExportPlan planExport(const FineHistory& history, const Partition& partition) {
  validatePartition(partition, history.beads);
  const LineWeave weave(history);
  const std::size_t n = partition.clusters.size();

  std::map<BeadId, std::size_t> cluster_index;
  for (std::size_t c = 0; c < n; ++c)
    for (BeadId b : partition.clusters[c].bead_ids) cluster_index[b] = c;

  // preds[c][p]: cluster p must precede c; one witnessing bead pair per edge.
  std::vector<std::map<std::size_t, Edge>> preds(n);
  std::vector<std::set<std::size_t>> succs(n);
  for (const auto& bead : history.beads) {
    const std::size_t c = cluster_index.at(bead.id);
    for (std::size_t dep : weave.dependencies(bead.seq)) {
      const std::size_t p = cluster_index.at(history.beads[dep].id);
      if (p == c) continue;
      preds[c].try_emplace(p, Edge{bead.seq, dep});
      succs[p].insert(c);
    }
  }

  // Clusters are normalized by earliest bead, so the index is the tie-break key.
  std::vector<std::size_t> indegree(n);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t c = 0; c < n; ++c)
    if ((indegree[c] = preds[c].size()) == 0) ready.push(c);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t c = ready.top();
    ready.pop();
    order.push_back(c);
    for (std::size_t s : succs[c])
      if (--indegree[s] == 0) ready.push(s);
  }
  if (order.size() != n) reportCycle(history, partition, preds, indegree);

  ExportPlan plan;
  plan.base = history.base;
  plan.base_timestamp = history.origin.base_timestamp.value_or(history.beads.front().timestamp);
  LineWeave::Mask applied(history.beads.size(), false);
  std::int64_t clock = plan.base_timestamp;
  for (std::size_t c : order) {
    const Cluster& cluster = partition.clusters[c];
    PlannedCommit commit;
    commit.cluster_id = cluster.id;
    commit.bead_ids = cluster.bead_ids;
    LineWeave::Mask next = applied;
    std::set<std::string> classes;
    std::set<std::string> methods;
    commit.first_timestamp = std::numeric_limits<std::int64_t>::max();
    commit.last_timestamp = std::numeric_limits<std::int64_t>::min();
    for (const auto& bead : history.beads) {
      if (cluster_index.at(bead.id) != c) continue;
      next[bead.seq] = true;
      commit.first_timestamp = std::min(commit.first_timestamp, bead.timestamp);
      commit.last_timestamp = std::max(commit.last_timestamp, bead.timestamp);
      if (bead.enclosing_class) classes.insert(*bead.enclosing_class);
      if (bead.enclosing_method) methods.insert(locationLabel(bead));
    }
    commit.hunks = weave.diff(applied, next);
    clock = std::max(clock, commit.last_timestamp);
    commit.commit_timestamp = clock;
    commit.classes.assign(classes.begin(), classes.end());
    commit.methods.assign(methods.begin(), methods.end());
    plan.commits.push_back(std::move(commit));
    applied = std::move(next);
  }
  return plan;
}

std::string formatUtc(std::int64_t epoch_seconds) {
  const std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string renderMessage(std::string_view message_template, const PlannedCommit& commit) {
  const std::map<std::string, std::string, std::less<>> values = {
      {"cluster_id", std::to_string(commit.cluster_id.value)},
      {"bead_count", std::to_string(commit.bead_ids.size())},
      {"classes", joinOrDash(commit.classes)},
      {"methods", joinOrDash(commit.methods)},
      {"time_range", formatUtc(commit.first_timestamp) + ".." + formatUtc(commit.last_timestamp)},
  };
  std::string out;
  std::size_t i = 0;
  while (i < message_template.size()) {
    const auto open = message_template.find('{', i);
    if (open == std::string_view::npos) break;
    const auto close = message_template.find('}', open);
    if (close == std::string_view::npos) break;
    out.append(message_template.substr(i, open - i));
    const auto key = message_template.substr(open + 1, close - open - 1);
    if (const auto it = values.find(key); it != values.end()) {
      out += it->second;
      i = close + 1;
    } else {
      out += '{';
      i = open + 1;
    }
  }
  out.append(message_template.substr(i));
  return out;
}

std::vector<Snapshot> replayPlan(const ExportPlan& plan) {
  std::vector<Snapshot> states{plan.base};
  for (const auto& commit : plan.commits) states.push_back(applyHunks(states.back(), commit.hunks));
  return states;
}

ExportResult exportGit(const ExportPlan& plan, const fs::path& out, std::string_view message_template) {
  if (fs::exists(out) && !(fs::is_directory(out) && fs::is_empty(out))) throw OutputExists(out.string());
  const auto states = replayPlan(plan);
  for (const auto& state : states)
    for (const auto& [path, text] : state.files) checkRelativePath(path);

  fs::create_directories(out);
  const GitRepo repo(out);
  repo.run({"init", "-q", "-b", "main"});

  ExportResult result;
  auto commitState = [&](const Snapshot* previous, const Snapshot& state, std::int64_t when,
                         const std::string& message) {
    for (const auto& [path, text] : state.files) {
      if (previous) {
        const auto it = previous->files.find(path);
        if (it != previous->files.end() && it->second == text) continue;
      }
      writeFile(out / path, text);
    }
    repo.run({"add", "-A"});
    const std::string date = "@" + std::to_string(when) + " +0000";
    const EnvOverrides env = {{"GIT_AUTHOR_NAME", "cbt"},     {"GIT_AUTHOR_EMAIL", "cbt@localhost"},
                              {"GIT_COMMITTER_NAME", "cbt"},  {"GIT_COMMITTER_EMAIL", "cbt@localhost"},
                              {"GIT_AUTHOR_DATE", date},      {"GIT_COMMITTER_DATE", date}};
    repo.run({"commit", "-q", "--allow-empty", "--no-verify", "-m", message}, env);
    std::string id = repo.run({"rev-parse", "HEAD"});
    while (!id.empty() && (id.back() == '\n' || id.back() == '\r')) id.pop_back();
    result.commit_ids.push_back(std::move(id));
  };

  commitState(nullptr, states[0], plan.base_timestamp, "Base snapshot\n");
  for (std::size_t i = 0; i < plan.commits.size(); ++i) {
    result.messages.push_back(renderMessage(message_template, plan.commits[i]));
    commitState(&states[i], states[i + 1], plan.commits[i].commit_timestamp, result.messages.back());
  }

  writeFile(out / "export.json", bundleToJson(plan, result).dump(2) + "\n");
  std::ofstream exclude(out / ".git" / "info" / "exclude", std::ios::app);
  exclude << "/export.json\n";
  return result;
}

}  // namespace cbt
