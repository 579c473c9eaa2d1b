// Acceptance runner: one PASS/FAIL line per end-to-end criterion.

#include <httplib.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "cbt/errors.hpp"
#include "cbt/exporter.hpp"
#include "cbt/line_diff.hpp"
#include "cbt/pipeline.hpp"
#include "cbt/process.hpp"
#include "cbt/session.hpp"
#include "cbt/structure.hpp"
#include "test_support.hpp"

extern char** environ;

namespace {

using namespace cbt;
using cbt::testing::TempDir;
namespace fs = std::filesystem;

struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

using Sets = std::vector<std::vector<std::uint32_t>>;

Sets sets(const Partition& p) {
  Sets out;
  for (const auto& c : p.clusters) {
    out.emplace_back();
    for (BeadId b : c.bead_ids) out.back().push_back(b.value);
  }
  return out;
}

std::string describe(const Sets& s) {
  std::string out;
  for (const auto& c : s) {
    out += "{";
    for (std::size_t i = 0; i < c.size(); ++i) out += (i ? "," : "") + std::to_string(c[i]);
    out += "}";
  }
  return out;
}

ClusterId clusterOf(const ClusterSession& s, std::uint32_t bead) { return s.partition().clusterOf(BeadId{bead})->id; }

Partition fromSets(const Sets& groups) {
  Partition p;
  for (const auto& g : groups) {
    Cluster c{ClusterId{static_cast<std::uint32_t>(p.clusters.size() + 1)}, {}, paletteColor(p.clusters.size())};
    for (auto b : g) c.bead_ids.push_back(BeadId{b});
    p.clusters.push_back(std::move(c));
  }
  normalize(p);
  return p;
}

std::string git(const fs::path& repo, const std::vector<std::string>& args) { return GitRepo(repo).run(args); }

/// Tree of HEAD as a snapshot, read back through git itself.
Snapshot headTree(const fs::path& repo) {
  Snapshot s;
  std::stringstream files(git(repo, {"ls-tree", "-r", "--name-only", "HEAD"}));
  std::string path;
  while (std::getline(files, path)) s.files[path] = git(repo, {"show", "HEAD:" + path});
  return s;
}

void runningExampleGolden() {
  const auto start = std::chrono::steady_clock::now();
  const auto a = analyze(cbt::testing::fixturePath("running_example.cbl"), DistanceConfig{});
  check(describe(sets(a.partition)) == "{1}{2,3,4}{5,6}{7,8}", "initial partition " + describe(sets(a.partition)));

  ClusterSession s(a.history, a.partition);
  s.splitCluster(clusterOf(s, 2), std::vector<BeadId>{BeadId{2}});
  std::vector<ClusterId> m1 = {clusterOf(s, 1), clusterOf(s, 2)};
  s.mergeClusters(m1);
  s.splitCluster(clusterOf(s, 5), std::vector<BeadId>{BeadId{6}});
  s.splitCluster(clusterOf(s, 7), std::vector<BeadId>{BeadId{8}});
  std::vector<ClusterId> m2 = {clusterOf(s, 5), clusterOf(s, 7)};
  s.mergeClusters(m2);
  std::vector<ClusterId> m3 = {clusterOf(s, 6), clusterOf(s, 8)};
  s.mergeClusters(m3);
  check(describe(sets(s.partition())) == "{1,2}{3,4}{5,7}{6,8}", "tailored partition " + describe(sets(s.partition())));

  TempDir dir;
  const auto result = exportGit(planExport(s.history(), s.partition()), dir / "out");
  check(result.commit_ids.size() == 5, "expected root + 4 commits, got " + std::to_string(result.commit_ids.size()));
  const Snapshot tree = headTree(dir / "out");
  check(tree == a.history->finalSnapshot(), "exported tree differs from the final snapshot");
  check(tree.files.at("StateMachine.java") == cbt::testing::kRunningExampleAfter, "final text differs from the expected code");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check(secs < 5.0, "took " + std::to_string(secs) + " s");
}

std::vector<std::vector<bool>> bruteClosure(const std::vector<ChangeBead>& beads, const DistanceConfig& cfg) {
  const std::size_t n = beads.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i][j] = i == j || distance(beads[i], beads[j], cfg) < cfg.theta;
  for (std::size_t len = 1; len < n; len *= 2) {
    auto next = r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (r[i][k])
          for (std::size_t j = 0; j < n; ++j) next[i][j] = next[i][j] || r[k][j];
    r = std::move(next);
  }
  return r;
}

void clusteringOracle() {
  std::mt19937 rng(500);
  std::uniform_int_distribution<std::size_t> n_dist(1, 20);
  for (int trial = 0; trial < 500; ++trial) {
    const auto beads = cbt::testing::randomAnnotatedBeads(rng, n_dist(rng));
    const auto cfg = cbt::testing::randomConfig(rng);
    const auto reach = bruteClosure(beads, cfg);
    const auto p = initialClusters(beads, cfg);
    std::map<BeadId, std::size_t> cluster;
    for (std::size_t c = 0; c < p.clusters.size(); ++c)
      for (BeadId b : p.clusters[c].bead_ids) cluster[b] = c;
    for (std::size_t i = 0; i < beads.size(); ++i)
      for (std::size_t j = 0; j < beads.size(); ++j)
        check(reach[i][j] == (cluster.at(beads[i].id) == cluster.at(beads[j].id)),
              "trial " + std::to_string(trial) + " disagrees on beads " + std::to_string(i + 1) + "," +
                  std::to_string(j + 1));
  }
}

void metricSuite() {
  auto bead = [](std::size_t seq, std::int64_t ts, std::optional<std::string> cls, std::optional<std::string> m) {
    ChangeBead b;
    b.id = BeadId{static_cast<std::uint32_t>(seq + 1)};
    b.seq = seq;
    b.timestamp = ts;
    b.hunks = {Hunk{"F.java", 1, {}, {"x"}}};
    b.enclosing_class = std::move(cls);
    b.enclosing_method = std::move(m);
    return b;
  };
  DistanceConfig cfg{0.4, 0.2, -0.2, -0.4, 300, 20, 0.2};
  const auto a = bead(3, 1000, "S", "S.m()");
  const auto b = bead(4, 1005, "S", "S.m()");
  check(std::abs(distance(a, b, cfg) - (-0.5933333333333333)) < 1e-12, "same-method worked value");
  DistanceConfig zero = cfg;
  zero.alpha_time = zero.alpha_entries = zero.alpha_same_class = zero.alpha_same_method = 0;
  check(distance(a, b, zero) == 0.0, "all-zero weights");
  const auto far1 = bead(0, 0, "A", std::nullopt);
  const auto far2 = bead(50, 99999, "B", std::nullopt);
  check(std::abs(distance(far1, far2, cfg) - 0.6) < 1e-12, "saturated worked value");
  check(numberOfEntriesDistance(bead(1, 0, {}, {}), bead(5, 0, {}, {})) == 3, "entries between seq 1 and 5");
  check(numberOfEntriesDistance(bead(3, 0, {}, {}), bead(4, 0, {}, {})) == 0, "adjacent entries");

  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto beads = cbt::testing::randomAnnotatedBeads(rng, 12);
    const auto rc = cbt::testing::randomConfig(rng);
    for (const auto& x : beads)
      for (const auto& y : beads) {
        check(timeDistance(x, y) == timeDistance(y, x), "timeDistance symmetry");
        check(numberOfEntriesDistance(x, y) == numberOfEntriesDistance(y, x), "entries symmetry");
        check(distance(x, y, rc) == distance(y, x, rc), "distance symmetry");
      }
  }
}

void thresholdMonotonicity() {
  std::mt19937 rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto beads = cbt::testing::randomAnnotatedBeads(rng, 16);
    auto cfg = cbt::testing::randomConfig(rng);
    std::size_t previous = beads.size();
    for (int step = 0; step <= 60; ++step) {
      cfg.theta = -1.0 + step * 0.05;
      const auto count = initialClusters(beads, cfg).clusters.size();
      check(count <= previous, "trial " + std::to_string(trial) + " grew at theta " + std::to_string(cfg.theta));
      previous = count;
    }
  }
}

void preprocessorPreservation() {
  std::mt19937 rng(200);
  std::size_t squashed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto h = cbt::testing::randomEditHistory(rng, {.files = 3, .beads = 24, .unparseable_rate = 0.3});
    const auto r = squashUnparseable(h);
    squashed += r.report.entries.size();
    check(r.history.finalSnapshot() == h.finalSnapshot(), "final snapshot changed in trial " + std::to_string(trial));
    Snapshot s = r.history.base;
    for (const auto& b : r.history.beads) {
      s = applyHunks(s, b);
      for (const auto& [path, text] : s.files)
        check(parses(text), "unparseable output snapshot in trial " + std::to_string(trial));
    }
  }
  check(squashed > 0, "generator injected no unparseable windows");
}

void diffRoundTrip() {
  std::mt19937 rng(1000);
  std::uniform_int_distribution<int> len(0, 16);
  std::uniform_int_distribution<int> sym(0, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string x, y;
    for (int i = len(rng); i > 0; --i) x += std::string(1, static_cast<char>('a' + sym(rng))) + "\n";
    for (int i = len(rng); i > 0; --i) y += std::string(1, static_cast<char>('a' + sym(rng))) + "\n";
    if (trial % 3 == 0 && !y.empty()) y.pop_back();  // unterminated last line
    const auto hunks = diffSnapshots(x, y, "f");
    check(applyHunks(Snapshot{{{"f", x}}}, hunks).files.at("f") == y, "round trip failed in trial " + std::to_string(trial));
  }

  // Attribution over every cluster selection of the running example, before and after tailoring.
  const auto a = analyze(cbt::testing::fixturePath("running_example.cbl"), DistanceConfig{});
  for (const Sets& groups : {sets(a.partition), Sets{{1, 2}, {3, 4}, {5, 7}, {6, 8}}}) {
    ClusterSession s(a.history, fromSets(groups));
    const auto& clusters = s.partition().clusters;
    for (unsigned mask = 1; mask < (1u << clusters.size()); ++mask) {
      std::vector<ClusterId> sel;
      for (std::size_t c = 0; c < clusters.size(); ++c)
        if (mask & (1u << c)) sel.push_back(clusters[c].id);
      AugmentedDiff d;
      try {
        d = s.augmentedDiff(sel, std::nullopt);
      } catch (const SelectionPatchConflict&) {
        continue;  // reported to the user instead of a diff
      }
      std::map<std::pair<std::size_t, bool>, int> covered;  // (line, is_result_side) -> count
      for (const auto& l : d.lines) {
        if (l.kind == DiffLineKind::Context) {
          check(!l.owner, "context line carries an owner");
          continue;
        }
        check(l.owner.has_value(), "changed line without owner");
        check(std::find(sel.begin(), sel.end(), *l.owner) != sel.end(), "owner outside the selection");
        const bool added = l.kind == DiffLineKind::Added;
        ++covered[{added ? *l.result_line : *l.base_line, added}];
      }
      for (const auto& [key, count] : covered) check(count == 1, "a changed line is attributed twice");
    }
  }
}

void exportSoundness() {
  std::mt19937 rng(100);
  int acyclic = 0;
  while (acyclic < 100) {
    const auto h = cbt::testing::randomEditHistory(rng, {.files = 2, .beads = 12});
    const auto p = cbt::testing::randomPartition(rng, h, 5);
    ExportPlan plan;
    try {
      plan = planExport(h, p);
    } catch (const CyclicClusterDependency&) {
      continue;
    }
    ++acyclic;
    TempDir dir;
    const auto result = exportGit(plan, dir / "out");
    check(headTree(dir / "out") == h.finalSnapshot(), "exported tree differs");
    for (std::size_t i = 0; i < plan.commits.size(); ++i) {
      std::set<std::string> inserted, deleted;
      for (BeadId id : plan.commits[i].bead_ids)
        for (const auto& hunk : h.beads[id.value - 1].hunks) {
          inserted.insert(hunk.inserted.begin(), hunk.inserted.end());
          deleted.insert(hunk.deleted.begin(), hunk.deleted.end());
        }
      const std::string patch =
          git(dir / "out", {"diff", "--unified=0", "--no-color", result.commit_ids[i], result.commit_ids[i + 1]});
      std::stringstream lines(patch);
      std::string line;
      while (std::getline(lines, line)) {
        if (line.rfind("+++", 0) == 0 || line.rfind("---", 0) == 0) continue;
        if (line.rfind("+", 0) == 0) check(inserted.contains(line.substr(1)), "foreign added line " + line);
        if (line.rfind("-", 0) == 0) check(deleted.contains(line.substr(1)), "foreign removed line " + line);
      }
    }
  }

  const auto cyclic = parseChangeLog(
      R"({"version":1,"base":{"F1.java":"class F1 {\n}\n","F2.java":"class F2 {\n}\n"}})" "\n"
      R"({"seq":0,"ts":10,"file":"F1.java","hunks":[{"start":2,"del":[],"ins":["  int x;"]}]})" "\n"
      R"({"seq":1,"ts":20,"file":"F2.java","hunks":[{"start":2,"del":[],"ins":["  int y;"]}]})" "\n"
      R"({"seq":2,"ts":30,"file":"F2.java","hunks":[{"start":2,"del":["  int y;"],"ins":[]}]})" "\n"
      R"({"seq":3,"ts":40,"file":"F1.java","hunks":[{"start":2,"del":["  int x;"],"ins":[]}]})");
  bool raised = false;
  try {
    planExport(cyclic, fromSets({{1, 3}, {2, 4}}));
  } catch (const CyclicClusterDependency&) {
    raised = true;
  }
  check(raised, "cyclic fixture was exported");
}

int freePort() {
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  close(fd);
  return ntohs(addr.sin_port);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

void serviceNeutrality() {
  TempDir dir;
  const fs::path input = dir / "running_example.cbl";
  fs::copy_file(cbt::testing::fixturePath("running_example.cbl"), input);
  const std::string bin = CBT_BINARY;

  auto r = runProcess({bin, "analyze", input.string(), "-o", (dir / "analysis.json").string()});
  check(r.exit_code == 0, "analyze failed: " + r.err);
  r = runProcess({bin, "export", input.string(), "--partition", (dir / "analysis.json").string(), "-o",
                  (dir / "direct").string()});
  check(r.exit_code == 0, "direct export failed: " + r.err);
  const auto direct = lines(r.out);

  const int port = freePort();
  std::vector<std::string> args = {bin, "serve", input.string(), "--port", std::to_string(port)};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  check(posix_spawn(&pid, bin.c_str(), nullptr, nullptr, argv.data(), environ) == 0, "cannot start serve");

  httplib::Client client("127.0.0.1", port);
  httplib::Result session;
  for (int i = 0; i < 100 && !(session = client.Get("/api/session")); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  std::vector<std::string> via_api;
  std::string api_error = "no response";
  if (session) {
    const Json body = {{"out_path", (dir / "served").string()}};
    if (auto res = client.Post("/api/export", body.dump(), "application/json"); res && res->status == 200) {
      const Json reply = Json::parse(res->body);
      for (const auto& id : reply.at("commits")) via_api.push_back(id.get<std::string>());
    } else {
      api_error = res ? res->body : httplib::to_string(res.error());
    }
  }
  kill(pid, SIGINT);
  int status = 0;
  waitpid(pid, &status, 0);
  check(session && session->status == 200, "service did not answer");
  check(WIFEXITED(status) && WEXITSTATUS(status) == 0, "serve did not shut down cleanly");
  check(!via_api.empty(), "export through the service failed: " + api_error);
  check(via_api == direct, "export through the service differs from the direct export");

  const fs::path sidecar = input.string() + ".cbt-session.json";
  check(fs::exists(sidecar), "no session sidecar after shutdown");
  r = runProcess({bin, "export", input.string(), "--partition", sidecar.string(), "-o", (dir / "resumed").string()});
  check(r.exit_code == 0, "export from sidecar failed: " + r.err);
  check(lines(r.out) == direct, "export from the saved session differs from the direct export");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"running-example-golden-scenario", runningExampleGolden},
      {"clustering-oracle-equivalence", clusteringOracle},
      {"metric-unit-suite", metricSuite},
      {"threshold-monotonicity", thresholdMonotonicity},
      {"preprocessor-preservation", preprocessorPreservation},
      {"diff-round-trip-and-attribution", diffRoundTrip},
      {"export-soundness", exportSoundness},
      {"service-neutrality", serviceNeutrality},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    std::string detail;
    try {
      run();
    } catch (const Failure& f) {
      detail = f.what;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      std::cout << "PASS " << name << "\n";
    } else {
      std::cout << "FAIL " << name << ": " << detail << "\n";
      ++failed;
    }
  }
  return failed == 0 ? 0 : 1;
}
