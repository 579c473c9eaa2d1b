#include "cbt/untangle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbt/errors.hpp"

namespace cbt {

void validate(const DistanceConfig& cfg) {
  const double values[] = {cfg.alpha_time, cfg.alpha_entries, cfg.alpha_same_class, cfg.alpha_same_method,
                           cfg.time_cap,   cfg.entries_cap,   cfg.theta};
  for (double v : values)
    if (!std::isfinite(v)) throw InputError("distance config values must be finite");
  if (cfg.time_cap <= 0) throw InputError("time_cap must be positive");
  if (cfg.entries_cap <= 0) throw InputError("entries_cap must be positive");
}

std::int64_t timeDistance(const ChangeBead& a, const ChangeBead& b) {
  return a.timestamp > b.timestamp ? a.timestamp - b.timestamp : b.timestamp - a.timestamp;
}

std::size_t numberOfEntriesDistance(const ChangeBead& a, const ChangeBead& b) {
  const std::size_t gap = a.seq > b.seq ? a.seq - b.seq : b.seq - a.seq;
  return gap > 0 ? gap - 1 : 0;
}

int sameClass(const ChangeBead& a, const ChangeBead& b) {
  return a.enclosing_class && b.enclosing_class && *a.enclosing_class == *b.enclosing_class ? 1 : 0;
}

int sameMethod(const ChangeBead& a, const ChangeBead& b) {
  return a.enclosing_method && b.enclosing_method && *a.enclosing_method == *b.enclosing_method ? 1 : 0;
}

double distance(const ChangeBead& a, const ChangeBead& b, const DistanceConfig& cfg) {
  const double dt = std::min(static_cast<double>(timeDistance(a, b)), cfg.time_cap) / cfg.time_cap;
  const double entries = std::min(static_cast<double>(numberOfEntriesDistance(a, b)), cfg.entries_cap) / cfg.entries_cap;
  // Fixed summation order keeps distance(a, b) == distance(b, a) bit for bit.
  return cfg.alpha_time * dt + cfg.alpha_entries * entries + cfg.alpha_same_class * sameClass(a, b) +
         cfg.alpha_same_method * sameMethod(a, b);
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Partition initialClusters(const std::vector<ChangeBead>& beads, const DistanceConfig& cfg) {
  validate(cfg);
  const std::size_t n = beads.size();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (distance(beads[i], beads[j], cfg) < cfg.theta) sets.unite(i, j);

  // The root of each set is its smallest index, so walking beads in seq order
  // discovers clusters in order of their earliest bead.
  Partition p;
  std::vector<std::size_t> cluster_of_root(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (cluster_of_root[root] == n) {
      cluster_of_root[root] = p.clusters.size();
      const std::size_t index = p.clusters.size();
      p.clusters.push_back({ClusterId{static_cast<std::uint32_t>(index + 1)}, {}, paletteColor(index)});
    }
    p.clusters[cluster_of_root[root]].bead_ids.push_back(beads[i].id);
  }
  return p;
}

}  // namespace cbt
