#include <gtest/gtest.h>

#include <random>

#include "cbt/errors.hpp"
#include "cbt/pipeline.hpp"
#include "cbt/untangle.hpp"
#include "test_support.hpp"

using namespace cbt;

namespace {

ChangeBead bead(std::size_t seq, std::int64_t ts, std::optional<std::string> cls = {},
                std::optional<std::string> method = {}) {
  ChangeBead b;
  b.id = BeadId{static_cast<std::uint32_t>(seq + 1)};
  b.seq = seq;
  b.timestamp = ts;
  b.hunks = {Hunk{"F.java", 1, {}, {"x"}}};
  b.enclosing_class = std::move(cls);
  b.enclosing_method = std::move(method);
  return b;
}

DistanceConfig specWeights() {
  DistanceConfig cfg;
  cfg.alpha_time = 0.4;
  cfg.alpha_entries = 0.2;
  cfg.alpha_same_class = -0.2;
  cfg.alpha_same_method = -0.4;
  cfg.time_cap = 300;
  cfg.entries_cap = 20;
  cfg.theta = 0.2;
  return cfg;
}

/// Reachability by repeated squaring of the boolean adjacency matrix.
std::vector<std::vector<bool>> closure(const std::vector<ChangeBead>& beads, const DistanceConfig& cfg) {
  const std::size_t n = beads.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i][j] = i == j || distance(beads[i], beads[j], cfg) < cfg.theta;
  for (std::size_t len = 1; len < n; len *= 2) {
    auto next = r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (r[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (r[k][j]) next[i][j] = true;
    r = std::move(next);
  }
  return r;
}

std::vector<std::vector<std::uint32_t>> ids(const Partition& p) {
  std::vector<std::vector<std::uint32_t>> out;
  for (const auto& c : p.clusters) {
    out.emplace_back();
    for (BeadId b : c.bead_ids) out.back().push_back(b.value);
  }
  return out;
}

}  // namespace

TEST(Metrics, TimeDistanceIsAbsoluteAndSymmetric) {
  const auto a = bead(0, 100);
  const auto b = bead(1, 130);
  EXPECT_EQ(timeDistance(a, b), 30);
  EXPECT_EQ(timeDistance(b, a), 30);
  EXPECT_EQ(timeDistance(a, a), 0);
}

TEST(Metrics, EntriesBetween) {
  EXPECT_EQ(numberOfEntriesDistance(bead(3, 0), bead(4, 0)), 0u);
  EXPECT_EQ(numberOfEntriesDistance(bead(1, 0), bead(5, 0)), 3u);
  EXPECT_EQ(numberOfEntriesDistance(bead(5, 0), bead(1, 0)), 3u);
  EXPECT_EQ(numberOfEntriesDistance(bead(2, 0), bead(2, 0)), 0u);
}

TEST(Metrics, SameClassAndMethod) {
  const auto a = bead(0, 0, "S", "S.foo(int)");
  const auto b = bead(1, 0, "S", "S.foo(int)");
  const auto c = bead(2, 0, "S", "S.bar(int)");
  const auto none = bead(3, 0);
  EXPECT_EQ(sameClass(a, b), 1);
  EXPECT_EQ(sameClass(a, a), 1);
  EXPECT_EQ(sameClass(a, none), 0);
  EXPECT_EQ(sameClass(none, none), 0);
  EXPECT_EQ(sameMethod(a, b), 1);
  EXPECT_EQ(sameMethod(a, c), 0);
  EXPECT_EQ(sameMethod(c, bead(4, 0, "S")), 0);
}

TEST(Distance, WorkedValues) {
  const auto cfg = specWeights();
  const auto a = bead(0, 1000, "S", "S.m()");
  const auto b = bead(1, 1005, "S", "S.m()");
  // Hand-evaluated: 0.4 * 5/300 - 0.2 - 0.4.
  EXPECT_NEAR(distance(a, b, cfg), -0.5933333333333333, 1e-12);
  EXPECT_NEAR(distance(a, b, cfg), 0.4 * (5.0 / 300.0) + 0.2 * 0.0 - 0.2 * 1 - 0.4 * 1, 1e-12);

  DistanceConfig zero = cfg;
  zero.alpha_time = zero.alpha_entries = zero.alpha_same_class = zero.alpha_same_method = 0;
  EXPECT_EQ(distance(a, b, zero), 0.0);

  const auto far1 = bead(0, 0, "A");
  const auto far2 = bead(40, 10'000, "B");
  EXPECT_NEAR(distance(far1, far2, cfg), 0.6, 1e-12);
}

TEST(Distance, SelfDistanceIsStructuralOnly) {
  const auto cfg = specWeights();
  EXPECT_NEAR(distance(bead(0, 5, "S", "S.m()"), bead(0, 5, "S", "S.m()"), cfg), -0.6, 1e-12);
  EXPECT_NEAR(distance(bead(0, 5, "S"), bead(0, 5, "S"), cfg), -0.2, 1e-12);
}

TEST(Distance, SymmetricBitForBit) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto beads = cbt::testing::randomAnnotatedBeads(rng, 10);
    const auto cfg = cbt::testing::randomConfig(rng);
    for (const auto& a : beads)
      for (const auto& b : beads) ASSERT_EQ(distance(a, b, cfg), distance(b, a, cfg));
  }
}

TEST(Config, ValidationRejectsBadCaps) {
  DistanceConfig cfg;
  cfg.time_cap = 0;
  EXPECT_THROW(validate(cfg), InputError);
  cfg = {};
  cfg.theta = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate(cfg), InputError);
}

TEST(InitialClusters, ThetaBelowEverythingGivesSingletons) {
  std::mt19937 rng(1);
  const auto beads = cbt::testing::randomAnnotatedBeads(rng, 12);
  DistanceConfig cfg;
  cfg.theta = -1;
  const auto p = initialClusters(beads, cfg);
  EXPECT_EQ(p.clusters.size(), beads.size());
  for (std::size_t i = 0; i < p.clusters.size(); ++i) {
    EXPECT_EQ(p.clusters[i].id.value, i + 1);
    EXPECT_EQ(p.clusters[i].color, paletteColor(i));
  }
}

TEST(InitialClusters, ChainsAreTransitive) {
  DistanceConfig cfg;
  cfg.alpha_time = 1;
  cfg.alpha_entries = 0;
  cfg.alpha_same_class = cfg.alpha_same_method = 0;
  cfg.time_cap = 100;
  cfg.theta = 0.5;
  // d(1,2) = 0.4, d(2,3) = 0.4, d(1,3) = 0.8.
  const std::vector<ChangeBead> beads = {bead(0, 0), bead(1, 40), bead(2, 80)};
  EXPECT_EQ(ids(initialClusters(beads, cfg)), (std::vector<std::vector<std::uint32_t>>{{1, 2, 3}}));
}

TEST(InitialClusters, MatchesBruteForceClosure) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    std::uniform_int_distribution<std::size_t> n_dist(1, 20);
    const auto beads = cbt::testing::randomAnnotatedBeads(rng, n_dist(rng));
    const auto cfg = cbt::testing::randomConfig(rng);
    const auto reach = closure(beads, cfg);
    const auto p = initialClusters(beads, cfg);
    std::map<BeadId, std::size_t> cluster;
    for (std::size_t c = 0; c < p.clusters.size(); ++c)
      for (BeadId b : p.clusters[c].bead_ids) cluster[b] = c;
    for (std::size_t i = 0; i < beads.size(); ++i)
      for (std::size_t j = 0; j < beads.size(); ++j)
        ASSERT_EQ(reach[i][j], cluster.at(beads[i].id) == cluster.at(beads[j].id)) << "trial " << trial;
  }
}

TEST(InitialClusters, MonotoneInTheta) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto beads = cbt::testing::randomAnnotatedBeads(rng, 15);
    auto cfg = cbt::testing::randomConfig(rng);
    std::size_t previous = beads.size() + 1;
    for (double theta = -1.0; theta <= 1.5; theta += 0.05) {
      cfg.theta = theta;
      const auto count = initialClusters(beads, cfg).clusters.size();
      ASSERT_LE(count, previous) << "trial " << trial << " theta " << theta;
      previous = count;
    }
  }
}

TEST(InitialClusters, RunningExampleDefaultPartition) {
  const auto a = analyze(cbt::testing::fixturePath("running_example.cbl"), DistanceConfig{});
  EXPECT_EQ(ids(a.partition), (std::vector<std::vector<std::uint32_t>>{{1}, {2, 3, 4}, {5, 6}, {7, 8}}));
}

TEST(InitialClusters, RunningExampleLinkedPairsStayClearOfThreshold) {
  // Guards the frozen defaults against accidental drift: every pair is at least
  // 0.05 away from theta, so small numeric changes cannot flip the partition.
  const auto a = analyze(cbt::testing::fixturePath("running_example.cbl"), DistanceConfig{});
  const auto& beads = a.history->beads;
  const DistanceConfig cfg;
  for (std::size_t i = 0; i < beads.size(); ++i)
    for (std::size_t j = i + 1; j < beads.size(); ++j)
      EXPECT_GE(std::abs(distance(beads[i], beads[j], cfg) - cfg.theta), 0.05 - 1e-12) << i + 1 << "," << j + 1;
}
