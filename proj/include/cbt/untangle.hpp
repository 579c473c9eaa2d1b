#pragma once

#include <cstdint>

#include "cbt/change_model.hpp"
#include "cbt/history.hpp"

namespace cbt {

/// Weights, normalization caps and threshold of the pairwise bead distance.
///
/// distance = alpha_time * min(dt, time_cap) / time_cap
///          + alpha_entries * min(between, entries_cap) / entries_cap
///          + alpha_same_class * sameClass + alpha_same_method * sameMethod
///
/// Negative structural weights pull beads in the same class or method together.
/// The defaults reproduce the running example shipped in tests/fixtures/running_example.cbl:
/// structural sameness lowers the distance but cannot by itself bridge a pause
/// of a full time_cap.
struct DistanceConfig {
  double alpha_time = 0.4;
  double alpha_entries = 0.2;
  double alpha_same_class = -0.05;
  double alpha_same_method = -0.1;
  double time_cap = 300.0;
  double entries_cap = 20.0;
  double theta = 0.2;

  bool operator==(const DistanceConfig&) const = default;
};

/// Throws InputError unless caps are positive and all values finite.
void validate(const DistanceConfig& cfg);

std::int64_t timeDistance(const ChangeBead& a, const ChangeBead& b);
std::size_t numberOfEntriesDistance(const ChangeBead& a, const ChangeBead& b);
int sameClass(const ChangeBead& a, const ChangeBead& b);
int sameMethod(const ChangeBead& a, const ChangeBead& b);

double distance(const ChangeBead& a, const ChangeBead& b, const DistanceConfig& cfg);

/// Connected components of the graph joining every pair with distance < theta.
/// Clusters get ids 1..k and palette colors in order of their earliest bead.
Partition initialClusters(const std::vector<ChangeBead>& beads, const DistanceConfig& cfg);
inline Partition initialClusters(const FineHistory& history, const DistanceConfig& cfg) {
  return initialClusters(history.beads, cfg);
}

}  // namespace cbt
