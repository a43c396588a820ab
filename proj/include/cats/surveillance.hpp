#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "cats/behavior.hpp"

namespace cats {

/// Daily violation probability per (effective type, camera coverage).
struct ViolationRates {
  // [type][0 = uncovered, 1 = covered]
  std::array<std::array<double, 2>, 3> daily{};

  double rate(DriverType t, bool covered) const {
    return daily[static_cast<std::size_t>(t)][covered ? 1 : 0];
  }

  bool valid() const {
    for (const auto& row : daily)
      for (double r : row)
        if (!(r >= 0.0 && r <= 1.0)) return false;
    return true;
  }

  static ViolationRates replication() {
    ViolationRates r;
    r.daily[0] = {0.00, 0.00};  // conservative
    r.daily[1] = {0.05, 0.01};  // normal
    r.daily[2] = {0.10, 0.02};  // aggressive
    return r;
  }
};

struct DetectionPolicy {
  enum class Mode { fixed_count, radius };
  Mode mode = Mode::fixed_count;
  int fixed_count = 2;    // m nearest reporters
  double radius_m = 50.0; // used in radius mode
  // Accident escalation probability per effective type of the offender.
  std::array<double, 3> p_acc{0.0, 0.1, 0.2};

  bool valid() const {
    if (mode == Mode::fixed_count && fixed_count < 1) return false;
    if (mode == Mode::radius && !(radius_m > 0.0)) return false;
    for (double p : p_acc)
      if (!(p >= 0.0 && p <= 1.0)) return false;
    return true;
  }

  double accident_probability(DriverType effective) const {
    return p_acc[static_cast<std::size_t>(effective)];
  }
};

/// A violation anchored to the tick it was sampled at, with the reporter
/// set resolved geometrically at that same tick.
struct ViolationEvent {
  int offender = 0;
  int type = 0;  // index into the tariff catalog
  std::int64_t tick = 0;
  int corridor = 0;
  int lane = 0;
  double position_m = 0.0;
  bool covered = false;
  DriverType offender_effective = DriverType::conservative;
  std::vector<int> reporters;  // ascending ids; empty = undetected (offender alone)
};

struct AccidentEvent {
  std::int64_t tick = 0;
  int offender = 0;
  DriverType offender_effective = DriverType::conservative;
};

/// Shortest on-road distance between two positions on one corridor.
inline double corridor_distance(double a, double b, double corridor_length, bool ring) {
  double d = std::abs(a - b);
  if (ring) d = std::min(d, corridor_length - d);
  return d;
}

struct ReporterCandidate {
  int id = 0;
  double position_m = 0.0;
};

/// The reporter set Psi for one violation: in fixed-count mode the m nearest
/// active vehicles by on-road distance (ties by lower id), in radius mode
/// everyone within R, falling back to the single nearest so detection never
/// fails while at least one other vehicle shares the corridor. Returned ids
/// ascend so fine transfers apply in a canonical order.
inline std::vector<int> detect_reporters(double offender_position, double corridor_length,
                                         bool ring, std::span<const ReporterCandidate> candidates,
                                         const DetectionPolicy& policy) {
  std::vector<int> result;
  if (candidates.empty()) return result;

  if (policy.mode == DetectionPolicy::Mode::radius) {
    double best_distance = std::numeric_limits<double>::infinity();
    int best_id = 0;
    for (const ReporterCandidate& c : candidates) {
      double d = corridor_distance(offender_position, c.position_m, corridor_length, ring);
      if (d <= policy.radius_m) result.push_back(c.id);
      if (d < best_distance || (d == best_distance && c.id < best_id)) {
        best_distance = d;
        best_id = c.id;
      }
    }
    if (result.empty()) result.push_back(best_id);
    std::sort(result.begin(), result.end());
    return result;
  }

  // Fixed-count: keep the m best (distance, id) pairs with a small
  // insertion buffer — m is tiny (2 in replication mode) and candidate
  // lists are large, so this beats sorting the whole corridor.
  std::size_t m = static_cast<std::size_t>(policy.fixed_count);
  std::vector<std::pair<double, int>> best;
  best.reserve(m + 1);
  for (const ReporterCandidate& c : candidates) {
    double d = corridor_distance(offender_position, c.position_m, corridor_length, ring);
    std::pair<double, int> entry{d, c.id};
    if (best.size() == m && entry >= best.back()) continue;
    best.insert(std::upper_bound(best.begin(), best.end(), entry), entry);
    if (best.size() > m) best.pop_back();
  }
  result.reserve(best.size());
  for (const auto& [d, id] : best) result.push_back(id);
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace cats
