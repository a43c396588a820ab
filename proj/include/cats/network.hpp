#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace cats {

/// Position of a vehicle on the network: a lane of a corridor plus the
/// longitudinal coordinate along that corridor, in meters.
struct LaneRef {
  int corridor = 0;
  int lane = 0;
  friend bool operator==(const LaneRef&, const LaneRef&) = default;
};

struct RoadSegment {
  int id = 0;
  int corridor = 0;
  double start_m = 0.0;   // half-open [start_m, start_m + length_m) along the corridor
  double length_m = 0.0;
  int lane_count = 1;
  bool camera_covered = false;
  double jam_density_threshold = 0.0;  // vehicles / km / lane
};

/// A chain of segments traversed in order. Ring corridors wrap at the end;
/// open corridors end at a hard wall (vehicles brake and hold).
struct Corridor {
  int id = 0;
  bool ring = true;
  int lane_count = 1;
  int first_segment = 0;
  int segment_count = 0;
  double length_m = 0.0;
};

struct LaneClosure {
  int corridor = 0;
  int lane = 0;
  double begin_m = 0.0;  // half-open [begin_m, end_m)
  double end_m = 0.0;
};

struct SegmentSpec {
  double length_m = 0.0;
  int lane_count = 1;
  double jam_density_threshold = 50.0;
};

struct RingSpec {
  double length_km = 0.0;
  int lanes = 1;
  int segments = 1;
};

/// Grid shorthand: `rows` independent ring corridors of `cols` segments each.
struct GridSpec {
  int rows = 0;
  int cols = 0;
  double segment_km = 1.0;
  int lanes = 1;
};

struct CorridorSpec {
  bool ring = true;
  std::vector<SegmentSpec> segments;
};

struct NetworkSpec {
  std::optional<RingSpec> ring;
  std::optional<GridSpec> grid;
  std::vector<CorridorSpec> corridors;  // explicit form; used when ring/grid absent
  double coverage_fraction = 0.0;
  double jam_density_threshold = 50.0;  // default for generator shorthands
  std::vector<LaneClosure> closures;
};

struct VehiclePosition {
  int corridor = 0;
  int lane = 0;
  double position_m = 0.0;
};

struct CongestionState {
  std::vector<double> density_by_segment;   // vehicles / km / lane
  std::vector<std::uint8_t> congested;      // indexed by segment id
  std::vector<int> congested_areas;         // sorted segment ids

  bool is_congested(int segment) const {
    return segment >= 0 && segment < static_cast<int>(congested.size()) &&
           congested[segment] != 0;
  }
};

class RoadNetwork {
 public:
  const std::vector<RoadSegment>& segments() const { return segments_; }
  const std::vector<Corridor>& corridors() const { return corridors_; }
  const std::vector<LaneClosure>& closures() const { return closures_; }
  double total_length_m() const { return total_length_m_; }
  double covered_length_m() const { return covered_length_m_; }

  double corridor_length(int corridor) const { return corridors_.at(corridor).length_m; }

  /// Segment owning `position_m` on `corridor`; half-open [start, end)
  /// attribution, so a boundary position belongs to the following segment.
  int segment_at(int corridor, double position_m) const {
    const Corridor& c = corridors_.at(corridor);
    if (position_m < 0.0 || position_m >= c.length_m)
      throw std::out_of_range("position off network: " + std::to_string(position_m));
    auto begin = starts_.begin() + c.first_segment;
    auto end = begin + c.segment_count;
    auto it = std::upper_bound(begin, end, position_m);
    return static_cast<int>(it - starts_.begin()) - 1;
  }

  bool is_camera_covered(LaneRef lane, double position_m) const {
    check_lane(lane);
    return segments_[segment_at(lane.corridor, position_m)].camera_covered;
  }

  std::optional<int> left_neighbor(LaneRef lane) const {
    check_lane(lane);
    int left = lane.lane + 1;
    if (left >= corridors_[lane.corridor].lane_count) return std::nullopt;
    return left;
  }

  std::optional<int> right_neighbor(LaneRef lane) const {
    check_lane(lane);
    if (lane.lane == 0) return std::nullopt;
    return lane.lane - 1;
  }

  /// Closures on one lane, sorted by begin_m.
  std::span<const LaneClosure> lane_closures(LaneRef lane) const {
    check_lane(lane);
    auto key = closure_index_.find(lane_key(lane));
    if (key == closure_index_.end()) return {};
    const auto& range = key->second;
    return {closures_sorted_.data() + range.first, static_cast<std::size_t>(range.second)};
  }

  friend RoadNetwork build_network(const NetworkSpec& spec);

 private:
  void check_lane(LaneRef lane) const {
    if (lane.corridor < 0 || lane.corridor >= static_cast<int>(corridors_.size()) ||
        lane.lane < 0 || lane.lane >= corridors_[lane.corridor].lane_count)
      throw std::out_of_range("lane off network");
  }

  static std::int64_t lane_key(LaneRef lane) {
    return (std::int64_t(lane.corridor) << 20) | std::int64_t(lane.lane);
  }

  std::vector<RoadSegment> segments_;
  std::vector<Corridor> corridors_;
  std::vector<LaneClosure> closures_;
  std::vector<LaneClosure> closures_sorted_;
  std::vector<double> starts_;  // segment start_m, grouped by corridor
  double total_length_m_ = 0.0;
  double covered_length_m_ = 0.0;

  // lane_key -> (offset, count) into closures_sorted_
  std::unordered_map<std::int64_t, std::pair<int, int>> closure_index_;
};

/// Builds and validates the network. Camera coverage is assigned greedily
/// over segments in ascending id until the covered length reaches
/// coverage_fraction of the total, which makes a stated percentage
/// deterministic and monotone in the fraction.
inline RoadNetwork build_network(const NetworkSpec& spec) {
  std::vector<CorridorSpec> corridors = spec.corridors;
  if (spec.ring) {
    if (spec.grid || !corridors.empty())
      throw std::invalid_argument("network spec: choose exactly one of ring/grid/corridors");
    const RingSpec& r = *spec.ring;
    if (r.segments < 1) throw std::invalid_argument("ring: needs at least one segment");
    if (r.lanes < 1) throw std::invalid_argument("ring: needs at least one lane");
    if (!(r.length_km > 0.0)) throw std::invalid_argument("ring: non-positive length");
    CorridorSpec c;
    c.ring = true;
    double seg_len = r.length_km * 1000.0 / r.segments;
    c.segments.assign(static_cast<std::size_t>(r.segments),
                      SegmentSpec{seg_len, r.lanes, spec.jam_density_threshold});
    corridors.push_back(std::move(c));
  } else if (spec.grid) {
    if (!corridors.empty())
      throw std::invalid_argument("network spec: choose exactly one of ring/grid/corridors");
    const GridSpec& g = *spec.grid;
    if (g.rows < 1 || g.cols < 1) throw std::invalid_argument("grid: needs rows >= 1, cols >= 1");
    if (g.lanes < 1) throw std::invalid_argument("grid: needs at least one lane");
    if (!(g.segment_km > 0.0)) throw std::invalid_argument("grid: non-positive segment length");
    for (int row = 0; row < g.rows; ++row) {
      CorridorSpec c;
      c.ring = true;
      c.segments.assign(static_cast<std::size_t>(g.cols),
                        SegmentSpec{g.segment_km * 1000.0, g.lanes, spec.jam_density_threshold});
      corridors.push_back(std::move(c));
    }
  }
  if (corridors.empty()) throw std::invalid_argument("network spec: no segments");
  if (spec.coverage_fraction < 0.0 || spec.coverage_fraction > 1.0)
    throw std::invalid_argument("network spec: coverage fraction outside [0,1]");

  RoadNetwork net;
  int seg_id = 0;
  for (int ci = 0; ci < static_cast<int>(corridors.size()); ++ci) {
    const CorridorSpec& cs = corridors[ci];
    if (cs.segments.empty()) throw std::invalid_argument("corridor with no segments");
    Corridor c;
    c.id = ci;
    c.ring = cs.ring;
    c.first_segment = seg_id;
    c.segment_count = static_cast<int>(cs.segments.size());
    c.lane_count = cs.segments.front().lane_count;
    double at = 0.0;
    for (const SegmentSpec& ss : cs.segments) {
      if (!(ss.length_m > 0.0)) throw std::invalid_argument("segment with non-positive length");
      if (ss.lane_count < 1) throw std::invalid_argument("segment needs at least one lane");
      if (ss.lane_count != c.lane_count)
        throw std::invalid_argument("corridor lane count must be uniform; model narrowing as a closure");
      if (!(ss.jam_density_threshold > 0.0))
        throw std::invalid_argument("segment jam density threshold must be positive");
      RoadSegment seg;
      seg.id = seg_id++;
      seg.corridor = ci;
      seg.start_m = at;
      seg.length_m = ss.length_m;
      seg.lane_count = ss.lane_count;
      seg.jam_density_threshold = ss.jam_density_threshold;
      net.segments_.push_back(seg);
      net.starts_.push_back(at);
      at += ss.length_m;
    }
    c.length_m = at;
    net.corridors_.push_back(c);
    net.total_length_m_ += at;
  }

  // Greedy coverage by ascending segment id.
  double target = spec.coverage_fraction * net.total_length_m_;
  double eps = 1e-9 * net.total_length_m_;
  double covered = 0.0;
  for (RoadSegment& seg : net.segments_) {
    if (covered + eps >= target) break;
    seg.camera_covered = true;
    covered += seg.length_m;
  }
  net.covered_length_m_ = covered;

  for (const LaneClosure& cl : spec.closures) {
    if (cl.corridor < 0 || cl.corridor >= static_cast<int>(net.corridors_.size()))
      throw std::invalid_argument("closure on unknown corridor");
    const Corridor& c = net.corridors_[cl.corridor];
    if (cl.lane < 0 || cl.lane >= c.lane_count) throw std::invalid_argument("closure on unknown lane");
    if (!(cl.begin_m >= 0.0) || !(cl.end_m > cl.begin_m) || cl.end_m > c.length_m)
      throw std::invalid_argument("closure interval invalid");
    net.closures_.push_back(cl);
  }
  net.closures_sorted_ = net.closures_;
  std::sort(net.closures_sorted_.begin(), net.closures_sorted_.end(),
            [](const LaneClosure& a, const LaneClosure& b) {
              return std::tie(a.corridor, a.lane, a.begin_m) < std::tie(b.corridor, b.lane, b.begin_m);
            });
  for (int i = 0; i < static_cast<int>(net.closures_sorted_.size()); ++i) {
    const LaneClosure& cl = net.closures_sorted_[i];
    auto key = RoadNetwork::lane_key(LaneRef{cl.corridor, cl.lane});
    auto [it, inserted] = net.closure_index_.try_emplace(key, std::pair<int, int>{i, 0});
    it->second.second += 1;
  }
  return net;
}

/// Per-segment density and the congested-area set. Pure function of
/// (network, positions); density is vehicle count / (km * lanes).
inline CongestionState update_congestion(const RoadNetwork& net,
                                         std::span<const VehiclePosition> positions) {
  const auto& segments = net.segments();
  std::vector<int> counts(segments.size(), 0);
  for (const VehiclePosition& p : positions) {
    if (p.corridor < 0 || p.corridor >= static_cast<int>(net.corridors().size()))
      throw std::out_of_range("position off network");
    const Corridor& c = net.corridors()[p.corridor];
    if (p.lane < 0 || p.lane >= c.lane_count) throw std::out_of_range("position off network");
    counts[net.segment_at(p.corridor, p.position_m)] += 1;
  }
  CongestionState state;
  state.density_by_segment.resize(segments.size());
  state.congested.assign(segments.size(), 0);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const RoadSegment& seg = segments[i];
    double density = counts[i] / (seg.length_m / 1000.0 * seg.lane_count);
    state.density_by_segment[i] = density;
    if (density >= seg.jam_density_threshold) {
      state.congested[i] = 1;
      state.congested_areas.push_back(static_cast<int>(i));
    }
  }
  return state;
}

}  // namespace cats
