#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cats/behavior.hpp"
#include "cats/config.hpp"
#include "cats/dynamics.hpp"
#include "cats/economy.hpp"
#include "cats/network.hpp"
#include "cats/parallel.hpp"
#include "cats/rational.hpp"
#include "cats/rng.hpp"
#include "cats/surveillance.hpp"

namespace cats {

enum class EventKind {
  grant,
  violation,
  fine_paid,
  fine_reward,
  fine_sunk,
  congestion_fee,
  ban,
  lane_change,
  collision,
  accident,
  reentry,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::grant: return "grant";
    case EventKind::violation: return "violation";
    case EventKind::fine_paid: return "fine_paid";
    case EventKind::fine_reward: return "fine_reward";
    case EventKind::fine_sunk: return "fine_sunk";
    case EventKind::congestion_fee: return "congestion_fee";
    case EventKind::ban: return "ban";
    case EventKind::lane_change: return "lane_change";
    case EventKind::collision: return "collision";
    case EventKind::accident: return "accident";
    case EventKind::reentry: return "reentry";
  }
  return "?";
}

/// One event-log row. Ticks are non-decreasing over the log; daily-pass
/// rows (violations, fines, accidents, daily bans) carry the day-boundary
/// tick with the geometric anchor tick preserved in `detail`.
/// res_delta/credit_delta are the exact ledger mutations applied to
/// `vehicle`, so replaying the log against fresh ledgers reproduces the
/// final ledger state bit-for-bit.
struct EventRecord {
  std::int64_t tick = 0;
  int day = 0;
  EventKind kind = EventKind::grant;
  int vehicle = -1;
  int other = -1;  // reward's offender, collision partner, or target lane
  int corridor = -1;
  int lane = -1;
  double position = 0.0;
  Rational res_delta{0};
  Rational credit_delta{0};
  std::string detail;
};

struct MetricsSnapshot {
  int day = 0;
  int violations = 0;
  int recurrent_violations = 0;
  int accidents = 0;
  int collisions = 0;
  int active_at_day_start = 0;
  double accident_rate = 0.0;  // accidents per 1000 active vehicles per day
  std::array<int, 3> type_counts{};  // effective classification, non-banned
  int n_banned = 0;
  double mean_lambda = 0.0;
  double lambda_p10 = 0.0;
  double lambda_p50 = 0.0;
  double lambda_p90 = 0.0;
  Rational total_resources{0};
  bool balance_ok = true;
  double recurrence_fraction = 0.0;
};

class Simulation {
 public:
  explicit Simulation(ScenarioConfig cfg)
      : cfg_(std::move(cfg)), net_(build_network(cfg_.network)), pool_(cfg_.threads) {
    cfg_.validate();
    cats_ = cfg_.mode == SimMode::cats;
    n_ = cfg_.population.total;
    dt_ = cfg_.dt_s;
    veh_len_ = cfg_.vehicle_length_m;
    ticks_per_day_ = cfg_.ticks_per_day();
    seed_ = cfg_.seed;

    init_lanes();
    init_vehicles();
    init_congestion();
  }

  void run() {
    while (day_ < cfg_.horizon_days) step_day();
  }

  void step_day() {
    begin_day();
    for (int t = 0; t < ticks_per_day_; ++t) step_tick();
    end_day();
    ++day_;
  }

  // --- observers -------------------------------------------------------
  int day() const { return day_; }
  std::int64_t tick() const { return tick_; }
  int ticks_per_day() const { return ticks_per_day_; }
  const ScenarioConfig& config() const { return cfg_; }
  const RoadNetwork& network() const { return net_; }
  const std::vector<MetricsSnapshot>& metrics() const { return metrics_; }
  const std::vector<EventRecord>& events() const { return events_; }
  const std::vector<Ledger>& ledgers() const { return ledgers_; }
  const std::vector<BehaviorState>& behavior_states() const { return behavior_; }
  const std::vector<DriverType>& native_types() const { return native_; }
  const std::vector<double>& positions() const { return pos_; }
  const std::vector<double>& velocities() const { return vel_; }
  bool is_on_road(int id) const { return road_[static_cast<std::size_t>(id)] == Road::on_road; }
  int corridor_of(int id) const { return corridor_[static_cast<std::size_t>(id)]; }
  int lane_of(int id) const { return lane_[static_cast<std::size_t>(id)]; }

  Rational total_resources() const {
    Rational sum{0};
    for (const Ledger& l : ledgers_) sum = sum + l.resources;
    return sum;
  }
  Rational expected_resources() const { return total_granted_ - total_sunk_; }
  bool conservation_holds() const { return total_resources() == expected_resources(); }

  std::vector<VehiclePosition> on_road_positions() const {
    std::vector<VehiclePosition> out;
    out.reserve(static_cast<std::size_t>(n_));
    for (int id = 0; id < n_; ++id) {
      auto uid = static_cast<std::size_t>(id);
      if (road_[uid] == Road::on_road) out.push_back({corridor_[uid], lane_[uid], pos_[uid]});
    }
    return out;
  }

  /// Lane membership invariant for tests: every lane's ordering (including
  /// dual entries for mid-change vehicles) is sorted by position.
  bool lane_order_valid() const {
    for (int gl = 0; gl < total_lanes_; ++gl) {
      const auto& mem = members_[static_cast<std::size_t>(gl)];
      for (std::size_t r = 1; r < mem.size(); ++r)
        if (pos_[static_cast<std::size_t>(mem[r - 1])] > pos_[static_cast<std::size_t>(mem[r])])
          return false;
    }
    return true;
  }

  /// Test knob: issue the daily draw-tick lookups in a scrambled vehicle
  /// order. The counter rng keys by (seed, vehicle, day) and the daily pass
  /// sorts canonically, so every output must stay bit-identical.
  void set_debug_permute_iteration(bool v) { debug_permute_iteration_ = v; }

 private:
  enum class Road : std::uint8_t { on_road, parked_collision, parked_banned };

  // --- initialization --------------------------------------------------
  void init_lanes() {
    const auto& corridors = net_.corridors();
    lane_offset_.resize(corridors.size());
    int gl = 0;
    for (std::size_t ci = 0; ci < corridors.size(); ++ci) {
      lane_offset_[ci] = gl;
      gl += corridors[ci].lane_count;
    }
    total_lanes_ = gl;
    members_.assign(static_cast<std::size_t>(total_lanes_), {});
    lane_corridor_.resize(static_cast<std::size_t>(total_lanes_));
    for (std::size_t ci = 0; ci < corridors.size(); ++ci)
      for (int l = 0; l < corridors[ci].lane_count; ++l)
        lane_corridor_[static_cast<std::size_t>(lane_offset_[ci] + l)] = static_cast<int>(ci);
  }

  void init_vehicles() {
    auto nsize = static_cast<std::size_t>(n_);
    ledgers_ = init_ledgers(nsize, cfg_.economy);
    total_granted_ = cfg_.economy.p0 * Rational{n_};
    native_.resize(nsize);
    behavior_.resize(nsize);
    pos_.assign(nsize, 0.0);
    vel_.assign(nsize, 0.0);
    accel_a_.assign(nsize, 0.0);
    accel_b_.assign(nsize, kInfiniteGap);
    hot_.resize(nsize);
    corridor_.assign(nsize, 0);
    lane_.assign(nsize, 0);
    target_lane_.assign(nsize, -1);
    lc_ticks_.assign(nsize, 0);
    road_.assign(nsize, Road::on_road);
    segment_.assign(nsize, 0);
    seg_end_.assign(nsize, 0.0);
    seg_start_.assign(nsize, 0.0);
    wrapped_.assign(nsize, 0);
    violations_total_.assign(nsize, 0);
    violations_before_today_.assign(nsize, 0);
    scheduled_today_.assign(nsize, 0);
    draw_bucket_.assign(static_cast<std::size_t>(ticks_per_day_), {});

    // Native types by largest-remainder quota in id order, so every prefix
    // of the population tracks the configured mix.
    std::array<int, 3> type_count{};
    for (int id = 0; id < n_; ++id) {
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int t = 0; t < 3; ++t) {
        double score = cfg_.population.fractions[static_cast<std::size_t>(t)] * (id + 1) -
                       type_count[static_cast<std::size_t>(t)];
        if (score > best_score + 1e-12) {
          best_score = score;
          best = t;
        }
      }
      type_count[static_cast<std::size_t>(best)] += 1;
      native_[static_cast<std::size_t>(id)] = static_cast<DriverType>(best);
    }

    // Lane quotas proportional to lane length, same largest-remainder rule.
    std::vector<double> lane_len(static_cast<std::size_t>(total_lanes_));
    double total_len = 0.0;
    for (int gl = 0; gl < total_lanes_; ++gl) {
      auto ugl = static_cast<std::size_t>(gl);
      lane_len[ugl] = net_.corridors()[static_cast<std::size_t>(lane_corridor_[ugl])].length_m;
      total_len += lane_len[ugl];
    }
    std::vector<int> quota(static_cast<std::size_t>(total_lanes_), 0);
    for (int i = 0; i < n_; ++i) {
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int gl = 0; gl < total_lanes_; ++gl) {
        auto ugl = static_cast<std::size_t>(gl);
        double score = lane_len[ugl] / total_len * (i + 1) - quota[ugl];
        if (score > best_score + 1e-12) {
          best_score = score;
          best = gl;
        }
      }
      quota[static_cast<std::size_t>(best)] += 1;
    }

    // Assign ids round-robin across lanes so types interleave everywhere,
    // evenly spaced along each lane, moving at their native desired speed.
    std::vector<int> filled(static_cast<std::size_t>(total_lanes_), 0);
    int id = 0;
    while (id < n_) {
      for (int gl = 0; gl < total_lanes_ && id < n_; ++gl) {
        auto ugl = static_cast<std::size_t>(gl);
        if (filled[ugl] >= quota[ugl]) continue;
        int ci = lane_corridor_[ugl];
        double L = net_.corridors()[static_cast<std::size_t>(ci)].length_m;
        double spacing = L / quota[ugl];
        auto uid = static_cast<std::size_t>(id);
        corridor_[uid] = ci;
        lane_[uid] = gl - lane_offset_[static_cast<std::size_t>(ci)];
        pos_[uid] = filled[ugl] * spacing;
        members_[ugl].push_back(id);
        filled[ugl] += 1;
        ++id;
      }
    }

    for (int v = 0; v < n_; ++v) {
      auto uv = static_cast<std::size_t>(v);
      behavior_[uv].native = native_[uv];
      if (cats_)
        behavior_[uv].recompute(ledgers_[uv], cfg_.economy, cfg_.anchors);
      else
        behavior_[uv].pin_native(cfg_.anchors);
      hot_[uv] = IdmPrecomputed::from(behavior_[uv].effective);
      vel_[uv] = behavior_[uv].effective.v0;
      update_segment_cache(v);
    }

    vmax_bound_ = std::max({cfg_.anchors.A0.v0, cfg_.anchors.B0.v0, cfg_.anchors.C0.v0});
  }

  void init_congestion() {
    seg_count_.assign(net_.segments().size(), 0);
    seg_congested_.assign(net_.segments().size(), 0);
    for (int id = 0; id < n_; ++id)
      seg_count_[static_cast<std::size_t>(segment_[static_cast<std::size_t>(id)])] += 1;
    for (std::size_t s = 0; s < seg_count_.size(); ++s) refresh_congestion(static_cast<int>(s));
  }

  // --- small helpers ----------------------------------------------------
  int global_lane(int corridor, int lane) const {
    return lane_offset_[static_cast<std::size_t>(corridor)] + lane;
  }
  double corridor_length(int ci) const {
    return net_.corridors()[static_cast<std::size_t>(ci)].length_m;
  }
  bool corridor_ring(int ci) const { return net_.corridors()[static_cast<std::size_t>(ci)].ring; }

  void update_segment_cache(int id) {
    auto uid = static_cast<std::size_t>(id);
    int s = net_.segment_at(corridor_[uid], pos_[uid]);
    segment_[uid] = s;
    const RoadSegment& seg = net_.segments()[static_cast<std::size_t>(s)];
    seg_start_[uid] = seg.start_m;
    seg_end_[uid] = seg.start_m + seg.length_m;
  }

  void refresh_congestion(int s) {
    const RoadSegment& seg = net_.segments()[static_cast<std::size_t>(s)];
    double density =
        seg_count_[static_cast<std::size_t>(s)] / (seg.length_m / 1000.0 * seg.lane_count);
    seg_congested_[static_cast<std::size_t>(s)] = density >= seg.jam_density_threshold ? 1 : 0;
  }

  void refresh_behavior(int id) {
    auto uid = static_cast<std::size_t>(id);
    if (cats_) {
      behavior_[uid].recompute(ledgers_[uid], cfg_.economy, cfg_.anchors);
      hot_[uid] = IdmPrecomputed::from(behavior_[uid].effective);
    }
  }

  EventRecord& log(EventKind kind, int vehicle) {
    EventRecord rec;
    rec.tick = tick_;
    rec.day = day_;
    rec.kind = kind;
    rec.vehicle = vehicle;
    events_.push_back(std::move(rec));
    return events_.back();
  }

  /// Distance ahead to the nearest closure begin in this lane, 0 when
  /// already inside a closed stretch; on open corridors the end wall
  /// counts as an obstacle at the corridor end.
  double obstacle_distance(std::span<const LaneClosure> closures, double x, double L,
                           bool ring) const {
    double best = ring ? kInfiniteGap : L - x;
    for (const LaneClosure& c : closures) {
      if (x >= c.begin_m && x < c.end_m) return 0.0;
      double d = c.begin_m - x;
      if (d < 0.0 && ring) d += L;
      if (d >= 0.0) best = std::min(best, d);
    }
    return best;
  }

  bool lane_closed_at(std::span<const LaneClosure> closures, double x) const {
    for (const LaneClosure& c : closures)
      if (x >= c.begin_m && x < c.end_m) return true;
    return false;
  }

  // --- per-tick phases ---------------------------------------------------
  void step_tick() {
    int tick_in_day = static_cast<int>(tick_ - static_cast<std::int64_t>(day_) * ticks_per_day_);
    // Accelerations from frozen state (data-parallel over lanes).
    pool_.run(total_lanes_, [this](int gl) { accel_pass(gl); });
    // Violation draws anchored at this tick read the same frozen state.
    process_draws(tick_in_day);
    // Lane-change decisions from frozen state; commits ascending id.
    lane_change_phase();
    // Integrate (data-parallel over id ranges).
    int chunks = pool_.parallelism();
    int chunk_len = (n_ + chunks - 1) / chunks;
    pool_.run(chunks, [this, chunk_len](int c) {
      integrate_range(c * chunk_len, std::min(n_, (c + 1) * chunk_len));
    });
    maintain_lane_order();
    scan_collisions();
    complete_lane_changes();
    // Congestion state, then edge-triggered fees.
    track_segments_and_fees();
    ++tick_;
  }

  void accel_pass(int gl) {
    auto ugl = static_cast<std::size_t>(gl);
    const auto& mem = members_[ugl];
    int k = static_cast<int>(mem.size());
    if (k == 0) return;
    int ci = lane_corridor_[ugl];
    double L = corridor_length(ci);
    bool ring = corridor_ring(ci);
    auto closures = net_.lane_closures({ci, gl - lane_offset_[static_cast<std::size_t>(ci)]});
    bool check_walls = !closures.empty() || !ring;
    for (int r = 0; r < k; ++r) {
      auto uid = static_cast<std::size_t>(mem[static_cast<std::size_t>(r)]);
      double x = pos_[uid];
      double v = vel_[uid];
      double gap = kInfiniteGap;
      double dv = 0.0;
      if (k >= 2) {
        if (r + 1 < k) {
          auto lead = static_cast<std::size_t>(mem[static_cast<std::size_t>(r + 1)]);
          gap = pos_[lead] - x - veh_len_;
          dv = v - vel_[lead];
        } else if (ring) {
          auto lead = static_cast<std::size_t>(mem[0]);
          gap = pos_[lead] + L - x - veh_len_;
          dv = v - vel_[lead];
        }
      }
      if (gap != kInfiniteGap && gap <= 0.0) gap = kMinGap;  // pair parks this tick
      double a = idm_acceleration(v, dv, gap, hot_[uid]);
      if (check_walls) {
        double wall = obstacle_distance(closures, x, L, ring);
        if (wall <= kClosureHorizon)
          a = std::min(a, idm_acceleration(v, v, std::max(wall, kMinGap), hot_[uid]));
      }
      if (global_lane(corridor_[uid], lane_[uid]) == gl)
        accel_a_[uid] = a;
      else
        accel_b_[uid] = a;
    }
  }

  void process_draws(int tick_in_day) {
    for (int id : draw_bucket_[static_cast<std::size_t>(tick_in_day)]) {
      auto uid = static_cast<std::size_t>(id);
      if (road_[uid] != Road::on_road) continue;
      bool covered = net_.segments()[static_cast<std::size_t>(segment_[uid])].camera_covered;
      DriverType eff = behavior_[uid].effective_type;
      double p = cfg_.rates.rate(eff, covered);
      if (p <= 0.0) continue;
      CounterRng rng(seed_, StreamKind::violation, static_cast<std::uint64_t>(id),
                     static_cast<std::uint64_t>(day_));
      if (!rng.next_bernoulli(p)) continue;
      int type = 0;
      if (cfg_.tariffs.size() > 1) {
        CounterRng trng(seed_, StreamKind::violation_type, static_cast<std::uint64_t>(id),
                        static_cast<std::uint64_t>(day_));
        type = static_cast<int>(trng.next_below(cfg_.tariffs.size()));
      }
      ViolationEvent ev;
      ev.offender = id;
      ev.type = type;
      ev.tick = tick_;
      ev.corridor = corridor_[uid];
      ev.lane = lane_[uid];
      ev.position_m = pos_[uid];
      ev.covered = covered;
      ev.offender_effective = eff;
      if (cats_) ev.reporters = find_reporters(id);
      pending_violations_.push_back(std::move(ev));
    }
  }

  std::vector<int> find_reporters(int offender) const {
    auto uoff = static_cast<std::size_t>(offender);
    int ci = corridor_[uoff];
    double L = corridor_length(ci);
    bool ring = corridor_ring(ci);
    reporter_scratch_.clear();
    const Corridor& c = net_.corridors()[static_cast<std::size_t>(ci)];
    for (int l = 0; l < c.lane_count; ++l) {
      for (int id : members_[static_cast<std::size_t>(global_lane(ci, l))]) {
        if (id == offender) continue;
        auto uid = static_cast<std::size_t>(id);
        // Mid-change vehicles sit in two member lists; keep the origin copy.
        if (target_lane_[uid] == l) continue;
        reporter_scratch_.push_back({id, pos_[uid]});
      }
    }
    return detect_reporters(pos_[uoff], L, ring, reporter_scratch_, cfg_.detection);
  }

  void lane_change_phase() {
    lc_candidates_.clear();
    for (int gl = 0; gl < total_lanes_; ++gl) {
      auto ugl = static_cast<std::size_t>(gl);
      const auto& mem = members_[ugl];
      int k = static_cast<int>(mem.size());
      if (k == 0) continue;
      int ci = lane_corridor_[ugl];
      const Corridor& c = net_.corridors()[static_cast<std::size_t>(ci)];
      if (c.lane_count < 2) continue;
      double L = c.length_m;
      bool ring = c.ring;
      int lane_in_corr = gl - lane_offset_[static_cast<std::size_t>(ci)];
      auto closures = net_.lane_closures({ci, lane_in_corr});
      bool check_walls = !closures.empty() || !ring;
      const std::vector<int>* lmem =
          lane_in_corr + 1 < c.lane_count ? &members_[ugl + 1] : nullptr;
      const std::vector<int>* rmem = lane_in_corr >= 1 ? &members_[ugl - 1] : nullptr;
      // Two-pointer sweep: first index of each adjacent lane with pos > x.
      int li = 0;
      int ri = 0;
      for (int r = 0; r < k; ++r) {
        int id = mem[static_cast<std::size_t>(r)];
        auto uid = static_cast<std::size_t>(id);
        double x = pos_[uid];
        if (lmem) {
          int kl = static_cast<int>(lmem->size());
          while (li < kl &&
                 pos_[static_cast<std::size_t>((*lmem)[static_cast<std::size_t>(li)])] <= x)
            ++li;
        }
        if (rmem) {
          int kr = static_cast<int>(rmem->size());
          while (ri < kr &&
                 pos_[static_cast<std::size_t>((*rmem)[static_cast<std::size_t>(ri)])] <= x)
            ++ri;
        }
        if (target_lane_[uid] >= 0) continue;             // mid-change lockout
        if (global_lane(ci, lane_[uid]) != gl) continue;  // dual entry: not origin
        const DrivingParams& ep = behavior_[uid].effective;
        double closure_dist =
            check_walls ? obstacle_distance(closures, x, L, ring) : kInfiniteGap;
        bool mandatory = closure_dist <= kClosureHorizon;
        bool has_leader = k >= 2 && (r + 1 < k || ring);
        double cl_v =
            has_leader
                ? vel_[static_cast<std::size_t>(mem[static_cast<std::size_t>((r + 1) % k)])]
                : ep.v0;
        // No adjacent leader can be fast enough to make the ratio test pass.
        if (!mandatory && cl_v >= ep.eta * vmax_bound_) continue;
        NeighborView view;
        view.self_velocity = vel_[uid];
        view.current_leader = free_road_leader(ep);
        if (has_leader) {
          auto lead = static_cast<std::size_t>(mem[static_cast<std::size_t>((r + 1) % k)]);
          double gap = pos_[lead] - x - veh_len_;
          if (r + 1 == k) gap += L;
          view.current_leader = {gap, vel_[lead]};
        }
        view.left = side_view(lmem, li, x, L, ring, ep);
        view.right = side_view(rmem, ri, x, L, ring, ep);
        view.closure_distance = closure_dist;
        NecessityResult nec = lane_change_necessity(view, ep);
        if (!nec.any()) continue;
        if (nec.left && viable(ci, lane_in_corr + 1, x) &&
            lane_change_feasibility(view, ep, Direction::left)) {
          lc_candidates_.push_back({id, Direction::left});
        } else if (nec.right && viable(ci, lane_in_corr - 1, x) &&
                   lane_change_feasibility(view, ep, Direction::right)) {
          lc_candidates_.push_back({id, Direction::right});
        }
      }
    }
    std::sort(lc_candidates_.begin(), lc_candidates_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto [id, dir] : lc_candidates_) commit_lane_change(id, dir);
  }

  AdjacentLaneView side_view(const std::vector<int>* mem, int ub, double x, double L, bool ring,
                             const DrivingParams& ep) const {
    AdjacentLaneView adj;
    if (!mem) return adj;
    adj.exists = true;
    adj.leader = free_road_leader(ep);
    adj.follower = absent_follower();
    int k = static_cast<int>(mem->size());
    if (k == 0) return adj;
    if (ub < k) {
      auto tl = static_cast<std::size_t>((*mem)[static_cast<std::size_t>(ub)]);
      adj.leader = {pos_[tl] - x - veh_len_, vel_[tl]};
    } else if (ring) {
      auto tl = static_cast<std::size_t>((*mem)[0]);
      adj.leader = {pos_[tl] + L - x - veh_len_, vel_[tl]};
    }
    if (ub > 0) {
      auto tf = static_cast<std::size_t>((*mem)[static_cast<std::size_t>(ub - 1)]);
      adj.follower = {x - pos_[tf] - veh_len_, vel_[tf]};
    } else if (ring) {
      auto tf = static_cast<std::size_t>((*mem)[static_cast<std::size_t>(k - 1)]);
      adj.follower = {x + L - pos_[tf] - veh_len_, vel_[tf]};
    }
    return adj;
  }

  bool viable(int ci, int lane, double x) const {
    const Corridor& c = net_.corridors()[static_cast<std::size_t>(ci)];
    if (lane < 0 || lane >= c.lane_count) return false;
    return !lane_closed_at(net_.lane_closures({ci, lane}), x);
  }

  /// Frozen surroundings of `id` at rank `r` of lane `gl`, with adjacent
  /// neighbors found by binary search (used for commit re-validation,
  /// where the sweep pointers are no longer valid).
  NeighborView build_view(int id, int gl, int r) const {
    auto uid = static_cast<std::size_t>(id);
    auto ugl = static_cast<std::size_t>(gl);
    int ci = lane_corridor_[ugl];
    const Corridor& c = net_.corridors()[static_cast<std::size_t>(ci)];
    double L = c.length_m;
    bool ring = c.ring;
    const auto& mem = members_[ugl];
    int k = static_cast<int>(mem.size());
    const DrivingParams& ep = behavior_[uid].effective;

    NeighborView view;
    view.self_velocity = vel_[uid];
    view.current_leader = free_road_leader(ep);
    if (k >= 2 && (r + 1 < k || ring)) {
      auto lead = static_cast<std::size_t>(mem[static_cast<std::size_t>((r + 1) % k)]);
      double gap = pos_[lead] - pos_[uid] - veh_len_;
      if (r + 1 == k) gap += L;
      view.current_leader = {gap, vel_[lead]};
    }
    int lane_in_corr = gl - lane_offset_[static_cast<std::size_t>(ci)];
    double x = pos_[uid];
    auto search = [this, &c, ci](int lane, double xx) {
      if (lane < 0 || lane >= c.lane_count)
        return std::pair<const std::vector<int>*, int>{nullptr, 0};
      const auto& m = members_[static_cast<std::size_t>(global_lane(ci, lane))];
      auto it = std::upper_bound(m.begin(), m.end(), xx, [this](double val, int vid) {
        return val < pos_[static_cast<std::size_t>(vid)];
      });
      return std::pair<const std::vector<int>*, int>{&m, static_cast<int>(it - m.begin())};
    };
    auto [lm, lub] = search(lane_in_corr + 1, x);
    auto [rm, rub] = search(lane_in_corr - 1, x);
    view.left = side_view(lm, lub, x, L, ring, ep);
    view.right = side_view(rm, rub, x, L, ring, ep);
    return view;
  }

  void commit_lane_change(int id, Direction dir) {
    auto uid = static_cast<std::size_t>(id);
    int ci = corridor_[uid];
    int from = lane_[uid];
    int to = dir == Direction::left ? from + 1 : from - 1;
    int gl = global_lane(ci, from);
    // Re-validate against current membership: an earlier commit this tick
    // may have taken the same gap.
    const auto& mem = members_[static_cast<std::size_t>(gl)];
    auto self_it = std::find(mem.begin(), mem.end(), id);
    int r = static_cast<int>(self_it - mem.begin());
    NeighborView view = build_view(id, gl, r);
    const DrivingParams& ep = behavior_[uid].effective;
    if (!lane_change_feasibility(view, ep, dir)) return;

    auto& target = members_[static_cast<std::size_t>(global_lane(ci, to))];
    double x = pos_[uid];
    auto ins = std::upper_bound(target.begin(), target.end(), x, [this](double xx, int vid) {
      return xx < pos_[static_cast<std::size_t>(vid)];
    });
    target.insert(ins, id);
    target_lane_[uid] = to;
    int dur = std::max<int>(1, static_cast<int>(std::llround(ep.delta_tau / dt_)));
    lc_ticks_[uid] = dur;
    accel_b_[uid] = kInfiniteGap;
    midchange_.insert(std::upper_bound(midchange_.begin(), midchange_.end(), id), id);

    EventRecord& ev = log(EventKind::lane_change, id);
    ev.other = to;
    ev.corridor = ci;
    ev.lane = from;
    ev.position = x;
    char buf[48];
    std::snprintf(buf, sizeof buf, "dur_ticks=%d", dur);
    ev.detail = buf;
  }

  void integrate_range(int begin, int end) {
    for (int id = begin; id < end; ++id) {
      auto uid = static_cast<std::size_t>(id);
      if (road_[uid] != Road::on_road) continue;
      double a = std::min(accel_a_[uid], accel_b_[uid]);
      double v = std::max(0.0, vel_[uid] + a * dt_);
      double x = pos_[uid] + v * dt_;
      int ci = corridor_[uid];
      double L = corridor_length(ci);
      std::uint8_t w = 0;
      if (x >= L) {
        if (corridor_ring(ci)) {
          x -= L;
          w = 1;
        } else {
          x = L - kMinGap;  // hard wall at the corridor end
          v = 0.0;
        }
      }
      vel_[uid] = v;
      pos_[uid] = x;
      wrapped_[uid] = w;
    }
  }

  void maintain_lane_order() {
    for (int gl = 0; gl < total_lanes_; ++gl) {
      auto& mem = members_[static_cast<std::size_t>(gl)];
      int k = static_cast<int>(mem.size());
      if (k < 2 || !corridor_ring(lane_corridor_[static_cast<std::size_t>(gl)])) continue;
      int w = 0;
      while (w < k &&
             wrapped_[static_cast<std::size_t>(mem[static_cast<std::size_t>(k - 1 - w)])])
        ++w;
      if (w > 0 && w < k) std::rotate(mem.begin(), mem.end() - w, mem.end());
    }
    std::fill(wrapped_.begin(), wrapped_.end(), std::uint8_t{0});
  }

  void scan_collisions() {
    collision_pairs_.clear();
    for (int gl = 0; gl < total_lanes_; ++gl) {
      const auto& mem = members_[static_cast<std::size_t>(gl)];
      int k = static_cast<int>(mem.size());
      if (k < 2) continue;
      int ci = lane_corridor_[static_cast<std::size_t>(gl)];
      double L = corridor_length(ci);
      bool ring = corridor_ring(ci);
      for (int r = 0; r + 1 < k; ++r) {
        double gap = pos_[static_cast<std::size_t>(mem[static_cast<std::size_t>(r + 1)])] -
                     pos_[static_cast<std::size_t>(mem[static_cast<std::size_t>(r)])] - veh_len_;
        if (gap <= 0.0)
          collision_pairs_.emplace_back(mem[static_cast<std::size_t>(r)],
                                        mem[static_cast<std::size_t>(r + 1)]);
      }
      if (ring) {
        double gap = pos_[static_cast<std::size_t>(mem[0])] + L -
                     pos_[static_cast<std::size_t>(mem[static_cast<std::size_t>(k - 1)])] -
                     veh_len_;
        if (gap <= 0.0)
          collision_pairs_.emplace_back(mem[static_cast<std::size_t>(k - 1)], mem[0]);
      }
    }
    if (collision_pairs_.empty()) return;
    // A mid-change vehicle can collide in both lanes at once; normalize and
    // dedupe before logging, then park everyone involved.
    for (auto& [a, b] : collision_pairs_)
      if (a > b) std::swap(a, b);
    std::sort(collision_pairs_.begin(), collision_pairs_.end());
    collision_pairs_.erase(std::unique(collision_pairs_.begin(), collision_pairs_.end()),
                           collision_pairs_.end());
    for (auto [a, b] : collision_pairs_) {
      auto ua = static_cast<std::size_t>(a);
      EventRecord& ev = log(EventKind::collision, a);
      ev.other = b;
      ev.corridor = corridor_[ua];
      ev.lane = lane_[ua];
      ev.position = pos_[ua];
      collisions_today_ += 1;
    }
    for (auto [a, b] : collision_pairs_) {
      park_vehicle(a, Road::parked_collision);
      park_vehicle(b, Road::parked_collision);
    }
  }

  void park_vehicle(int id, Road state) {
    auto uid = static_cast<std::size_t>(id);
    if (road_[uid] == Road::on_road) {
      remove_member(global_lane(corridor_[uid], lane_[uid]), id);
      if (target_lane_[uid] >= 0) {
        remove_member(global_lane(corridor_[uid], target_lane_[uid]), id);
        target_lane_[uid] = -1;
        lc_ticks_[uid] = 0;
        accel_b_[uid] = kInfiniteGap;
        auto it = std::lower_bound(midchange_.begin(), midchange_.end(), id);
        if (it != midchange_.end() && *it == id) midchange_.erase(it);
      }
      int s = segment_[uid];
      seg_count_[static_cast<std::size_t>(s)] -= 1;
      refresh_congestion(s);
    }
    road_[uid] = state;
  }

  void remove_member(int gl, int id) {
    auto& mem = members_[static_cast<std::size_t>(gl)];
    auto it = std::find(mem.begin(), mem.end(), id);
    if (it != mem.end()) mem.erase(it);
  }

  void complete_lane_changes() {
    for (std::size_t i = 0; i < midchange_.size();) {
      int id = midchange_[i];
      auto uid = static_cast<std::size_t>(id);
      if (--lc_ticks_[uid] > 0) {
        ++i;
        continue;
      }
      remove_member(global_lane(corridor_[uid], lane_[uid]), id);
      lane_[uid] = target_lane_[uid];
      target_lane_[uid] = -1;
      accel_b_[uid] = kInfiniteGap;
      midchange_.erase(midchange_.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  void track_segments_and_fees() {
    fee_entrants_.clear();
    dirty_segments_.clear();
    for (int id = 0; id < n_; ++id) {
      auto uid = static_cast<std::size_t>(id);
      if (road_[uid] != Road::on_road) continue;
      double x = pos_[uid];
      if (x >= seg_start_[uid] && x < seg_end_[uid]) continue;
      int old_seg = segment_[uid];
      update_segment_cache(id);
      int new_seg = segment_[uid];
      if (new_seg == old_seg) continue;
      seg_count_[static_cast<std::size_t>(old_seg)] -= 1;
      seg_count_[static_cast<std::size_t>(new_seg)] += 1;
      dirty_segments_.push_back(old_seg);
      dirty_segments_.push_back(new_seg);
      if (cats_) fee_entrants_.push_back(id);
    }
    for (int s : dirty_segments_) refresh_congestion(s);
    for (int id : fee_entrants_) {
      auto uid = static_cast<std::size_t>(id);
      if (!seg_congested_[static_cast<std::size_t>(segment_[uid])]) continue;
      bool was_banned = ledgers_[uid].banned;
      Transfer t = charge_congestion(id, ledgers_[uid], cfg_.economy);
      total_sunk_ = total_sunk_ + t.amount;
      EventRecord& ev = log(EventKind::congestion_fee, id);
      ev.corridor = corridor_[uid];
      ev.lane = lane_[uid];
      ev.position = pos_[uid];
      ev.res_delta = Rational{0} - t.amount;
      refresh_behavior(id);
      if (!was_banned && ledgers_[uid].banned) ban_vehicle(id);
    }
  }

  void ban_vehicle(int id) {
    auto uid = static_cast<std::size_t>(id);
    EventRecord& ev = log(EventKind::ban, id);
    ev.detail = ledgers_[uid].ban_reason == BanReason::credit_exhaustion ? "credit-exhaustion"
                                                                         : "resource-exhaustion";
    park_vehicle(id, Road::parked_banned);
  }

  // --- day boundary ------------------------------------------------------
  void begin_day() {
    if (day_ > 0 && day_ % cfg_.economy.delta_T == 0) {
      for (int id = 0; id < n_; ++id) {
        auto uid = static_cast<std::size_t>(id);
        Rational credit_before = ledgers_[uid].credit;
        periodic_grant(ledgers_[uid], cfg_.economy);
        total_granted_ = total_granted_ + cfg_.economy.p0;
        EventRecord& ev = log(EventKind::grant, id);
        ev.res_delta = cfg_.economy.p0;
        ev.credit_delta = cfg_.economy.l0 - credit_before;
        refresh_behavior(id);
      }
    }
    for (int id = 0; id < n_; ++id) {
      auto uid = static_cast<std::size_t>(id);
      if (road_[uid] == Road::parked_collision ||
          (road_[uid] == Road::parked_banned && !ledgers_[uid].banned))
        reenter(id);
    }

    std::fill(scheduled_today_.begin(), scheduled_today_.end(), std::uint8_t{0});
    for (auto& bucket : draw_bucket_) bucket.clear();
    if (debug_permute_iteration_) {
      // Any fixed scramble works here: the guard in schedule_draw dedupes
      // and outputs may not depend on issue order.
      for (int i = 0; i < n_; ++i)
        schedule_draw(static_cast<int>((static_cast<std::int64_t>(i) * 48271 + 11) % n_));
    }
    for (int id = 0; id < n_; ++id) schedule_draw(id);

    active_at_day_start_ = 0;
    for (int id = 0; id < n_; ++id)
      if (road_[static_cast<std::size_t>(id)] == Road::on_road) ++active_at_day_start_;
    collisions_today_ = 0;
  }

  void schedule_draw(int id) {
    auto uid = static_cast<std::size_t>(id);
    if (road_[uid] != Road::on_road) return;
    if (scheduled_today_[uid]) return;
    scheduled_today_[uid] = 1;
    CounterRng rng(seed_, StreamKind::sample_tick, static_cast<std::uint64_t>(id),
                   static_cast<std::uint64_t>(day_));
    auto t = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(ticks_per_day_)));
    draw_bucket_[t].push_back(id);
  }

  void reenter(int id) {
    auto uid = static_cast<std::size_t>(id);
    int ci = corridor_[uid];
    const Corridor& c = net_.corridors()[static_cast<std::size_t>(ci)];
    double L = c.length_m;
    bool ring = c.ring;
    double best_gap = -1.0;
    int best_lane = 0;
    double best_pos = 0.0;
    for (int l = 0; l < c.lane_count; ++l) {
      const auto& mem = members_[static_cast<std::size_t>(global_lane(ci, l))];
      int k = static_cast<int>(mem.size());
      if (k == 0) {
        if (L > best_gap + 1e-12) {
          best_gap = L;
          best_lane = l;
          best_pos = L / 2.0;
        }
        continue;
      }
      for (int r = 0; r < k; ++r) {
        double a = pos_[static_cast<std::size_t>(mem[static_cast<std::size_t>(r)])];
        double b;
        if (r + 1 < k)
          b = pos_[static_cast<std::size_t>(mem[static_cast<std::size_t>(r + 1)])];
        else if (ring)
          b = pos_[static_cast<std::size_t>(mem[0])] + L;
        else
          break;
        double gap = b - a - veh_len_;
        if (gap > best_gap + 1e-12) {
          best_gap = gap;
          best_lane = l;
          double p = a + (b - a) / 2.0;
          best_pos = p >= L ? p - L : p;
        }
      }
    }
    lane_[uid] = best_lane;
    pos_[uid] = best_pos;
    vel_[uid] = 0.0;
    road_[uid] = Road::on_road;
    auto& mem = members_[static_cast<std::size_t>(global_lane(ci, best_lane))];
    auto ins = std::upper_bound(mem.begin(), mem.end(), best_pos, [this](double xx, int vid) {
      return xx < pos_[static_cast<std::size_t>(vid)];
    });
    mem.insert(ins, id);
    update_segment_cache(id);
    seg_count_[static_cast<std::size_t>(segment_[uid])] += 1;
    refresh_congestion(segment_[uid]);
    EventRecord& ev = log(EventKind::reentry, id);
    ev.corridor = ci;
    ev.lane = best_lane;
    ev.position = best_pos;
  }

  void end_day() {
    std::sort(pending_violations_.begin(), pending_violations_.end(),
              [](const ViolationEvent& a, const ViolationEvent& b) {
                if (a.tick != b.tick) return a.tick < b.tick;
                return a.offender < b.offender;
              });
    int accidents = 0;
    int recurrent = 0;
    for (const ViolationEvent& v : pending_violations_) {
      auto uoff = static_cast<std::size_t>(v.offender);
      log_violation(v);
      if (cats_ && !v.reporters.empty()) {
        apply_cats_fine(v);
      } else if (!cats_ && v.covered) {
        bool was_banned = ledgers_[uoff].banned;
        Transfer t =
            apply_fine_sunk(v.offender, ledgers_[uoff], v.type, cfg_.tariffs, cfg_.economy);
        total_sunk_ = total_sunk_ + t.amount;
        const TariffEntry& te = cfg_.tariffs[static_cast<std::size_t>(v.type)];
        EventRecord& ev = log(EventKind::fine_sunk, v.offender);
        ev.res_delta = Rational{0} - te.f_res;
        ev.credit_delta = Rational{0} - te.f_cre;
        if (!was_banned && ledgers_[uoff].banned) ban_vehicle(v.offender);
      }
      CounterRng arng(seed_, StreamKind::accident, static_cast<std::uint64_t>(v.offender),
                      static_cast<std::uint64_t>(day_));
      if (arng.next_bernoulli(cfg_.detection.accident_probability(v.offender_effective))) {
        ++accidents;
        EventRecord& ev = log(EventKind::accident, v.offender);
        char buf[48];
        std::snprintf(buf, sizeof buf, "sample_tick=%lld", static_cast<long long>(v.tick));
        ev.detail = buf;
      }
      if (violations_before_today_[uoff] > 0) ++recurrent;
      violations_total_[uoff] += 1;
    }

    MetricsSnapshot m;
    m.day = day_;
    m.violations = static_cast<int>(pending_violations_.size());
    m.recurrent_violations = recurrent;
    m.accidents = accidents;
    m.collisions = collisions_today_;
    m.active_at_day_start = active_at_day_start_;
    m.accident_rate = active_at_day_start_ > 0 ? 1000.0 * accidents / active_at_day_start_ : 0.0;
    lambda_scratch_.clear();
    for (int id = 0; id < n_; ++id) {
      auto uid = static_cast<std::size_t>(id);
      if (ledgers_[uid].banned) {
        m.n_banned += 1;
        continue;
      }
      m.type_counts[static_cast<std::size_t>(behavior_[uid].effective_type)] += 1;
      lambda_scratch_.push_back(behavior_[uid].lambda);
    }
    if (!lambda_scratch_.empty()) {
      std::sort(lambda_scratch_.begin(), lambda_scratch_.end());
      double sum = std::accumulate(lambda_scratch_.begin(), lambda_scratch_.end(), 0.0);
      auto count = lambda_scratch_.size();
      m.mean_lambda = sum / static_cast<double>(count);
      auto at = [&](double q) {
        auto idx = static_cast<std::size_t>(q * static_cast<double>(count - 1) + 0.5);
        return lambda_scratch_[std::min(idx, count - 1)];
      };
      m.lambda_p10 = at(0.10);
      m.lambda_p50 = at(0.50);
      m.lambda_p90 = at(0.90);
    }
    m.total_resources = total_resources();
    m.balance_ok = m.total_resources == expected_resources();
    m.recurrence_fraction =
        m.violations > 0 ? static_cast<double>(recurrent) / m.violations : 0.0;
    metrics_.push_back(std::move(m));

    violations_before_today_ = violations_total_;
    pending_violations_.clear();
  }

  void log_violation(const ViolationEvent& v) {
    EventRecord& ev = log(EventKind::violation, v.offender);
    ev.corridor = v.corridor;
    ev.lane = v.lane;
    ev.position = v.position_m;
    char buf[64];
    std::snprintf(buf, sizeof buf, "k=%d;covered=%d;sample_tick=%lld", v.type, v.covered ? 1 : 0,
                  static_cast<long long>(v.tick));
    std::string d = buf;
    if (cats_) {
      d += ";reporters=";
      if (v.reporters.empty()) {
        d += "none";
      } else {
        for (std::size_t i = 0; i < v.reporters.size(); ++i) {
          if (i) d += '|';
          d += std::to_string(v.reporters[i]);
        }
      }
    }
    ev.detail = std::move(d);
  }

  void apply_cats_fine(const ViolationEvent& v) {
    auto uoff = static_cast<std::size_t>(v.offender);
    reporter_ledgers_.clear();
    for (int rid : v.reporters)
      reporter_ledgers_.push_back(&ledgers_[static_cast<std::size_t>(rid)]);
    bool was_banned = ledgers_[uoff].banned;
    std::vector<Transfer> transfers = apply_fine(v.offender, ledgers_[uoff], v.reporters,
                                                 reporter_ledgers_, v.type, cfg_.tariffs,
                                                 cfg_.economy);
    const TariffEntry& te = cfg_.tariffs[static_cast<std::size_t>(v.type)];
    EventRecord& paid = log(EventKind::fine_paid, v.offender);
    paid.res_delta = Rational{0} - te.f_res;
    paid.credit_delta = Rational{0} - te.f_cre;
    for (const Transfer& t : transfers) {
      EventRecord& ev = log(EventKind::fine_reward, t.payee);
      ev.other = v.offender;
      ev.res_delta = t.amount;
    }
    refresh_behavior(v.offender);
    for (int rid : v.reporters) refresh_behavior(rid);
    if (!was_banned && ledgers_[uoff].banned) ban_vehicle(v.offender);
  }

  // --- fixed configuration ---------------------------------------------
  static constexpr double kMinGap = 1e-3;

  ScenarioConfig cfg_;
  RoadNetwork net_;
  ThreadPool pool_;
  bool cats_ = true;
  int n_ = 0;
  double dt_ = 0.1;
  double veh_len_ = 5.0;
  int ticks_per_day_ = 0;
  std::uint64_t seed_ = 1;
  double vmax_bound_ = 0.0;

  // --- simulation state --------------------------------------------------
  std::int64_t tick_ = 0;
  int day_ = 0;
  std::vector<DriverType> native_;
  std::vector<Ledger> ledgers_;
  std::vector<BehaviorState> behavior_;
  std::vector<double> pos_, vel_, accel_a_, accel_b_;
  std::vector<IdmPrecomputed> hot_;
  std::vector<int> corridor_, lane_, target_lane_, lc_ticks_;
  std::vector<Road> road_;
  std::vector<int> segment_;
  std::vector<double> seg_start_, seg_end_;
  std::vector<std::uint8_t> wrapped_;
  std::vector<int> violations_total_, violations_before_today_;
  std::vector<std::uint8_t> scheduled_today_;
  int total_lanes_ = 0;
  std::vector<int> lane_offset_;
  std::vector<int> lane_corridor_;
  std::vector<std::vector<int>> members_;
  std::vector<int> midchange_;  // ids currently mid-change, sorted
  std::vector<int> seg_count_;
  std::vector<std::uint8_t> seg_congested_;
  std::vector<std::vector<int>> draw_bucket_;
  std::vector<ViolationEvent> pending_violations_;
  Rational total_granted_{0};
  Rational total_sunk_{0};
  std::vector<EventRecord> events_;
  std::vector<MetricsSnapshot> metrics_;
  int active_at_day_start_ = 0;
  int collisions_today_ = 0;
  bool debug_permute_iteration_ = false;

  // scratch buffers reused across calls
  mutable std::vector<ReporterCandidate> reporter_scratch_;
  std::vector<std::pair<int, Direction>> lc_candidates_;
  std::vector<std::pair<int, int>> collision_pairs_;
  std::vector<int> fee_entrants_;
  std::vector<int> dirty_segments_;
  std::vector<double> lambda_scratch_;
  std::vector<Ledger*> reporter_ledgers_;
};

}  // namespace cats
