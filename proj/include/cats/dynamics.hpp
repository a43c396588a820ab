#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace cats {

/// Per-driver dynamic parameters. These are the *effective* values the
/// dynamics consume each tick; the behavior layer produces them by blending
/// a conservative anchor with the driver's native anchor.
struct DrivingParams {
  double v0 = 0.0;        // desired speed, m/s
  double T = 0.0;         // desired time headway, s
  double a_max = 0.0;     // maximum acceleration, m/s^2
  double b_com = 0.0;     // comfortable deceleration, m/s^2
  double delta = 4.0;     // free-acceleration exponent
  double s0 = 0.0;        // standstill minimum gap, m
  double eta = 0.0;       // leader-speed ratio below which overtaking is wanted
  double mu1 = 0.0;       // gap-per-velocity margin vs target leader, s
  double mu2 = 0.0;       // gap-per-velocity margin vs target follower, s
  double mu3 = 0.0;       // gap-per-velocity margin vs current leader, s
  double delta_tau = 0.0; // lane-change maneuver duration, s

  friend bool operator==(const DrivingParams&, const DrivingParams&) = default;

  bool valid() const {
    return v0 > 0 && T > 0 && a_max > 0 && b_com > 0 && delta > 0 && s0 > 0 &&
           eta > 0 && eta < 1 && mu1 > 0 && mu2 > 0 && mu3 > 0 && mu3 < mu1 &&
           delta_tau > 0;
  }
};

/// Hard physical braking limit, m/s^2. Model accelerations are clamped to
/// [-b_emergency, +inf); sharper decelerations are not achievable, so close
/// approaches become collisions instead of teleport-stops.
inline constexpr double kEmergencyDeceleration = 8.0;

/// Look-ahead distance for lane-closure necessity, m.
inline constexpr double kClosureHorizon = 200.0;

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

namespace detail {
inline double pow_delta(double x, double delta) {
  // delta == 4 for every anchor in this model; spare the libm call there.
  if (delta == 4.0) {
    double x2 = x * x;
    return x2 * x2;
  }
  return std::pow(x, delta);
}
}  // namespace detail

/// Desired minimum gap s*(v, dv) = s0 + T v + v dv / (2 sqrt(a_max b_com)),
/// floored at s0 so the interaction term never turns attractive at short
/// gaps when the leader is pulling away.
inline double desired_min_gap(double v, double dv, const DrivingParams& p) {
  double brake_coef = 1.0 / (2.0 * std::sqrt(p.a_max * p.b_com));
  return std::max(p.s0, p.s0 + p.T * v + v * dv * brake_coef);
}

/// IDM: a = a_max [1 - (v/v0)^delta - (s*/s)^2]. `s` is the bumper-to-bumper
/// gap and must be positive; a non-positive gap is a collision, handled by
/// the engine before the model is consulted. Infinite s means a free road.
inline double idm_acceleration(double v, double dv, double s, const DrivingParams& p) {
  double a = p.a_max * (1.0 - detail::pow_delta(v / p.v0, p.delta));
  if (s != kInfiniteGap) {
    double q = desired_min_gap(v, dv, p) / s;
    a -= p.a_max * q * q;
  }
  return std::max(a, -kEmergencyDeceleration);
}

/// One neighbor as seen from the subject at decision time. Absent neighbors
/// use the free-road convention: infinite gap, leader velocity = subject v0
/// (so speed-ratio tests read "as fast as I could wish for").
struct Neighbor {
  double gap = kInfiniteGap;
  double velocity = 0.0;
};

inline Neighbor free_road_leader(const DrivingParams& p) { return {kInfiniteGap, p.v0}; }
inline Neighbor absent_follower() { return {kInfiniteGap, 0.0}; }

struct AdjacentLaneView {
  bool exists = false;
  Neighbor leader;    // TL: nearest vehicle ahead in that lane
  Neighbor follower;  // TF: nearest vehicle behind in that lane
};

/// Frozen picture of the subject's surroundings for one decision tick.
struct NeighborView {
  double self_velocity = 0.0;
  Neighbor current_leader;                    // CL
  AdjacentLaneView left;                      // toward higher lane index
  AdjacentLaneView right;                     // toward lane 0
  double closure_distance = kInfiniteGap;      // to the next closure in this lane, m
};

enum class Direction { left, right };

struct NecessityResult {
  bool left = false;
  bool right = false;
  bool mandatory = false;  // a closure forces the subject out of its lane
  bool any() const { return left || right; }
};

/// A direction is a candidate iff the current leader is slower than eta
/// times that direction's leader (written multiplicatively so a stopped
/// target leader never divides by zero), or the subject's own lane closes
/// within the horizon, in which case any existing neighbor qualifies.
inline NecessityResult lane_change_necessity(const NeighborView& view, const DrivingParams& p) {
  NecessityResult r;
  r.mandatory = view.closure_distance <= kClosureHorizon;
  if (view.left.exists)
    r.left = r.mandatory || view.current_leader.velocity < p.eta * view.left.leader.velocity;
  if (view.right.exists)
    r.right = r.mandatory || view.current_leader.velocity < p.eta * view.right.leader.velocity;
  return r;
}

/// Gap acceptance over the maneuver interval delta_tau, projecting every
/// vehicle at its current speed. All three clearances must survive the
/// maneuver with a speed-proportional margin:
///   v_S t  <= v_TL t + gap_TL - mu1 v_S    (target leader still ahead)
///   v_TF t <= v_S t  + gap_TF - mu2 v_TF   (target follower still behind)
///   v_S t  <= v_CL t + gap_CL - mu3 v_S    (current leader safe mid-move)
/// Infinite gaps satisfy their inequality vacuously.
inline bool lane_change_feasibility(const NeighborView& view, const DrivingParams& p,
                                    Direction d) {
  const AdjacentLaneView& adj = (d == Direction::left) ? view.left : view.right;
  if (!adj.exists) return false;
  double t = p.delta_tau;
  double vs = view.self_velocity;
  if (adj.leader.gap != kInfiniteGap) {
    if (adj.leader.gap <= 0.0) return false;
    if (vs * t > adj.leader.velocity * t + adj.leader.gap - p.mu1 * vs) return false;
  }
  if (adj.follower.gap != kInfiniteGap) {
    if (adj.follower.gap <= 0.0) return false;
    if (adj.follower.velocity * t > vs * t + adj.follower.gap - p.mu2 * adj.follower.velocity)
      return false;
  }
  if (view.current_leader.gap != kInfiniteGap) {
    if (view.current_leader.gap <= 0.0) return false;
    if (vs * t > view.current_leader.velocity * t + view.current_leader.gap - p.mu3 * vs)
      return false;
  }
  return true;
}

/// IDM coefficients with the per-call square root hoisted out; produces
/// bit-identical results to the reference formula above (same operations
/// in the same order, only the sqrt is cached).
struct IdmPrecomputed {
  double v0 = 1.0;
  double T = 0.0;
  double s0 = 0.0;
  double a_max = 0.0;
  double brake_coef = 0.0;  // 1 / (2 sqrt(a_max b_com))
  double delta = 4.0;

  static IdmPrecomputed from(const DrivingParams& p) {
    IdmPrecomputed c;
    c.v0 = p.v0;
    c.T = p.T;
    c.s0 = p.s0;
    c.a_max = p.a_max;
    c.brake_coef = 1.0 / (2.0 * std::sqrt(p.a_max * p.b_com));
    c.delta = p.delta;
    return c;
  }
};

inline double idm_acceleration(double v, double dv, double s, const IdmPrecomputed& c) {
  double a = c.a_max * (1.0 - detail::pow_delta(v / c.v0, c.delta));
  if (s != kInfiniteGap) {
    double q = std::max(c.s0, c.s0 + c.T * v + v * dv * c.brake_coef) / s;
    a -= c.a_max * q * q;
  }
  return std::max(a, -kEmergencyDeceleration);
}

/// Semi-implicit Euler step: velocity first (floored at zero — vehicles
/// never reverse), then position with the updated velocity.
struct KinematicState {
  double position = 0.0;
  double velocity = 0.0;
};

inline KinematicState integrate(KinematicState s, double accel, double dt) {
  double v = std::max(0.0, s.velocity + accel * dt);
  return {s.position + v * dt, v};
}

}  // namespace cats
