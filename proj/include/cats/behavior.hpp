#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cats/dynamics.hpp"
#include "cats/economy.hpp"
#include "cats/rational.hpp"

namespace cats {

enum class DriverType { conservative = 0, normal = 1, aggressive = 2 };

inline const char* to_string(DriverType t) {
  switch (t) {
    case DriverType::conservative: return "conservative";
    case DriverType::normal: return "normal";
    case DriverType::aggressive: return "aggressive";
  }
  return "?";
}

/// Full-intensity parameter tuples for the three native driving styles.
struct BehaviorAnchors {
  DrivingParams A0;  // conservative
  DrivingParams B0;  // normal
  DrivingParams C0;  // aggressive

  const DrivingParams& of(DriverType t) const {
    switch (t) {
      case DriverType::conservative: return A0;
      case DriverType::normal: return B0;
      case DriverType::aggressive: return C0;
    }
    throw std::invalid_argument("unknown driver type");
  }

  bool valid() const { return A0.valid() && B0.valid() && C0.valid(); }
};

inline DrivingParams midpoint(const DrivingParams& a, const DrivingParams& c) {
  DrivingParams b;
  b.v0 = 0.5 * (a.v0 + c.v0);
  b.T = 0.5 * (a.T + c.T);
  b.a_max = 0.5 * (a.a_max + c.a_max);
  b.b_com = 0.5 * (a.b_com + c.b_com);
  b.delta = 0.5 * (a.delta + c.delta);
  b.s0 = 0.5 * (a.s0 + c.s0);
  b.eta = 0.5 * (a.eta + c.eta);
  b.mu1 = 0.5 * (a.mu1 + c.mu1);
  b.mu2 = 0.5 * (a.mu2 + c.mu2);
  b.mu3 = 0.5 * (a.mu3 + c.mu3);
  b.delta_tau = 0.5 * (a.delta_tau + c.delta_tau);
  return b;
}

/// Default anchor table. v0 (50/40/30 km/h) and delta_tau (3/5/6 s) are
/// fixed by the replication scenario; the remaining components are chosen
/// so that aggressiveness means shorter headways, harder acceleration and
/// tighter accepted gaps, with mu3 = 0.7 * mu1 throughout. B0 is the
/// componentwise midpoint except delta_tau, whose stated middle value (5 s)
/// is not the midpoint of 3 s and 6 s.
inline BehaviorAnchors replication_anchors() {
  BehaviorAnchors an;
  an.A0 = DrivingParams{50.0 / 3.6, 1.8, 1.2, 1.5, 4.0, 2.5, 0.72, 1.6, 1.2, 0.7 * 1.6, 3.0};
  an.C0 = DrivingParams{30.0 / 3.6, 1.1, 2.0, 2.5, 4.0, 1.5, 0.90, 1.0, 0.8, 0.7 * 1.0, 6.0};
  an.B0 = midpoint(an.A0, an.C0);
  an.B0.delta_tau = 5.0;
  return an;
}

/// Normalized scarcity signal: the binding constraint between per-period
/// credit and accumulated resources, each normalized to [0,1]. Exact
/// rational arithmetic keeps the min and the clamp free of rounding.
inline Rational sigma_exact(const Ledger& l, const EconomyConstants& c) {
  Rational credit_term = l.credit / c.l0;
  Rational resource_term = (l.resources - c.p_floor_norm) / (c.p0 - c.p_floor_norm);
  Rational s = std::min(credit_term, resource_term);
  if (s < Rational{0}) return Rational{0};
  if (s > Rational{1}) return Rational{1};
  return s;
}

inline double sigma(const Ledger& l, const EconomyConstants& c) {
  return sigma_exact(l, c).to_double();
}

/// Weber-Fechner intensity: lambda = ln(1 + sigma) / ln 2, mapping the
/// scarcity signal onto [0,1] with diminishing sensitivity.
inline double lambda_from_sigma(double sigma_value) {
  return std::log1p(sigma_value) / std::numbers::ln2;
}

/// Componentwise affine interpolation between the conservative anchor and
/// the native anchor: native behavior at lam = 1, fully conservative at
/// lam = 0. Conservative natives are constant by construction.
inline DrivingParams effective_params(const BehaviorAnchors& anchors, DriverType native,
                                      double lam) {
  if (native == DriverType::conservative) return anchors.A0;
  const DrivingParams& n = anchors.of(native);
  const DrivingParams& a = anchors.A0;
  DrivingParams e;
  e.v0 = std::lerp(a.v0, n.v0, lam);
  e.T = std::lerp(a.T, n.T, lam);
  e.a_max = std::lerp(a.a_max, n.a_max, lam);
  e.b_com = std::lerp(a.b_com, n.b_com, lam);
  e.delta = std::lerp(a.delta, n.delta, lam);
  e.s0 = std::lerp(a.s0, n.s0, lam);
  e.eta = std::lerp(a.eta, n.eta, lam);
  e.mu1 = std::lerp(a.mu1, n.mu1, lam);
  e.mu2 = std::lerp(a.mu2, n.mu2, lam);
  e.mu3 = std::lerp(a.mu3, n.mu3, lam);
  e.delta_tau = std::lerp(a.delta_tau, n.delta_tau, lam);
  return e;
}

/// Discretize lambda for type counting: high intensity keeps the native
/// type, the middle band steps one notch toward conservative, the lowest
/// band is fully conservative.
inline DriverType classify(DriverType native, double lam) {
  if (native == DriverType::conservative) return DriverType::conservative;
  if (lam > 2.0 / 3.0) return native;
  if (lam > 1.0 / 3.0)
    return native == DriverType::aggressive ? DriverType::normal : DriverType::conservative;
  return DriverType::conservative;
}

/// Per-vehicle behavior cache, recomputed on every ledger event (ledgers
/// are constant between events, so this is exact and cheap).
struct BehaviorState {
  DriverType native = DriverType::conservative;
  double lambda = 1.0;
  DrivingParams effective;
  DriverType effective_type = DriverType::conservative;

  void recompute(const Ledger& ledger, const EconomyConstants& c,
                 const BehaviorAnchors& anchors) {
    lambda = lambda_from_sigma(sigma(ledger, c));
    effective = effective_params(anchors, native, lambda);
    effective_type = classify(native, lambda);
  }

  /// Baseline mode: no modulation, everyone drives their native style.
  void pin_native(const BehaviorAnchors& anchors) {
    lambda = 1.0;
    effective = anchors.of(native);
    effective_type = native;
  }
};

}  // namespace cats
