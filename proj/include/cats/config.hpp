#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cats/behavior.hpp"
#include "cats/economy.hpp"
#include "cats/network.hpp"
#include "cats/surveillance.hpp"

namespace cats {

/// Thrown for anything wrong with a scenario description; the CLI maps it
/// to exit code 2 before any simulation starts.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PopulationConfig {
  int total = 0;
  // fractions by native type, indexed like DriverType
  std::array<double, 3> fractions{0.25, 0.5, 0.25};
};

enum class SimMode { cats, baseline };

inline const char* to_string(SimMode m) { return m == SimMode::cats ? "cats" : "baseline"; }

inline SimMode mode_from_string(std::string_view s) {
  if (s == "cats") return SimMode::cats;
  if (s == "baseline") return SimMode::baseline;
  throw ConfigError("mode must be \"cats\" or \"baseline\"");
}

struct ScenarioConfig {
  SimMode mode = SimMode::cats;
  std::uint64_t seed = 1;
  int horizon_days = 30;
  double dt_s = 0.1;
  double active_window_s = 600.0;
  double vehicle_length_m = 5.0;
  NetworkSpec network;
  PopulationConfig population;
  BehaviorAnchors anchors = replication_anchors();
  EconomyConstants economy;
  ViolationTariff tariffs{TariffEntry{}};
  ViolationRates rates = ViolationRates::replication();
  DetectionPolicy detection;
  int threads = 1;

  int ticks_per_day() const {
    return static_cast<int>(std::llround(active_window_s / dt_s));
  }

  void validate() const {
    if (horizon_days < 1) throw ConfigError("horizon_days must be >= 1");
    if (!(dt_s > 0.0) || dt_s > 1.0) throw ConfigError("dt_s must be in (0, 1]");
    if (!(active_window_s >= dt_s)) throw ConfigError("active_window_s shorter than one tick");
    if (ticks_per_day() < 1) throw ConfigError("active window yields zero ticks per day");
    if (!(vehicle_length_m > 0.0)) throw ConfigError("vehicle_length_m must be positive");
    if (population.total < 1) throw ConfigError("population.total must be >= 1");
    double fsum = 0.0;
    for (double f : population.fractions) {
      if (f < 0.0) throw ConfigError("population fractions must be non-negative");
      fsum += f;
    }
    if (std::abs(fsum - 1.0) > 1e-9) throw ConfigError("population fractions must sum to 1");
    if (!anchors.valid()) throw ConfigError("behavior anchors invalid (see DrivingParams limits)");
    if (!economy.valid()) throw ConfigError("economy constants invalid (need 0 < p_min < p0, l0 > 0, delta_T >= 1)");
    if (tariffs.empty()) throw ConfigError("at least one violation tariff required");
    for (const TariffEntry& t : tariffs)
      if (t.f_res < Rational{0} || t.f_cre < Rational{0})
        throw ConfigError("tariffs must be non-negative");
    if (!rates.valid()) throw ConfigError("violation rates must lie in [0,1]");
    if (!detection.valid()) throw ConfigError("detection policy invalid");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    try {
      build_network(network);  // construction performs the network checks
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

/// The reference scenario for the experiment harness: 2000 vehicles split
/// 25/50/25 over a three-lane 20 km ring, camera coverage 30%, daily
/// violation rates 2/1/0 percent (covered) and 10/5/0 (uncovered), all
/// tariffs 2, two reporters per violation, B0 the anchor midpoint. The
/// allocation period is set to the 30-day horizon so the whole run stays
/// inside a single period.
inline ScenarioConfig replication_config() {
  ScenarioConfig c;
  c.mode = SimMode::cats;
  c.seed = 1;
  c.horizon_days = 30;
  c.dt_s = 0.1;
  c.active_window_s = 600.0;
  c.vehicle_length_m = 5.0;
  c.network.ring = RingSpec{20.0, 3, 20};
  c.network.coverage_fraction = 0.3;
  c.network.jam_density_threshold = 50.0;
  c.population.total = 2000;
  c.population.fractions = {0.25, 0.5, 0.25};
  c.anchors = replication_anchors();
  c.economy = EconomyConstants{};
  c.economy.delta_T = 30;
  c.tariffs = {TariffEntry{Rational{2}, Rational{2}}};
  c.rates = ViolationRates::replication();
  c.detection = DetectionPolicy{};
  return c;
}

}  // namespace cats
