#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cats/behavior.hpp"
#include "cats/config.hpp"
#include "cats/csv.hpp"
#include "cats/economy.hpp"
#include "cats/engine.hpp"
#include "cats/parallel.hpp"

namespace cats {

// ---------------------------------------------------------------------------
// Closed-form curves (no simulation involved)
// ---------------------------------------------------------------------------

/// Hard cap on curve length so a pathological tariff (zero fine) cannot
/// loop forever; every sane tariff bans long before this.
inline constexpr int kCurveMaxViolations = 64;

/// The behavior intensity after each successive violation: start from a
/// fresh ledger and apply the class-0 fine (sunk, no reporters needed)
/// until the driver is banned. index = number of violations; the final
/// entry is the banning violation.
inline std::vector<double> lambda_by_violations(const EconomyConstants& c,
                                                const ViolationTariff& tariff) {
  std::vector<double> lam;
  Ledger l{c.p0, c.l0};
  for (int n = 0; n <= kCurveMaxViolations; ++n) {
    lam.push_back(lambda_from_sigma(sigma(l, c)));
    if (l.banned) break;
    apply_fine_sunk(0, l, 0, tariff, c);
  }
  return lam;
}

inline csv::Table fig4_table() {
  EconomyConstants c{};
  ViolationTariff tariff{TariffEntry{}};
  csv::Table t;
  t.header = {"n_violations", "lambda"};
  std::vector<double> lam = lambda_by_violations(c, tariff);
  for (std::size_t n = 0; n < lam.size(); ++n)
    t.rows.push_back({csv::format_int(static_cast<std::int64_t>(n)), csv::format_double(lam[n])});
  return t;
}

/// Shared layout for the per-type interpolation curves: one row per
/// violation count, one column per native type.
template <typename Project>
csv::Table type_curve_table(Project&& value_of_params) {
  EconomyConstants c{};
  ViolationTariff tariff{TariffEntry{}};
  BehaviorAnchors anchors = replication_anchors();
  csv::Table t;
  t.header = {"n_violations", "conservative", "normal", "aggressive"};
  std::vector<double> lam = lambda_by_violations(c, tariff);
  for (std::size_t n = 0; n < lam.size(); ++n) {
    std::vector<std::string> row;
    row.push_back(csv::format_int(static_cast<std::int64_t>(n)));
    for (DriverType type : {DriverType::conservative, DriverType::normal, DriverType::aggressive})
      row.push_back(csv::format_double(value_of_params(effective_params(anchors, type, lam[n]))));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Desired velocity vs. violation count, km/h.
inline csv::Table fig5_table() {
  return type_curve_table([](const DrivingParams& p) { return p.v0 * 3.6; });
}

/// Lane-changing duration vs. violation count, seconds.
inline csv::Table fig6_table() {
  return type_curve_table([](const DrivingParams& p) { return p.delta_tau; });
}

// ---------------------------------------------------------------------------
// Run artifacts
// ---------------------------------------------------------------------------

inline csv::Table metrics_table(const std::vector<MetricsSnapshot>& metrics) {
  csv::Table t;
  t.header = {"day",      "accident_rate", "violations",  "n_conservative", "n_normal",
              "n_aggressive", "n_banned",  "mean_lambda", "total_resources"};
  for (const MetricsSnapshot& m : metrics) {
    t.rows.push_back({csv::format_int(m.day), csv::format_double(m.accident_rate),
                      csv::format_int(m.violations), csv::format_int(m.type_counts[0]),
                      csv::format_int(m.type_counts[1]), csv::format_int(m.type_counts[2]),
                      csv::format_int(m.n_banned), csv::format_double(m.mean_lambda),
                      m.total_resources.to_string()});
  }
  return t;
}

inline csv::Table events_table(const std::vector<EventRecord>& events) {
  csv::Table t;
  t.header = {"tick",     "day",       "kind",      "vehicle", "other", "corridor",
              "lane",     "position",  "res_delta", "credit_delta",     "detail"};
  for (const EventRecord& e : events) {
    t.rows.push_back({csv::format_int(e.tick), csv::format_int(e.day), to_string(e.kind),
                      csv::format_int(e.vehicle), csv::format_int(e.other),
                      csv::format_int(e.corridor), csv::format_int(e.lane),
                      csv::format_double(e.position), e.res_delta.to_string(),
                      e.credit_delta.to_string(), e.detail});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Comparison grid (deterrence and coverage experiments)
// ---------------------------------------------------------------------------

struct CompareCell {
  SimMode mode = SimMode::cats;
  double coverage = 0.0;
};

/// The full {mode} x {coverage} grid in emission order.
inline std::array<CompareCell, 6> compare_grid() {
  return {{{SimMode::cats, 0.0},
           {SimMode::cats, 0.3},
           {SimMode::cats, 1.0},
           {SimMode::baseline, 0.0},
           {SimMode::baseline, 0.3},
           {SimMode::baseline, 1.0}}};
}

inline ScenarioConfig cell_config(SimMode mode, double coverage, std::uint64_t seed,
                                  int threads = 1) {
  ScenarioConfig c = replication_config();
  c.mode = mode;
  c.network.coverage_fraction = coverage;
  c.seed = seed;
  c.threads = threads;
  return c;
}

/// Per-day accident rate for one cell, averaged across seeds.
inline std::vector<double> cell_accident_series(SimMode mode, double coverage,
                                                std::span<const std::uint64_t> seeds,
                                                int threads = 1) {
  std::vector<double> mean;
  for (std::uint64_t seed : seeds) {
    Simulation sim(cell_config(mode, coverage, seed, threads));
    sim.run();
    const std::vector<MetricsSnapshot>& m = sim.metrics();
    if (mean.empty()) mean.assign(m.size(), 0.0);
    for (std::size_t d = 0; d < m.size(); ++d) mean[d] += m[d].accident_rate;
  }
  if (!seeds.empty())
    for (double& v : mean) v /= static_cast<double>(seeds.size());
  return mean;
}

/// Runs the whole grid and emits one row per (cell, day). Cells are
/// independent deterministic simulations, so running them on a pool
/// ("parallel_cells") changes timing only, never content.
inline csv::Table compare_table(std::span<const std::uint64_t> seeds, int parallel_cells = 1) {
  std::array<CompareCell, 6> grid = compare_grid();
  std::array<std::vector<double>, 6> series;
  ThreadPool pool(parallel_cells);
  pool.run(static_cast<int>(grid.size()), [&](int i) {
    auto ui = static_cast<std::size_t>(i);
    series[ui] = cell_accident_series(grid[ui].mode, grid[ui].coverage, seeds);
  });
  csv::Table t;
  t.header = {"mode", "coverage", "day", "accident_rate"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t d = 0; d < series[i].size(); ++d) {
      t.rows.push_back({to_string(grid[i].mode), csv::format_double(grid[i].coverage),
                        csv::format_int(static_cast<std::int64_t>(d)),
                        csv::format_double(series[i][d])});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Scaling benchmark
// ---------------------------------------------------------------------------

struct BenchResult {
  int n_vehicles = 0;
  int threads = 1;
  double seconds = 0.0;
  double ticks_per_sec_per_vehicle = 0.0;  // ticks advanced per wall second
};

inline ScenarioConfig bench_config(int n_vehicles, int ticks, int threads = 1) {
  ScenarioConfig c = replication_config();
  c.population.total = n_vehicles;
  c.horizon_days = 1;
  c.active_window_s = ticks * c.dt_s;
  c.seed = 1;
  c.threads = threads;
  return c;
}

inline BenchResult bench_run(int n_vehicles, int ticks, int threads = 1) {
  auto start = std::chrono::steady_clock::now();
  if (ticks > 0) {
    Simulation sim(bench_config(n_vehicles, ticks, threads));
    sim.run();
  }
  auto stop = std::chrono::steady_clock::now();
  double seconds = std::chrono::duration<double>(stop - start).count();
  BenchResult r;
  r.n_vehicles = n_vehicles;
  r.threads = threads;
  r.seconds = seconds;
  r.ticks_per_sec_per_vehicle = ticks > 0 && seconds > 0.0 ? ticks / seconds : 0.0;
  return r;
}

inline csv::Table bench_table(std::span<const int> counts, int ticks, int parallel_threads) {
  csv::Table t;
  t.header = {"n_vehicles", "mode", "threads", "seconds", "ticks_per_sec_per_vehicle"};
  auto emit = [&](const BenchResult& r, const char* mode) {
    t.rows.push_back({csv::format_int(r.n_vehicles), mode, csv::format_int(r.threads),
                      csv::format_double(r.seconds),
                      csv::format_double(r.ticks_per_sec_per_vehicle)});
  };
  for (int n : counts) {
    emit(bench_run(n, ticks, 1), "single");
    emit(bench_run(n, ticks, parallel_threads), "parallel");
  }
  return t;
}

}  // namespace cats
