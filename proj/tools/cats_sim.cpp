// cats-sim: experiment harness for the CATS traffic microsimulator.
//
//   cats-sim run      --preset replication --set population.total=200 --out out/
//   cats-sim curves   --figure fig4 --out out/ [--gnuplot]
//   cats-sim compare  --seeds 1,2,3 --out out/ [--parallel]
//   cats-sim bench    --counts 1000,2000,4000 --ticks 6000 --out out/
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.
// CATS_SIM_THREADS caps every worker pool the process creates.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cats/config_json.hpp"
#include "cats/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int thread_cap() {
  const char* env = std::getenv("CATS_SIM_THREADS");
  if (env == nullptr || *env == '\0') return std::numeric_limits<int>::max();
  int v = std::atoi(env);
  return v < 1 ? 1 : v;
}

int capped_threads(int requested) { return std::min(std::max(requested, 1), thread_cap()); }

int default_parallelism() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  return capped_threads(hw > 0 ? hw : 1);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cats::ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Space-separated numeric layout with a commented header, the shape
/// gnuplot's `plot "file" using 1:2` expects.
std::string emit_gnuplot(const cats::csv::Table& t) {
  std::string out = "#";
  for (const std::string& h : t.header) {
    out += ' ';
    out += h;
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ' ';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct RunOptions {
  std::string preset_name = "replication";
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int threads = 0;  // 0 = take from config
};

cats::ScenarioConfig resolve_config(const RunOptions& opt) {
  cats::ScenarioConfig base = cats::preset(opt.preset_name);
  if (!opt.config_path.empty()) {
    cats::Json filedoc = cats::Json::parse(read_text_file(opt.config_path));
    base = cats::config_from_json(filedoc, std::move(base));
  }
  cats::Json doc = cats::to_json(base);
  for (const std::string& s : opt.overrides) cats::apply_set_override(doc, s);
  cats::ScenarioConfig cfg = cats::config_from_json(doc, std::move(base));
  if (opt.threads > 0) cfg.threads = opt.threads;
  cfg.threads = capped_threads(cfg.threads);
  cfg.validate();
  return cfg;
}

int cmd_run(const RunOptions& opt) {
  // Validate fully before touching the output directory.
  cats::ScenarioConfig cfg = resolve_config(opt);
  std::filesystem::create_directories(opt.out_dir);

  auto start = std::chrono::steady_clock::now();
  cats::Simulation sim(cfg);
  sim.run();
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::path out(opt.out_dir);
  cats::csv::write_file((out / "metrics.csv").string(), cats::metrics_table(sim.metrics()));
  cats::csv::write_file((out / "events.csv").string(), cats::events_table(sim.events()));

  const cats::MetricsSnapshot& last = sim.metrics().back();
  int accidents = 0;
  int violations = 0;
  for (const cats::MetricsSnapshot& m : sim.metrics()) {
    accidents += m.accidents;
    violations += m.violations;
  }
  std::cout << "wrote " << (out / "metrics.csv").string() << " (" << sim.metrics().size()
            << " rows), " << (out / "events.csv").string() << " (" << sim.events().size()
            << " rows)\n";
  std::cout << "final day " << last.day << ": conservative=" << last.type_counts[0]
            << " normal=" << last.type_counts[1] << " aggressive=" << last.type_counts[2]
            << " banned=" << last.n_banned << "\n";
  std::cout << "totals: accidents=" << accidents << " violations=" << violations
            << "; wall=" << wall << "s threads=" << cfg.threads << "\n";
  return kExitOk;
}

int cmd_curves(const std::string& figure, const std::string& out_dir, bool gnuplot) {
  cats::csv::Table t;
  if (figure == "fig4")
    t = cats::fig4_table();
  else if (figure == "fig5")
    t = cats::fig5_table();
  else if (figure == "fig6")
    t = cats::fig6_table();
  else
    throw cats::ConfigError("unknown figure: " + figure + " (expected fig4, fig5, or fig6)");

  std::filesystem::create_directories(out_dir);
  std::filesystem::path out(out_dir);
  cats::csv::write_file((out / (figure + ".csv")).string(), t);
  std::cout << "wrote " << (out / (figure + ".csv")).string() << " (" << t.rows.size()
            << " rows)\n";
  if (gnuplot) {
    write_text(out / (figure + ".dat"), emit_gnuplot(t));
    std::cout << "wrote " << (out / (figure + ".dat")).string() << "\n";
  }
  return kExitOk;
}

int cmd_compare(std::vector<std::uint64_t> seeds, const std::string& out_dir, bool parallel) {
  if (seeds.size() < 3)
    throw cats::ConfigError("compare needs at least 3 seeds for trend statistics");
  std::filesystem::create_directories(out_dir);

  int pool = parallel ? default_parallelism() : 1;
  auto start = std::chrono::steady_clock::now();
  cats::csv::Table t = cats::compare_table(seeds, pool);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::path out(out_dir);
  cats::csv::write_file((out / "compare.csv").string(), t);
  std::cout << "wrote " << (out / "compare.csv").string() << " (" << t.rows.size() << " rows, "
            << seeds.size() << " seeds per cell); wall=" << wall << "s\n";
  return kExitOk;
}

int cmd_bench(std::vector<int> counts, int ticks, const std::string& out_dir) {
  if (counts.empty()) throw cats::ConfigError("bench needs at least one vehicle count");
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] <= counts[i - 1])
      throw cats::ConfigError("bench vehicle counts must be strictly ascending");
  if (ticks < 0) throw cats::ConfigError("bench tick count must be >= 0");
  std::filesystem::create_directories(out_dir);

  cats::csv::Table t = cats::bench_table(counts, ticks, default_parallelism());
  std::filesystem::path out(out_dir);
  cats::csv::write_file((out / "bench.csv").string(), t);
  for (const auto& row : t.rows)
    std::cout << row[0] << " vehicles, " << row[1] << " (" << row[2] << " threads): " << row[3]
              << "s, " << row[4] << " ticks/sec/vehicle\n";
  std::cout << "wrote " << (out / "bench.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CATS traffic microsimulation experiment harness"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run one scenario and write metrics/events CSVs");
  run->add_option("--preset", run_opt.preset_name,
                  "Starting preset: replication, baseline, or default")
      ->capture_default_str();
  run->add_option("--config", run_opt.config_path, "JSON config file overlaid on the preset");
  run->add_option("--set", run_opt.overrides, "Field override, path.to.field=value (repeatable)");
  run->add_option("--out", run_opt.out_dir, "Output directory")->required();
  run->add_option("--threads", run_opt.threads, "Worker threads (0 = from config)");

  std::string figure = "fig4";
  std::string curves_out;
  bool gnuplot = false;
  CLI::App* curves = app.add_subcommand("curves", "Emit closed-form behavior curves");
  curves->add_option("--figure", figure, "fig4 (lambda), fig5 (v0), or fig6 (delta_tau)")
      ->capture_default_str();
  curves->add_option("--out", curves_out, "Output directory")->required();
  curves->add_flag("--gnuplot", gnuplot, "Also write a space-separated .dat layout");

  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string compare_out;
  bool parallel = false;
  CLI::App* compare = app.add_subcommand("compare", "Mode x coverage accident-rate grid");
  compare->add_option("--seeds", seeds, "Seeds averaged per cell (>= 3)")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--out", compare_out, "Output directory")->required();
  compare->add_flag("--parallel", parallel, "Run grid cells on a worker pool");

  std::vector<int> counts = {1000, 2000, 4000};
  int ticks = 6000;
  std::string bench_out;
  CLI::App* bench = app.add_subcommand("bench", "Wall-clock scaling measurement");
  bench->add_option("--counts", counts, "Ascending vehicle counts")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--ticks", ticks, "Ticks simulated per configuration")->capture_default_str();
  bench->add_option("--out", bench_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (curves->parsed()) return cmd_curves(figure, curves_out, gnuplot);
    if (compare->parsed()) return cmd_compare(seeds, compare_out, parallel);
    if (bench->parsed()) return cmd_bench(counts, ticks, bench_out);
    std::cerr << "no subcommand given\n";
    return kExitConfig;
  } catch (const cats::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cats::Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
