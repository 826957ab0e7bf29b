// rachsim command-line front end: run, sweep, validate, dump-layout.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "rachsim/rachsim.hpp"

namespace fs = std::filesystem;
using namespace rachsim;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kValidationFailed = 1;
constexpr int kConfigError = 2;
constexpr int kSweepError = 3;
constexpr int kIoError = 4;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("RACHSIM_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "rachsim-out";
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(std::string(detail::trim(s.substr(0, eq))), std::string(detail::trim(s.substr(eq + 1))));
  }
  return out;
}

Scenario load(const std::string& path, const std::vector<std::string>& sets) {
  Scenario sc = path.empty() ? Scenario{} : load_scenario_file(path);
  return with_settings(sc, parse_overrides(sets));
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rachsim - system-level RACH simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  unsigned threads = 0;

  auto* run_cmd = app.add_subcommand("run", "simulate one scenario and write report, CDF and trace CSVs");
  run_cmd->add_option("--scenario", scenario_path, "scenario file (defaults when omitted)");
  run_cmd->add_option("--seed", seed, "override the scenario seed");
  run_cmd->add_option("--out", out_dir, "output directory (default $RACHSIM_OUT_DIR or ./rachsim-out)");
  run_cmd->add_option("--set", sets, "key=value override, repeatable")
      ->allow_extra_args(false);
  run_cmd->add_flag("--trace", trace, "also write the per-event trace");

  std::vector<std::string> sweep_tokens;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter/seed grid; one row per cell and seed plus pooled rows");
  sweep_cmd->add_option("--scenario", scenario_path, "base scenario file");
  sweep_cmd->add_option("--out", out_dir, "output directory");
  sweep_cmd->add_option("--set", sets, "key=value override of the base, repeatable")
      ->allow_extra_args(false);
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  sweep_cmd->add_option("grid", sweep_tokens, "key=v1,v2,... and seeds=a..b")->required();

  std::string table;
  std::uint64_t n_seeds = 10;
  auto* validate_cmd = app.add_subcommand("validate", "run the reference scenarios and check every expected KPI");
  validate_cmd->add_option("--table", table, "only one reference table (II..VII, F6..F9)");
  validate_cmd->add_option("--seeds", n_seeds, "seeds pooled per scenario")->check(CLI::PositiveNumber);
  validate_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* layout_cmd = app.add_subcommand("dump-layout", "write device and cell positions with path loss");
  layout_cmd->add_option("--scenario", scenario_path, "scenario file");
  layout_cmd->add_option("--seed", seed, "override the scenario seed");
  layout_cmd->add_option("--out", out_dir, "output directory");
  layout_cmd->add_option("--set", sets, "key=value override, repeatable")
      ->allow_extra_args(false);

  CLI11_PARSE(app, argc, argv);
  if (out_dir.empty()) out_dir = default_out_dir();

  try {
    if (run_cmd->parsed()) {
      Scenario sc = load(scenario_path, sets);
      if (seed) sc.seed = *seed;
      EngineHooks hooks;
      hooks.record_trace = trace;
      const SimulationResult res = run(sc, hooks);
      const KpiPool pool = pool_from_run(sc, res);
      const KpiReport report = make_report(pool, std::to_string(sc.seed));
      const fs::path dir = prepare_dir(out_dir);
      write_file(dir / "report.csv", [&](std::ostream& os) { write_report_csv(os, {report}); });
      const std::vector<Tick> delays = all_delays(pool);
      write_file(dir / "cdf.csv", [&](std::ostream& os) {
        write_cdf_csv(os, delays.empty() ? std::vector<CdfPoint>{} : cdf_of_sorted(delays).points);
      });
      if (trace) write_file(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, res.trace); });
      print_report(std::cout, report);
      std::cout << "wrote " << (dir / "report.csv").string() << '\n';
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const Scenario base = load(scenario_path, sets);
      const SweepSpec spec = parse_sweep(sweep_tokens, base.seed);
      const auto rows = run_sweep(base, spec, resolve_threads(threads));
      const fs::path dir = prepare_dir(out_dir);
      write_file(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
      for (const auto& r : rows) {
        if (r.report.seed_label != "pooled") continue;
        std::cout << (r.params.empty() ? std::string("(base)") : r.params) << std::fixed << std::setprecision(3)
                  << ": collision ";
        if (r.report.collision_probability) std::cout << *r.report.collision_probability * 100.0 << " %";
        else std::cout << "n/a";
        std::cout << ", mean delay ";
        if (r.report.mean_delay_ms) std::cout << *r.report.mean_delay_ms << " ms\n";
        else std::cout << "n/a\n";
      }
      std::cout << "wrote " << rows.size() << " rows to " << (dir / "sweep.csv").string() << '\n';
      return kOk;
    }

    if (validate_cmd->parsed()) {
      ValidationOptions opt;
      opt.n_seeds = n_seeds;
      opt.threads = resolve_threads(threads);
      if (!table.empty()) {
        const auto ids = reference_table_ids();
        if (std::find(ids.begin(), ids.end(), table) == ids.end())
          throw ConfigError("unknown reference table '" + table + "'");
        opt.table = table;
      }
      const auto results = run_validation(opt);
      print_validation(std::cout, results);
      std::size_t failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::cout << (results.size() - failed) << "/" << results.size() << " reference values within tolerance\n";
      return failed == 0 ? kOk : kValidationFailed;
    }

    if (layout_cmd->parsed()) {
      Scenario sc = load(scenario_path, sets);
      if (seed) sc.seed = *seed;
      const CellLayout layout = build_layout(sc.topology, RandomSource(sc.seed));
      const auto devices = build_devices(sc, layout);
      const fs::path dir = prepare_dir(out_dir);
      write_file(dir / "layout.csv", [&](std::ostream& os) { write_layout_csv(os, layout, devices, sc.topology); });
      std::cout << "wrote " << devices.size() << " devices to " << (dir / "layout.csv").string() << '\n';
      return kOk;
    }
  } catch (const SweepError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSweepError;
  } catch (const ConfigError& e) {
    std::cerr << "error: configuration: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}
