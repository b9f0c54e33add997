#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qzd/config.hpp"
#include "qzd/runner.hpp"

namespace fs = std::filesystem;

namespace {

unsigned default_workers() {
  if (const char* env = std::getenv("QZD_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring QZD_WORKERS=" << env << " (expected a positive integer)\n";
  }
  return 1;
}

qzd::RunConfig load(const std::string& path, const std::string& preset) {
  qzd::RunConfig cfg = qzd::load_config(path);
  if (!preset.empty()) {
    qzd::apply_preset(cfg.spec, preset);
    cfg.spec.validate();
  }
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_timing(const fs::path& out, double seconds) {
  qzd::write_file(out / "timing.json", nlohmann::ordered_json{{"wall_seconds", seconds}}.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeno-dynamics adiabatic passage simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "qzd-out", preset, family;
  unsigned workers = default_workers();
  int n = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "TOML scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", workers, "worker threads (default: $QZD_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--preset", preset, "parameter preset applied after the file (cs-experiment)");
  };
  auto* simulate = app.add_subcommand("simulate", "run the scenario; write timeseries.csv and summary.json");
  auto* sweep = app.add_subcommand("sweep", "loss sweep over [sweep] grid; write sweep.csv and sweep.json");
  auto* zeno = app.add_subcommand("zeno", "Zeno decomposition and dark states; write zeno.json");
  auto* protocol = app.add_subcommand("protocol", "run a protocol of N atoms or modes; write protocol.json");
  for (auto* sub : {simulate, sweep, zeno, protocol}) common(sub);
  protocol->add_option("--n", n, "atom count (n-atom) or mode count (high-dim)")->required()->check(CLI::Range(1, 64));
  protocol->add_option("--family", family, "two-atom, n-atom or high-dim (default: from config; n-atom when N > 2)");

  CLI11_PARSE(app, argc, argv);

  try {
    qzd::RunConfig cfg = load(config_path, preset);
    const qzd::RunOptions options{workers};
    const fs::path out(out_dir);
    fs::create_directories(out);
    const auto t0 = std::chrono::steady_clock::now();

    if (simulate->parsed()) {
      const int status = qzd::run_scenario(cfg, out, options, std::cerr);
      if (status == 0) std::cout << "wrote " << (out / "timeseries.csv").string() << " and summary.json\n";
      return status;
    }

    if (sweep->parsed()) {
      const qzd::SweepResult r = qzd::run_sweep(cfg, options);
      qzd::write_file(out / "sweep.csv", qzd::sweep_csv(r));
      qzd::write_file(out / "sweep.json", qzd::sweep_json(cfg.spec, r));
      write_timing(out, seconds_since(t0));
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "min fidelity " << qzd::format_number(r.min_fidelity()) << " over " << r.cells.size()
                << " cells\n";
      return 0;
    }

    if (zeno->parsed()) {
      qzd::write_file(out / "zeno.json", qzd::zeno_json(cfg.spec));
      std::cout << "wrote " << (out / "zeno.json").string() << "\n";
      return 0;
    }

    // protocol
    qzd::ScenarioSpec spec = cfg.spec;
    if (!family.empty()) spec.family = qzd::family_from_string(family);
    else if (spec.family == qzd::Family::TwoAtom && n != 2) spec.family = qzd::Family::NAtom;
    spec.n = n;
    if (spec.family == qzd::Family::TwoAtom && n != 2)
      throw qzd::ConfigError("--n: the two-atom family has N = 2");
    if (spec.family != qzd::Family::NAtom) spec.switch_schedule.clear();
    qzd::ProtocolOptions popt;
    popt.workers = workers;
    const qzd::ProtocolRecord rec = qzd::run_protocol(spec, popt);
    qzd::write_file(out / "protocol.json", qzd::protocol_json(spec, rec));
    write_timing(out, seconds_since(t0));
    for (const auto& w : rec.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& p : rec.phases)
      std::cout << p.name << ": fidelity " << qzd::format_number(p.fidelity) << ", cumulative "
                << qzd::format_number(p.cumulative_fidelity) << "\n";
    std::cout << "final fidelity " << qzd::format_number(rec.fidelity) << " (raw "
              << qzd::format_number(rec.raw_fidelity) << ")\n";
    return 0;
  } catch (const qzd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
