#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qzd/config.hpp"
#include "qzd/protocol.hpp"

namespace qzd {

struct RunOptions {
  unsigned workers = 1;
};

// Column 0 is t_over_t0; phases are concatenated on one clock.
struct TimeSeries {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Observable names:
//   fidelity         overlap with the protocol target (phase-corrected frame)
//   leakage          1 - weight in the zero-eigenspace of the coupling Hamiltonian
//   norm             norm (pure) or trace (density)
//   phi1..phi7       two-atom chain kets of the |0> branch; phi1p..phi7p for |1>
//   psi1, psi1p      bridge vectors of the two branches
//                    (chain and bridge values are relative to the branch's
//                    initial weight, so a complete transfer reads 1)
//   pop:<ket label>  any basis state, e.g. pop:|R_A,R_B;vac>
std::vector<std::string> default_observables(Family family);
void check_observables(const ScenarioSpec& spec, const std::vector<std::string>& names);

TimeSeries time_series(const ScenarioSpec& spec, const ProtocolRecord& rec,
                       const std::vector<std::string>& names);

struct ScenarioResult {
  ProtocolRecord record;
  TimeSeries series;
  double leakage_max = 0.0;
  double drift = 0.0;
};

ScenarioResult simulate(const RunConfig& cfg, const RunOptions& options = {});

// Fixed 12-significant-digit scientific format.
std::string format_number(double v);
std::string format_csv(const TimeSeries& series);
std::string summary_json(const ScenarioSpec& spec, const ScenarioResult& result);
std::string protocol_json(const ScenarioSpec& spec, const ProtocolRecord& rec);

// Writes timeseries.csv, summary.json and timing.json under `out`. Returns 0
// on success and nonzero (with a message on `err`) on failure; a failed run
// still leaves a header-only CSV and a summary carrying the error.
int run_scenario(const RunConfig& cfg, const std::filesystem::path& out, const RunOptions& options,
                 std::ostream& err);

struct SweepCell {
  double kappa_over_g = 0.0;
  double gamma_over_g = 0.0;
  double fidelity = 0.0;  // NaN when the cell failed
  double raw_fidelity = 0.0;
  double drift = 0.0;
  std::string error;
};

struct SweepResult {
  std::vector<double> kappa_over_g;
  std::vector<double> gamma_over_g;
  std::vector<SweepCell> cells;  // gamma-major: cells[gi * kappa.size() + ki]
  std::vector<std::string> warnings;

  const SweepCell& at(std::size_t gi, std::size_t ki) const {
    return cells[gi * kappa_over_g.size() + ki];
  }
  double min_fidelity() const;
};

// Each cell sets kappa = (kappa/g) g and gamma = (gamma/g) g, clearing any
// per-channel overrides, and runs the scenario's protocol.
ScenarioSpec sweep_cell_spec(const ScenarioSpec& base, double kappa_over_g, double gamma_over_g);
SweepResult run_sweep(const RunConfig& cfg, const RunOptions& options = {});
// Places where fidelity rises along an ascending axis by more than `slack`.
std::vector<std::string> monotonicity_violations(const SweepResult& result, double slack = 1e-9);
std::string sweep_csv(const SweepResult& result);
std::string sweep_json(const ScenarioSpec& spec, const SweepResult& result);

// Zeno decomposition and effective model of every driven branch.
std::string zeno_json(const ScenarioSpec& spec, std::size_t dark_samples = 11);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qzd
