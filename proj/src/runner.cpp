#include "qzd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "qzd/metrics.hpp"
#include "qzd/zeno.hpp"

namespace qzd {

using nlohmann::ordered_json;

namespace {

bool is_two_atom_name(const std::string& name) {
  if (name == "psi1" || name == "psi1p") return true;
  if (name.size() < 4 || name.compare(0, 3, "phi") != 0) return false;
  const char k = name[3];
  if (k < '1' || k > '7') return false;
  return name.size() == 4 || (name.size() == 5 && name[4] == 'p');
}

// Chain kets and bridge vector of one two-atom branch ("0" or "1"), from the
// closure of its seed under the coupling and drive terms.
struct Branch {
  std::vector<BasisState> chain;
  StateVector bridge;
};

Branch two_atom_branch(const ScenarioSpec& spec, const std::shared_ptr<const SystemLayout>& layout,
                       const std::string& level) {
  const ModelStructure model = build_structure(spec, layout, 2);
  const BasisState seed[] = {layout->make_state({level, "g"})};
  const StateSpace space = closure_space(model, seed, false);
  if (space.dimension() != 7)
    throw Error("branch " + level + " spans " + std::to_string(space.dimension()) + " states, expected 7");
  const auto eff = effective_hamiltonian(zeno_decompose(coupling_hamiltonian(model, space)), space,
                                         hamiltonian_operator(model, space));
  if (eff.bridge_count() != 1) throw Error("branch " + level + " has no single bridge vector");
  return {space.basis(), eff.basis.col(static_cast<Eigen::Index>(eff.endpoint_count))};
}

DenseOperator on_space(const StateSpace& space, const std::vector<BasisState>& kets,
                       const StateVector& amplitudes) {
  DenseOperator v = DenseOperator::Zero(static_cast<Eigen::Index>(space.dimension()), 1);
  for (std::size_t i = 0; i < kets.size(); ++i)
    if (auto j = space.index_of(kets[i]))
      v(static_cast<Eigen::Index>(*j), 0) = amplitudes(static_cast<Eigen::Index>(i));
  return v;
}

double sample_norm(const Trajectory& traj, std::size_t s) {
  return traj.is_density() ? traj.densities[s].trace().real() : traj.states[s].norm();
}

double sample_expectation(const Trajectory& traj, std::size_t s, const Observable& obs) {
  if (obs.vectors.cols() == 0) return 0.0;
  return traj.is_density() ? expectation(obs, traj.densities[s]) : expectation(obs, traj.states[s]);
}

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json zeno_report_json(const ZenoConditionReport& z) {
  return {{"max_a_over_g", z.max_a_over_g}, {"max_b_over_g", z.max_b_over_g},
          {"max_over_eta", z.max_over_eta}, {"threshold", z.threshold},
          {"pass", z.pass}};
}

ordered_json record_json(const ProtocolRecord& rec) {
  ordered_json phases = ordered_json::array();
  for (const auto& p : rec.phases) {
    ordered_json j = {{"name", p.name},
                      {"passage", p.passage},
                      {"partner", p.partner},
                      {"time_offset", p.time_offset},
                      {"dimension", p.space ? p.space->dimension() : 0},
                      {"fidelity", number_or_null(p.fidelity)},
                      {"cumulative_fidelity", number_or_null(p.cumulative_fidelity)}};
    if (p.passage) {
      j["step"] = p.trajectory.step;
      j["steps"] = p.trajectory.steps;
      j["samples"] = p.trajectory.size();
      j["max_drift"] = p.trajectory.max_drift;
    }
    phases.push_back(std::move(j));
  }
  return {{"family", to_string(rec.family)},
          {"n", rec.n},
          {"passages", rec.passages},
          {"fidelity", rec.fidelity},
          {"raw_fidelity", rec.raw_fidelity},
          {"final_dimension", rec.final.dimension()},
          {"final_norm_or_trace", rec.final.norm_or_trace()},
          {"density", rec.final.density},
          {"phases", phases},
          {"zeno", zeno_report_json(rec.zeno)},
          {"warnings", rec.warnings}};
}

ordered_json spec_json(const ScenarioSpec& spec) { return ordered_json::parse(spec_to_json(spec)); }

double max_drift(const ProtocolRecord& rec) {
  double d = 0.0;
  for (const auto& p : rec.phases) d = std::max(d, p.trajectory.max_drift);
  return d;
}

void check_window(const ScenarioSpec& spec) {
  const Window w = spec.window();
  if (!(w.length() > 0.0))
    throw ConfigError("zero-duration propagation window [" + format_number(w.start) + ", " +
                      format_number(w.end) + "]");
}

}  // namespace

std::vector<std::string> default_observables(Family family) {
  if (family == Family::TwoAtom)
    return {"phi1", "phi7", "psi1", "phi1p", "phi7p", "psi1p", "fidelity", "leakage"};
  return {"fidelity", "leakage"};
}

void check_observables(const ScenarioSpec& spec, const std::vector<std::string>& names) {
  const auto layout = make_layout(spec);
  for (const auto& name : names) {
    if (name == "fidelity" || name == "leakage" || name == "norm") continue;
    if (is_two_atom_name(name)) {
      if (spec.family != Family::TwoAtom)
        throw ConfigError("[output].observables: " + name + " is defined for the two-atom family only");
      continue;
    }
    if (name.rfind("pop:", 0) == 0) {
      if (name.size() == 4) throw ConfigError("[output].observables: empty ket label in " + name);
      continue;
    }
    throw ConfigError("[output].observables: unknown observable '" + name + "'");
  }
}

TimeSeries time_series(const ScenarioSpec& spec, const ProtocolRecord& rec,
                       const std::vector<std::string>& names) {
  check_observables(spec, names);
  TimeSeries out;
  out.columns.push_back("t_over_t0");
  out.columns.insert(out.columns.end(), names.begin(), names.end());
  if (rec.phases.empty()) return out;

  const auto layout = rec.final.space->layout_ptr();
  std::vector<Branch> branches;
  if (spec.family == Family::TwoAtom)
    for (const char* level : {"0", "1"}) branches.push_back(two_atom_branch(spec, layout, level));

  // Target in the corrected frame: flip the target instead of every sample.
  StateVector target = rec.target;
  if (spec.phase_correction && rec.passages % 2 == 1) {
    const auto g = layout->level_index(0, "g");
    for (std::size_t i = 0; i < rec.final.space->dimension(); ++i)
      if ((*rec.final.space)[i].levels[0] == g) target(static_cast<Eigen::Index>(i)) *= -1.0;
  }

  for (const auto& phase : rec.phases) {
    if (!phase.passage || phase.trajectory.size() == 0) continue;
    const StateSpace& space = *phase.space;
    const Trajectory& traj = phase.trajectory;
    std::vector<Observable> obs(names.size());
    std::vector<bool> is_norm(names.size(), false);
    std::vector<double> scale(names.size(), 1.0);
    for (std::size_t c = 0; c < names.size(); ++c) {
      const std::string& name = names[c];
      obs[c].name = name;
      if (name == "norm") {
        is_norm[c] = true;
      } else if (name == "fidelity") {
        obs[c].vectors = on_space(space, rec.final.space->basis(), target);
      } else if (name == "leakage") {
        const ModelStructure model = build_structure(spec, space.layout_ptr(), phase.partner);
        const auto dec = zeno_decompose(coupling_hamiltonian(model, space));
        const ZenoCluster* zero = dec.zero_cluster();
        obs[c].vectors = zero ? zero->basis : DenseOperator(static_cast<Eigen::Index>(space.dimension()), 0);
      } else if (name.rfind("pop:", 0) == 0) {
        const std::string label = name.substr(4);
        obs[c].vectors = DenseOperator::Zero(static_cast<Eigen::Index>(space.dimension()), 1);
        if (auto i = space.index_of_label(label)) obs[c].vectors(static_cast<Eigen::Index>(*i), 0) = 1.0;
      } else {
        const Branch& b = branches[name.back() == 'p' ? 1 : 0];
        // Relative to the branch's initial weight, so a full transfer reads 1.
        const Observable seed{"seed", on_space(space, {b.chain[0]}, StateVector::Ones(1))};
        const double w0 = sample_expectation(traj, 0, seed);
        if (w0 > 0.0) scale[c] = 1.0 / w0;
        if (name.compare(0, 3, "psi") == 0) {
          obs[c].vectors = on_space(space, b.chain, b.bridge);
        } else {
          const std::size_t k = static_cast<std::size_t>(name[3] - '1');
          obs[c].vectors = on_space(space, {b.chain[k]}, StateVector::Ones(1));
        }
      }
    }

    for (std::size_t s = 0; s < traj.size(); ++s) {
      std::vector<double> row;
      row.reserve(names.size() + 1);
      row.push_back(phase.time_offset + traj.times[s]);
      for (std::size_t c = 0; c < names.size(); ++c) {
        if (is_norm[c]) {
          row.push_back(sample_norm(traj, s));
        } else {
          const double v = sample_expectation(traj, s, obs[c]);
          if (names[c] != "leakage") {
            row.push_back(v * scale[c]);
            continue;
          }
          const double n = sample_norm(traj, s);
          row.push_back(std::max(0.0, (traj.is_density() ? n : n * n) - v));
        }
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

ScenarioResult simulate(const RunConfig& cfg, const RunOptions& options) {
  const ScenarioSpec& spec = cfg.spec;
  spec.validate();
  check_window(spec);
  const std::vector<std::string> names =
      cfg.observables.empty() ? default_observables(spec.family) : cfg.observables;
  check_observables(spec, names);

  ScenarioResult r;
  ProtocolOptions popt;
  popt.workers = std::max(1u, options.workers);
  r.record = run_protocol(spec, popt);
  r.series = time_series(spec, r.record, names);
  r.drift = max_drift(r.record);

  // Leakage is always summarized, requested as a column or not.
  const bool has = std::find(names.begin(), names.end(), "leakage") != names.end();
  const TimeSeries leak = has ? TimeSeries{} : time_series(spec, r.record, {"leakage"});
  const TimeSeries& src = has ? r.series : leak;
  const std::size_t col = static_cast<std::size_t>(
      std::find(src.columns.begin(), src.columns.end(), "leakage") - src.columns.begin());
  for (const auto& row : src.rows) r.leakage_max = std::max(r.leakage_max, row[col]);
  return r;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

std::string format_csv(const TimeSeries& series) {
  std::string out;
  for (std::size_t c = 0; c < series.columns.size(); ++c) {
    if (c) out += ',';
    out += series.columns[c];
  }
  out += '\n';
  for (const auto& row : series.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string summary_json(const ScenarioSpec& spec, const ScenarioResult& result) {
  const ProtocolRecord& rec = result.record;
  ordered_json j = {{"status", "ok"},
                    {"fidelity", rec.fidelity},
                    {"raw_fidelity", rec.raw_fidelity},
                    {"leakage_max", result.leakage_max},
                    {"drift", {{"kind", rec.final.density ? "trace" : "norm"}, {"max", result.drift}}},
                    {"samples", result.series.rows.size()},
                    {"columns", result.series.columns},
                    {"protocol", record_json(rec)},
                    {"spec", spec_json(spec)}};
  return j.dump(2) + "\n";
}

std::string protocol_json(const ScenarioSpec& spec, const ProtocolRecord& rec) {
  ordered_json j = record_json(rec);
  j["spec"] = spec_json(spec);
  return j.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("write failed for " + path.string());
}

int run_scenario(const RunConfig& cfg, const std::filesystem::path& out, const RunOptions& options,
                 std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  const std::vector<std::string> names =
      cfg.observables.empty() ? default_observables(cfg.spec.family) : cfg.observables;
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    const ScenarioResult r = simulate(cfg, options);
    write_file(out / "timeseries.csv", format_csv(r.series));
    write_file(out / "summary.json", summary_json(cfg.spec, r));
    write_file(out / "timing.json", ordered_json{{"wall_seconds", elapsed()}}.dump(2) + "\n");
    for (const auto& w : r.record.warnings) err << "warning: " << w << "\n";
    return 0;
  } catch (const std::exception& e) {
    TimeSeries empty;
    empty.columns.push_back("t_over_t0");
    empty.columns.insert(empty.columns.end(), names.begin(), names.end());
    const bool config = dynamic_cast<const ConfigError*>(&e) != nullptr;
    ordered_json j = {{"status", "error"}, {"error", e.what()}, {"spec", spec_json(cfg.spec)}};
    write_file(out / "timeseries.csv", format_csv(empty));
    write_file(out / "summary.json", j.dump(2) + "\n");
    write_file(out / "timing.json", ordered_json{{"wall_seconds", elapsed()}}.dump(2) + "\n");
    err << "error: " << e.what() << "\n";
    return config ? 1 : 2;
  }
}

double SweepResult::min_fidelity() const {
  double m = std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : cells)
    if (std::isfinite(c.fidelity) && !(m <= c.fidelity)) m = c.fidelity;
  return m;
}

ScenarioSpec sweep_cell_spec(const ScenarioSpec& base, double kappa_over_g, double gamma_over_g) {
  ScenarioSpec spec = base;
  spec.decoherence = DecoherenceSpec{};
  spec.decoherence.kappa = kappa_over_g * base.coupling.g;
  spec.decoherence.gamma = gamma_over_g * base.coupling.g;
  return spec;
}

SweepResult run_sweep(const RunConfig& cfg, const RunOptions& options) {
  if (cfg.sweep.empty()) throw ConfigError("[sweep]: kappa_over_g and gamma_over_g must both be non-empty");
  cfg.spec.validate();
  check_window(cfg.spec);

  SweepResult result;
  result.kappa_over_g = cfg.sweep.kappa_over_g;
  result.gamma_over_g = cfg.sweep.gamma_over_g;
  const std::size_t nk = result.kappa_over_g.size();
  result.cells.resize(cfg.sweep.cells());
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    result.cells[i].gamma_over_g = result.gamma_over_g[i / nk];
    result.cells[i].kappa_over_g = result.kappa_over_g[i % nk];
  }

  auto evaluate = [&](SweepCell& cell) {
    try {
      ProtocolOptions popt;
      popt.isolated_phase_fidelity = false;
      const ProtocolRecord rec = run_protocol(sweep_cell_spec(cfg.spec, cell.kappa_over_g, cell.gamma_over_g), popt);
      cell.fidelity = rec.fidelity;
      cell.raw_fidelity = rec.raw_fidelity;
      cell.drift = max_drift(rec);
    } catch (const std::exception& e) {
      cell.fidelity = cell.raw_fidelity = std::numeric_limits<double>::quiet_NaN();
      cell.error = e.what();
    }
  };

  const std::size_t workers = std::min<std::size_t>(std::max(1u, options.workers), result.cells.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) evaluate(result.cells[i]);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();

  for (const auto& c : result.cells)
    if (!c.error.empty())
      result.warnings.push_back("cell kappa/g=" + format_number(c.kappa_over_g) + " gamma/g=" +
                                format_number(c.gamma_over_g) + " failed: " + c.error);
  for (auto& w : monotonicity_violations(result)) result.warnings.push_back(std::move(w));
  return result;
}

std::vector<std::string> monotonicity_violations(const SweepResult& result, double slack) {
  std::vector<std::string> out;
  const auto& k = result.kappa_over_g;
  const auto& g = result.gamma_over_g;
  auto report = [&](const SweepCell& a, const SweepCell& b, const char* axis) {
    if (std::isfinite(a.fidelity) && std::isfinite(b.fidelity) && b.fidelity > a.fidelity + slack)
      out.push_back(std::string("fidelity rises along ") + axis + ": " + format_number(a.fidelity) +
                    " at (kappa/g=" + format_number(a.kappa_over_g) + ", gamma/g=" +
                    format_number(a.gamma_over_g) + ") to " + format_number(b.fidelity) +
                    " at (kappa/g=" + format_number(b.kappa_over_g) + ", gamma/g=" +
                    format_number(b.gamma_over_g) + ")");
  };
  for (std::size_t gi = 0; gi < g.size(); ++gi)
    for (std::size_t ki = 1; ki < k.size(); ++ki)
      if (k[ki] > k[ki - 1]) report(result.at(gi, ki - 1), result.at(gi, ki), "kappa/g");
  for (std::size_t ki = 0; ki < k.size(); ++ki)
    for (std::size_t gi = 1; gi < g.size(); ++gi)
      if (g[gi] > g[gi - 1]) report(result.at(gi - 1, ki), result.at(gi, ki), "gamma/g");
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "gamma_over_g/kappa_over_g";
  for (double k : result.kappa_over_g) out += "," + format_number(k);
  out += '\n';
  for (std::size_t gi = 0; gi < result.gamma_over_g.size(); ++gi) {
    out += format_number(result.gamma_over_g[gi]);
    for (std::size_t ki = 0; ki < result.kappa_over_g.size(); ++ki)
      out += "," + format_number(result.at(gi, ki).fidelity);
    out += '\n';
  }
  return out;
}

std::string sweep_json(const ScenarioSpec& spec, const SweepResult& result) {
  ordered_json matrix = ordered_json::array();
  for (std::size_t gi = 0; gi < result.gamma_over_g.size(); ++gi) {
    ordered_json row = ordered_json::array();
    for (std::size_t ki = 0; ki < result.kappa_over_g.size(); ++ki)
      row.push_back(number_or_null(result.at(gi, ki).fidelity));
    matrix.push_back(std::move(row));
  }
  ordered_json cells = ordered_json::array();
  for (const auto& c : result.cells)
    cells.push_back({{"kappa_over_g", c.kappa_over_g},
                     {"gamma_over_g", c.gamma_over_g},
                     {"fidelity", number_or_null(c.fidelity)},
                     {"raw_fidelity", number_or_null(c.raw_fidelity)},
                     {"drift", c.drift},
                     {"error", c.error.empty() ? ordered_json(nullptr) : ordered_json(c.error)}});
  ordered_json j = {{"kappa_over_g", result.kappa_over_g},
                    {"gamma_over_g", result.gamma_over_g},
                    {"fidelity", matrix},
                    {"min_fidelity", number_or_null(result.min_fidelity())},
                    {"cells", cells},
                    {"warnings", result.warnings},
                    {"spec", spec_json(spec)}};
  return j.dump(2) + "\n";
}

std::string zeno_json(const ScenarioSpec& spec, std::size_t dark_samples) {
  spec.validate();
  const auto layout = make_layout(spec);
  const int partner = spec.switch_schedule.empty() ? 2 : spec.switch_schedule.front();
  const ModelStructure model = build_structure(spec, layout, partner);
  const QuantumState init = initial_state(spec);
  const Window w = spec.window();

  ordered_json branches = ordered_json::array();
  for (const auto& seed : init.support()) {
    const BasisState seeds[] = {seed};
    const StateSpace space = closure_space(model, seeds, false);
    if (space.dimension() < 2) continue;  // undriven
    ordered_json b;
    b["seed"] = layout->label(seed);
    b["dimension"] = space.dimension();
    ordered_json labels = ordered_json::array();
    for (std::size_t i = 0; i < space.dimension(); ++i) labels.push_back(space.label(i));
    b["states"] = labels;

    const auto dec = zeno_decompose(coupling_hamiltonian(model, space));
    b["eigenvalues"] = dec.eigenvalues();
    ordered_json clusters = ordered_json::array();
    for (const auto& c : dec.clusters) clusters.push_back({{"eigenvalue", c.eigenvalue}, {"dimension", c.dimension()}});
    b["clusters"] = clusters;

    EffectiveModel eff;
    try {
      eff = effective_hamiltonian(dec, space, hamiltonian_operator(model, space));
    } catch (const Error& e) {
      b["effective"] = nullptr;
      b["effective_error"] = e.what();
      branches.push_back(std::move(b));
      continue;
    }
    ordered_json couplings = ordered_json::array();
    for (std::size_t k = 0; k < eff.drive_parts.size(); ++k) couplings.push_back(eff.effective_coupling(k));
    ordered_json leak = ordered_json::array();
    for (const auto& ch : eff.leakage)
      leak.push_back({{"eigenvalue", ch.eigenvalue}, {"dimension", ch.dimension}, {"coupling_to_dark", ch.coupling_to_dark}});
    b["effective"] = {{"labels", eff.labels},
                      {"endpoint_count", eff.endpoint_count},
                      {"bridge_count", eff.bridge_count()},
                      {"couplings", couplings},
                      {"leakage_channels", leak}};

    ordered_json dark = ordered_json::array();
    for (std::size_t s = 1; s <= dark_samples; ++s) {
      const double t = w.start + w.length() * static_cast<double>(s) / static_cast<double>(dark_samples + 1);
      ordered_json entry = {{"t_over_t0", t}};
      try {
        const DarkState d = dark_state(eff, t);
        ordered_json comps = ordered_json::array();
        for (const auto& [label, amp] : d.components)
          comps.push_back({{"label", label}, {"re", amp.real()}, {"im", amp.imag()}});
        entry["components"] = comps;
      } catch (const Error&) {
        entry["components"] = nullptr;
      }
      dark.push_back(std::move(entry));
    }
    b["dark_states"] = dark;
    branches.push_back(std::move(b));
  }

  ordered_json j = {{"family", to_string(spec.family)},
                    {"n", spec.n},
                    {"partner", partner},
                    {"zeno_condition", zeno_report_json(zeno_condition_report(spec))},
                    {"branches", branches},
                    {"spec", spec_json(spec)}};
  return j.dump(2) + "\n";
}

}  // namespace qzd
