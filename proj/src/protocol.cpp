#include "qzd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include "qzd/metrics.hpp"

namespace qzd {

QuantumState QuantumState::pure(std::shared_ptr<const StateSpace> space, StateVector psi) {
  if (psi.size() != static_cast<Eigen::Index>(space->dimension()))
    throw ConfigError("state vector does not match its space");
  QuantumState s;
  s.space = std::move(space);
  s.psi = std::move(psi);
  return s;
}

QuantumState QuantumState::mixed(std::shared_ptr<const StateSpace> space, DensityMatrix rho) {
  const auto n = static_cast<Eigen::Index>(space->dimension());
  if (rho.rows() != n || rho.cols() != n) throw ConfigError("density matrix does not match its space");
  QuantumState s;
  s.space = std::move(space);
  s.rho = std::move(rho);
  s.density = true;
  return s;
}

double QuantumState::norm_or_trace() const {
  return density ? rho.trace().real() : psi.squaredNorm();
}

DensityMatrix QuantumState::as_density() const {
  return density ? rho : DensityMatrix(psi * psi.adjoint());
}

std::vector<BasisState> QuantumState::support(double tol) const {
  std::vector<BasisState> out;
  for (std::size_t i = 0; i < dimension(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double w = density ? std::abs(rho(k, k)) : std::norm(psi(k));
    if (w > tol) out.push_back((*space)[i]);
  }
  return out;
}

QuantumState QuantumState::on(std::shared_ptr<const StateSpace> to) const {
  if (density) return mixed(to, transfer(*space, rho, *to));
  return pure(to, transfer(*space, psi, *to));
}

double fidelity(const QuantumState& state, const StateVector& target) {
  return state.density ? fidelity(state.rho, target) : fidelity(state.psi, target);
}

namespace {

using LevelRow = std::vector<std::string>;

// Normalized superposition of product kets given by level labels (all modes empty).
StateVector uniform_superposition(const StateSpace& space, const std::vector<LevelRow>& rows,
                                  const std::vector<double>& weights) {
  const SystemLayout& layout = space.layout();
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(space.dimension()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const BasisState s = layout.make_state(rows[r]);
    auto idx = space.index_of(s);
    if (!idx) throw ConfigError("target ket " + layout.label(s) + " is not in the state space");
    v(static_cast<Eigen::Index>(*idx)) += weights[r];
  }
  return v / v.norm();
}

std::string suffix(int n, int i) { return n == 1 ? std::string() : std::to_string(i); }

// Rows of the n-atom state where atoms 1..last carry `a1` / `rest` labels.
std::vector<LevelRow> chain_rows(int atoms, const std::vector<int>& active,
                                 const std::pair<std::string, std::string>& first,
                                 const std::pair<std::string, std::string>& second) {
  std::vector<LevelRow> rows;
  for (const auto& [l1, lp] : {first, second}) {
    LevelRow row(static_cast<std::size_t>(atoms), "g");
    row[0] = l1;
    for (int p : active) row[static_cast<std::size_t>(p - 1)] = lp;
    rows.push_back(row);
  }
  rows.emplace_back(static_cast<std::size_t>(atoms), "g");
  return rows;
}

StateVector n_atom_ideal(const StateSpace& space, int atoms, const std::vector<int>& done,
                         bool relabeled) {
  auto rows = relabeled ? chain_rows(atoms, done, {"0", "R"}, {"1", "L"})
                        : chain_rows(atoms, done, {"R", "R"}, {"L", "L"});
  return uniform_superposition(space, rows, {1.0, 1.0, 1.0});
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void check_zeno(const ScenarioSpec& spec, ProtocolRecord& rec) {
  rec.zeno = zeno_condition_report(spec);
  if (rec.zeno.max_ratio() > spec.zeno_error_ratio)
    throw Error("Zeno condition violated: max pulse ratio " + fmt(rec.zeno.max_ratio()) +
                " exceeds " + fmt(spec.zeno_error_ratio));
  if (!rec.zeno.pass)
    rec.warnings.push_back("Zeno condition marginal: max pulse ratio " + fmt(rec.zeno.max_ratio()) +
                           " above " + fmt(rec.zeno.threshold));
}

void finish(const ScenarioSpec& spec, ProtocolRecord& rec, const QuantumState& raw,
            const StateVector& target_raw_space) {
  rec.final_raw = raw;
  rec.final = spec.phase_correction ? apply_phase_correction(raw, 0, rec.passages) : raw;
  rec.target = target_raw_space;
  rec.raw_fidelity = fidelity(rec.final_raw, rec.target);
  rec.fidelity = fidelity(rec.final, rec.target);
}

}  // namespace

StateVector target_state(TargetKind kind, int n, const StateSpace& space) {
  switch (kind) {
    case TargetKind::ThreeDimTwoAtom:
      return uniform_superposition(space, {{"R", "R"}, {"L", "L"}, {"g", "g"}}, {1.0, 1.0, 1.0});
    case TargetKind::ThreeDimNAtom: {
      if (n < 2) throw ConfigError("n-atom target needs n >= 2");
      const auto sz = static_cast<std::size_t>(n);
      return uniform_superposition(space, {LevelRow(sz, "R"), LevelRow(sz, "L"), LevelRow(sz, "g")},
                                   {1.0, 1.0, 1.0});
    }
    case TargetKind::HighDim: {
      if (n < 1) throw ConfigError("high-dim target needs n >= 1");
      std::vector<LevelRow> rows;
      for (const char* p : {"L", "R"})
        for (int i = 1; i <= n; ++i) rows.push_back({p + suffix(n, i), p + suffix(n, i)});
      rows.push_back({"g", "g"});
      return uniform_superposition(space, rows, std::vector<double>(rows.size(), 1.0));
    }
  }
  throw ConfigError("unknown target kind");
}

QuantumState initial_state(const ScenarioSpec& spec) {
  spec.validate();
  auto layout = make_layout(spec);
  const std::size_t atoms = layout->atoms().size();
  std::vector<BasisState> basis;
  for (const char* first : {"0", "1", "g"}) {
    LevelRow row(atoms, "g");
    row[0] = first;
    basis.push_back(layout->make_state(row));
  }
  StateVector psi(3);
  if (spec.family == Family::HighDim && spec.highdim_initial == HighDimInitial::Balanced) {
    const double w = std::sqrt(static_cast<double>(spec.n));
    psi << w, w, 1.0;
  } else {
    psi << 1.0, 1.0, 1.0;
  }
  psi /= psi.norm();
  auto space = std::make_shared<const StateSpace>(layout, std::move(basis));
  if (spec.uses_density()) return QuantumState::mixed(space, psi * psi.adjoint());
  return QuantumState::pure(space, psi);
}

QuantumState relabel_pulse(const QuantumState& state, std::size_t atom, double tolerance) {
  const SystemLayout& layout = state.space->layout();
  if (atom >= layout.atoms().size()) throw ConfigError("relabel: atom index out of range");
  const LevelScheme& scheme = layout.atoms()[atom].scheme;
  auto need = [&](const char* label) {
    auto l = scheme.find(label);
    if (!l) throw ConfigError("relabel: atom " + layout.atoms()[atom].name + " has no level " + label);
    return *l;
  };
  const std::uint8_t L = need("L"), R = need("R"), one = need("1"), zero = need("0");

  double worst = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    if (!scheme.is_excited((*state.space)[i].levels[atom])) continue;
    const auto k = static_cast<Eigen::Index>(i);
    worst = std::max(worst, state.density ? std::sqrt(std::abs(state.rho(k, k))) : std::abs(state.psi(k)));
  }
  if (worst > tolerance)
    throw Error("relabel: atom " + layout.atoms()[atom].name + " has excited amplitude " + fmt(worst) +
                " (limit " + fmt(tolerance) + ")");

  std::vector<BasisState> basis = state.space->basis();
  for (auto& s : basis) {
    auto& lv = s.levels[atom];
    if (lv == L) lv = one;
    else if (lv == one) lv = L;
    else if (lv == R) lv = zero;
    else if (lv == zero) lv = R;
  }
  auto space = std::make_shared<const StateSpace>(state.space->layout_ptr(), std::move(basis));
  QuantumState out = state;
  out.space = std::move(space);
  return out;
}

QuantumState apply_phase_correction(const QuantumState& state, std::size_t atom, int count) {
  if (count % 2 == 0) return state;
  const auto g = state.space->layout().level_index(atom, "g");
  Eigen::VectorXd sign(static_cast<Eigen::Index>(state.dimension()));
  for (std::size_t i = 0; i < state.dimension(); ++i)
    sign(static_cast<Eigen::Index>(i)) = (*state.space)[i].levels[atom] == g ? -1.0 : 1.0;
  QuantumState out = state;
  if (state.density)
    out.rho = sign.asDiagonal() * state.rho * sign.asDiagonal();
  else
    out.psi = sign.asDiagonal() * state.psi;
  return out;
}

PhaseRecord run_passage(const ScenarioSpec& spec, const QuantumState& input, int partner,
                        const ProtocolOptions& options, QuantumState& output) {
  const ModelStructure model = build_structure(spec, input.space->layout_ptr(), partner);
  const Window window = spec.window();
  const std::vector<BasisState> seeds = input.support();
  if (seeds.empty()) throw ConfigError("passage input state is zero");

  PhaseRecord rec;
  rec.passage = true;
  rec.partner = partner;
  rec.name = spec.family == Family::NAtom ? "passage 1-" + std::to_string(partner) : "passage";

  if (input.density) {
    auto space = std::make_shared<const StateSpace>(closure_space(model, seeds, true));
    const DensityMatrix rho0 = transfer(*input.space, input.rho, *space);
    const auto h = hamiltonian_operator(model, *space);
    const auto jumps = build_jump_operators(model, *space);
    rec.trajectory = propagate_density(h, jumps, rho0, window, spec.integrator);
    rec.space = space;
    output = QuantumState::mixed(space, rec.trajectory.densities.back());
    return rec;
  }

  // Pure: H is block diagonal over the closures of individual seeds.
  auto joint = std::make_shared<const StateSpace>(closure_space(model, seeds, false));
  struct Block {
    std::shared_ptr<const StateSpace> space;
    TimeDependentOperator h;
    StateVector psi0;
    double weight;
    Trajectory traj;
  };
  std::vector<Block> blocks;
  std::set<BasisState> covered;
  for (const auto& s : seeds) {
    if (covered.count(s)) continue;
    const BasisState seed[] = {s};
    auto space = std::make_shared<const StateSpace>(closure_space(model, seed, false));
    for (const auto& b : space->basis()) covered.insert(b);
    StateVector sub = StateVector::Zero(static_cast<Eigen::Index>(space->dimension()));
    for (std::size_t i = 0; i < space->dimension(); ++i)
      if (auto j = input.space->index_of((*space)[i]))
        sub(static_cast<Eigen::Index>(i)) = input.psi(static_cast<Eigen::Index>(*j));
    const double w = sub.norm();
    if (w == 0.0) continue;
    blocks.push_back({space, hamiltonian_operator(model, *space), sub / w, w, {}});
  }

  // One grid for all blocks, set by the stiffest.
  double bound = 0.0;
  for (const auto& b : blocks) bound = std::max(bound, b.h.spectral_bound());
  const StepPlan plan = plan_steps(bound, window, spec.integrator);
  IntegratorSettings settings = spec.integrator;
  settings.step = plan.step;
  settings.stride = plan.stride;

  // Blocks are propagated normalized; a block of weight w contributes w^2 times
  // its own drift to the joint norm, so its tolerance is scaled to match.
  auto run = [&](Block& b) {
    IntegratorSettings local = settings;
    local.tolerance = settings.tolerance / (b.weight * b.weight);
    b.traj = propagate_state(b.h, b.psi0, window, local);
  };
  if (options.workers > 1 && blocks.size() > 1) {
    std::vector<std::future<void>> pending;
    for (std::size_t i = 1; i < blocks.size(); ++i)
      pending.push_back(std::async(std::launch::async, run, std::ref(blocks[i])));
    run(blocks[0]);
    for (auto& f : pending) f.get();
  } else {
    for (auto& b : blocks) run(b);
  }

  Trajectory& traj = rec.trajectory;
  traj.times = blocks.front().traj.times;
  traj.step = plan.step;
  traj.steps = plan.steps;
  const std::size_t samples = traj.times.size();
  traj.states.assign(samples, StateVector::Zero(static_cast<Eigen::Index>(joint->dimension())));
  for (const auto& b : blocks) {
    traj.max_drift += b.weight * b.weight * b.traj.max_drift;
    for (std::size_t i = 0; i < b.space->dimension(); ++i) {
      const auto j = static_cast<Eigen::Index>(*joint->index_of((*b.space)[i]));
      const auto k = static_cast<Eigen::Index>(i);
      for (std::size_t t = 0; t < samples; ++t) traj.states[t](j) += b.weight * b.traj.states[t](k);
    }
  }
  auto& norms = traj.observables["norm"];
  for (const auto& s : traj.states) norms.push_back(s.norm());
  rec.space = joint;
  output = QuantumState::pure(joint, traj.states.back());
  return rec;
}

ProtocolRecord run_two_atom(const ScenarioSpec& spec_in, const ProtocolOptions& options) {
  if (spec_in.family != Family::TwoAtom) throw ConfigError("run_two_atom needs the two-atom family");
  ScenarioSpec spec = spec_in;
  spec.validate();
  ProtocolRecord rec;
  rec.family = Family::TwoAtom;
  rec.n = 2;
  check_zeno(spec, rec);

  QuantumState out;
  rec.phases.push_back(run_passage(spec, initial_state(spec), 2, options, out));
  rec.passages = 1;
  const StateVector target = target_state(TargetKind::ThreeDimTwoAtom, 2, *out.space);
  finish(spec, rec, out, target);
  rec.phases.back().fidelity = rec.phases.back().cumulative_fidelity = rec.fidelity;
  return rec;
}

ProtocolRecord run_highdim(const ScenarioSpec& spec_in, int n, const ProtocolOptions& options) {
  if (spec_in.family != Family::HighDim) throw ConfigError("run_highdim needs the high-dim family");
  ScenarioSpec spec = spec_in;
  spec.n = n;
  spec.validate();
  ProtocolRecord rec;
  rec.family = Family::HighDim;
  rec.n = n;
  check_zeno(spec, rec);

  QuantumState out;
  rec.phases.push_back(run_passage(spec, initial_state(spec), 2, options, out));
  rec.passages = 1;
  finish(spec, rec, out, target_state(TargetKind::HighDim, n, *out.space));
  rec.phases.back().fidelity = rec.phases.back().cumulative_fidelity = rec.fidelity;
  return rec;
}

ProtocolRecord run_n_atom(const ScenarioSpec& spec_in, int n, const ProtocolOptions& options) {
  if (spec_in.family != Family::NAtom) throw ConfigError("run_n_atom needs the n-atom family");
  ScenarioSpec spec = spec_in;
  spec.n = n;
  spec.validate();
  std::vector<int> partners = spec.switch_schedule;
  if (partners.empty())
    for (int p = 2; p <= n; ++p) partners.push_back(p);

  ProtocolRecord rec;
  rec.family = Family::NAtom;
  rec.n = n;
  check_zeno(spec, rec);

  const double phase_length = spec.window().length();
  const int corrections_per_passage = spec.phase_correction ? 1 : 0;
  QuantumState state = initial_state(spec);
  std::vector<int> done;
  double clock = 0.0;

  for (std::size_t k = 0; k < partners.size(); ++k) {
    if (k > 0) {
      PhaseRecord relabel;
      relabel.name = "relabel 1";
      relabel.time_offset = clock;
      state = relabel_pulse(state, 0, spec.relabel_tolerance);
      relabel.space = state.space;
      const StateVector ideal = n_atom_ideal(*state.space, n, done, true);
      relabel.cumulative_fidelity =
          fidelity(apply_phase_correction(state, 0, rec.passages * corrections_per_passage), ideal);
      // The ideal map applied to the ideal input is exact.
      const auto& prior = rec.phases.back().space;
      const QuantumState ideal_in = QuantumState::pure(prior, n_atom_ideal(*prior, n, done, false));
      relabel.fidelity = fidelity(relabel_pulse(ideal_in, 0).on(state.space), ideal);
      rec.phases.push_back(std::move(relabel));
    }

    QuantumState out;
    PhaseRecord phase = run_passage(spec, state, partners[k], options, out);
    phase.time_offset = clock;
    clock += phase_length;
    ++rec.passages;
    done.push_back(partners[k]);
    const StateVector ideal = n_atom_ideal(*out.space, n, done, false);
    phase.cumulative_fidelity =
        fidelity(apply_phase_correction(out, 0, rec.passages * corrections_per_passage), ideal);

    if (k == 0 || !options.isolated_phase_fidelity) {
      phase.fidelity = k == 0 ? phase.cumulative_fidelity : std::nan("");
    } else {
      // Same passage from the ideal relabeled input.
      std::vector<int> before(done.begin(), done.end() - 1);
      std::vector<BasisState> kets;
      for (const auto& row : chain_rows(n, before, {"0", "R"}, {"1", "L"}))
        kets.push_back(out.space->layout().make_state(row));
      auto in_space = std::make_shared<const StateSpace>(out.space->layout_ptr(), kets);
      StateVector v = StateVector::Ones(3) / std::sqrt(3.0);
      QuantumState ideal_in = spec.uses_density()
                                  ? QuantumState::mixed(in_space, v * v.adjoint())
                                  : QuantumState::pure(in_space, v);
      QuantumState iso;
      run_passage(spec, ideal_in, partners[k], options, iso);
      phase.fidelity = fidelity(apply_phase_correction(iso, 0, corrections_per_passage),
                                n_atom_ideal(*iso.space, n, done, false));
    }
    rec.phases.push_back(std::move(phase));
    state = out;
  }

  finish(spec, rec, state, target_state(TargetKind::ThreeDimNAtom, n, *state.space));
  return rec;
}

ProtocolRecord run_protocol(const ScenarioSpec& spec, const ProtocolOptions& options) {
  switch (spec.family) {
    case Family::TwoAtom:
      return run_two_atom(spec, options);
    case Family::NAtom:
      return run_n_atom(spec, spec.n, options);
    case Family::HighDim:
      return run_highdim(spec, spec.n, options);
  }
  throw ConfigError("unknown family");
}

}  // namespace qzd
