#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qzd/dynamics.hpp"
#include "qzd/hilbert.hpp"
#include "qzd/model.hpp"
#include "qzd/zeno.hpp"

namespace qzd {

// A pure vector or a density matrix on a state space.
struct QuantumState {
  std::shared_ptr<const StateSpace> space;
  StateVector psi;
  DensityMatrix rho;
  bool density = false;

  static QuantumState pure(std::shared_ptr<const StateSpace> space, StateVector psi);
  static QuantumState mixed(std::shared_ptr<const StateSpace> space, DensityMatrix rho);

  std::size_t dimension() const { return space->dimension(); }
  double norm_or_trace() const;
  DensityMatrix as_density() const;
  // Basis states carrying weight above `tol` (diagonal for density matrices).
  std::vector<BasisState> support(double tol = 0.0) const;
  // Same state re-expressed on `to`; weight outside `to` is an error.
  QuantumState on(std::shared_ptr<const StateSpace> to) const;
};

double fidelity(const QuantumState& state, const StateVector& target);

enum class TargetKind { ThreeDimTwoAtom, ThreeDimNAtom, HighDim };

// Unit-norm target embedded in `space`; `n` is the atom count (n-atom) or
// the mode count per polarization (high-dim). Missing kets raise ConfigError
// naming the ket.
StateVector target_state(TargetKind kind, int n, const StateSpace& space);

// Initial product states (atom 1 in a superposition of 0, 1, g; all others g).
QuantumState initial_state(const ScenarioSpec& spec);

// Ideal relabel on atom `atom`: L -> 1, R -> 0 (and back, so the map is a
// basis permutation). Excited-level amplitude above `tolerance` is an error.
QuantumState relabel_pulse(const QuantumState& state, std::size_t atom, double tolerance = 1e-10);

// Phase -1 on every basis state with `atom` in level g, applied `count` times.
QuantumState apply_phase_correction(const QuantumState& state, std::size_t atom, int count);

struct PhaseRecord {
  std::string name;
  bool passage = false;
  int partner = 0;
  double time_offset = 0.0;
  Trajectory trajectory;  // empty for relabel steps
  std::shared_ptr<const StateSpace> space;
  // Fidelity of this phase alone (run from its ideal input) and of the actual
  // chained state, both against the ideal state after this phase.
  double fidelity = 0.0;
  double cumulative_fidelity = 0.0;
};

struct ProtocolRecord {
  Family family = Family::TwoAtom;
  int n = 2;
  std::vector<PhaseRecord> phases;
  QuantumState final_raw;  // as propagated
  QuantumState final;      // after the phase correction (if enabled)
  StateVector target;      // on final.space
  double raw_fidelity = 0.0;
  double fidelity = 0.0;
  int passages = 0;
  ZenoConditionReport zeno;
  std::vector<std::string> warnings;
};

struct ProtocolOptions {
  // Branches of a pure-state run propagated concurrently.
  unsigned workers = 1;
  // Recompute each n-atom passage from its ideal input for per-phase fidelities.
  bool isolated_phase_fidelity = true;
};

// One passage with the given partner (2 for two-atom and high-dim). Pure
// states are split into the connected blocks of H and recombined on one grid;
// density matrices use the joint closure including jump channels.
PhaseRecord run_passage(const ScenarioSpec& spec, const QuantumState& input, int partner,
                        const ProtocolOptions& options, QuantumState& output);

ProtocolRecord run_two_atom(const ScenarioSpec& spec, const ProtocolOptions& options = {});
ProtocolRecord run_n_atom(const ScenarioSpec& spec, int n, const ProtocolOptions& options = {});
ProtocolRecord run_highdim(const ScenarioSpec& spec, int n, const ProtocolOptions& options = {});
// Dispatch on spec.family (n from spec.n).
ProtocolRecord run_protocol(const ScenarioSpec& spec, const ProtocolOptions& options = {});

}  // namespace qzd
