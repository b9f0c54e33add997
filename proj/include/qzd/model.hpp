#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qzd/hilbert.hpp"
#include "qzd/integrator.hpp"
#include "qzd/operator.hpp"
#include "qzd/pulse.hpp"

namespace qzd {

enum class Family { TwoAtom, NAtom, HighDim };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// Which laser envelope multiplies a drive term: Omega_A acts on atom A (atom 1),
// Omega_B on atom B (the active partner).
enum class PulseRole { A, B };

struct CouplingSpec {
  double g = 20.0;
  double eta = 2000.0;
  // Optional per-coupling values keyed "AL", "AR", "BL", "BR".
  std::map<std::string, double> g_overrides;

  double g_for(const std::string& key) const;
  double g_min() const;
  void validate() const;

  bool operator==(const CouplingSpec&) const = default;
};

// Loss scales kappa, gamma with the convention kappa_f = kappa_R = kappa_L = kappa/2
// and gamma_A = gamma_B = gamma/4. Each derived rate can be overridden.
struct DecoherenceSpec {
  double kappa = 0.0;
  double gamma = 0.0;
  std::optional<double> kappa_fiber;
  std::optional<double> kappa_cavity;
  std::optional<double> gamma_a;
  std::optional<double> gamma_b;

  double fiber_rate() const { return kappa_fiber.value_or(kappa / 2.0); }
  double cavity_rate() const { return kappa_cavity.value_or(kappa / 2.0); }
  double atom_a_rate() const { return gamma_a.value_or(gamma / 4.0); }
  double atom_b_rate() const { return gamma_b.value_or(gamma / 4.0); }
  bool any() const;
  void validate() const;

  bool operator==(const DecoherenceSpec&) const = default;
};

// How a protocol propagates: pure-state branches, joint density matrix, or
// density only when some loss rate is nonzero.
enum class EvolutionMode { Auto, Pure, Density };

// Atom-A amplitudes of the high-dim initial state: `Equal` weighs |0>, |1>, |g>
// alike; `Balanced` weighs |0>, |1> by sqrt(n) so the passage ends on the
// uniform (2n+1)-dimensional target.
enum class HighDimInitial { Equal, Balanced };

struct ScenarioSpec {
  Family family = Family::TwoAtom;
  // Number of atoms (n-atom) or of mode pairs per polarization (high-dim).
  int n = 2;
  CouplingSpec coupling;
  PulseShape pulse_a{1.0, 31.0, 5.27};
  PulseShape pulse_b{1.0, 31.0, 0.0};
  DecoherenceSpec decoherence;
  unsigned photon_cutoff = 1;
  IntegratorSettings integrator;
  EvolutionMode mode = EvolutionMode::Auto;
  // Active partners for the n-atom protocol; empty means 2..N.
  std::vector<int> switch_schedule;
  // Passage fails when any Omega/g or Omega/eta exceeds this.
  double zeno_error_ratio = 0.2;
  // Largest excited-level amplitude tolerated by the relabel step between
  // n-atom passages.
  double relabel_tolerance = 1e-2;
  HighDimInitial highdim_initial = HighDimInitial::Equal;
  // Undo the geometric sign of each passage with an ideal phase on |g> of atom 1.
  bool phase_correction = true;

  // Explicit propagation window; unset means the pulse span.
  std::optional<Window> window_override;

  // Propagation window of one passage: the override if set, else from the
  // earliest pulse start to the latest end.
  Window window() const;
  bool uses_density() const;
  void validate() const;
};

// Hermitian coupling term; the Hamiltonian carries coefficient * (S + S^dagger).
struct CouplingTerm {
  std::string name;
  Stencil stencil;
  double coefficient;
};

struct DriveTerm {
  std::string name;
  PulseRole role;
  Stencil stencil;
};

struct JumpChannel {
  std::string name;
  Stencil stencil;
  double rate;
};

struct JumpOperator {
  std::string name;
  double rate;
  OperatorMatrix op;
};

// Operator structure of one scenario (one active pair for the n-atom family).
struct ModelStructure {
  std::shared_ptr<const SystemLayout> layout;
  std::vector<CouplingTerm> couplings;
  std::vector<DriveTerm> drives;
  std::vector<JumpChannel> jumps;
  PulseShape pulse_a;
  PulseShape pulse_b;

  std::vector<Stencil> hermitian_stencils() const;
  std::vector<Stencil> jump_stencils() const;
};

// Layout of the whole system for a scenario family: atoms A,B (two-atom),
// 1..N (n-atom) or A,B with 2N-branch schemes (high-dim).
std::shared_ptr<const SystemLayout> make_layout(const ScenarioSpec& spec);

// `partner` selects the switched-on atom for the n-atom family (2..N); the
// other families ignore it.
ModelStructure build_structure(const ScenarioSpec& spec, int partner = 2);
ModelStructure build_structure(const ScenarioSpec& spec,
                               std::shared_ptr<const SystemLayout> layout, int partner);

StateSpace closure_space(const ModelStructure& model, std::span<const BasisState> seeds,
                         bool include_jumps);

// H(t) = H_acf + Omega_A(t) D_A + Omega_B(t) D_B on `space`.
TimeDependentOperator hamiltonian_operator(const ModelStructure& model, const StateSpace& space);
// The time-independent atom-cavity-fiber part alone.
OperatorMatrix coupling_hamiltonian(const ModelStructure& model, const StateSpace& space);
// Drive matrix for one role at unit pulse amplitude.
OperatorMatrix drive_operator(const ModelStructure& model, const StateSpace& space,
                              PulseRole role);

OperatorMatrix build_hamiltonian(const ScenarioSpec& spec, const StateSpace& space, double t);
OperatorMatrix build_hamiltonian(const ModelStructure& model, const StateSpace& space, double t);

// One entry per Lindblad channel, rates folded by the decoherence convention.
std::vector<JumpOperator> build_jump_operators(const ModelStructure& model,
                                               const StateSpace& space);
std::vector<JumpOperator> build_jump_operators(const ScenarioSpec& spec, const StateSpace& space);

// Physical-unit presets. Rates are converted to units of Omega0 assuming the
// scenario's g/Omega0 ratio stays fixed.
struct PhysicalRates {
  double g_hz;
  double kappa_hz;
  double gamma_hz;
};
void apply_physical_rates(ScenarioSpec& spec, const PhysicalRates& rates);
void apply_preset(ScenarioSpec& spec, const std::string& name);

}  // namespace qzd
