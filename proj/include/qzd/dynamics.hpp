#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "qzd/integrator.hpp"
#include "qzd/model.hpp"
#include "qzd/operator.hpp"

namespace qzd {

// Sampled propagation result. Exactly one of `states` / `densities` is filled.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<DensityMatrix> densities;
  // Diagnostics per sample: "norm" (pure) or "trace", "min_eigenvalue",
  // "hermiticity" (density).
  std::map<std::string, std::vector<double>> observables;

  double step = 0.0;
  std::size_t steps = 0;
  double max_drift = 0.0;

  bool is_density() const { return !densities.empty(); }
  std::size_t size() const { return times.size(); }
};

// Step actually used for `window` and the step count it implies.
struct StepPlan {
  double step;
  std::size_t steps;
  std::size_t stride;
};
StepPlan plan_steps(double spectral_bound, const Window& window, const IntegratorSettings& s);

// Classical RK4 for i dpsi/dt = H(t) psi. No renormalization; norm drift
// beyond tolerance raises StepSizeError.
Trajectory propagate_state(const TimeDependentOperator& hamiltonian, const StateVector& psi0,
                           const Window& window, const IntegratorSettings& settings);

// Classical RK4 for
//   drho/dt = -i[H, rho] + sum_c r_c (L_c rho L_c^+ - {L_c^+ L_c, rho}/2)
// evaluated directly on the d x d matrix.
Trajectory propagate_density(const TimeDependentOperator& hamiltonian,
                             std::span<const JumpOperator> jumps, const DensityMatrix& rho0,
                             const Window& window, const IntegratorSettings& settings);

// Dense-eigendecomposition reference for exp(-i H dt) psi0. Limited to 64 states.
StateVector expm_reference(const OperatorMatrix& hamiltonian, double dt, const StateVector& psi0);
StateVector expm_reference(const DenseOperator& hamiltonian, double dt, const StateVector& psi0);

// Lindblad right-hand side with precomputed damping and recycling kernels.
// Exposed for tests and custom integrators.
class LindbladRhs {
 public:
  LindbladRhs(const TimeDependentOperator& hamiltonian, std::span<const JumpOperator> jumps);

  void operator()(double t, const DensityMatrix& rho, DensityMatrix& drho) const;
  double spectral_bound() const { return bound_; }

 private:
  struct Recycle {
    int row;
    int col;
    int src_row;
    int src_col;
    Complex weight;
  };

  TimeDependentOperator effective_;  // H - (i/2) sum r L^+ L
  std::vector<Recycle> recycle_;
  double bound_;
  mutable OperatorMatrix scratch_h_;
  mutable DensityMatrix scratch_x_;
};

}  // namespace qzd
