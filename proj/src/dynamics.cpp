#include "qzd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

namespace qzd {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void check_window(const Window& w) {
  if (!std::isfinite(w.start) || !std::isfinite(w.end) || !(w.end > w.start))
    throw ConfigError("propagation window [" + fmt_double(w.start) + ", " + fmt_double(w.end) +
                      "] is empty");
}

}  // namespace

StepPlan plan_steps(double spectral_bound, const Window& window, const IntegratorSettings& s) {
  s.validate();
  check_window(window);
  double h = s.step;
  if (h <= 0.0) {
    h = s.max_auto_step;
    if (spectral_bound > 0.0) h = std::min(h, s.auto_step_factor / spectral_bound);
  }
  const double len = window.length();
  auto steps = static_cast<std::size_t>(std::ceil(len / h - 1e-9));
  steps = std::max<std::size_t>(steps, 1);
  std::size_t stride = s.stride;
  if (stride == 0) stride = std::max<std::size_t>(1, (steps + s.target_samples - 1) / s.target_samples);
  return {len / static_cast<double>(steps), steps, stride};
}

Trajectory propagate_state(const TimeDependentOperator& hamiltonian, const StateVector& psi0,
                           const Window& window, const IntegratorSettings& settings) {
  check_window(window);
  if (psi0.size() != hamiltonian.dimension())
    throw ConfigError("initial state has dimension " + std::to_string(psi0.size()) +
                      ", Hamiltonian has " + std::to_string(hamiltonian.dimension()));
  if (std::abs(psi0.norm() - 1.0) > 1e-12)
    throw ConfigError("initial state is not normalized (norm " + fmt_double(psi0.norm()) + ")");

  const StepPlan plan = plan_steps(hamiltonian.spectral_bound(), window, settings);
  const double h = plan.step;

  Trajectory traj;
  traj.step = h;
  traj.steps = plan.steps;
  auto& norms = traj.observables["norm"];

  StateVector psi = psi0;
  auto record = [&](std::size_t k) {
    const double n = psi.norm();
    const double drift = std::abs(n - 1.0);
    traj.max_drift = std::max(traj.max_drift, drift);
    if (drift > settings.tolerance)
      throw StepSizeError("norm drift " + fmt_double(drift) + " at t = " +
                          fmt_double(window.start + static_cast<double>(k) * h) +
                          " exceeds tolerance; use a smaller step than " + fmt_double(h));
    traj.times.push_back(window.start + static_cast<double>(k) * h);
    traj.states.push_back(psi);
    norms.push_back(n);
  };

  OperatorMatrix h0, hmid, h1;
  hamiltonian.evaluate(window.start, h0);
  StateVector k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()), tmp(psi.size());

  record(0);
  for (std::size_t k = 0; k < plan.steps; ++k) {
    const double t = window.start + static_cast<double>(k) * h;
    hamiltonian.evaluate(t + 0.5 * h, hmid);
    hamiltonian.evaluate(window.start + static_cast<double>(k + 1) * h, h1);

    k1.noalias() = h0 * psi;
    k1 *= kMinusI;
    tmp = psi + (0.5 * h) * k1;
    k2.noalias() = hmid * tmp;
    k2 *= kMinusI;
    tmp = psi + (0.5 * h) * k2;
    k3.noalias() = hmid * tmp;
    k3 *= kMinusI;
    tmp = psi + h * k3;
    k4.noalias() = h1 * tmp;
    k4 *= kMinusI;
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    std::swap(h0, h1);
    if ((k + 1) % plan.stride == 0 || k + 1 == plan.steps) record(k + 1);
  }
  return traj;
}

LindbladRhs::LindbladRhs(const TimeDependentOperator& hamiltonian,
                         std::span<const JumpOperator> jumps) {
  const Eigen::Index n = hamiltonian.dimension();
  OperatorMatrix damping(n, n);
  std::map<std::tuple<int, int, int, int>, Complex> kernel;
  for (const auto& j : jumps) {
    if (j.op.rows() != n || j.op.cols() != n)
      throw ConfigError("jump operator " + j.name + " has the wrong dimension");
    if (!(j.rate >= 0.0)) throw ConfigError("jump operator " + j.name + " has a negative rate");
    if (j.rate == 0.0) continue;
    OperatorMatrix ldl = OperatorMatrix(j.op.adjoint()) * j.op;
    damping += (Complex(0.0, -0.5) * j.rate) * ldl;

    std::vector<std::tuple<int, int, Complex>> entries;
    for (Eigen::Index r = 0; r < j.op.outerSize(); ++r)
      for (OperatorMatrix::InnerIterator it(j.op, r); it; ++it)
        entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (const auto& [f1, i1, v1] : entries)
      for (const auto& [f2, i2, v2] : entries)
        kernel[{f1, f2, i1, i2}] += j.rate * v1 * std::conj(v2);
  }
  damping.prune(Complex(0.0));
  effective_ = hamiltonian.with_static_added(damping);
  recycle_.reserve(kernel.size());
  for (const auto& [key, w] : kernel) {
    const auto& [f1, f2, i1, i2] = key;
    recycle_.push_back({f1, f2, i1, i2, w});
  }
  bound_ = hamiltonian.spectral_bound();
  scratch_x_.resize(n, n);
}

void LindbladRhs::operator()(double t, const DensityMatrix& rho, DensityMatrix& drho) const {
  effective_.evaluate(t, scratch_h_);
  // X = H_eff rho; the coherent plus damping part is -i (X - X^+) for Hermitian rho.
  scratch_x_.noalias() = scratch_h_ * rho;
  drho.noalias() = kMinusI * (scratch_x_ - scratch_x_.adjoint());
  for (const auto& r : recycle_) drho(r.row, r.col) += r.weight * rho(r.src_row, r.src_col);
}

Trajectory propagate_density(const TimeDependentOperator& hamiltonian,
                             std::span<const JumpOperator> jumps, const DensityMatrix& rho0,
                             const Window& window, const IntegratorSettings& settings) {
  check_window(window);
  const Eigen::Index n = hamiltonian.dimension();
  if (rho0.rows() != n || rho0.cols() != n)
    throw ConfigError("initial density matrix has the wrong dimension");
  if (hermiticity_residual(rho0) > 1e-10)
    throw ConfigError("initial density matrix is not Hermitian");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-10)
    throw ConfigError("initial density matrix does not have unit trace");
  {
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho0, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw ConfigError("initial density matrix is not positive semidefinite");
  }

  const LindbladRhs rhs(hamiltonian, jumps);
  const StepPlan plan = plan_steps(rhs.spectral_bound(), window, settings);
  const double h = plan.step;

  Trajectory traj;
  traj.step = h;
  traj.steps = plan.steps;
  auto& traces = traj.observables["trace"];
  auto& min_eigs = traj.observables["min_eigenvalue"];
  auto& herm = traj.observables["hermiticity"];

  DensityMatrix rho = rho0;
  auto record = [&](std::size_t k) {
    const double t = window.start + static_cast<double>(k) * h;
    const double tr = rho.trace().real();
    const double drift = std::abs(tr - 1.0);
    traj.max_drift = std::max(traj.max_drift, drift);
    if (drift > settings.tolerance)
      throw StepSizeError("trace drift " + fmt_double(drift) + " at t = " + fmt_double(t) +
                          " exceeds tolerance; use a smaller step than " + fmt_double(h));
    double min_eig = 0.0;
    if (settings.check_positivity) {
      Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho, Eigen::EigenvaluesOnly);
      min_eig = es.eigenvalues().minCoeff();
      if (min_eig < -settings.tolerance)
        throw PositivityError("density matrix eigenvalue " + fmt_double(min_eig) +
                              " at t = " + fmt_double(t) + " is below -tolerance");
    }
    traj.times.push_back(t);
    traj.densities.push_back(rho);
    traces.push_back(tr);
    min_eigs.push_back(min_eig);
    herm.push_back(hermiticity_residual(rho));
  };

  DensityMatrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n);
  record(0);
  for (std::size_t k = 0; k < plan.steps; ++k) {
    const double t = window.start + static_cast<double>(k) * h;
    rhs(t, rho, k1);
    tmp = rho + (0.5 * h) * k1;
    rhs(t + 0.5 * h, tmp, k2);
    tmp = rho + (0.5 * h) * k2;
    rhs(t + 0.5 * h, tmp, k3);
    tmp = rho + h * k3;
    rhs(window.start + static_cast<double>(k + 1) * h, tmp, k4);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((k + 1) % plan.stride == 0 || k + 1 == plan.steps) record(k + 1);
  }
  return traj;
}

StateVector expm_reference(const DenseOperator& hamiltonian, double dt, const StateVector& psi0) {
  if (hamiltonian.rows() > 64)
    throw ConfigError("expm_reference is a dense oracle limited to 64 states, got " +
                      std::to_string(hamiltonian.rows()));
  if (hamiltonian.rows() != psi0.size()) throw ConfigError("state/operator dimension mismatch");
  const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  const double residual = hermiticity_residual(hamiltonian);
  if (residual > 1e-12 * scale)
    throw HermiticityError("expm_reference needs a Hermitian matrix (residual " +
                           fmt_double(residual) + ")");
  Eigen::SelfAdjointEigenSolver<DenseOperator> es(hamiltonian);
  const auto& v = es.eigenvectors();
  StateVector coeffs = v.adjoint() * psi0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    coeffs(i) *= std::exp(Complex(0.0, -es.eigenvalues()(i) * dt));
  return v * coeffs;
}

StateVector expm_reference(const OperatorMatrix& hamiltonian, double dt, const StateVector& psi0) {
  if (hamiltonian.rows() > 64)
    throw ConfigError("expm_reference is a dense oracle limited to 64 states, got " +
                      std::to_string(hamiltonian.rows()));
  return expm_reference(DenseOperator(hamiltonian), dt, psi0);
}

}  // namespace qzd
