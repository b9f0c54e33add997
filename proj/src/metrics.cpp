#include "qzd/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace qzd {

void ObservableSet::add(std::string name, DenseOperator vectors) {
  if (vectors.cols() > 0) {
    const DenseOperator gram = vectors.adjoint() * vectors;
    const DenseOperator id = DenseOperator::Identity(gram.rows(), gram.cols());
    if ((gram - id).cwiseAbs().maxCoeff() > 1e-10)
      throw ConfigError("observable " + name + " is not an orthogonal projector");
  }
  items_.push_back({std::move(name), std::move(vectors)});
}

void ObservableSet::add_state(std::string name, const StateVector& v) {
  add(std::move(name), DenseOperator(v));
}

namespace {

void check_target(Eigen::Index dim, const StateVector& target) {
  if (target.size() != dim)
    throw ConfigError("fidelity: state dimension " + std::to_string(dim) +
                      " does not match target dimension " + std::to_string(target.size()));
  if (std::abs(target.norm() - 1.0) > 1e-10) throw ConfigError("fidelity: target is not unit-norm");
}

}  // namespace

double fidelity(const StateVector& state, const StateVector& target) {
  check_target(state.size(), target);
  return std::norm(target.dot(state));
}

double fidelity(const DensityMatrix& rho, const StateVector& target) {
  check_target(rho.rows(), target);
  if (rho.cols() != rho.rows()) throw ConfigError("fidelity: density matrix is not square");
  return (target.adjoint() * rho * target)(0, 0).real();
}

double expectation(const Observable& obs, const StateVector& psi) {
  if (obs.vectors.rows() != psi.size()) throw ConfigError("observable " + obs.name + " has the wrong dimension");
  return (obs.vectors.adjoint() * psi).squaredNorm();
}

double expectation(const Observable& obs, const DensityMatrix& rho) {
  if (obs.vectors.rows() != rho.rows()) throw ConfigError("observable " + obs.name + " has the wrong dimension");
  return (obs.vectors.adjoint() * rho * obs.vectors).trace().real();
}

namespace {

double clamp_population(double v) {
  if (v < -1e-12 || v > 1.0 + 1e-12) {
    // Out-of-range values are reported as-is; they signal integrator trouble.
    return v;
  }
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

std::map<std::string, std::vector<double>> populations(const Trajectory& traj,
                                                       const ObservableSet& set) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& obs : set.items()) {
    auto& series = out[obs.name];
    series.reserve(traj.size());
    if (traj.is_density()) {
      for (const auto& rho : traj.densities) series.push_back(clamp_population(expectation(obs, rho)));
    } else {
      for (const auto& psi : traj.states) series.push_back(clamp_population(expectation(obs, psi)));
    }
  }
  return out;
}

std::vector<double> leakage(const Trajectory& traj, const DenseOperator& allowed_vectors) {
  ObservableSet set;
  set.add("allowed", allowed_vectors);
  const auto p = populations(traj, set).at("allowed");
  std::vector<double> out;
  out.reserve(p.size());
  for (double v : p) out.push_back(1.0 - v);
  return out;
}

}  // namespace qzd
