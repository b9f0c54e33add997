#pragma once

#include <map>
#include <string>
#include <vector>

#include "qzd/dynamics.hpp"
#include "qzd/types.hpp"

namespace qzd {

// Projector onto the span of orthonormal columns.
struct Observable {
  std::string name;
  DenseOperator vectors;
};

class ObservableSet {
 public:
  // Columns of `vectors` must be orthonormal within 1e-10.
  void add(std::string name, DenseOperator vectors);
  void add_state(std::string name, const StateVector& v);

  const std::vector<Observable>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }

 private:
  std::vector<Observable> items_;
};

// |<target|psi>|^2 for a pure state, <target|rho|target> for a density matrix.
double fidelity(const StateVector& state, const StateVector& target);
double fidelity(const DensityMatrix& rho, const StateVector& target);

double expectation(const Observable& obs, const StateVector& psi);
double expectation(const Observable& obs, const DensityMatrix& rho);

// Per-sample expectation of every observable, clamped to [0, 1] after a
// 1e-12 slack check.
std::map<std::string, std::vector<double>> populations(const Trajectory& traj,
                                                       const ObservableSet& set);

// 1 - <P_allowed> per sample.
std::vector<double> leakage(const Trajectory& traj, const DenseOperator& allowed_vectors);

}  // namespace qzd
