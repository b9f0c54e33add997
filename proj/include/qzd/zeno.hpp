#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qzd/hilbert.hpp"
#include "qzd/model.hpp"
#include "qzd/operator.hpp"

namespace qzd {

struct ZenoCluster {
  double eigenvalue;
  DenseOperator basis;      // orthonormal columns spanning the eigenspace
  DenseOperator projector;  // basis * basis^+

  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
};

// Eigenprojection decomposition H = sum_n lambda_n P_n of a strong coupling
// Hamiltonian; clusters sorted by ascending eigenvalue.
struct ZenoDecomposition {
  std::vector<ZenoCluster> clusters;
  double tolerance = 1e-9;
  double scale = 0.0;  // largest |eigenvalue|

  // Cluster whose eigenvalue is zero within tolerance * scale, if any.
  const ZenoCluster* zero_cluster() const;
  std::vector<double> eigenvalues() const;
};

// Eigenvalues within tol * ||H|| of their neighbour share a cluster.
// tol must lie in (0, 1e-3]; non-Hermitian input raises HermiticityError.
ZenoDecomposition zeno_decompose(const OperatorMatrix& h_coupling, double tol = 1e-9);

// Sub-block on the listed basis indices, in the listed order.
OperatorMatrix restrict_to(const OperatorMatrix& op, std::span<const std::size_t> indices);

struct LeakageChannel {
  double eigenvalue;
  std::size_t dimension;
  // ||P_n D_k P_0|| per drive term k, at unit pulse amplitude.
  std::vector<double> coupling_to_dark;
};

// Drive projected onto the zero-eigenvalue Zeno subspace, written in the
// basis {endpoint kets..., bridge vectors...}. Endpoint kets are basis states
// already inside the subspace; bridge vectors span the rest of it.
struct EffectiveModel {
  DenseOperator basis;  // columns embed effective states into the full space
  std::vector<std::string> labels;
  std::size_t endpoint_count = 0;
  std::vector<std::size_t> endpoint_indices;  // positions in the full space
  DenseOperator static_part;
  std::vector<PulseShape> pulses;
  std::vector<DenseOperator> drive_parts;  // per drive term, unit amplitude
  std::vector<LeakageChannel> leakage;

  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
  std::size_t bridge_count() const { return dimension() - endpoint_count; }
  DenseOperator at(double t) const;
  TimeDependentOperator as_operator() const;
  // Effective Rabi rate of drive term k: pulse_k(t) times its largest
  // bridge-endpoint matrix element.
  double effective_rabi(std::size_t k, double t) const;
  double effective_coupling(std::size_t k) const;
  StateVector lift(const StateVector& effective) const { return basis * effective; }
};

EffectiveModel effective_hamiltonian(const ZenoDecomposition& dec, const StateSpace& space,
                                     const TimeDependentOperator& drive);

struct DarkState {
  StateVector effective;  // amplitudes on the EffectiveModel basis
  StateVector full;       // same state in the full space
  std::vector<std::pair<std::string, Complex>> components;  // nonzero entries, labeled
};

// Unit null vector of H_eff(t) on the endpoint kets connected to the bridge.
// Requires exactly one bridge vector and two drive terms. The first endpoint's
// amplitude is made real and <= 0; if it vanishes, the first nonzero
// amplitude is made real and > 0.
DarkState dark_state(const EffectiveModel& model, double t);

struct ZenoConditionReport {
  double max_a_over_g = 0.0;
  double max_b_over_g = 0.0;
  double max_over_eta = 0.0;
  double threshold = 0.05;
  bool pass = true;

  double max_ratio() const;
};

ZenoConditionReport zeno_condition_report(const ScenarioSpec& spec, double threshold = 0.05);

}  // namespace qzd
