#pragma once

#include <utility>
#include <vector>

#include "qzd/pulse.hpp"
#include "qzd/types.hpp"

namespace qzd {

// Pulse-modulated operator term: pulse(t) * matrix.
struct DrivenTerm {
  PulseShape pulse;
  OperatorMatrix matrix;
};

// O(t) = static + sum_k pulse_k(t) * D_k, stored on one shared sparsity
// pattern so evaluation is a scale-and-add over value arrays.
class TimeDependentOperator {
 public:
  TimeDependentOperator() = default;
  TimeDependentOperator(OperatorMatrix static_part, std::vector<DrivenTerm> driven);

  Eigen::Index dimension() const { return pattern_.rows(); }

  // `out` is resized to the shared pattern on first use and reused after.
  void evaluate(double t, OperatorMatrix& out) const;
  OperatorMatrix at(double t) const;

  const OperatorMatrix& static_part() const { return static_; }
  const std::vector<DrivenTerm>& driven() const { return driven_; }

  // Copy with `extra` added to the static part (e.g. the anti-Hermitian
  // damping of a master equation).
  TimeDependentOperator with_static_added(const OperatorMatrix& extra) const;

  // Upper bound on the spectral radius over all t, using peak pulse values.
  double spectral_bound() const;

 private:
  void build_pattern();

  OperatorMatrix static_;
  std::vector<DrivenTerm> driven_;
  OperatorMatrix pattern_;
  std::vector<Complex> static_values_;
  std::vector<std::vector<Complex>> driven_values_;
};

// Largest |A - A^dagger| element.
double hermiticity_residual(const OperatorMatrix& a);
double hermiticity_residual(const DenseOperator& a);

// Spectral norm; exact for Hermitian input up to 512 rows, a row-sum bound otherwise.
double operator_norm(const OperatorMatrix& a);

OperatorMatrix to_sparse(const DenseOperator& a, double drop = 0.0);

}  // namespace qzd
