#include "qzd/operator.hpp"

#include <algorithm>
#include <cmath>

namespace qzd {

TimeDependentOperator::TimeDependentOperator(OperatorMatrix static_part,
                                             std::vector<DrivenTerm> driven)
    : static_(std::move(static_part)), driven_(std::move(driven)) {
  for (const auto& d : driven_) {
    if (d.matrix.rows() != static_.rows() || d.matrix.cols() != static_.cols())
      throw ConfigError("driven term dimension does not match static part");
  }
  if (static_.rows() != static_.cols()) throw ConfigError("operator must be square");
  static_.makeCompressed();
  for (auto& d : driven_) d.matrix.makeCompressed();
  build_pattern();
}

namespace {

std::vector<Complex> scatter(const OperatorMatrix& pattern, const OperatorMatrix& m) {
  std::vector<Complex> values(static_cast<std::size_t>(pattern.nonZeros()), Complex{});
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (OperatorMatrix::InnerIterator it(m, r); it; ++it) {
      const auto* begin = pattern.innerIndexPtr() + pattern.outerIndexPtr()[r];
      const auto* end = pattern.innerIndexPtr() + pattern.outerIndexPtr()[r + 1];
      const auto* pos = std::lower_bound(begin, end, static_cast<int>(it.col()));
      values[static_cast<std::size_t>(pos - pattern.innerIndexPtr())] += it.value();
    }
  }
  return values;
}

}  // namespace

void TimeDependentOperator::build_pattern() {
  using Triplet = Eigen::Triplet<Complex>;
  std::vector<Triplet> triplets;
  auto collect = [&triplets](const OperatorMatrix& m) {
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
      for (OperatorMatrix::InnerIterator it(m, r); it; ++it)
        triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), Complex{});
  };
  collect(static_);
  for (const auto& d : driven_) collect(d.matrix);
  pattern_ = OperatorMatrix(static_.rows(), static_.cols());
  pattern_.setFromTriplets(triplets.begin(), triplets.end());
  pattern_.makeCompressed();
  static_values_ = scatter(pattern_, static_);
  driven_values_.clear();
  for (const auto& d : driven_) driven_values_.push_back(scatter(pattern_, d.matrix));
}

void TimeDependentOperator::evaluate(double t, OperatorMatrix& out) const {
  if (out.rows() != pattern_.rows() || out.nonZeros() != pattern_.nonZeros() ||
      !out.isCompressed()) {
    out = pattern_;
  }
  Complex* values = out.valuePtr();
  std::copy(static_values_.begin(), static_values_.end(), values);
  for (std::size_t k = 0; k < driven_.size(); ++k) {
    const double amp = driven_[k].pulse.value(t);
    if (amp == 0.0) continue;
    const auto& dv = driven_values_[k];
    for (std::size_t i = 0; i < dv.size(); ++i) values[i] += amp * dv[i];
  }
}

OperatorMatrix TimeDependentOperator::at(double t) const {
  OperatorMatrix out;
  evaluate(t, out);
  return out;
}

TimeDependentOperator TimeDependentOperator::with_static_added(const OperatorMatrix& extra) const {
  OperatorMatrix s = static_ + extra;
  return TimeDependentOperator(std::move(s), driven_);
}

double TimeDependentOperator::spectral_bound() const {
  double bound = operator_norm(static_);
  for (const auto& d : driven_) bound += d.pulse.peak() * operator_norm(d.matrix);
  return bound;
}

double hermiticity_residual(const OperatorMatrix& a) {
  OperatorMatrix diff = a - OperatorMatrix(a.adjoint());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.nonZeros(); ++k)
    worst = std::max(worst, std::abs(diff.valuePtr()[k]));
  return worst;
}

double hermiticity_residual(const DenseOperator& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double operator_norm(const OperatorMatrix& a) {
  if (a.nonZeros() == 0) return 0.0;
  if (a.rows() <= 512 && hermiticity_residual(a) == 0.0) {
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(DenseOperator(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  if (a.rows() <= 512) {
    const DenseOperator dense(a);
    Eigen::JacobiSVD<DenseOperator> svd(dense);
    return svd.singularValues()(0);
  }
  double row_max = 0.0;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double sum = 0.0;
    for (OperatorMatrix::InnerIterator it(a, r); it; ++it) sum += std::abs(it.value());
    row_max = std::max(row_max, sum);
  }
  return row_max;
}

OperatorMatrix to_sparse(const DenseOperator& a, double drop) {
  using Triplet = Eigen::Triplet<Complex>;
  std::vector<Triplet> triplets;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      if (std::abs(a(r, c)) > drop)
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), a(r, c));
  OperatorMatrix out(a.rows(), a.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace qzd
