#include "qzd/zeno.hpp"

#include <algorithm>
#include <cmath>

namespace qzd {

const ZenoCluster* ZenoDecomposition::zero_cluster() const {
  const double thr = tolerance * scale;
  for (const auto& c : clusters)
    if (std::abs(c.eigenvalue) <= thr) return &c;
  return nullptr;
}

std::vector<double> ZenoDecomposition::eigenvalues() const {
  std::vector<double> out;
  for (const auto& c : clusters) out.push_back(c.eigenvalue);
  return out;
}

ZenoDecomposition zeno_decompose(const OperatorMatrix& h_coupling, double tol) {
  if (!(tol > 0.0 && tol <= 1e-3))
    throw ConfigError("clustering tolerance must lie in (0, 1e-3]");
  if (h_coupling.rows() != h_coupling.cols()) throw ConfigError("operator must be square");
  const DenseOperator h(h_coupling);
  const double magnitude = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
  const double residual = hermiticity_residual(h);
  if (residual > 1e-12 * std::max(1.0, magnitude)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", residual);
    throw HermiticityError(std::string("coupling Hamiltonian is not Hermitian (residual ") + buf +
                           ")");
  }

  ZenoDecomposition dec;
  dec.tolerance = tol;
  const Eigen::Index n = h.rows();
  if (n == 0) return dec;

  Eigen::SelfAdjointEigenSolver<DenseOperator> es(h);
  const Eigen::VectorXd& evals = es.eigenvalues();
  const DenseOperator& evecs = es.eigenvectors();
  dec.scale = evals.cwiseAbs().maxCoeff();
  const double thr = tol * dec.scale;

  Eigen::Index begin = 0;
  while (begin < n) {
    Eigen::Index end = begin + 1;
    while (end < n && evals(end) - evals(end - 1) <= thr) ++end;
    ZenoCluster c;
    c.eigenvalue = evals.segment(begin, end - begin).mean();
    if (std::abs(c.eigenvalue) <= thr) c.eigenvalue = 0.0;
    c.basis = evecs.middleCols(begin, end - begin);
    c.projector = c.basis * c.basis.adjoint();
    dec.clusters.push_back(std::move(c));
    begin = end;
  }
  return dec;
}

OperatorMatrix restrict_to(const OperatorMatrix& op, std::span<const std::size_t> indices) {
  const DenseOperator full(op);
  const auto m = static_cast<Eigen::Index>(indices.size());
  DenseOperator sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto r = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(i)]);
      const auto c = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(j)]);
      if (r >= full.rows() || c >= full.cols()) throw ConfigError("restriction index out of range");
      sub(i, j) = full(r, c);
    }
  return to_sparse(sub);
}

namespace {

void fix_phase_positive(Eigen::Ref<StateVector> v) {
  const double big = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-9 * big) {
      v *= std::abs(v(i)) / v(i);
      return;
    }
  }
}

double spectral_norm(const DenseOperator& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<DenseOperator> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

EffectiveModel effective_hamiltonian(const ZenoDecomposition& dec, const StateSpace& space,
                                     const TimeDependentOperator& drive) {
  const ZenoCluster* zero = dec.zero_cluster();
  if (!zero) throw Error("no Zeno dark subspace (no zero-eigenvalue cluster)");
  const Eigen::Index n = zero->projector.rows();
  if (static_cast<std::size_t>(n) != space.dimension() || drive.dimension() != n)
    throw ConfigError("decomposition, space and drive dimensions differ");

  EffectiveModel m;
  const DenseOperator& p0 = zero->projector;
  DenseOperator remainder = p0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(p0(k, k).real() - 1.0) <= 1e-9) {
      m.endpoint_indices.push_back(static_cast<std::size_t>(k));
      m.labels.push_back(space.label(static_cast<std::size_t>(k)));
      remainder(k, k) -= 1.0;
    }
  }
  m.endpoint_count = m.endpoint_indices.size();

  Eigen::SelfAdjointEigenSolver<DenseOperator> es(remainder);
  std::vector<StateVector> bridges;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (es.eigenvalues()(i) < 0.5) break;
    StateVector v = es.eigenvectors().col(i);
    fix_phase_positive(v);
    bridges.push_back(std::move(v));
  }
  std::reverse(bridges.begin(), bridges.end());

  const auto dim = static_cast<Eigen::Index>(m.endpoint_count + bridges.size());
  m.basis = DenseOperator::Zero(n, dim);
  for (std::size_t k = 0; k < m.endpoint_count; ++k)
    m.basis(static_cast<Eigen::Index>(m.endpoint_indices[k]), static_cast<Eigen::Index>(k)) = 1.0;
  for (std::size_t b = 0; b < bridges.size(); ++b) {
    m.basis.col(static_cast<Eigen::Index>(m.endpoint_count + b)) = bridges[b];
    m.labels.push_back("bridge" + std::to_string(b + 1));
  }

  const DenseOperator bt = m.basis.adjoint();
  m.static_part = bt * DenseOperator(drive.static_part()) * m.basis;
  for (const auto& term : drive.driven()) {
    const DenseOperator d(term.matrix);
    m.pulses.push_back(term.pulse);
    m.drive_parts.push_back(bt * d * m.basis);
  }
  for (const auto& c : dec.clusters) {
    if (&c == zero) continue;
    LeakageChannel leak{c.eigenvalue, c.dimension(), {}};
    for (const auto& term : drive.driven())
      leak.coupling_to_dark.push_back(spectral_norm(c.projector * DenseOperator(term.matrix) * p0));
    m.leakage.push_back(std::move(leak));
  }
  return m;
}

DenseOperator EffectiveModel::at(double t) const {
  DenseOperator h = static_part;
  for (std::size_t k = 0; k < drive_parts.size(); ++k) {
    const double amp = pulses[k].value(t);
    if (amp != 0.0) h += amp * drive_parts[k];
  }
  return h;
}

TimeDependentOperator EffectiveModel::as_operator() const {
  std::vector<DrivenTerm> driven;
  for (std::size_t k = 0; k < drive_parts.size(); ++k)
    driven.push_back({pulses[k], to_sparse(drive_parts[k], 1e-15)});
  return TimeDependentOperator(to_sparse(static_part, 1e-15), std::move(driven));
}

double EffectiveModel::effective_coupling(std::size_t k) const {
  const auto& d = drive_parts.at(k);
  const auto e = static_cast<Eigen::Index>(endpoint_count);
  if (d.rows() == e) return 0.0;
  return d.bottomLeftCorner(d.rows() - e, e).cwiseAbs().maxCoeff();
}

double EffectiveModel::effective_rabi(std::size_t k, double t) const {
  return pulses.at(k).value(t) * effective_coupling(k);
}

DarkState dark_state(const EffectiveModel& model, double t) {
  if (model.bridge_count() != 1)
    throw Error("dark state needs exactly one bridge vector, model has " +
                std::to_string(model.bridge_count()));
  if (model.drive_parts.size() != 2) throw Error("dark state needs exactly two drive terms");
  const auto e = static_cast<Eigen::Index>(model.endpoint_count);
  const DenseOperator h = model.at(t);

  const StateVector c = h.row(e).head(e).transpose();
  StateVector a_hat = model.drive_parts[0].row(e).head(e).adjoint();
  StateVector b_hat = model.drive_parts[1].row(e).head(e).adjoint();
  if (a_hat.norm() == 0.0 || b_hat.norm() == 0.0)
    throw Error("a drive term does not couple the bridge to any endpoint");
  a_hat.normalize();
  b_hat.normalize();

  const Complex s_a = c.transpose() * a_hat;
  const Complex s_b = c.transpose() * b_hat;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (std::abs(s_a) <= 1e-300 * scale && std::abs(s_b) <= 1e-300 * scale)
    throw Error("dark state undefined (whole subspace is dark)");

  StateVector v = -s_b * a_hat + s_a * b_hat;
  v.normalize();
  const double big = v.cwiseAbs().maxCoeff();
  if (std::abs(v(0)) > 1e-14 * big) {
    v *= -std::abs(v(0)) / v(0);
  } else {
    fix_phase_positive(v);
  }

  DarkState out;
  out.effective = StateVector::Zero(static_cast<Eigen::Index>(model.dimension()));
  out.effective.head(e) = v;
  out.full = model.lift(out.effective);
  for (Eigen::Index i = 0; i < out.effective.size(); ++i)
    if (std::abs(out.effective(i)) > 1e-15)
      out.components.emplace_back(model.labels[static_cast<std::size_t>(i)], out.effective(i));
  return out;
}

double ZenoConditionReport::max_ratio() const {
  return std::max({max_a_over_g, max_b_over_g, max_over_eta});
}

ZenoConditionReport zeno_condition_report(const ScenarioSpec& spec, double threshold) {
  ZenoConditionReport r;
  r.threshold = threshold;
  const double g = spec.coupling.g_min();
  r.max_a_over_g = spec.pulse_a.peak() / g;
  r.max_b_over_g = spec.pulse_b.peak() / g;
  r.max_over_eta = std::max(spec.pulse_a.peak(), spec.pulse_b.peak()) / spec.coupling.eta;
  r.pass = r.max_ratio() <= threshold;
  return r;
}

}  // namespace qzd
