#include <doctest.h>

#include <cmath>

#include "qzd/dynamics.hpp"
#include "qzd/metrics.hpp"
#include "qzd/zeno.hpp"
#include "support.hpp"

using namespace qzd;

namespace {

StateVector psi_target() {
  StateVector v(3);
  v << 1.0, Complex(0.0, 1.0), -1.0;
  return v / std::sqrt(3.0);
}

// One full closed-system passage on the seven-state chain, shared by the checks below.
struct DefaultRun {
  ScenarioSpec spec;
  ModelStructure model = build_structure(spec);
  StateSpace space = make_space();
  EffectiveModel eff = effective_hamiltonian(zeno_decompose(coupling_hamiltonian(model, space)), space,
                                             hamiltonian_operator(model, space));
  Trajectory traj = propagate_state(hamiltonian_operator(model, space), StateVector::Unit(7, 0),
                                    spec.window(), spec.integrator);

  StateSpace make_space() const {
    const BasisState seed[] = {model.layout->make_state({"0", "g"})};
    return closure_space(model, seed, false);
  }
  static const DefaultRun& get() {
    static const DefaultRun run;
    return run;
  }
};

}  // namespace

TEST_CASE("fidelity of pure and mixed states") {
  const StateVector t = psi_target();
  CHECK(fidelity(DensityMatrix(t * t.adjoint()), t) == doctest::Approx(1.0).epsilon(1e-15));
  StateVector perp(3);
  perp << 1.0, 0.0, 1.0;
  perp /= std::sqrt(2.0);
  CHECK(std::abs(fidelity(perp, t)) <= 1e-15);
  const DensityMatrix mix = (2.0 / 3.0) * t * t.adjoint() + (1.0 / 3.0) * perp * perp.adjoint();
  CHECK(fidelity(mix, t) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("pure fidelity ignores global phases") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector a = qzd::testing::random_state(rng, 6);
    const StateVector b = qzd::testing::random_state(rng, 6);
    const Complex pa = std::polar(1.0, 0.37 * trial), pb = std::polar(1.0, -1.1 * trial);
    CHECK(fidelity(StateVector(pa * a), StateVector(pb * b)) == doctest::Approx(fidelity(a, b)).epsilon(1e-13));
    const double f = fidelity(a, b);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-12);
  }
}

TEST_CASE("fidelity argument checks") {
  const StateVector e3 = StateVector::Unit(3, 0);
  const StateVector e4 = StateVector::Unit(4, 0);
  const DensityMatrix id2 = DensityMatrix::Identity(2, 2) / 2.0;
  CHECK_THROWS_AS(fidelity(e3, e4), ConfigError);
  CHECK_THROWS_AS(fidelity(e3, StateVector(2.0 * e3)), ConfigError);
  CHECK_THROWS_AS(fidelity(id2, e3), ConfigError);
}

TEST_CASE("observable sets reject non-orthonormal columns") {
  ObservableSet set;
  DenseOperator cols(3, 2);
  cols << 1, 1, 0, 0, 0, 0;
  CHECK_THROWS_AS(set.add("bad", cols), ConfigError);
  CHECK_NOTHROW(set.add_state("ok", StateVector::Unit(3, 1)));
  CHECK(set.size() == 1);
}

TEST_CASE("constant trajectory gives constant populations") {
  Trajectory traj;
  for (int i = 0; i < 4; ++i) {
    traj.times.push_back(i);
    traj.states.push_back(StateVector::Unit(7, 0));
  }
  ObservableSet set;
  set.add_state("phi1", StateVector::Unit(7, 0));
  set.add_state("phi7", StateVector::Unit(7, 6));
  const auto p = populations(traj, set);
  for (double v : p.at("phi1")) CHECK(v == 1.0);
  for (double v : p.at("phi7")) CHECK(v == 0.0);
}

TEST_CASE("complete observable sets sum to norm or trace") {
  std::mt19937_64 rng(8);
  Trajectory pure, mixed;
  for (int i = 0; i < 10; ++i) {
    const StateVector v = qzd::testing::random_state(rng, 5);
    const StateVector w = qzd::testing::random_state(rng, 5);
    pure.times.push_back(i);
    pure.states.push_back(v);
    mixed.times.push_back(i);
    mixed.densities.push_back(0.25 * v * v.adjoint() + 0.75 * w * w.adjoint());
  }
  ObservableSet set;
  const DenseOperator q = DenseOperator(qzd::testing::random_hermitian(rng, 5)).householderQr().householderQ();
  set.add("first two", q.leftCols(2));
  set.add("rest", q.rightCols(3));
  for (const Trajectory* t : {&pure, &mixed}) {
    const auto p = populations(*t, set);
    for (std::size_t i = 0; i < t->size(); ++i) CHECK(std::abs(p.at("first two")[i] + p.at("rest")[i] - 1.0) <= 1e-8);
  }
}

TEST_CASE("default run populations: inversion with little bridge weight") {
  const auto& run = DefaultRun::get();
  ObservableSet set;
  set.add_state("phi1", StateVector::Unit(7, 0));
  set.add_state("phi7", StateVector::Unit(7, 6));
  set.add_state("psi1", run.eff.basis.col(2));
  const auto p = populations(run.traj, set);
  CHECK(p.at("phi1").front() == 1.0);
  CHECK(p.at("phi1").back() <= 0.01);
  CHECK(p.at("phi7").back() >= 0.99);
  // Peak bridge weight from an independent high-order integration of the same
  // chain: 0.058664 near t = 21.76 (sampling here is coarser).
  const double peak = *std::max_element(p.at("psi1").begin(), p.at("psi1").end());
  CHECK(peak == doctest::Approx(0.058664).epsilon(1e-3));
}

TEST_CASE("leakage out of allowed subspaces") {
  const auto& run = DefaultRun::get();
  for (double v : leakage(run.traj, DenseOperator::Identity(7, 7))) CHECK(std::abs(v) <= 1e-8);
  const auto out_of_phi1 = leakage(run.traj, DenseOperator(StateVector::Unit(7, 0)));
  CHECK(out_of_phi1.front() == 0.0);
  CHECK(out_of_phi1.back() >= 0.99);
  const auto dark = leakage(run.traj, run.eff.basis);
  CHECK(*std::max_element(dark.begin(), dark.end()) <= 0.02);
}
