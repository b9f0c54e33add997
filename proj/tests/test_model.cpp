#include <doctest.h>

#include <cmath>

#include "qzd/model.hpp"
#include "support.hpp"

using namespace qzd;

namespace {

const double kPi = std::acos(-1.0);

StateSpace branch(const ModelStructure& m, const char* a) {
  const BasisState seed[] = {m.layout->make_state({a, "g"})};
  return closure_space(m, seed, false);
}

StateSpace dissipative(const ModelStructure& m) {
  const std::vector<BasisState> seeds = {m.layout->make_state({"0", "g"}),
                                         m.layout->make_state({"1", "g"}),
                                         m.layout->make_state({"g", "g"})};
  return closure_space(m, seeds, true);
}

}  // namespace

TEST_CASE("pulse envelope values") {
  const PulseShape b{1.0, 31.0, 0.0};
  const PulseShape a{1.0, 31.0, 5.27};
  CHECK(pulse_value(b, 15.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pulse_value(a, 5.27) == 0.0);
  CHECK(pulse_value(b, 40.0) == 0.0);
  CHECK(pulse_value(b, -1.0) == 0.0);
  const double t = 7.3;
  CHECK(pulse_value(a, t) == doctest::Approx(std::pow(std::sin(kPi * (t - 5.27) / 31.0), 4)));
  CHECK_THROWS_AS((PulseShape{-1.0, 31.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((PulseShape{1.0, 0.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((PulseShape{1.0, 31.0, -2.0}.validate()), ConfigError);
}

TEST_CASE("branch Hamiltonian equals the hand-written chain") {
  ScenarioSpec spec;
  const auto m = build_structure(spec);
  const auto space = branch(m, "0");
  for (double t : {0.0, 3.0, 10.0, 15.5, 20.0, 36.27, 50.0}) {
    const DenseOperator h(build_hamiltonian(m, space, t));
    const DenseOperator want =
        qzd::testing::chain_hamiltonian(20.0, 2000.0, spec.pulse_a.value(t), spec.pulse_b.value(t));
    CHECK((h - want).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("named matrix elements") {
  ScenarioSpec spec;
  const auto m = build_structure(spec);
  const auto space = branch(m, "0");
  const double peak_a = spec.pulse_a.delay + spec.pulse_a.width / 2.0;
  const DenseOperator h(build_hamiltonian(m, space, peak_a));
  CHECK(std::abs(h(1, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(h(2, 1)) == 20.0);
  CHECK(std::abs(h(3, 2)) == 2000.0);
  for (double t = 0.0; t <= 36.27; t += 0.5) CHECK(build_hamiltonian(m, space, t).coeff(6, 0) == 0.0);
}

TEST_CASE("Hamiltonian is exactly Hermitian across the window") {
  ScenarioSpec spec;
  spec.coupling.g_overrides = {{"AL", 19.0}, {"BR", 21.5}};
  const auto m = build_structure(spec);
  const auto space = dissipative(m);
  for (double t = -1.0; t <= 38.0; t += 0.37) CHECK(hermiticity_residual(build_hamiltonian(m, space, t)) == 0.0);
}

TEST_CASE("Hamiltonian is constant outside the pulse lobes") {
  ScenarioSpec spec;
  const auto m = build_structure(spec);
  const auto space = dissipative(m);
  const DenseOperator h0(coupling_hamiltonian(m, space));
  for (double t : {-5.0, 36.27, 40.0, 100.0}) {
    const DenseOperator h(build_hamiltonian(m, space, t));
    CHECK((h - h0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("space/spec mismatch is a configuration error") {
  ScenarioSpec spec;
  const auto m = build_structure(spec);
  const StateSpace lonely(m.layout, {m.layout->make_state({"0", "g"})});
  CHECK_THROWS_AS(build_hamiltonian(m, lonely, 10.0), ConfigError);
  ScenarioSpec other;
  other.family = Family::HighDim;
  other.n = 2;
  const auto m2 = build_structure(other);
  const auto space2 = branch(m2, "0");
  CHECK_THROWS_AS(build_hamiltonian(m, space2, 1.0), ConfigError);
}

TEST_CASE("jump operator table matches the channel convention") {
  ScenarioSpec spec;
  spec.decoherence.kappa = 2.0;
  spec.decoherence.gamma = 4.0;
  const auto m = build_structure(spec);
  const auto space = dissipative(m);
  const auto jumps = build_jump_operators(m, space);
  REQUIRE(jumps.size() == 14);
  int fiber = 0, cavity = 0, atom_a = 0, atom_b = 0;
  for (const auto& j : jumps) {
    CHECK(j.rate == 1.0);  // kappa/2 and gamma/4
    fiber += j.name.rfind("fiber", 0) == 0;
    cavity += j.name.rfind("cavity", 0) == 0;
    atom_a += j.name.rfind("atom A", 0) == 0;
    atom_b += j.name.rfind("atom B", 0) == 0;
  }
  CHECK(fiber == 2);
  CHECK(cavity == 4);
  CHECK(atom_a == 4);
  CHECK(atom_b == 4);
  CHECK(jumps.front().name == "fiber bL");

  // Cavity A, R polarization: |R_A,g_B;aAR=1> -> |R_A,g_B;vac>.
  const auto it = std::find_if(jumps.begin(), jumps.end(), [](const JumpOperator& j) { return j.name == "cavity aAR"; });
  REQUIRE(it != jumps.end());
  const auto from = *space.index_of_label("|R_A,g_B;aAR=1>");
  const auto to = *space.index_of_label("|R_A,g_B;vac>");
  CHECK(it->op.coeff(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) == Complex(1.0));

  // Every channel annihilates the all-ground vacuum.
  const auto gg = *space.index_of_label("|g_A,g_B;vac>");
  for (const auto& j : jumps) {
    StateVector e = StateVector::Zero(17);
    e(static_cast<Eigen::Index>(gg)) = 1.0;
    CHECK((j.op * e).norm() == 0.0);
  }
}

TEST_CASE("zero loss scales give zero rates, overrides replace derived rates") {
  ScenarioSpec spec;
  const auto m = build_structure(spec);
  const auto space = dissipative(m);
  for (const auto& j : build_jump_operators(m, space)) CHECK(j.rate == 0.0);

  spec.decoherence.kappa = 1.0;
  spec.decoherence.gamma_b = 0.3;
  const auto m2 = build_structure(spec);
  for (const auto& j : build_jump_operators(m2, space)) {
    if (j.name.rfind("atom B", 0) == 0) CHECK(j.rate == 0.3);
    if (j.name.rfind("atom A", 0) == 0) CHECK(j.rate == 0.0);
    if (j.name.rfind("cavity", 0) == 0) CHECK(j.rate == 0.5);
  }
  spec.decoherence.kappa = -1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("n-atom layout with partner 2 mirrors the two-atom model") {
  ScenarioSpec two;
  ScenarioSpec n;
  n.family = Family::NAtom;
  n.n = 2;
  const auto m2 = build_structure(two);
  const auto mn = build_structure(n, 2);
  const auto s2 = dissipative(m2);
  const auto sn = dissipative(mn);
  REQUIRE(sn.dimension() == s2.dimension());
  CHECK(DenseOperator(build_hamiltonian(mn, sn, 12.0)) == DenseOperator(build_hamiltonian(m2, s2, 12.0)));
}

TEST_CASE("n-atom partners leave spectators untouched") {
  ScenarioSpec spec;
  spec.family = Family::NAtom;
  spec.n = 4;
  const auto m = build_structure(spec, 3);
  const BasisState seed[] = {m.layout->make_state({"0", "R", "g", "L"})};
  const auto space = closure_space(m, seed, true);
  CHECK(space.dimension() == 8);  // seven-state chain plus the |R_1,g_3> decay sink
  for (const auto& s : space.basis()) {
    CHECK(m.layout->atoms()[1].scheme.levels[s.levels[1]] == "R");
    CHECK(m.layout->atoms()[3].scheme.levels[s.levels[3]] == "L");
  }
  CHECK_THROWS_AS(build_structure(spec, 5), ConfigError);
  CHECK_THROWS_AS(build_structure(spec, 1), ConfigError);
}

TEST_CASE("high-dim branches have 5N+2 states and N=1 is the two-atom model") {
  for (int n : {1, 2, 3}) {
    ScenarioSpec spec;
    spec.family = Family::HighDim;
    spec.n = n;
    const auto m = build_structure(spec);
    CHECK(branch(m, "0").dimension() == static_cast<std::size_t>(5 * n + 2));
    CHECK(branch(m, "1").dimension() == static_cast<std::size_t>(5 * n + 2));
  }
  ScenarioSpec hd;
  hd.family = Family::HighDim;
  hd.n = 1;
  ScenarioSpec two;
  CHECK(*make_layout(hd) == *make_layout(two));
}

TEST_CASE("physical preset converts to units of Omega0") {
  ScenarioSpec spec;
  apply_preset(spec, "cs-experiment");
  CHECK(spec.decoherence.kappa / spec.coupling.g == doctest::Approx(0.004).epsilon(1e-14));
  CHECK(spec.decoherence.gamma / spec.coupling.g == doctest::Approx(0.004).epsilon(1e-14));
  CHECK_THROWS_AS(apply_preset(spec, "nope"), ConfigError);
}

TEST_CASE("family names round-trip") {
  for (Family f : {Family::TwoAtom, Family::NAtom, Family::HighDim}) CHECK(family_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(family_from_string("three-atom"), ConfigError);
}
