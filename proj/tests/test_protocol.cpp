#include <doctest.h>

#include <cmath>

#include "qzd/metrics.hpp"
#include "qzd/protocol.hpp"
#include "support.hpp"

using namespace qzd;

namespace {

ScenarioSpec n_atom(int n) {
  ScenarioSpec s;
  s.family = Family::NAtom;
  s.n = n;
  return s;
}

ScenarioSpec high_dim(int n) {
  ScenarioSpec s;
  s.family = Family::HighDim;
  s.n = n;
  return s;
}

const ProtocolRecord& closed_two_atom() {
  static const ProtocolRecord rec = run_two_atom(ScenarioSpec{});
  return rec;
}

std::shared_ptr<const StateSpace> kets(const ScenarioSpec& spec, const std::vector<std::vector<std::string>>& rows) {
  auto layout = make_layout(spec);
  std::vector<BasisState> basis;
  for (const auto& r : rows) basis.push_back(layout->make_state(r));
  return std::make_shared<const StateSpace>(layout, basis);
}

}  // namespace

TEST_CASE("three-dimensional two-atom target") {
  const auto space = kets(ScenarioSpec{}, {{"R", "R"}, {"L", "L"}, {"g", "g"}, {"0", "g"}});
  const StateVector t = target_state(TargetKind::ThreeDimTwoAtom, 2, *space);
  const double a = 1.0 / std::sqrt(3.0);
  CHECK((t - StateVector(Eigen::Vector4cd(a, a, a, 0.0))).norm() <= 1e-15);
}

TEST_CASE("target kinds agree where they coincide") {
  const std::vector<std::vector<std::string>> rows = {{"g", "g"}, {"L", "L"}, {"R", "R"}};
  const auto two = target_state(TargetKind::ThreeDimTwoAtom, 2, *kets(ScenarioSpec{}, rows));
  CHECK(target_state(TargetKind::ThreeDimNAtom, 2, *kets(n_atom(2), rows)) == two);
  CHECK(target_state(TargetKind::HighDim, 1, *kets(high_dim(1), rows)) == two);
}

TEST_CASE("missing target ket is named") {
  const auto space = kets(ScenarioSpec{}, {{"R", "R"}, {"g", "g"}});
  try {
    target_state(TargetKind::ThreeDimTwoAtom, 2, *space);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("|L_A,L_B;vac>") != std::string::npos);
  }
}

TEST_CASE("two-atom closed run reaches the target up to the geometric sign") {
  const auto& rec = closed_two_atom();
  CHECK(rec.fidelity >= 0.99);
  CHECK(rec.raw_fidelity == doctest::Approx(1.0 / 9.0).epsilon(0.01));
  CHECK(rec.passages == 1);
  CHECK(rec.zeno.pass);
  CHECK(rec.warnings.empty());
  CHECK(rec.final.dimension() == 15);
  CHECK(rec.phases.front().trajectory.max_drift <= 1e-8);
}

TEST_CASE("inert component is untouched by the passage") {
  const auto& rec = closed_two_atom();
  const auto gg = *rec.final_raw.space->index_of_label("|g_A,g_B;vac>");
  CHECK(rec.final_raw.psi(static_cast<Eigen::Index>(gg)) == Complex(1.0 / std::sqrt(3.0)));
}

TEST_CASE("without pulses the state stays put") {
  ScenarioSpec spec;
  spec.pulse_a.amplitude = spec.pulse_b.amplitude = 0.0;
  const auto rec = run_two_atom(spec);
  const QuantumState init = initial_state(spec).on(rec.final_raw.space);
  CHECK((rec.final_raw.psi - init.psi).norm() <= 1e-14);
  // Only the |g,g> amplitude 1/sqrt(3) overlaps the target: |1/3|^2.
  CHECK(rec.raw_fidelity == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("density mode without loss matches the pure run") {
  ScenarioSpec spec;
  spec.mode = EvolutionMode::Density;
  const auto rec = run_two_atom(spec);
  CHECK(rec.final.density);
  CHECK(rec.final.dimension() == 17);
  CHECK(std::abs(rec.fidelity - closed_two_atom().fidelity) <= 1e-6);
}

TEST_CASE("Zeno ratio escalates to an error above the configured limit") {
  ScenarioSpec spec;
  spec.pulse_a.amplitude = spec.pulse_b.amplitude = 5.0;  // ratio 0.25
  CHECK_THROWS_AS(run_two_atom(spec), Error);
  spec.zeno_error_ratio = 0.3;
  spec.integrator.step = 2e-5;
  spec.pulse_a = spec.pulse_b = PulseShape{5.0, 0.5, 0.0};  // short run, warning only
  const auto rec = run_two_atom(spec);
  CHECK_FALSE(rec.zeno.pass);
  CHECK(rec.warnings.size() == 1);
}

TEST_CASE("relabel pulse maps L->1 and R->0 on atom 1") {
  const ScenarioSpec spec = n_atom(2);
  const auto space = kets(spec, {{"R", "R"}, {"L", "L"}, {"g", "g"}});
  const QuantumState in = QuantumState::pure(space, StateVector::Ones(3) / std::sqrt(3.0));
  const QuantumState out = relabel_pulse(in, 0);
  const auto want = kets(spec, {{"0", "R"}, {"1", "L"}, {"g", "g"}});
  const QuantumState mapped = out.on(want);
  CHECK((mapped.psi - StateVector::Ones(3) / std::sqrt(3.0)).norm() == 0.0);
  CHECK(out.psi.norm() == in.psi.norm());

  const QuantumState gg = QuantumState::pure(kets(spec, {{"g", "g"}}), StateVector::Ones(1));
  const QuantumState same = relabel_pulse(gg, 0);
  CHECK(same.space->label(0) == "|g_1,g_2;vac>");
  CHECK(same.psi(0) == Complex(1.0));
}

TEST_CASE("relabel pulse is an isometry") {
  const ScenarioSpec spec = n_atom(3);
  const auto space = kets(spec, {{"R", "R", "g"}, {"L", "L", "g"}, {"g", "g", "g"}, {"0", "g", "g"}, {"1", "R", "L"}});
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const QuantumState a = QuantumState::pure(space, qzd::testing::random_state(rng, 5));
    const QuantumState b = QuantumState::pure(space, qzd::testing::random_state(rng, 5));
    const QuantumState ra = relabel_pulse(a, 0);
    const QuantumState rb = relabel_pulse(b, 0);
    CHECK(ra.psi.dot(rb.psi) == a.psi.dot(b.psi));
  }
}

TEST_CASE("relabel pulse refuses excited amplitude") {
  const ScenarioSpec spec = n_atom(2);
  const auto space = kets(spec, {{"R", "R"}, {"eL", "g"}});
  StateVector v(2);
  v << std::sqrt(1.0 - 1e-6), 1e-3;
  const QuantumState s = QuantumState::pure(space, v);
  CHECK_THROWS_AS(relabel_pulse(s, 0), Error);
  CHECK_NOTHROW(relabel_pulse(s, 0, 1e-2));
}

TEST_CASE("n-atom protocol with two atoms is the two-atom protocol") {
  const auto a = closed_two_atom();
  const auto b = run_n_atom(n_atom(2), 2);
  REQUIRE(a.final_raw.dimension() == b.final_raw.dimension());
  CHECK(a.final_raw.psi == b.final_raw.psi);
  CHECK(a.fidelity == b.fidelity);
  CHECK(b.phases.size() == 1);
}

TEST_CASE("three-atom protocol") {
  const auto rec = run_n_atom(n_atom(3), 3);
  REQUIRE(rec.phases.size() == 3);  // passage, relabel, passage
  CHECK(rec.phases[1].name == "relabel 1");
  CHECK(rec.phases[1].cumulative_fidelity >= 0.99);
  CHECK(rec.phases[1].fidelity == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rec.phases[2].fidelity >= 0.99);
  CHECK(rec.fidelity >= 0.98);
  CHECK(rec.phases[0].fidelity == doctest::Approx(closed_two_atom().fidelity).epsilon(1e-12));
}

TEST_CASE("switch schedule violations are configuration errors") {
  ScenarioSpec spec = n_atom(3);
  spec.switch_schedule = {2, 2};
  CHECK_THROWS_AS(run_n_atom(spec, 3), ConfigError);
  spec.switch_schedule = {3, 2};
  CHECK_THROWS_AS(run_n_atom(spec, 3), ConfigError);
  spec.switch_schedule = {2};
  CHECK_THROWS_AS(run_n_atom(spec, 3), ConfigError);
  CHECK_THROWS_AS(run_n_atom(ScenarioSpec{}, 3), ConfigError);
}

TEST_CASE("high-dim scheme with one mode pair is the two-atom scheme") {
  const auto rec = run_highdim(high_dim(1), 1);
  CHECK(rec.final_raw.psi == closed_two_atom().final_raw.psi);
  CHECK(rec.fidelity == closed_two_atom().fidelity);
}

TEST_CASE("high-dim scheme with two mode pairs") {
  const auto equal = run_highdim(high_dim(2), 2);
  CHECK(equal.final.dimension() == 25);
  // Equal initial weights cap the overlap with the uniform five-term target.
  const double cap = std::pow(2.0 * std::sqrt(2.0) + 1.0, 2) / 15.0;
  CHECK(equal.fidelity <= cap + 1e-12);
  CHECK(equal.fidelity >= 0.95 * cap);

  ScenarioSpec spec = high_dim(2);
  spec.highdim_initial = HighDimInitial::Balanced;
  const auto balanced = run_highdim(spec, 2);
  CHECK(balanced.fidelity >= 0.98);
}

TEST_CASE("concurrent branches give identical results") {
  ProtocolOptions opt;
  opt.workers = 3;
  const auto rec = run_two_atom(ScenarioSpec{}, opt);
  CHECK(rec.final_raw.psi == closed_two_atom().final_raw.psi);
}
