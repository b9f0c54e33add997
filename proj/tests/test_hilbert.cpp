#include <doctest.h>

#include <algorithm>

#include "qzd/model.hpp"
#include "support.hpp"

using namespace qzd;
using qzd::testing::kBranch0;

namespace {

struct TwoAtom {
  ScenarioSpec spec;
  ModelStructure model = build_structure(spec);
  const SystemLayout& layout = *model.layout;

  BasisState ket(const std::string& a, const std::string& b) const { return layout.make_state({a, b}); }
  StateSpace closure(std::vector<BasisState> seeds, bool jumps) const {
    return closure_space(model, seeds, jumps);
  }
};

}  // namespace

TEST_CASE("closure from |0,g> is the seven-state chain in order") {
  TwoAtom t;
  const auto space = t.closure({t.ket("0", "g")}, false);
  REQUIRE(space.dimension() == 7);
  for (std::size_t i = 0; i < 7; ++i) CHECK(space.label(i) == kBranch0[i]);
}

TEST_CASE("closure of the inert ket is itself") {
  TwoAtom t;
  const auto space = t.closure({t.ket("g", "g")}, false);
  CHECK(space.dimension() == 1);
  CHECK(space.label(0) == "|g_A,g_B;vac>");
}

TEST_CASE("dissipative closure has 17 states and matches the fixpoint oracle") {
  TwoAtom t;
  const std::vector<BasisState> seeds = {t.ket("0", "g"), t.ket("1", "g"), t.ket("g", "g")};
  const auto space = t.closure(seeds, true);
  CHECK(space.dimension() == 17);
  CHECK(space.index_of_label("|R_A,g_B;vac>"));
  CHECK(space.index_of_label("|L_A,g_B;vac>"));

  const auto oracle = qzd::testing::fixpoint_closure(t.layout, t.model.hermitian_stencils(),
                                                     t.model.jump_stencils(), seeds);
  const std::set<BasisState> got(space.basis().begin(), space.basis().end());
  CHECK(got == oracle);
}

TEST_CASE("closure is idempotent and deterministic") {
  TwoAtom t;
  const std::vector<BasisState> seeds = {t.ket("0", "g"), t.ket("1", "g"), t.ket("g", "g")};
  for (bool jumps : {false, true}) {
    const auto a = t.closure(seeds, jumps);
    const auto b = t.closure(seeds, jumps);
    CHECK(a == b);
    const auto again = t.closure(a.basis(), jumps);
    CHECK(again == a);
  }
}

TEST_CASE("branches from |0,g> and |1,g> are disjoint") {
  TwoAtom t;
  const auto a = t.closure({t.ket("0", "g")}, false);
  const auto b = t.closure({t.ket("1", "g")}, false);
  CHECK(b.dimension() == 7);
  for (const auto& s : b.basis()) CHECK_FALSE(a.index_of(s));
  CHECK(b.label(6) == "|L_A,L_B;vac>");
}

TEST_CASE("every one-step image of a basis state stays in the closure") {
  TwoAtom t;
  const auto space = t.closure({t.ket("0", "g"), t.ket("1", "g"), t.ket("g", "g")}, true);
  std::vector<Stencil> moves = t.model.jump_stencils();
  for (const auto& s : t.model.hermitian_stencils()) {
    moves.push_back(s);
    moves.push_back(s.adjoint());
  }
  for (const auto& b : space.basis())
    for (const auto& m : moves)
      if (auto img = m.apply(b, 1)) CHECK(space.index_of(img->first));
}

TEST_CASE("closure property holds for random ground-state seed sets") {
  // Hand-rolled generator: random subsets of ground configurations.
  TwoAtom t;
  std::mt19937_64 rng(7);
  const char* a_levels[] = {"0", "1", "g", "L", "R"};
  const char* b_levels[] = {"g", "L", "R"};
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<BasisState> seeds;
    const int count = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < count; ++k) {
      auto s = t.ket(a_levels[rng() % 5], b_levels[rng() % 3]);
      if (std::find(seeds.begin(), seeds.end(), s) == seeds.end()) seeds.push_back(s);
    }
    const bool jumps = rng() % 2;
    const auto space = t.closure(seeds, jumps);
    for (const auto& s : seeds) CHECK(space.index_of(s));
    const auto oracle = qzd::testing::fixpoint_closure(
        t.layout, t.model.hermitian_stencils(),
        jumps ? t.model.jump_stencils() : std::vector<Stencil>{}, seeds);
    CHECK(std::set<BasisState>(space.basis().begin(), space.basis().end()) == oracle);
  }
}

TEST_CASE("closure rejects invalid seeds and cutoff 0") {
  TwoAtom t;
  CHECK_THROWS_AS(t.ket("eX", "g"), ConfigError);
  BasisState bad = t.ket("0", "g");
  bad.levels[1] = 42;
  const BasisState seeds[] = {bad};
  CHECK_THROWS_AS(closure_space(t.model, seeds, false), ConfigError);

  ScenarioSpec spec;
  spec.photon_cutoff = 0;
  CHECK_THROWS_AS(make_layout(spec), ConfigError);
}

TEST_CASE("state_index lookups") {
  TwoAtom t;
  const auto space = t.closure({t.ket("0", "g")}, false);
  CHECK(state_index(space, t.ket("0", "g")) == 0u);
  CHECK(state_index(space, t.ket("R", "R")) == 6u);
  CHECK_FALSE(state_index(space, t.ket("1", "g")).has_value());
}

TEST_CASE("StateSpace rejects duplicates and keeps an exact inverse index") {
  TwoAtom t;
  auto layout = t.model.layout;
  CHECK_THROWS_AS(StateSpace(layout, {t.ket("0", "g"), t.ket("0", "g")}), ConfigError);
  const auto space = t.closure({t.ket("0", "g"), t.ket("1", "g"), t.ket("g", "g")}, true);
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    CHECK(space.index_of(space[i]) == i);
    CHECK(space.index_of_label(space.label(i)) == i);
  }
}

TEST_CASE("embed builds unnormalized vectors and names missing labels") {
  TwoAtom t;
  const auto space = t.closure({t.ket("0", "g")}, false);
  const std::pair<BasisState, Complex> one[] = {{t.ket("0", "g"), 1.0}};
  const StateVector e0 = embed(space, one);
  CHECK(e0(0) == Complex(1.0));
  CHECK(e0.norm() == 1.0);

  const double a = 1.0 / std::sqrt(3.0);
  const std::pair<BasisState, Complex> two[] = {{t.ket("0", "g"), a}, {t.ket("R", "R"), a}};
  CHECK(embed(space, two).norm() == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));

  const std::pair<BasisState, Complex> missing[] = {{t.ket("1", "g"), 1.0}};
  try {
    embed(space, missing);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("|1_A,g_B;vac>") != std::string::npos);
  }
}

TEST_CASE("initial superposition on the dissipative space has unit norm") {
  TwoAtom t;
  const auto space = t.closure({t.ket("0", "g"), t.ket("1", "g"), t.ket("g", "g")}, true);
  const double a = 1.0 / std::sqrt(3.0);
  const std::pair<BasisState, Complex> amps[] = {
      {t.ket("0", "g"), a}, {t.ket("1", "g"), a}, {t.ket("g", "g"), a}};
  CHECK(std::abs(embed(space, amps).norm() - 1.0) <= 1e-15);
}

TEST_CASE("transfer moves amplitudes between spaces") {
  TwoAtom t;
  const auto small = t.closure({t.ket("0", "g")}, false);
  const auto big = t.closure({t.ket("0", "g"), t.ket("1", "g"), t.ket("g", "g")}, true);
  std::mt19937_64 rng(3);
  const StateVector v = qzd::testing::random_state(rng, 7);
  const StateVector w = transfer(small, v, big);
  CHECK(w.norm() == doctest::Approx(1.0));
  CHECK((transfer(big, w, small) - v).norm() == 0.0);
  CHECK_THROWS_AS(transfer(big, StateVector(StateVector::Ones(17)), small), ConfigError);
}

TEST_CASE("labels name every atom level and occupied mode") {
  TwoAtom t;
  CHECK(t.layout.label(t.layout.make_state({"R", "g"}, {{"aAR", 1}})) == "|R_A,g_B;aAR=1>");
  CHECK(t.layout.label(t.ket("0", "g")) == "|0_A,g_B;vac>");
}

TEST_CASE("photon cutoff limits raising") {
  ScenarioSpec spec;
  spec.photon_cutoff = 2;
  auto layout = make_layout(spec);
  const Stencil raise({PhotonRaise{layout->mode_index("bL")}});
  auto s = layout->make_state({"g", "g"});
  auto one = raise.apply(s, 2);
  REQUIRE(one);
  CHECK(one->second == 1.0);
  auto two = raise.apply(one->first, 2);
  REQUIRE(two);
  CHECK(two->second == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(raise.apply(two->first, 2));
}
