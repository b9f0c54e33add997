#include "qzd/model.hpp"

#include <algorithm>
#include <cmath>

namespace qzd {

std::string to_string(Family f) {
  switch (f) {
    case Family::TwoAtom:
      return "two-atom";
    case Family::NAtom:
      return "n-atom";
    case Family::HighDim:
      return "high-dim";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "two-atom") return Family::TwoAtom;
  if (s == "n-atom") return Family::NAtom;
  if (s == "high-dim") return Family::HighDim;
  throw ConfigError("unknown scenario family '" + s + "' (expected two-atom, n-atom or high-dim)");
}

double CouplingSpec::g_for(const std::string& key) const {
  auto it = g_overrides.find(key);
  return it == g_overrides.end() ? g : it->second;
}

double CouplingSpec::g_min() const {
  double m = g;
  for (const auto& [k, v] : g_overrides) m = std::min(m, v);
  return m;
}

void CouplingSpec::validate() const {
  if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("g must be finite and > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be finite and > 0");
  for (const auto& [k, v] : g_overrides) {
    if (k != "AL" && k != "AR" && k != "BL" && k != "BR")
      throw ConfigError("unknown coupling override '" + k + "'");
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("coupling override " + k + " must be finite and > 0");
  }
}

bool DecoherenceSpec::any() const {
  return fiber_rate() > 0.0 || cavity_rate() > 0.0 || atom_a_rate() > 0.0 || atom_b_rate() > 0.0;
}

void DecoherenceSpec::validate() const {
  auto check = [](const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(name) + " must be finite and >= 0");
  };
  check("kappa", kappa);
  check("gamma", gamma);
  if (kappa_fiber) check("kappa_fiber", *kappa_fiber);
  if (kappa_cavity) check("kappa_cavity", *kappa_cavity);
  if (gamma_a) check("gamma_a", *gamma_a);
  if (gamma_b) check("gamma_b", *gamma_b);
}

void IntegratorSettings::validate() const {
  if (!(step >= 0.0) || !std::isfinite(step)) throw ConfigError("step must be finite and >= 0");
  if (!(max_auto_step > 0.0)) throw ConfigError("max_auto_step must be > 0");
  if (!(auto_step_factor > 0.0)) throw ConfigError("auto_step_factor must be > 0");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (target_samples == 0) throw ConfigError("target_samples must be > 0");
}

Window ScenarioSpec::window() const {
  if (window_override) return *window_override;
  return {std::min(pulse_a.start(), pulse_b.start()), std::max(pulse_a.end(), pulse_b.end())};
}

bool ScenarioSpec::uses_density() const {
  return mode == EvolutionMode::Density || (mode == EvolutionMode::Auto && decoherence.any());
}

void ScenarioSpec::validate() const {
  coupling.validate();
  decoherence.validate();
  pulse_a.validate();
  pulse_b.validate();
  integrator.validate();
  if (photon_cutoff == 0) throw ConfigError("photon cutoff must be at least 1");
  if (family == Family::NAtom && n < 2) throw ConfigError("n-atom family needs n >= 2");
  if (family == Family::HighDim && n < 1) throw ConfigError("high-dim family needs n >= 1");
  if (!(zeno_error_ratio > 0.0)) throw ConfigError("zeno_error_ratio must be > 0");
  if (!(relabel_tolerance > 0.0)) throw ConfigError("relabel_tolerance must be > 0");
  if (!switch_schedule.empty()) {
    if (family != Family::NAtom) throw ConfigError("switch schedule applies to the n-atom family only");
    if (static_cast<int>(switch_schedule.size()) != n - 1)
      throw ConfigError("switch schedule must list each partner 2.." + std::to_string(n) + " once");
    for (std::size_t i = 0; i < switch_schedule.size(); ++i) {
      const int p = switch_schedule[i];
      if (p < 2 || p > n) throw ConfigError("switch schedule partner " + std::to_string(p) + " outside 2.." + std::to_string(n));
      for (std::size_t j = 0; j < i; ++j)
        if (switch_schedule[j] == p) throw ConfigError("switch schedule lists partner " + std::to_string(p) + " twice");
      if (i > 0 && p < switch_schedule[i - 1]) throw ConfigError("switch schedule must be ascending");
    }
  }
}

std::vector<Stencil> ModelStructure::hermitian_stencils() const {
  std::vector<Stencil> out;
  out.reserve(couplings.size() + drives.size());
  for (const auto& c : couplings) out.push_back(c.stencil);
  for (const auto& d : drives) out.push_back(d.stencil);
  return out;
}

std::vector<Stencil> ModelStructure::jump_stencils() const {
  std::vector<Stencil> out;
  out.reserve(jumps.size());
  for (const auto& j : jumps) out.push_back(j.stencil);
  return out;
}

namespace {

const char* const kPolarizations[] = {"L", "R"};

LevelScheme scheme_a(int branches) {
  auto suffix = [branches](int i) { return branches == 1 ? std::string() : std::to_string(i); };
  LevelScheme s{"A", {"0", "1", "g"}, {false, false, false}};
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      s.levels.push_back(p + suffix(i));
      s.excited.push_back(false);
    }
  s.levels.insert(s.levels.end(), {"eL", "eR"});
  s.excited.insert(s.excited.end(), {true, true});
  return s;
}

LevelScheme scheme_b(int branches) {
  auto suffix = [branches](int i) { return branches == 1 ? std::string() : std::to_string(i); };
  LevelScheme s{"B", {"g"}, {false}};
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      s.levels.push_back(p + suffix(i));
      s.excited.push_back(false);
    }
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      s.levels.push_back(std::string("e") + p + suffix(i));
      s.excited.push_back(true);
    }
  return s;
}

std::string branch_suffix(int branches, int i) {
  return branches == 1 ? std::string() : std::to_string(i);
}

}  // namespace

std::shared_ptr<const SystemLayout> make_layout(const ScenarioSpec& spec) {
  std::vector<AtomSite> atoms;
  std::vector<Mode> modes;
  switch (spec.family) {
    case Family::TwoAtom:
    case Family::HighDim: {
      const int branches = spec.family == Family::TwoAtom ? 1 : spec.n;
      if (branches < 1) throw ConfigError("high-dim family needs n >= 1");
      atoms.push_back({"A", scheme_a(branches)});
      atoms.push_back({"B", scheme_b(branches)});
      for (const char* loc : {"aA", "aB", "b"})
        for (const char* p : kPolarizations)
          for (int i = 1; i <= branches; ++i)
            modes.push_back({loc + std::string(p) + branch_suffix(branches, i)});
      break;
    }
    case Family::NAtom: {
      if (spec.n < 2) throw ConfigError("n-atom family needs n >= 2");
      atoms.push_back({"1", scheme_a(1)});
      for (int k = 2; k <= spec.n; ++k) atoms.push_back({std::to_string(k), scheme_b(1)});
      for (int k = 1; k <= spec.n; ++k)
        for (const char* p : kPolarizations) modes.push_back({"a" + std::to_string(k) + p});
      for (const char* p : kPolarizations) modes.push_back({std::string("b") + p});
      break;
    }
  }
  return std::make_shared<const SystemLayout>(std::move(atoms), std::move(modes),
                                              spec.photon_cutoff);
}

ModelStructure build_structure(const ScenarioSpec& spec, int partner) {
  return build_structure(spec, make_layout(spec), partner);
}

ModelStructure build_structure(const ScenarioSpec& spec,
                               std::shared_ptr<const SystemLayout> layout, int partner) {
  spec.coupling.validate();
  spec.decoherence.validate();
  const auto& L = *layout;

  std::size_t atom_a = 0;
  std::size_t atom_b = 1;
  std::string cav_a = "aA";
  std::string cav_b = "aB";
  int branches = 1;
  switch (spec.family) {
    case Family::TwoAtom:
      break;
    case Family::HighDim:
      branches = spec.n;
      break;
    case Family::NAtom:
      if (partner < 2 || partner > spec.n)
        throw ConfigError("partner " + std::to_string(partner) + " outside 2.." +
                          std::to_string(spec.n));
      atom_b = static_cast<std::size_t>(partner - 1);
      cav_a = "a1";
      cav_b = "a" + std::to_string(partner);
      break;
  }

  ModelStructure m;
  m.layout = layout;
  m.pulse_a = spec.pulse_a;
  m.pulse_b = spec.pulse_b;

  auto lvl = [&L](std::size_t atom, const std::string& label) { return L.level_index(atom, label); };
  auto mode = [&L](const std::string& name) { return L.mode_index(name); };

  // Atom-laser drives.
  m.drives.push_back({"OmegaA eL<-1", PulseRole::A,
                      Stencil({AtomFlip{atom_a, lvl(atom_a, "eL"), lvl(atom_a, "1")}})});
  m.drives.push_back({"OmegaA eR<-0", PulseRole::A,
                      Stencil({AtomFlip{atom_a, lvl(atom_a, "eR"), lvl(atom_a, "0")}})});
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      const std::string s = branch_suffix(branches, i);
      m.drives.push_back({std::string("OmegaB e") + p + s + "<-" + p + s, PulseRole::B,
                          Stencil({AtomFlip{atom_b, lvl(atom_b, std::string("e") + p + s),
                                            lvl(atom_b, p + s)}})});
    }

  // Atom-cavity and cavity-fiber couplings.
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      const std::string s = branch_suffix(branches, i);
      const std::string pol = p;
      m.couplings.push_back(
          {"gA" + pol + s,
           Stencil({PhotonLower{mode(cav_a + pol + s)},
                    AtomFlip{atom_a, lvl(atom_a, "e" + pol), lvl(atom_a, pol + s)}}),
           spec.coupling.g_for("A" + pol)});
    }
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      const std::string s = branch_suffix(branches, i);
      const std::string pol = p;
      m.couplings.push_back(
          {"gB" + pol + s,
           Stencil({PhotonLower{mode(cav_b + pol + s)},
                    AtomFlip{atom_b, lvl(atom_b, "e" + pol + s), lvl(atom_b, "g")}}),
           spec.coupling.g_for("B" + pol)});
    }
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      const std::string s = branch_suffix(branches, i);
      const std::string pol = p;
      const auto fiber = mode("b" + pol + s);
      m.couplings.push_back({"eta " + cav_a + pol + s,
                             Stencil({PhotonRaise{mode(cav_a + pol + s)}, PhotonLower{fiber}}),
                             spec.coupling.eta});
      m.couplings.push_back({"eta " + cav_b + pol + s,
                             Stencil({PhotonRaise{mode(cav_b + pol + s)}, PhotonLower{fiber}}),
                             spec.coupling.eta});
    }

  // Lindblad channels in the order fiber, cavities, atom A, atom B.
  const auto& dec = spec.decoherence;
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      const std::string name = "b" + std::string(p) + branch_suffix(branches, i);
      m.jumps.push_back({"fiber " + name, Stencil({PhotonLower{mode(name)}}), dec.fiber_rate()});
    }
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i)
      for (const auto& cav : {cav_a, cav_b}) {
        const std::string name = cav + p + branch_suffix(branches, i);
        m.jumps.push_back(
            {"cavity " + name, Stencil({PhotonLower{mode(name)}}), dec.cavity_rate()});
      }
  for (const char* p : kPolarizations) {
    const std::string pol = p;
    const std::string excited = "e" + pol;
    std::vector<std::string> sinks;
    for (int i = 1; i <= branches; ++i) sinks.push_back(pol + branch_suffix(branches, i));
    sinks.push_back(pol == "L" ? "1" : "0");
    for (const auto& sink : sinks)
      m.jumps.push_back({"atom " + L.atoms()[atom_a].name + " " + sink + "<-" + excited,
                         Stencil({AtomFlip{atom_a, lvl(atom_a, sink), lvl(atom_a, excited)}}),
                         dec.atom_a_rate()});
  }
  for (const char* p : kPolarizations)
    for (int i = 1; i <= branches; ++i) {
      const std::string s = branch_suffix(branches, i);
      const std::string excited = std::string("e") + p + s;
      for (const std::string& sink : {p + s, std::string("g")})
        m.jumps.push_back({"atom " + L.atoms()[atom_b].name + " " + sink + "<-" + excited,
                           Stencil({AtomFlip{atom_b, lvl(atom_b, sink), lvl(atom_b, excited)}}),
                           dec.atom_b_rate()});
    }
  return m;
}

StateSpace closure_space(const ModelStructure& model, std::span<const BasisState> seeds,
                         bool include_jumps) {
  const auto herm = model.hermitian_stencils();
  const auto jumps = include_jumps ? model.jump_stencils() : std::vector<Stencil>{};
  return enumerate_closure(model.layout, herm, jumps, seeds);
}

namespace {

using Triplet = Eigen::Triplet<Complex>;

void check_layout(const ModelStructure& model, const StateSpace& space) {
  if (!(space.layout() == *model.layout))
    throw ConfigError("state space was not built for this scenario layout");
}

void add_hermitian(const ModelStructure& model, const StateSpace& space, const Stencil& stencil,
                   double coefficient, const std::string& name, std::vector<Triplet>& out) {
  const unsigned cutoff = space.layout().photon_cutoff();
  for (std::size_t c = 0; c < space.dimension(); ++c) {
    auto image = stencil.apply(space[c], cutoff);
    if (!image) continue;
    auto r = space.index_of(image->first);
    if (!r)
      throw ConfigError("term " + name + " maps " + space.label(c) + " to " +
                        model.layout->label(image->first) + ", which is outside the space");
    const Complex v = coefficient * image->second;
    out.emplace_back(static_cast<int>(*r), static_cast<int>(c), v);
    out.emplace_back(static_cast<int>(c), static_cast<int>(*r), std::conj(v));
  }
  // States reached only through the adjoint must also be representable.
  const Stencil adj = stencil.adjoint();
  for (std::size_t c = 0; c < space.dimension(); ++c) {
    auto image = adj.apply(space[c], cutoff);
    if (image && !space.index_of(image->first))
      throw ConfigError("term " + name + " (H.c.) maps " + space.label(c) + " to " +
                        model.layout->label(image->first) + ", which is outside the space");
  }
}

OperatorMatrix from_triplets(std::size_t dim, const std::vector<Triplet>& triplets) {
  const auto n = static_cast<Eigen::Index>(dim);
  OperatorMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

OperatorMatrix coupling_hamiltonian(const ModelStructure& model, const StateSpace& space) {
  check_layout(model, space);
  std::vector<Triplet> triplets;
  for (const auto& c : model.couplings)
    add_hermitian(model, space, c.stencil, c.coefficient, c.name, triplets);
  return from_triplets(space.dimension(), triplets);
}

OperatorMatrix drive_operator(const ModelStructure& model, const StateSpace& space,
                              PulseRole role) {
  check_layout(model, space);
  std::vector<Triplet> triplets;
  for (const auto& d : model.drives)
    if (d.role == role) add_hermitian(model, space, d.stencil, 1.0, d.name, triplets);
  return from_triplets(space.dimension(), triplets);
}

TimeDependentOperator hamiltonian_operator(const ModelStructure& model, const StateSpace& space) {
  std::vector<DrivenTerm> driven;
  driven.push_back({model.pulse_a, drive_operator(model, space, PulseRole::A)});
  driven.push_back({model.pulse_b, drive_operator(model, space, PulseRole::B)});
  return TimeDependentOperator(coupling_hamiltonian(model, space), std::move(driven));
}

OperatorMatrix build_hamiltonian(const ModelStructure& model, const StateSpace& space, double t) {
  return hamiltonian_operator(model, space).at(t);
}

OperatorMatrix build_hamiltonian(const ScenarioSpec& spec, const StateSpace& space, double t) {
  return build_hamiltonian(build_structure(spec, space.layout_ptr(), 2), space, t);
}

std::vector<JumpOperator> build_jump_operators(const ModelStructure& model,
                                               const StateSpace& space) {
  check_layout(model, space);
  const unsigned cutoff = space.layout().photon_cutoff();
  std::vector<JumpOperator> out;
  out.reserve(model.jumps.size());
  for (const auto& ch : model.jumps) {
    std::vector<Triplet> triplets;
    for (std::size_t c = 0; c < space.dimension(); ++c) {
      auto image = ch.stencil.apply(space[c], cutoff);
      if (!image) continue;
      auto r = space.index_of(image->first);
      if (!r)
        throw ConfigError("jump channel " + ch.name + " maps " + space.label(c) + " to " +
                          model.layout->label(image->first) + ", which is outside the space");
      triplets.emplace_back(static_cast<int>(*r), static_cast<int>(c), Complex(image->second));
    }
    out.push_back({ch.name, ch.rate, from_triplets(space.dimension(), triplets)});
  }
  return out;
}

std::vector<JumpOperator> build_jump_operators(const ScenarioSpec& spec, const StateSpace& space) {
  return build_jump_operators(build_structure(spec, space.layout_ptr(), 2), space);
}

void apply_physical_rates(ScenarioSpec& spec, const PhysicalRates& rates) {
  if (!(rates.g_hz > 0.0)) throw ConfigError("physical g must be > 0");
  if (rates.kappa_hz < 0.0 || rates.gamma_hz < 0.0)
    throw ConfigError("physical loss rates must be >= 0");
  const double g = spec.coupling.g;
  spec.decoherence.kappa = g * rates.kappa_hz / rates.g_hz;
  spec.decoherence.gamma = g * rates.gamma_hz / rates.g_hz;
}

void apply_preset(ScenarioSpec& spec, const std::string& name) {
  if (name == "cs-experiment") {
    // g = 2.5 GHz, kappa = gamma = 10 MHz.
    apply_physical_rates(spec, {2.5e9, 10e6, 10e6});
    return;
  }
  throw ConfigError("unknown preset '" + name + "' (available: cs-experiment)");
}

}  // namespace qzd
