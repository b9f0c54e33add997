#include "qzd/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

namespace qzd {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string key_path(const std::string& section, const std::string& key) {
  return "[" + section + "]." + key;
}

double as_number(const toml::node& node, const std::string& path) {
  if (auto v = node.as_floating_point()) return v->get();
  if (auto v = node.as_integer()) return static_cast<double>(v->get());
  fail(path, "expected a number");
}

double finite(const toml::node& node, const std::string& path) {
  const double v = as_number(node, path);
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double positive(const toml::node& node, const std::string& path) {
  const double v = finite(node, path);
  if (!(v > 0.0)) fail(path, "must be > 0");
  return v;
}

double non_negative(const toml::node& node, const std::string& path) {
  const double v = finite(node, path);
  if (!(v >= 0.0)) fail(path, "must be >= 0");
  return v;
}

long long as_integer(const toml::node& node, const std::string& path) {
  if (auto v = node.as_integer()) return v->get();
  fail(path, "expected an integer");
}

std::string as_string(const toml::node& node, const std::string& path) {
  if (auto v = node.as_string()) return v->get();
  fail(path, "expected a string");
}

bool as_bool(const toml::node& node, const std::string& path) {
  if (auto v = node.as_boolean()) return v->get();
  fail(path, "expected true or false");
}

std::vector<double> rate_list(const toml::node& node, const std::string& path) {
  const auto* arr = node.as_array();
  if (!arr) fail(path, "expected an array of numbers");
  if (arr->empty()) fail(path, "must not be empty");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr->size(); ++i)
    out.push_back(non_negative(*arr->get(i), path + "[" + std::to_string(i) + "]"));
  return out;
}

using Handler = std::function<void(const toml::node&, const std::string&)>;

void apply_section(const toml::table& table, const std::string& section,
                   const std::map<std::string, Handler>& handlers) {
  for (auto&& [key, node] : table) {
    const std::string k(key.str());
    const std::string path = key_path(section, k);
    auto it = handlers.find(k);
    if (it == handlers.end()) fail(path, "unknown key");
    it->second(node, path);
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    const auto& pos = e.source().begin;
    throw ConfigError(std::string(source) + ":" + std::to_string(pos.line) + ":" +
                      std::to_string(pos.column) + ": syntax error: " + std::string(e.description()));
  }

  RunConfig cfg;
  ScenarioSpec& spec = cfg.spec;
  std::optional<double> eta_over_g, kappa_over_g, gamma_over_g;
  std::optional<double> t_start, t_end;
  bool eta_given = false, kappa_given = false, gamma_given = false;

  const std::map<std::string, Handler> system = {
      {"family",
       [&](const toml::node& n, const std::string& p) {
         try {
           spec.family = family_from_string(as_string(n, p));
         } catch (const ConfigError& e) {
           fail(p, e.what());
         }
       }},
      {"n",
       [&](const toml::node& n, const std::string& p) {
         const long long v = as_integer(n, p);
         if (v < 1 || v > 64) fail(p, "must lie in 1..64");
         spec.n = static_cast<int>(v);
       }},
      {"g", [&](const toml::node& n, const std::string& p) { spec.coupling.g = positive(n, p); }},
      {"eta",
       [&](const toml::node& n, const std::string& p) {
         spec.coupling.eta = positive(n, p);
         eta_given = true;
       }},
      {"eta_over_g", [&](const toml::node& n, const std::string& p) { eta_over_g = positive(n, p); }},
      {"g_AL", [&](const toml::node& n, const std::string& p) { spec.coupling.g_overrides["AL"] = positive(n, p); }},
      {"g_AR", [&](const toml::node& n, const std::string& p) { spec.coupling.g_overrides["AR"] = positive(n, p); }},
      {"g_BL", [&](const toml::node& n, const std::string& p) { spec.coupling.g_overrides["BL"] = positive(n, p); }},
      {"g_BR", [&](const toml::node& n, const std::string& p) { spec.coupling.g_overrides["BR"] = positive(n, p); }},
      {"cutoff",
       [&](const toml::node& n, const std::string& p) {
         const long long v = as_integer(n, p);
         if (v < 1 || v > 8) fail(p, "must lie in 1..8");
         spec.photon_cutoff = static_cast<unsigned>(v);
       }},
      {"zeno_error_ratio", [&](const toml::node& n, const std::string& p) { spec.zeno_error_ratio = positive(n, p); }},
      {"phase_correction", [&](const toml::node& n, const std::string& p) { spec.phase_correction = as_bool(n, p); }},
      {"relabel_tolerance", [&](const toml::node& n, const std::string& p) { spec.relabel_tolerance = positive(n, p); }},
      {"initial",
       [&](const toml::node& n, const std::string& p) {
         const std::string v = as_string(n, p);
         if (v == "equal") spec.highdim_initial = HighDimInitial::Equal;
         else if (v == "balanced") spec.highdim_initial = HighDimInitial::Balanced;
         else fail(p, "expected \"equal\" or \"balanced\"");
       }},
      {"switch_schedule",
       [&](const toml::node& n, const std::string& p) {
         const auto* arr = n.as_array();
         if (!arr) fail(p, "expected an array of integers");
         spec.switch_schedule.clear();
         for (std::size_t i = 0; i < arr->size(); ++i)
           spec.switch_schedule.push_back(static_cast<int>(as_integer(*arr->get(i), p + "[" + std::to_string(i) + "]")));
       }},
  };

  std::optional<double> amplitude_a, amplitude_b;
  const std::map<std::string, Handler> pulses = {
      {"amplitude",
       [&](const toml::node& n, const std::string& p) {
         const double v = non_negative(n, p);
         spec.pulse_a.amplitude = spec.pulse_b.amplitude = v;
       }},
      {"amplitude_a", [&](const toml::node& n, const std::string& p) { amplitude_a = non_negative(n, p); }},
      {"amplitude_b", [&](const toml::node& n, const std::string& p) { amplitude_b = non_negative(n, p); }},
      {"width",
       [&](const toml::node& n, const std::string& p) {
         const double v = positive(n, p);
         spec.pulse_a.width = spec.pulse_b.width = v;
       }},
      {"delay_a", [&](const toml::node& n, const std::string& p) { spec.pulse_a.delay = non_negative(n, p); }},
      {"delay_b", [&](const toml::node& n, const std::string& p) { spec.pulse_b.delay = non_negative(n, p); }},
  };

  const std::map<std::string, Handler> decoherence = {
      {"kappa",
       [&](const toml::node& n, const std::string& p) {
         spec.decoherence.kappa = non_negative(n, p);
         kappa_given = true;
       }},
      {"gamma",
       [&](const toml::node& n, const std::string& p) {
         spec.decoherence.gamma = non_negative(n, p);
         gamma_given = true;
       }},
      {"kappa_over_g", [&](const toml::node& n, const std::string& p) { kappa_over_g = non_negative(n, p); }},
      {"gamma_over_g", [&](const toml::node& n, const std::string& p) { gamma_over_g = non_negative(n, p); }},
      {"kappa_fiber", [&](const toml::node& n, const std::string& p) { spec.decoherence.kappa_fiber = non_negative(n, p); }},
      {"kappa_cavity", [&](const toml::node& n, const std::string& p) { spec.decoherence.kappa_cavity = non_negative(n, p); }},
      {"gamma_a", [&](const toml::node& n, const std::string& p) { spec.decoherence.gamma_a = non_negative(n, p); }},
      {"gamma_b", [&](const toml::node& n, const std::string& p) { spec.decoherence.gamma_b = non_negative(n, p); }},
      {"mode",
       [&](const toml::node& n, const std::string& p) {
         const std::string v = as_string(n, p);
         if (v == "auto") spec.mode = EvolutionMode::Auto;
         else if (v == "pure") spec.mode = EvolutionMode::Pure;
         else if (v == "density") spec.mode = EvolutionMode::Density;
         else fail(p, "expected \"auto\", \"pure\" or \"density\"");
       }},
  };

  IntegratorSettings& in = spec.integrator;
  const std::map<std::string, Handler> integrator = {
      {"step", [&](const toml::node& n, const std::string& p) { in.step = positive(n, p); }},
      {"max_step", [&](const toml::node& n, const std::string& p) { in.max_auto_step = positive(n, p); }},
      {"step_factor", [&](const toml::node& n, const std::string& p) { in.auto_step_factor = positive(n, p); }},
      {"stride",
       [&](const toml::node& n, const std::string& p) {
         const long long v = as_integer(n, p);
         if (v < 1) fail(p, "must be >= 1");
         in.stride = static_cast<std::size_t>(v);
       }},
      {"samples",
       [&](const toml::node& n, const std::string& p) {
         const long long v = as_integer(n, p);
         if (v < 1) fail(p, "must be >= 1");
         in.target_samples = static_cast<std::size_t>(v);
       }},
      {"tolerance", [&](const toml::node& n, const std::string& p) { in.tolerance = positive(n, p); }},
      {"check_positivity", [&](const toml::node& n, const std::string& p) { in.check_positivity = as_bool(n, p); }},
      {"t_start", [&](const toml::node& n, const std::string& p) { t_start = finite(n, p); }},
      {"t_end", [&](const toml::node& n, const std::string& p) { t_end = finite(n, p); }},
  };

  const std::map<std::string, Handler> sweep = {
      {"kappa_over_g", [&](const toml::node& n, const std::string& p) { cfg.sweep.kappa_over_g = rate_list(n, p); }},
      {"gamma_over_g", [&](const toml::node& n, const std::string& p) { cfg.sweep.gamma_over_g = rate_list(n, p); }},
  };

  const std::map<std::string, Handler> output = {
      {"observables",
       [&](const toml::node& n, const std::string& p) {
         const auto* arr = n.as_array();
         if (!arr) fail(p, "expected an array of strings");
         cfg.observables.clear();
         for (std::size_t i = 0; i < arr->size(); ++i)
           cfg.observables.push_back(as_string(*arr->get(i), p + "[" + std::to_string(i) + "]"));
       }},
  };

  const std::map<std::string, const std::map<std::string, Handler>*> sections = {
      {"system", &system},         {"pulses", &pulses}, {"decoherence", &decoherence},
      {"integrator", &integrator}, {"sweep", &sweep},   {"output", &output},
  };

  // Fixed section order so cross-key rules see a complete picture.
  for (auto&& [key, node] : root) {
    const std::string name(key.str());
    if (!sections.count(name)) fail("[" + name + "]", "unknown section");
    if (!node.is_table()) fail("[" + name + "]", "expected a table");
  }
  for (const char* name : {"system", "pulses", "decoherence", "integrator", "sweep", "output"})
    if (const auto* t = root[name].as_table()) apply_section(*t, name, *sections.at(name));

  if (eta_over_g) {
    if (eta_given) fail("[system].eta_over_g", "conflicts with [system].eta");
    spec.coupling.eta = *eta_over_g * spec.coupling.g;
  }
  if (kappa_over_g) {
    if (kappa_given) fail("[decoherence].kappa_over_g", "conflicts with [decoherence].kappa");
    spec.decoherence.kappa = *kappa_over_g * spec.coupling.g;
  }
  if (gamma_over_g) {
    if (gamma_given) fail("[decoherence].gamma_over_g", "conflicts with [decoherence].gamma");
    spec.decoherence.gamma = *gamma_over_g * spec.coupling.g;
  }
  if (amplitude_a) spec.pulse_a.amplitude = *amplitude_a;
  if (amplitude_b) spec.pulse_b.amplitude = *amplitude_b;
  if (t_start || t_end) {
    const Window pulses_span = spec.window();
    spec.window_override = Window{t_start.value_or(pulses_span.start), t_end.value_or(pulses_span.end)};
    if (spec.window_override->end < spec.window_override->start)
      fail("[integrator].t_end", "must not precede t_start");
  }
  if (spec.family == Family::TwoAtom && spec.n != 2) fail("[system].n", "the two-atom family has n = 2");
  if (spec.family == Family::NAtom && spec.n < 2) fail("[system].n", "the n-atom family needs n >= 2");
  if (!spec.switch_schedule.empty() && spec.family != Family::NAtom)
    fail("[system].switch_schedule", "only the n-atom family has switches");
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[system]: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string spec_to_json(const ScenarioSpec& spec, int indent) {
  using nlohmann::ordered_json;
  auto pulse = [](const PulseShape& p) {
    return ordered_json{{"amplitude", p.amplitude}, {"width", p.width}, {"delay", p.delay}};
  };
  ordered_json overrides = ordered_json::object();
  for (const auto& [k, v] : spec.coupling.g_overrides) overrides[k] = v;
  const auto& d = spec.decoherence;
  const char* mode = spec.mode == EvolutionMode::Auto ? "auto" : spec.mode == EvolutionMode::Pure ? "pure" : "density";
  const Window w = spec.window();
  ordered_json j = {
      {"family", to_string(spec.family)},
      {"n", spec.n},
      {"g", spec.coupling.g},
      {"eta", spec.coupling.eta},
      {"g_overrides", overrides},
      {"cutoff", spec.photon_cutoff},
      {"pulse_a", pulse(spec.pulse_a)},
      {"pulse_b", pulse(spec.pulse_b)},
      {"window", {w.start, w.end}},
      {"decoherence",
       {{"kappa", d.kappa},
        {"gamma", d.gamma},
        {"kappa_fiber", d.fiber_rate()},
        {"kappa_cavity", d.cavity_rate()},
        {"gamma_a", d.atom_a_rate()},
        {"gamma_b", d.atom_b_rate()},
        {"mode", mode}}},
      {"integrator",
       {{"step", spec.integrator.step},
        {"max_step", spec.integrator.max_auto_step},
        {"step_factor", spec.integrator.auto_step_factor},
        {"stride", spec.integrator.stride},
        {"samples", spec.integrator.target_samples},
        {"tolerance", spec.integrator.tolerance},
        {"check_positivity", spec.integrator.check_positivity}}},
      {"zeno_error_ratio", spec.zeno_error_ratio},
      {"phase_correction", spec.phase_correction},
      {"relabel_tolerance", spec.relabel_tolerance},
      {"initial", spec.highdim_initial == HighDimInitial::Equal ? "equal" : "balanced"},
      {"switch_schedule", spec.switch_schedule},
  };
  return j.dump(indent);
}

}  // namespace qzd
