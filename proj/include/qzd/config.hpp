#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qzd/model.hpp"

namespace qzd {

// Loss-scale grid in units of g. Empty axes mean "no sweep configured".
struct SweepGrid {
  std::vector<double> kappa_over_g;
  std::vector<double> gamma_over_g;

  bool empty() const { return kappa_over_g.empty() || gamma_over_g.empty(); }
  std::size_t cells() const { return kappa_over_g.size() * gamma_over_g.size(); }
};

struct RunConfig {
  ScenarioSpec spec;
  SweepGrid sweep;
  // Time-series columns after t_over_t0. Empty selects the family default.
  std::vector<std::string> observables;
};

// Strict parse of a TOML document with sections [system], [pulses],
// [decoherence], [integrator], [sweep], [output]. Syntax errors carry
// "<source>:<line>:<column>"; semantic errors name the key as "[section].key".
RunConfig parse_config(std::string_view text, std::string_view source = "config");
RunConfig load_config(const std::filesystem::path& path);

// Canonical JSON echo of a scenario (stable key order and number format).
std::string spec_to_json(const ScenarioSpec& spec, int indent = -1);

}  // namespace qzd
