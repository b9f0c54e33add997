#pragma once

#include <cstddef>

namespace qzd {

struct IntegratorSettings {
  // Fixed RK4 step in units of t0. Zero selects min(max_auto_step,
  // auto_step_factor / spectral bound of H).
  double step = 0.0;
  double max_auto_step = 2e-4;
  double auto_step_factor = 0.1;
  // Record every `stride` steps; zero targets about `target_samples` samples.
  std::size_t stride = 0;
  std::size_t target_samples = 512;
  // Allowed norm/trace drift and negative-eigenvalue depth.
  double tolerance = 1e-6;
  // Density runs: check positivity at sample points.
  bool check_positivity = true;

  void validate() const;
};

struct Window {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

}  // namespace qzd
