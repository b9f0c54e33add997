#include "qzd/pulse.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qzd/types.hpp"

namespace qzd {

double PulseShape::value(double t) const {
  const double x = t - delay;
  if (x < 0.0 || x > width) return 0.0;
  const double s = std::sin(std::numbers::pi * x / width);
  const double s2 = s * s;
  return amplitude * s2 * s2;
}

void PulseShape::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw ConfigError("pulse amplitude must be finite and >= 0, got " + std::to_string(amplitude));
  if (!(width > 0.0) || !std::isfinite(width))
    throw ConfigError("pulse width must be finite and > 0, got " + std::to_string(width));
  if (!(delay >= 0.0) || !std::isfinite(delay))
    throw ConfigError("pulse delay must be finite and >= 0, got " + std::to_string(delay));
}

double pulse_value(const PulseShape& p, double t) { return p.value(t); }

}  // namespace qzd
