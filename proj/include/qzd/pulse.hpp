#pragma once

namespace qzd {

// Single sin^4 lobe: amplitude * sin^4(pi (t - delay) / width) on
// [delay, delay + width], exactly zero elsewhere. Times in units of t0 = 1/Omega0.
struct PulseShape {
  double amplitude = 1.0;
  double width = 31.0;
  double delay = 0.0;

  double value(double t) const;
  double peak() const { return amplitude; }
  double start() const { return delay; }
  double end() const { return delay + width; }

  // Throws ConfigError on negative amplitude/delay or non-positive width.
  void validate() const;

  bool operator==(const PulseShape&) const = default;
};

double pulse_value(const PulseShape& p, double t);

}  // namespace qzd
