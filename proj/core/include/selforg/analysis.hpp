#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace selforg {

struct ThresholdOptions {
  double baseline_fraction{0.05};  // leading share of the ramp used as baseline
  double factor{10.0};             // floor = factor * baseline
  int consecutive_steps{50};
  std::optional<double> absolute_floor;  // overrides the baseline rule
  // Scale the floor with P / (mean P over the baseline window), following
  // the linear growth of the noise-seeded photon number with pump power.
  bool pump_scaled{false};
};

// Online onset detector for a photon-number trace sampled once per step.
// The floor is `factor` times the mean photon number over the first
// `baseline_fraction` of the steps; the onset is the pump value at the
// first step of the first run of `consecutive_steps` samples above it.
// With pump_scaled the floor at power P is multiplied by P / P_baseline.
class ThresholdDetector {
 public:
  ThresholdDetector(ThresholdOptions opts, long long total_steps);

  void feed(long long step, double power, double photons);

  std::optional<double> critical_power() const { return critical_; }
  // Floor at the baseline power; nullopt while the baseline is incomplete.
  std::optional<double> floor() const;
  std::optional<double> floor_at(double power) const;
  double baseline() const;

 private:
  ThresholdOptions opts_;
  long long baseline_steps_{};
  double baseline_sum_{};
  double baseline_power_sum_{};
  long long baseline_count_{};
  int run_{};
  double run_start_power_{};
  std::optional<double> critical_;
};

// std / mean of the samples (population std). 0 for an all-zero window.
double oscillation_metric(std::span<const double> samples);

// Two-sided exact binomial test of `successes` out of `trials` against
// p = 1/2 (sum of probabilities no larger than the observed one).
double binomial_two_sided_p(std::size_t successes, std::size_t trials);

// Coefficient of determination of a least-squares line through (x, y).
struct LinearFit {
  double slope{};
  double intercept{};
  double r_squared{};
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace selforg
