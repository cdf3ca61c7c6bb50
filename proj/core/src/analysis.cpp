#include "selforg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace selforg {

ThresholdDetector::ThresholdDetector(ThresholdOptions opts, long long total_steps) : opts_(opts) {
  baseline_steps_ = std::max<long long>(1, static_cast<long long>(std::floor(opts_.baseline_fraction * total_steps)));
}

double ThresholdDetector::baseline() const {
  return baseline_count_ > 0 ? baseline_sum_ / static_cast<double>(baseline_count_) : 0.0;
}

std::optional<double> ThresholdDetector::floor() const {
  if (opts_.absolute_floor) return opts_.absolute_floor;
  if (baseline_count_ < baseline_steps_) return std::nullopt;
  return opts_.factor * baseline();
}

std::optional<double> ThresholdDetector::floor_at(double power) const {
  auto fl = floor();
  if (!fl || opts_.absolute_floor || !opts_.pump_scaled) return fl;
  const double p0 = baseline_power_sum_ / static_cast<double>(baseline_count_);
  if (p0 > 0.0) *fl *= power / p0;
  return fl;
}

void ThresholdDetector::feed(long long step, double power, double photons) {
  if (step < baseline_steps_) {
    baseline_sum_ += photons;
    baseline_power_sum_ += power;
    ++baseline_count_;
  }
  if (critical_) return;
  const auto fl = floor_at(power);
  if (!fl) return;
  if (photons > *fl) {
    if (run_ == 0) run_start_power_ = power;
    if (++run_ >= opts_.consecutive_steps) critical_ = run_start_power_;
  } else {
    run_ = 0;
  }
}

double oscillation_metric(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples.size());
  return std::sqrt(var) / std::abs(mean);
}

double binomial_two_sided_p(std::size_t successes, std::size_t trials) {
  if (successes > trials) throw std::invalid_argument("binomial_two_sided_p: successes > trials");
  if (trials == 0) return 1.0;
  const double n = static_cast<double>(trials);
  auto log_pmf = [n](double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0);
  };
  const double observed = log_pmf(static_cast<double>(successes));
  double p = 0.0;
  for (std::size_t k = 0; k <= trials; ++k) {
    const double lk = log_pmf(static_cast<double>(k));
    if (lk <= observed + 1e-9) p += std::exp(lk);
  }
  return std::min(1.0, p);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

}  // namespace selforg
