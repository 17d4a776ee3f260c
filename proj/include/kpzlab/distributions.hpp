#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace kpzlab {

using Cdf = std::function<double(double)>;

/// CDF of exp(rate).
inline Cdf exponential_cdf(double rate) {
  return [rate](double z) { return z <= 0 ? 0.0 : -std::expm1(-rate * z); };
}

/// CDF of the difference of two independent exp(rate) variables, a Laplace
/// law with density (rate/2) e^{-rate |z|}.
inline Cdf laplace_cdf(double rate) {
  return [rate](double z) { return z < 0 ? 0.5 * std::exp(rate * z) : 1.0 - 0.5 * std::exp(-rate * z); };
}

/// sup |F_n - F| between the empirical CDF of the samples and `cdf`.
double ks_statistic(std::span<const double> samples, const Cdf& cdf);

/// sup |F_n - G_m| between two empirical CDFs.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace kpzlab
