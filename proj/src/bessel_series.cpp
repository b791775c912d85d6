#include "cascade/bessel_series.hpp"

#include <cmath>

namespace cascade::bessel {

namespace {
constexpr int kMaxTerms = 40;
constexpr double kRelTol = 1e-15;
}  // namespace

SeriesValue half_bessel_ratio(double t) {
  const double u = 0.25 * t;

  // value:      sum_m u^m / (m! (m+1)!)
  double term = 1.0, sum = 0.0;
  int terms = 0;
  while (terms < kMaxTerms) {
    sum += term;
    ++terms;
    term *= u / (static_cast<double>(terms) * static_cast<double>(terms + 1));
    if (std::abs(term) < kRelTol * std::abs(sum)) break;
  }

  // derivative: sum_k u^k / (4 k! (k+2)!)
  double d = 0.125, dsum = 0.0;
  for (int k = 0; k < kMaxTerms; ++k) {
    dsum += d;
    d *= u / (static_cast<double>(k + 1) * static_cast<double>(k + 3));
    if (std::abs(d) < kRelTol * std::abs(dsum)) break;
  }
  return {0.5 * sum, 0.5 * dsum, terms};
}

KernelPoint q_kernel(double lambda, double x, double y) {
  if (lambda == 0.0) return {};
  const double t = lambda * (x * x - y * y);
  const SeriesValue f = half_bessel_ratio(t);
  return {-lambda * x * f.value,
          -lambda * f.value - 2.0 * lambda * lambda * x * x * f.derivative,
          2.0 * lambda * lambda * x * y * f.derivative};
}

KernelPoint l_kernel(double lambda, double x, double y) {
  if (lambda == 0.0) return {};
  const double t = -lambda * (x * x - y * y);
  const SeriesValue f = half_bessel_ratio(t);
  return {-lambda * x * f.value,
          -lambda * f.value + 2.0 * lambda * lambda * x * x * f.derivative,
          -2.0 * lambda * lambda * x * y * f.derivative};
}

}  // namespace cascade::bessel
