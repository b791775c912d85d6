#pragma once

namespace cascade::bessel {

// F(t) = 1/2 * sum_{m>=0} (t/4)^m / (m! (m+1)!), together with F'(t).
//
// With t = z^2 this is I1(z)/z; with t = -z^2 it is J1(z)/z. Working in the
// squared argument keeps everything real for either sign of t, which is what
// lets the kernels accept a + c < 0.
struct SeriesValue {
  double value = 0.0;
  double derivative = 0.0;
  int terms = 0;
};

// Terms are accumulated until the next one is below 1e-15 relative to the
// partial sum, or 40 terms have been added.
SeriesValue half_bessel_ratio(double t);

// Kernel of the (X, w) -> (X, z) transform, q(x, y) = -(a+c) x I1(r)/r with
// r^2 = (a+c)(x^2 - y^2), and its partial derivatives.
struct KernelPoint {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

KernelPoint q_kernel(double lambda, double x, double y);

// Kernel of the inverse transform, l(x, y) = -(a+c) x J1(r)/r.
KernelPoint l_kernel(double lambda, double x, double y);

}  // namespace cascade::bessel
