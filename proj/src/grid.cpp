#include "cascade/grid.hpp"

#include <cmath>
#include <string>

#include "cascade/error.hpp"

namespace cascade {

namespace {
// Below this many rows the OpenMP fork/join costs more than the loop.
constexpr std::size_t kParallelRows = 96;
}  // namespace

UniformGrid UniformGrid::from_step(double dx) {
  if (!(dx > 0.0) || dx > 1.0) throw InvalidArgument("grid step must lie in (0, 1]");
  const double n = 1.0 / dx;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * rounded)
    throw InvalidArgument("grid step " + std::to_string(dx) + " does not divide [0, 1]");
  return UniformGrid{static_cast<std::size_t>(rounded)};
}

double TriangularTable::max_abs() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

VolterraWeights::VolterraWeights(const UniformGrid& grid) : grid_(grid), w_(grid.nodes()) {
  const double h = grid.dx();
  for (std::size_t i = 1; i < grid.nodes(); ++i) {
    if (i == 1) {
      w_(1, 0) = w_(1, 1) = 0.5 * h;
      continue;
    }
    // Simpson over the first `even` subintervals.
    const std::size_t even = (i % 2 == 0) ? i : i - 3;
    for (std::size_t j = 0; j + 2 <= even; j += 2) {
      w_(i, j) += h / 3.0;
      w_(i, j + 1) += 4.0 * h / 3.0;
      w_(i, j + 2) += h / 3.0;
    }
    if (i % 2 == 1) {
      const std::size_t s = i - 3;
      w_(i, s) += 3.0 * h / 8.0;
      w_(i, s + 1) += 9.0 * h / 8.0;
      w_(i, s + 2) += 9.0 * h / 8.0;
      w_(i, s + 3) += 3.0 * h / 8.0;
    }
  }
}

double VolterraWeights::integrate(std::size_t i, std::span<const double> g) const {
  if (g.size() < i + 1) throw GridMismatch("integrand shorter than the integration row");
  const auto wr = w_.row(i);
  double s = 0.0;
  for (std::size_t j = 0; j <= i; ++j) s += wr[j] * g[j];
  return s;
}

namespace detail {

namespace {
inline double row_sum(const VolterraWeights& w, const TriangularTable& kernel,
                      std::span<const double> f, std::size_t i) {
  const auto wr = w.row(i);
  const auto kr = kernel.row(i);
  double s = 0.0;
  for (std::size_t j = 0; j <= i; ++j) s += wr[j] * kr[j] * f[j];
  return s;
}
}  // namespace

void volterra_apply_serial(const VolterraWeights& w, const TriangularTable& kernel,
                           std::span<const double> f, std::span<double> out) {
  const std::size_t n = w.grid().nodes();
  for (std::size_t i = 0; i < n; ++i) out[i] = row_sum(w, kernel, f, i);
}

void volterra_apply_omp(const VolterraWeights& w, const TriangularTable& kernel,
                        std::span<const double> f, std::span<double> out) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(w.grid().nodes());
#pragma omp parallel for schedule(dynamic, 16) if (n > static_cast<std::ptrdiff_t>(kParallelRows))
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = row_sum(w, kernel, f, static_cast<std::size_t>(i));
}

}  // namespace detail

void volterra_apply(const VolterraWeights& w, const TriangularTable& kernel,
                    std::span<const double> f, std::span<double> out, Exec exec) {
  const std::size_t n = w.grid().nodes();
  if (kernel.nodes() != n || f.size() != n || out.size() != n)
    throw GridMismatch("Volterra operator, kernel and field must share one grid");
  if (exec == Exec::Serial)
    detail::volterra_apply_serial(w, kernel, f, out);
  else
    detail::volterra_apply_omp(w, kernel, f, out);
}

}  // namespace cascade
