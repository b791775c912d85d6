#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cascade {

// Execution policy for the data-parallel loops. Serial is the reference
// implementation; Parallel uses OpenMP and must agree with it bit-for-bit up
// to floating-point reassociation (the loops here never reassociate).
enum class Exec { Serial, Parallel };

// Uniform grid x_i = i * dx on [0, 1], i = 0..intervals.
struct UniformGrid {
  std::size_t intervals = 25;

  static UniformGrid from_step(double dx);

  double dx() const { return 1.0 / static_cast<double>(intervals); }
  std::size_t nodes() const { return intervals + 1; }
  double x(std::size_t i) const { return static_cast<double>(i) * dx(); }

  bool operator==(const UniformGrid&) const = default;
};

// Lower-triangular table T(i, j), 0 <= j <= i <= N, stored as a dense
// row-major (N+1) x (N+1) array with zeros above the diagonal.
class TriangularTable {
 public:
  TriangularTable() = default;
  explicit TriangularTable(std::size_t nodes) : n_(nodes), data_(nodes * nodes, 0.0) {}

  std::size_t nodes() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, i + 1}; }
  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

  // Largest |T(i, j)| over the stored triangle.
  double max_abs() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Quadrature weights for the Volterra integrals  int_0^{x_i} g(y) dy  on a
// uniform grid: composite Simpson for an even number of subintervals,
// Simpson plus a trailing 3/8 panel for an odd number >= 3, trapezoid for a
// single subinterval. Every row is exact for cubics, so the discrete
// transforms invert each other to O(dx^4).
class VolterraWeights {
 public:
  explicit VolterraWeights(const UniformGrid& grid);

  const UniformGrid& grid() const { return grid_; }
  std::span<const double> row(std::size_t i) const { return w_.row(i); }

  // int_0^{x_i} g, with g sampled at y_0..y_i.
  double integrate(std::size_t i, std::span<const double> g) const;
  // int_0^1 g.
  double integrate(std::span<const double> g) const { return integrate(grid_.intervals, g); }

 private:
  UniformGrid grid_;
  TriangularTable w_;
};

// out_i = int_0^{x_i} K(x_i, y) f(y) dy for every node.
void volterra_apply(const VolterraWeights& w, const TriangularTable& kernel,
                    std::span<const double> f, std::span<double> out,
                    Exec exec = Exec::Parallel);

namespace detail {
void volterra_apply_serial(const VolterraWeights& w, const TriangularTable& kernel,
                           std::span<const double> f, std::span<double> out);
void volterra_apply_omp(const VolterraWeights& w, const TriangularTable& kernel,
                        std::span<const double> f, std::span<double> out);
}  // namespace detail

}  // namespace cascade
