#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cascade/grid.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

// Samples of a function of x on the uniform grid over [0, 1].
struct Field {
  UniformGrid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const UniformGrid& g) : grid(g), values(g.nodes(), 0.0) {}
  Field(const UniformGrid& g, std::vector<double> v);

  double dx() const { return grid.dx(); }
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

// int_0^1 f^2 by the grid quadrature.
double norm_sq(const Field& f);
// int_0^1 f_x^2 with one-sided second-order differences at the ends.
double derivative_norm_sq(const Field& f);

struct CoupledState {
  Eigen::VectorXd X;
  Field field;
};

// The four Volterra maps between (X, u), (X, w) and (X, z). One instance
// caches the quadrature weights for its kernel grid; it is immutable and
// may be shared between threads.
class Transforms {
 public:
  explicit Transforms(const KernelSet& kernels, Exec exec = Exec::Parallel);

  const KernelSet& kernels() const { return *k_; }
  const VolterraWeights& weights() const { return w_; }

  // w = u - int k u - gamma X
  CoupledState u_to_w(const CoupledState& s) const;
  // z = w - int q w
  CoupledState w_to_z(const CoupledState& s) const;
  // w = z + int l z
  CoupledState z_to_w(const CoupledState& s) const;
  // u = w + int n w + psi X
  CoupledState w_to_u(const CoupledState& s) const;

 private:
  void check(const CoupledState& s) const;

  const KernelSet* k_;
  VolterraWeights w_;
  Exec exec_;
};

CoupledState u_to_w(const CoupledState& s, const KernelSet& kernels);
CoupledState w_to_z(const CoupledState& s, const KernelSet& kernels);
CoupledState z_to_w(const CoupledState& s, const KernelSet& kernels);
CoupledState w_to_u(const CoupledState& s, const KernelSet& kernels);

}  // namespace cascade
