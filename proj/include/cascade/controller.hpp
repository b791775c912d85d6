#pragma once

#include <Eigen/Dense>

#include "cascade/kernels.hpp"
#include "cascade/plant.hpp"
#include "cascade/transform.hpp"

namespace cascade {

// sign(U) * min(|U|, u_bar)
double saturate(double U, double u_bar);

// U = int k(1,y) u + gamma(1) X + int q(1,y) w, with w from u_to_w.
double dirichlet_u(const CoupledState& s, const KernelSet& kernels);
// U = int k_x(1,y) u + gamma'(1) X + q(1,1) w(1) + int q_x(1,y) w.
double neumann_u(const CoupledState& s, const KernelSet& kernels);

// The same laws written in target coordinates:
//   int n(1,y) [z + int l z] + psi(1) X + int l(1,y) z
//   int n_x(1,y) [z + int l z] + psi'(1) X + l(1,1) z(1) + int l_x(1,y) z
double dirichlet_u_from_z(const CoupledState& z, const KernelSet& kernels);
double neumann_u_from_z(const CoupledState& z, const KernelSet& kernels);

// Boundary feedback with the kernel integrals folded into one linear
// functional U = field_gain . u + state_gain . X, so each evaluation costs
// O(N). Holds a reference to the kernels, which must outlive it.
class ControlLaw {
 public:
  ControlLaw(Actuation actuation, const KernelSet& kernels, double u_bar, bool saturated = true);
  ControlLaw(Actuation, KernelSet&&, double, bool = true) = delete;

  Actuation actuation() const { return actuation_; }
  const KernelSet& kernels() const { return *kernels_; }
  double u_bar() const { return u_bar_; }
  bool saturated() const { return saturated_; }

  // Unsaturated value.
  double raw(const Eigen::VectorXd& X, std::span<const double> u) const;
  double raw(const CoupledState& s) const { return raw(s.X, s.field.values); }
  // Value actually applied at the boundary.
  double operator()(const CoupledState& s) const;
  double apply(double raw_value) const { return saturated_ ? saturate(raw_value, u_bar_) : raw_value; }

  const Eigen::VectorXd& field_gain() const { return field_gain_; }
  const Eigen::RowVectorXd& state_gain() const { return state_gain_; }

 private:
  Actuation actuation_;
  const KernelSet* kernels_;
  double u_bar_;
  bool saturated_;
  Eigen::VectorXd field_gain_;
  Eigen::RowVectorXd state_gain_;
};

}  // namespace cascade
