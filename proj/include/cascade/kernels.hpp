#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cascade/grid.hpp"
#include "cascade/plant.hpp"

namespace cascade {

// gamma, psi and their derivatives at arbitrary abscissae; row i of each
// matrix is the 1 x n row at x[i].
struct GammaPsiSamples {
  std::vector<double> x;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd gamma_prime;
  Eigen::MatrixXd psi;
  Eigen::MatrixXd psi_prime;
};

// gamma(x) = [K 0] exp(M x) [I; 0] with M = [[0, A - aI], [I, 0]], and psi
// the same with A + BK - aI. Derivatives are [K 0] M exp(M x) [I; 0].
// `x` must be sorted and inside [0, 1]. Throws NumericalError when the matrix
// exponential comes back non-finite.
GammaPsiSamples compute_gamma_psi(const PlantParams& plant, const DesignGains& gains,
                                  std::span<const double> x);

// k(x, y) = int_0^{x-y} gamma(s) B ds and n(x, y) likewise with psi, plus
// k_x = gamma(x - y) B, n_x = psi(x - y) B.
struct KnTables {
  TriangularTable k, k_x, n, n_x;
  // k and n as functions of s = x - y at spacing 2 * node spacing, from 0 to 1.
  std::vector<double> k_profile, n_profile;
  double profile_step = 0.0;
};

// `nodes` must be uniform on [0, 1] with spacing dx / (2 r) for a positive
// integer r; composite Simpson on node pairs produces the profiles, which are
// then read off onto the triangular grid. If the nodes are not aligned with
// the grid, or a Richardson estimate of the quadrature error at s = 1 exceeds
// `tol`, QuadratureResolutionError carries the node spacing that would do.
KnTables compute_k_n(const GammaPsiSamples& nodes, const PlantParams& plant,
                     const UniformGrid& grid, double tol = 1e-8);

struct QlTables {
  TriangularTable q, q_x, l, l_x;
};

// q(x, y) = -(a+c) x I1(r)/r and l(x, y) = -(a+c) x J1(r)/r, r^2 = (a+c)(x^2-y^2),
// evaluated as power series in r^2. With allow_negative = false a + c < 0 is
// rejected instead of continued analytically.
QlTables compute_q_l(double a, double c, const UniformGrid& grid, Exec exec = Exec::Parallel,
                     bool allow_negative = true);

namespace detail {
QlTables compute_q_l_serial(double lambda, const UniformGrid& grid);
QlTables compute_q_l_omp(double lambda, const UniformGrid& grid);
}  // namespace detail

// Every kernel needed by the transforms, the controllers and the bound
// constants, sampled on one uniform grid. Immutable once built.
struct KernelSet {
  UniformGrid grid;
  double reaction_sum = 0.0;  // a + c

  // rows = grid nodes
  Eigen::MatrixXd gamma, gamma_prime, psi, psi_prime;
  // rows = 2N + 1 half-step samples, used to refine maxima
  Eigen::MatrixXd gamma_half, gamma_prime_half, psi_half, psi_prime_half;
  std::vector<double> k_half, n_half;    // k, n against x - y at half steps
  std::vector<double> kx_half, nx_half;  // gamma B, psi B at half steps

  TriangularTable k, k_x, n, n_x, q, q_x, l, l_x;

  double dx() const { return grid.dx(); }
  Eigen::Index dim() const { return gamma.cols(); }
};

KernelSet build_kernels(const PlantParams& plant, const DesignGains& gains, const UniformGrid& grid,
                        Exec exec = Exec::Parallel);

// All kernels identically zero: identity transforms and U == 0. Drives
// open-loop runs through the closed-loop machinery.
KernelSet zero_kernels(const UniformGrid& grid, Eigen::Index n);

// One line of the residual report.
struct Residual {
  enum class Order { Exact, Second };
  std::string name;
  double value = 0.0;  // max absolute residual
  double scale = 0.0;  // magnitude of the quantity the residual is measured against
  Order order = Order::Second;

  // Exact identities must hold to rounding; discretized ones to 5 dx^2 scale.
  double tolerance(double dx) const;
  bool passes(double dx) const;
};

struct KernelResidualReport {
  double dx = 0.0;
  std::vector<Residual> entries;

  bool all_pass() const;
  const Residual& at(const std::string& name) const;
};

// Second-difference residuals of the kernel ODE/PDE systems, boundary and
// diagonal conditions, and finite-difference consistency of the stored
// derivatives. Pure diagnostic; never throws on bad tables.
KernelResidualReport verify_kernel_pdes(const KernelSet& kernels, const PlantParams& plant,
                                        const DesignGains& gains);

}  // namespace cascade
