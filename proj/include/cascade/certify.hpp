#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cascade/grid.hpp"
#include "cascade/kernels.hpp"
#include "cascade/plant.hpp"

namespace cascade {

// Tuning scalars and the LMI unknowns. For Dirichlet actuation r1, p2 and
// lambda1 are ignored.
struct TuningParams {
  double delta0 = 0.3;
  double delta1 = 0.3;
  double r = 1.0;
  double r1 = 1.0;
  double lambda = 1.0;
  double lambda1 = 0.0;
  double p1 = 1.0;
  double p2 = 1.0;
  Eigen::MatrixXd P;  // empty means identity of the plant dimension
};

// Throws InvalidArgument unless 0 < delta1 <= delta0, r > 0 and, for
// Neumann, 0 < r1 < 2.
void validate(const TuningParams& t, Actuation actuation);

// Unique root of delta = delta0 - delta1 exp(2 delta h) on [0, delta0 - delta1].
double halanay_decay(double delta0, double delta1, double h);

// Kernel maxima entering zeta and the saturation constants, taken over the
// grid nodes plus midpoints.
struct KernelMaxima {
  double gamma = 0.0;        // max |gamma(x)|
  double gamma_prime = 0.0;  // max |gamma'(x)|
  double k = 0.0;            // max |k(x,y)|
  double k_x = 0.0;          // max |k_x(x,y)|
  double q = 0.0;            // max |q(x,y)|
  double q_x = 0.0;          // max |q_x(x,y)|
  double q_diag = 0.0;       // max |q(x,x)|
  double l = 0.0;            // max |l(x,y)|
  double psi_1 = 0.0;        // |psi(1)|
  double psi_prime_1 = 0.0;  // |psi'(1)|
  double n_1 = 0.0;          // max_y |n(1,y)|
  double n_x_1 = 0.0;        // max_y |n_x(1,y)|
  double l_1 = 0.0;          // max_y |l(1,y)|
  double l_x_1 = 0.0;        // max_y |l_x(1,y)|
  double l_11 = 0.0;         // |l(1,1)|
};

KernelMaxima kernel_maxima(const KernelSet& kernels);

// zeta = (1 + max|q|)^2 (max|gamma|)^2
double zeta_bound(const KernelSet& kernels);
double zeta_bound(const KernelMaxima& m);

struct DirichletLmis {
  Eigen::MatrixXd theta1;  // (2n+1) x (2n+1)
  Eigen::MatrixXd theta2;  // 2 x 2
};

struct NeumannLmis {
  Eigen::MatrixXd theta1;  // (2n+1) x (2n+1)
  Eigen::MatrixXd theta2;  // 3 x 3
  double scalar = 0.0;     // must be <= 0
};

DirichletLmis assemble_dirichlet_lmis(const PlantParams& plant, const DesignGains& gains,
                                      const TuningParams& tuning, double zeta);
NeumannLmis assemble_neumann_lmis(const PlantParams& plant, const DesignGains& gains,
                                  const TuningParams& tuning, double zeta);

struct FeasibilityResult {
  bool feasible = false;
  std::vector<double> max_eigenvalues;
};

// Every matrix must have lambda_max <= -margin. Throws InvalidArgument on
// asymmetry beyond rounding.
FeasibilityResult check_feasibility(std::span<const Eigen::MatrixXd> matrices, double margin = 1e-9);

struct SaturationConstants {
  double zeta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;  // Neumann only
  double xi = 0.0;  // Neumann only
  double M1 = 0.0;
  double M2 = 0.0;
};

SaturationConstants saturation_constants_dirichlet(const KernelSet& kernels);
SaturationConstants saturation_constants_neumann(const KernelSet& kernels);
SaturationConstants saturation_constants(const KernelSet& kernels, Actuation actuation);

struct SearchConfig {
  int seeds = 8;
  std::uint64_t seed = 1;
  int max_evals_per_seed = 20000;
  double initial_step = 0.25;
  double min_step = 1e-10;
  double beta_cap = 1e6;
  double rel_width = 1e-3;
  double margin = 1e-9;
  Exec exec = Exec::Parallel;
};

enum class CertificateStatus { Feasible, Infeasible, Undetermined };
std::string_view to_string(CertificateStatus s);
CertificateStatus certificate_status_from_string(std::string_view s);

struct Certificate {
  Actuation actuation = Actuation::Dirichlet;
  CertificateStatus status = CertificateStatus::Undetermined;
  double beta = 0.0;
  double delta = 0.0;
  SaturationConstants constants;
  TuningParams witness;
  std::string diagnostic;

  bool feasible() const { return status == CertificateStatus::Feasible; }
  double admissible_radius() const { return beta > 0.0 ? 1.0 / beta : 0.0; }
  // beta M1, beta M2 [, 4 beta]
  std::vector<double> admissible_coefficients() const;
};

// Smallest beta for which the stability LMIs, P <= beta I, p1 [, p2] <= beta
// and the saturation-avoidance bounds admit a witness. Outer geometric
// bisection on beta; inner multi-start pattern search on the normalized
// unknowns. `tuning` supplies delta0, delta1, r, r1 and the first seed.
Certificate minimize_beta(const PlantParams& plant, const DesignGains& gains, Actuation actuation,
                          const KernelSet& kernels, const TuningParams& tuning,
                          const SearchConfig& config = {});

// Stability-only search (no beta or saturation constraints), for decay-rate
// reporting with delta0 > delta1. beta is left at zero.
Certificate find_stability_witness(const PlantParams& plant, const DesignGains& gains,
                                   Actuation actuation, const KernelSet& kernels,
                                   const TuningParams& tuning, const SearchConfig& config = {});

// The LMI matrices of a witness, ready for check_feasibility.
std::vector<Eigen::MatrixXd> witness_matrices(const PlantParams& plant, const DesignGains& gains,
                                              Actuation actuation, const TuningParams& witness,
                                              double zeta, double* scalar = nullptr);

struct Membership {
  double value = 0.0;
  bool inside = false;
};

// beta (M1 |X0|^2 + M2 ||u0||^2 [+ 4 ||u0'||^2]).
Membership admissible_set_membership(const Certificate& certificate, double X0_max, double u0_norm_sq,
                                     std::optional<double> u0_deriv_norm_sq = std::nullopt);

}  // namespace cascade
