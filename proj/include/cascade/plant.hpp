#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

namespace cascade {

enum class Actuation { Dirichlet, Neumann };

std::string_view to_string(Actuation a);
Actuation actuation_from_string(std::string_view s);

// tau(t) == value for all t.
struct ConstantDelay {
  double value = 0.4;
};

// tau(t) = (lo + hi)/2 + (hi - lo)/2 * sin(omega * t), so lo <= tau <= hi.
struct SinusoidalDelay {
  double lo = 0.2;
  double hi = 0.4;
  double omega = 1.0;
};

class DelayProfile {
 public:
  DelayProfile() = default;
  DelayProfile(ConstantDelay c) : profile_(c) {}
  DelayProfile(SinusoidalDelay s) : profile_(s) {}

  double operator()(double t) const;
  double min_delay() const;
  double max_delay() const;

  const std::variant<ConstantDelay, SinusoidalDelay>& variant() const {
    return profile_;
  }

 private:
  std::variant<ConstantDelay, SinusoidalDelay> profile_{ConstantDelay{}};
};

// Coefficients of the delayed ODE / reaction-diffusion cascade
//   X'  = A X + A1 X(t - tau) + B u(0, t)
//   u_t = u_xx + a2 u(x, t - tau) + a u,   u_x(0, t) = 0
// with boundary actuation at x = 1 saturated at u_bar.
struct PlantParams {
  Eigen::MatrixXd A;
  Eigen::MatrixXd A1;
  Eigen::MatrixXd B;  // n x 1
  double a = 0.0;
  double a2 = 0.0;
  double h0 = 0.4;
  double h = 0.4;
  double u_bar = 1.0;
  DelayProfile delay;

  Eigen::Index dim() const { return A.rows(); }
};

// ODE feedback row K and target damping c.
struct DesignGains {
  Eigen::RowVectorXd K;
  double c = 1.0;
};

// Throws InvalidArgument when shapes, delay bounds, saturation level or
// controllability are off.
void validate(const PlantParams& plant);

// Additionally checks the gain shape and c > 0. Stability of A + BK is not
// enforced here: an unstabilizing K is a legitimate input whose certificate
// simply comes back infeasible.
void validate(const PlantParams& plant, const DesignGains& gains);

bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
bool is_hurwitz(const Eigen::MatrixXd& M);

}  // namespace cascade
