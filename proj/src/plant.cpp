#include "cascade/plant.hpp"

#include <cmath>

#include "cascade/error.hpp"

namespace cascade {

std::string_view to_string(Actuation a) {
  return a == Actuation::Dirichlet ? "dirichlet" : "neumann";
}

Actuation actuation_from_string(std::string_view s) {
  if (s == "dirichlet" || s == "Dirichlet") return Actuation::Dirichlet;
  if (s == "neumann" || s == "Neumann") return Actuation::Neumann;
  throw InvalidArgument("unknown actuation '" + std::string(s) + "'");
}

double DelayProfile::operator()(double t) const {
  if (const auto* c = std::get_if<ConstantDelay>(&profile_)) return c->value;
  const auto& s = std::get<SinusoidalDelay>(profile_);
  return 0.5 * (s.lo + s.hi) + 0.5 * (s.hi - s.lo) * std::sin(s.omega * t);
}

double DelayProfile::min_delay() const {
  if (const auto* c = std::get_if<ConstantDelay>(&profile_)) return c->value;
  return std::get<SinusoidalDelay>(profile_).lo;
}

double DelayProfile::max_delay() const {
  if (const auto* c = std::get_if<ConstantDelay>(&profile_)) return c->value;
  return std::get<SinusoidalDelay>(profile_).hi;
}

bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd ctrb(n, n * B.cols());
  Eigen::MatrixXd block = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * B.cols(), B.cols()) = block;
    block = A * block;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ctrb);
  lu.setThreshold(1e-10);
  return lu.rank() == n;
}

bool is_hurwitz(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) return false;
  return (es.eigenvalues().real().array() < 0.0).all();
}

void validate(const PlantParams& p) {
  const Eigen::Index n = p.A.rows();
  if (n == 0 || p.A.cols() != n) throw InvalidArgument("A must be a non-empty square matrix");
  if (p.A1.rows() != n || p.A1.cols() != n) throw InvalidArgument("A1 must be n x n");
  if (p.B.rows() != n || p.B.cols() != 1) throw InvalidArgument("B must be n x 1");
  if (!(p.h0 > 0.0)) throw InvalidArgument("lower delay bound h0 must be positive");
  if (!(p.h >= p.h0)) throw InvalidArgument("upper delay bound h must be >= h0");
  if (!(p.u_bar > 0.0)) throw InvalidArgument("saturation level u_bar must be positive");
  const double lo = p.delay.min_delay(), hi = p.delay.max_delay();
  if (lo < p.h0 - 1e-12 || hi > p.h + 1e-12)
    throw InvalidArgument("delay profile leaves the interval [h0, h]");
  if (!is_controllable(p.A, p.B)) throw InvalidArgument("(A, B) is not controllable");
}

void validate(const PlantParams& p, const DesignGains& g) {
  validate(p);
  if (g.K.size() != p.dim()) throw InvalidArgument("gain row K must have n entries");
  if (!(g.c > 0.0)) throw InvalidArgument("target damping c must be positive");
}

}  // namespace cascade
