#include "cascade/controller.hpp"

#include <algorithm>
#include <cmath>

#include "cascade/error.hpp"

namespace cascade {

double saturate(double U, double u_bar) {
  return std::copysign(std::min(std::abs(U), u_bar), U);
}

namespace {

// int_0^1 K(1, y) f(y) dy
double boundary_integral(const VolterraWeights& w, const TriangularTable& K, std::span<const double> f) {
  const std::size_t N = w.grid().intervals;
  const auto wr = w.row(N);
  const auto kr = K.row(N);
  double s = 0.0;
  for (std::size_t j = 0; j <= N; ++j) s += wr[j] * kr[j] * f[j];
  return s;
}

double row_times(const Eigen::MatrixXd& rows, Eigen::Index i, const Eigen::VectorXd& X) {
  return rows.row(i).dot(X);
}

}  // namespace

double dirichlet_u(const CoupledState& s, const KernelSet& ks) {
  const Transforms T(ks);
  const CoupledState w = T.u_to_w(s);
  const auto N = static_cast<Eigen::Index>(ks.grid.intervals);
  return boundary_integral(T.weights(), ks.k, s.field.values) + row_times(ks.gamma, N, s.X) +
         boundary_integral(T.weights(), ks.q, w.field.values);
}

double neumann_u(const CoupledState& s, const KernelSet& ks) {
  const Transforms T(ks);
  const CoupledState w = T.u_to_w(s);
  const std::size_t N = ks.grid.intervals;
  return boundary_integral(T.weights(), ks.k_x, s.field.values) +
         row_times(ks.gamma_prime, static_cast<Eigen::Index>(N), s.X) + ks.q(N, N) * w.field[N] +
         boundary_integral(T.weights(), ks.q_x, w.field.values);
}

double dirichlet_u_from_z(const CoupledState& z, const KernelSet& ks) {
  const Transforms T(ks);
  const CoupledState w = T.z_to_w(z);
  const auto N = static_cast<Eigen::Index>(ks.grid.intervals);
  return boundary_integral(T.weights(), ks.n, w.field.values) + row_times(ks.psi, N, z.X) +
         boundary_integral(T.weights(), ks.l, z.field.values);
}

double neumann_u_from_z(const CoupledState& z, const KernelSet& ks) {
  const Transforms T(ks);
  const CoupledState w = T.z_to_w(z);
  const std::size_t N = ks.grid.intervals;
  return boundary_integral(T.weights(), ks.n_x, w.field.values) +
         row_times(ks.psi_prime, static_cast<Eigen::Index>(N), z.X) + ks.l(N, N) * z.field[N] +
         boundary_integral(T.weights(), ks.l_x, z.field.values);
}

ControlLaw::ControlLaw(Actuation actuation, const KernelSet& ks, double u_bar, bool saturated)
    : actuation_(actuation), kernels_(&ks), u_bar_(u_bar), saturated_(saturated) {
  if (!(u_bar > 0.0)) throw InvalidArgument("saturation level must be positive");
  const VolterraWeights W(ks.grid);
  const std::size_t N = ks.grid.intervals;
  const auto wN = W.row(N);
  const bool dir = actuation == Actuation::Dirichlet;
  const TriangularTable& on_u = dir ? ks.k : ks.k_x;
  const TriangularTable& on_w = dir ? ks.q : ks.q_x;

  // U = alpha . u + beta . w + rho X, then w = u - (W o k) u - gamma X.
  Eigen::VectorXd alpha(N + 1), beta(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    alpha(static_cast<Eigen::Index>(j)) = wN[j] * on_u(N, j);
    beta(static_cast<Eigen::Index>(j)) = wN[j] * on_w(N, j);
  }
  if (!dir) beta(static_cast<Eigen::Index>(N)) += ks.q(N, N);
  const auto last = static_cast<Eigen::Index>(N);
  Eigen::RowVectorXd rho = dir ? Eigen::RowVectorXd(ks.gamma.row(last)) : Eigen::RowVectorXd(ks.gamma_prime.row(last));

  field_gain_ = alpha + beta;
  for (std::size_t i = 0; i <= N; ++i) {
    const auto wi = W.row(i);
    const double b = beta(static_cast<Eigen::Index>(i));
    if (b == 0.0) continue;
    for (std::size_t j = 0; j <= i; ++j) field_gain_(static_cast<Eigen::Index>(j)) -= b * wi[j] * ks.k(i, j);
  }
  state_gain_ = rho - beta.transpose() * ks.gamma;
}

double ControlLaw::raw(const Eigen::VectorXd& X, std::span<const double> u) const {
  if (u.size() != static_cast<std::size_t>(field_gain_.size()))
    throw GridMismatch("field does not match the control law grid");
  double s = state_gain_.dot(X);
  for (std::size_t j = 0; j < u.size(); ++j) s += field_gain_(static_cast<Eigen::Index>(j)) * u[j];
  return s;
}

double ControlLaw::operator()(const CoupledState& s) const { return apply(raw(s)); }

}  // namespace cascade
