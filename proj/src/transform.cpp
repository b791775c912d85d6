#include "cascade/transform.hpp"

#include "cascade/error.hpp"

namespace cascade {

Field::Field(const UniformGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.nodes()) throw GridMismatch("field length does not match its grid");
}

double norm_sq(const Field& f) {
  const VolterraWeights w(f.grid);
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
  return w.integrate(sq);
}

double derivative_norm_sq(const Field& f) {
  const std::size_t n = f.size();
  const double dx = f.dx();
  std::vector<double> d(n);
  if (n < 3) {
    d.assign(n, n == 2 ? (f[1] - f[0]) / dx : 0.0);
  } else {
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  }
  for (auto& v : d) v *= v;
  return VolterraWeights(f.grid).integrate(d);
}

Transforms::Transforms(const KernelSet& kernels, Exec exec)
    : k_(&kernels), w_(kernels.grid), exec_(exec) {}

void Transforms::check(const CoupledState& s) const {
  if (!(s.field.grid == k_->grid) || s.field.size() != k_->grid.nodes())
    throw GridMismatch("state grid does not match the kernel grid");
  if (s.X.size() != k_->dim()) throw InvalidArgument("ODE state has the wrong dimension");
}

CoupledState Transforms::u_to_w(const CoupledState& s) const {
  check(s);
  CoupledState out{s.X, Field(s.field.grid)};
  volterra_apply(w_, k_->k, s.field.values, out.field.values, exec_);
  const Eigen::VectorXd gX = k_->gamma * s.X;
  for (std::size_t i = 0; i < out.field.size(); ++i)
    out.field[i] = s.field[i] - out.field[i] - gX(static_cast<Eigen::Index>(i));
  return out;
}

CoupledState Transforms::w_to_z(const CoupledState& s) const {
  check(s);
  CoupledState out{s.X, Field(s.field.grid)};
  volterra_apply(w_, k_->q, s.field.values, out.field.values, exec_);
  for (std::size_t i = 0; i < out.field.size(); ++i) out.field[i] = s.field[i] - out.field[i];
  return out;
}

CoupledState Transforms::z_to_w(const CoupledState& s) const {
  check(s);
  CoupledState out{s.X, Field(s.field.grid)};
  volterra_apply(w_, k_->l, s.field.values, out.field.values, exec_);
  for (std::size_t i = 0; i < out.field.size(); ++i) out.field[i] += s.field[i];
  return out;
}

CoupledState Transforms::w_to_u(const CoupledState& s) const {
  check(s);
  CoupledState out{s.X, Field(s.field.grid)};
  volterra_apply(w_, k_->n, s.field.values, out.field.values, exec_);
  const Eigen::VectorXd pX = k_->psi * s.X;
  for (std::size_t i = 0; i < out.field.size(); ++i)
    out.field[i] += s.field[i] + pX(static_cast<Eigen::Index>(i));
  return out;
}

CoupledState u_to_w(const CoupledState& s, const KernelSet& kernels) {
  return Transforms(kernels).u_to_w(s);
}
CoupledState w_to_z(const CoupledState& s, const KernelSet& kernels) {
  return Transforms(kernels).w_to_z(s);
}
CoupledState z_to_w(const CoupledState& s, const KernelSet& kernels) {
  return Transforms(kernels).z_to_w(s);
}
CoupledState w_to_u(const CoupledState& s, const KernelSet& kernels) {
  return Transforms(kernels).w_to_u(s);
}

}  // namespace cascade
