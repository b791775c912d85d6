#include "cascade/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "cascade/bessel_series.hpp"
#include "cascade/error.hpp"

namespace cascade {

namespace {

// Block generator [[0, F], [I, 0]] of the second-order system y'' = y F.
Eigen::MatrixXd block_generator(const Eigen::MatrixXd& F) {
  const Eigen::Index n = F.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  M.topRightCorner(n, n) = F;
  M.bottomLeftCorner(n, n).setIdentity();
  return M;
}

void sample_row_ode(const Eigen::RowVectorXd& K, const Eigen::MatrixXd& F, std::span<const double> x,
                    Eigen::MatrixXd& value, Eigen::MatrixXd& derivative) {
  const Eigen::Index n = F.rows();
  const Eigen::MatrixXd M = block_generator(F);
  Eigen::RowVectorXd left = Eigen::RowVectorXd::Zero(2 * n);
  left.head(n) = K;
  const Eigen::RowVectorXd left_d = left * M;

  value.resize(static_cast<Eigen::Index>(x.size()), n);
  derivative.resize(static_cast<Eigen::Index>(x.size()), n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::MatrixXd E = (M * x[i]).exp();
    if (!E.allFinite())
      throw NumericalError("matrix exponential did not converge at x = " + std::to_string(x[i]));
    const auto idx = static_cast<Eigen::Index>(i);
    value.row(idx) = left * E.leftCols(n);
    derivative.row(idx) = left_d * E.leftCols(n);
  }
}

std::vector<double> half_step_abscissae(const UniformGrid& grid, std::size_t refine) {
  const std::size_t m = grid.intervals * refine;
  std::vector<double> x(m + 1);
  for (std::size_t i = 0; i <= m; ++i) x[i] = static_cast<double>(i) / static_cast<double>(m);
  return x;
}

// Composite Simpson on pairs of node intervals: out[j] = int_0^{2 j h} f.
std::vector<double> simpson_profile(std::span<const double> f, double h) {
  const std::size_t pairs = (f.size() - 1) / 2;
  std::vector<double> out(pairs + 1, 0.0);
  for (std::size_t j = 0; j < pairs; ++j)
    out[j + 1] = out[j] + h / 3.0 * (f[2 * j] + 4.0 * f[2 * j + 1] + f[2 * j + 2]);
  return out;
}

}  // namespace

GammaPsiSamples compute_gamma_psi(const PlantParams& plant, const DesignGains& gains,
                                  std::span<const double> x) {
  if (gains.K.size() != plant.dim()) throw InvalidArgument("gain row K must have n entries");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0 || x[i] > 1.0) throw InvalidArgument("kernel abscissae must lie in [0, 1]");
    if (i > 0 && x[i] < x[i - 1]) throw InvalidArgument("kernel abscissae must be sorted");
  }
  const Eigen::Index n = plant.dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  GammaPsiSamples s;
  s.x.assign(x.begin(), x.end());
  sample_row_ode(gains.K, plant.A - plant.a * I, x, s.gamma, s.gamma_prime);
  sample_row_ode(gains.K, plant.A + plant.B * gains.K - plant.a * I, x, s.psi, s.psi_prime);
  return s;
}

KnTables compute_k_n(const GammaPsiSamples& nodes, const PlantParams& plant, const UniformGrid& grid,
                     double tol) {
  const std::size_t count = nodes.x.size();
  const double wanted = grid.dx() / 4.0;
  if (count < 3 || nodes.x.front() != 0.0 || std::abs(nodes.x.back() - 1.0) > 1e-12)
    throw QuadratureResolutionError("quadrature nodes must cover [0, 1]", wanted);

  const double h = 1.0 / static_cast<double>(count - 1);
  const double ratio = grid.dx() / (2.0 * h);
  const double r = std::round(ratio);
  if (r < 1.0 || std::abs(ratio - r) > 1e-9 * ratio)
    throw QuadratureResolutionError(
        "quadrature node spacing " + std::to_string(h) + " is not dx/(2r) for the kernel grid", wanted);
  for (std::size_t i = 0; i < count; ++i)
    if (std::abs(nodes.x[i] - static_cast<double>(i) * h) > 1e-12)
      throw QuadratureResolutionError("quadrature nodes must be uniform", wanted);

  std::vector<double> gb(count), pb(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    gb[i] = (nodes.gamma.row(idx) * plant.B)(0, 0);
    pb[i] = (nodes.psi.row(idx) * plant.B)(0, 0);
  }

  KnTables t;
  t.k_profile = simpson_profile(gb, h);
  t.n_profile = simpson_profile(pb, h);
  t.profile_step = 2.0 * h;

  // Richardson check at s = 1 against Simpson on every other node.
  if ((count - 1) % 4 == 0) {
    std::vector<double> coarse_g, coarse_p;
    for (std::size_t i = 0; i < count; i += 2) {
      coarse_g.push_back(gb[i]);
      coarse_p.push_back(pb[i]);
    }
    const double err = std::max(std::abs(t.k_profile.back() - simpson_profile(coarse_g, 2 * h).back()),
                                std::abs(t.n_profile.back() - simpson_profile(coarse_p, 2 * h).back())) /
                       15.0;
    if (err > tol) {
      const double need = h * std::pow(tol / err, 0.25) * 0.9;
      throw QuadratureResolutionError("kernel quadrature error estimate " + std::to_string(err) +
                                          " exceeds tolerance; refine the nodes",
                                      need);
    }
  }

  const std::size_t N = grid.nodes();
  const auto stride = static_cast<std::size_t>(r);
  t.k = TriangularTable(N);
  t.k_x = TriangularTable(N);
  t.n = TriangularTable(N);
  t.n_x = TriangularTable(N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const std::size_t m = i - j;
      t.k(i, j) = t.k_profile[m * stride];
      t.n(i, j) = t.n_profile[m * stride];
      t.k_x(i, j) = gb[2 * m * stride];
      t.n_x(i, j) = pb[2 * m * stride];
    }
  return t;
}

namespace detail {

namespace {
inline void fill_ql_row(double lambda, const UniformGrid& grid, std::size_t i, QlTables& t) {
  const double x = grid.x(i);
  for (std::size_t j = 0; j <= i; ++j) {
    const double y = grid.x(j);
    const auto q = bessel::q_kernel(lambda, x, y);
    const auto l = bessel::l_kernel(lambda, x, y);
    t.q(i, j) = q.value;
    t.q_x(i, j) = q.dx;
    t.l(i, j) = l.value;
    t.l_x(i, j) = l.dx;
  }
}

QlTables allocate(const UniformGrid& grid) {
  const std::size_t N = grid.nodes();
  return {TriangularTable(N), TriangularTable(N), TriangularTable(N), TriangularTable(N)};
}
}  // namespace

QlTables compute_q_l_serial(double lambda, const UniformGrid& grid) {
  QlTables t = allocate(grid);
  for (std::size_t i = 0; i < grid.nodes(); ++i) fill_ql_row(lambda, grid, i, t);
  return t;
}

QlTables compute_q_l_omp(double lambda, const UniformGrid& grid) {
  QlTables t = allocate(grid);
  const auto N = static_cast<std::ptrdiff_t>(grid.nodes());
#pragma omp parallel for schedule(dynamic, 8) if (N > 64)
  for (std::ptrdiff_t i = 0; i < N; ++i) fill_ql_row(lambda, grid, static_cast<std::size_t>(i), t);
  return t;
}

}  // namespace detail

QlTables compute_q_l(double a, double c, const UniformGrid& grid, Exec exec, bool allow_negative) {
  const double lambda = a + c;
  if (lambda < 0.0 && !allow_negative)
    throw InvalidArgument("a + c < 0 needs the analytic-continuation branch");
  return exec == Exec::Serial ? detail::compute_q_l_serial(lambda, grid)
                              : detail::compute_q_l_omp(lambda, grid);
}

KernelSet build_kernels(const PlantParams& plant, const DesignGains& gains, const UniformGrid& grid,
                        Exec exec) {
  validate(plant, gains);

  KernelSet ks;
  ks.grid = grid;
  ks.reaction_sum = plant.a + gains.c;

  // Quarter-step nodes (or finer, until the Simpson estimate passes): Simpson
  // pairs give k, n at half steps.
  std::size_t refine = 4;
  GammaPsiSamples nodes;
  KnTables kn;
  for (;; refine *= 2) {
    nodes = compute_gamma_psi(plant, gains, half_step_abscissae(grid, refine));
    try {
      kn = compute_k_n(nodes, plant, grid);
      break;
    } catch (const QuadratureResolutionError&) {
      if (refine >= 256) throw;
    }
  }
  const auto fine = static_cast<Eigen::Index>(refine);

  const auto N = static_cast<Eigen::Index>(grid.nodes());
  const Eigen::Index n = plant.dim();
  ks.gamma.resize(N, n);
  ks.gamma_prime.resize(N, n);
  ks.psi.resize(N, n);
  ks.psi_prime.resize(N, n);
  for (Eigen::Index i = 0; i < N; ++i) {
    ks.gamma.row(i) = nodes.gamma.row(fine * i);
    ks.gamma_prime.row(i) = nodes.gamma_prime.row(fine * i);
    ks.psi.row(i) = nodes.psi.row(fine * i);
    ks.psi_prime.row(i) = nodes.psi_prime.row(fine * i);
  }
  const Eigen::Index H = 2 * (N - 1) + 1;
  ks.gamma_half.resize(H, n);
  ks.gamma_prime_half.resize(H, n);
  ks.psi_half.resize(H, n);
  ks.psi_prime_half.resize(H, n);
  for (Eigen::Index i = 0; i < H; ++i) {
    ks.gamma_half.row(i) = nodes.gamma.row(fine / 2 * i);
    ks.gamma_prime_half.row(i) = nodes.gamma_prime.row(fine / 2 * i);
    ks.psi_half.row(i) = nodes.psi.row(fine / 2 * i);
    ks.psi_prime_half.row(i) = nodes.psi_prime.row(fine / 2 * i);
  }
  ks.kx_half.resize(static_cast<std::size_t>(H));
  ks.nx_half.resize(static_cast<std::size_t>(H));
  for (Eigen::Index i = 0; i < H; ++i) {
    ks.kx_half[static_cast<std::size_t>(i)] = (ks.gamma_half.row(i) * plant.B)(0, 0);
    ks.nx_half[static_cast<std::size_t>(i)] = (ks.psi_half.row(i) * plant.B)(0, 0);
  }
  const std::size_t every = refine / 4;
  ks.k_half.resize(static_cast<std::size_t>(H));
  ks.n_half.resize(static_cast<std::size_t>(H));
  for (std::size_t i = 0; i < ks.k_half.size(); ++i) {
    ks.k_half[i] = kn.k_profile[every * i];
    ks.n_half[i] = kn.n_profile[every * i];
  }
  ks.k = std::move(kn.k);
  ks.k_x = std::move(kn.k_x);
  ks.n = std::move(kn.n);
  ks.n_x = std::move(kn.n_x);

  QlTables ql = compute_q_l(plant.a, gains.c, grid, exec);
  ks.q = std::move(ql.q);
  ks.q_x = std::move(ql.q_x);
  ks.l = std::move(ql.l);
  ks.l_x = std::move(ql.l_x);
  return ks;
}

KernelSet zero_kernels(const UniformGrid& grid, Eigen::Index n) {
  if (n < 1) throw InvalidArgument("state dimension must be positive");
  KernelSet ks;
  ks.grid = grid;
  const auto N = static_cast<Eigen::Index>(grid.nodes());
  const Eigen::Index H = 2 * (N - 1) + 1;
  for (auto* m : {&ks.gamma, &ks.gamma_prime, &ks.psi, &ks.psi_prime}) m->setZero(N, n);
  for (auto* m : {&ks.gamma_half, &ks.gamma_prime_half, &ks.psi_half, &ks.psi_prime_half}) m->setZero(H, n);
  for (auto* v : {&ks.k_half, &ks.n_half, &ks.kx_half, &ks.nx_half}) v->assign(static_cast<std::size_t>(H), 0.0);
  for (auto* t : {&ks.k, &ks.k_x, &ks.n, &ks.n_x, &ks.q, &ks.q_x, &ks.l, &ks.l_x}) *t = TriangularTable(grid.nodes());
  return ks;
}

// ---------------------------------------------------------------------------
// Residual report

double Residual::tolerance(double dx) const {
  if (order == Order::Exact) return 1e-12 * std::max(1.0, scale);
  return 5.0 * dx * dx * scale;
}

bool Residual::passes(double dx) const { return value <= tolerance(dx); }

bool KernelResidualReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [&](const Residual& r) { return r.passes(dx); });
}

const Residual& KernelResidualReport::at(const std::string& name) const {
  for (const auto& r : entries)
    if (r.name == name) return r;
  throw std::out_of_range("no residual named " + name);
}

namespace {

// max_i |second difference of rows - rows * F| over interior nodes.
double row_ode_residual(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& F, double dx) {
  double m = 0.0;
  for (Eigen::Index i = 1; i + 1 < rows.rows(); ++i) {
    const Eigen::RowVectorXd dd = (rows.row(i + 1) - 2.0 * rows.row(i) + rows.row(i - 1)) / (dx * dx);
    m = std::max(m, (dd - rows.row(i) * F).cwiseAbs().maxCoeff());
  }
  return m;
}

double row_derivative_residual(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& deriv, double dx) {
  double m = 0.0;
  for (Eigen::Index i = 1; i + 1 < rows.rows(); ++i) {
    const Eigen::RowVectorXd d = (rows.row(i + 1) - rows.row(i - 1)) / (2.0 * dx);
    m = std::max(m, (d - deriv.row(i)).cwiseAbs().maxCoeff());
  }
  return m;
}

// |T_xx - T_yy - sigma T| over interior triangle points.
double wave_residual(const TriangularTable& T, double sigma, double dx) {
  double m = 0.0;
  const std::size_t N = T.nodes();
  for (std::size_t i = 2; i + 1 < N; ++i)
    for (std::size_t j = 1; j + 1 <= i - 1; ++j) {
      const double txx = (T(i + 1, j) - 2.0 * T(i, j) + T(i - 1, j)) / (dx * dx);
      const double tyy = (T(i, j + 1) - 2.0 * T(i, j) + T(i, j - 1)) / (dx * dx);
      m = std::max(m, std::abs(txx - tyy - sigma * T(i, j)));
    }
  return m;
}

// Second-order one-sided y-derivative at y = 0 compared with `target(i)`.
template <typename Target>
double y_boundary_residual(const TriangularTable& T, double dx, Target target) {
  double m = 0.0;
  for (std::size_t i = 2; i < T.nodes(); ++i) {
    const double ty = (-3.0 * T(i, 0) + 4.0 * T(i, 1) - T(i, 2)) / (2.0 * dx);
    m = std::max(m, std::abs(ty - target(i)));
  }
  return m;
}

double x_derivative_residual(const TriangularTable& T, const TriangularTable& Tx, double dx) {
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < T.nodes(); ++i)
    for (std::size_t j = 0; j + 1 <= i; ++j) {
      const double d = (T(i + 1, j) - T(i - 1, j)) / (2.0 * dx);
      m = std::max(m, std::abs(d - Tx(i, j)));
    }
  return m;
}

template <typename Target>
double diagonal_residual(const TriangularTable& T, Target target) {
  double m = 0.0;
  for (std::size_t i = 0; i < T.nodes(); ++i) m = std::max(m, std::abs(T(i, i) - target(i)));
  return m;
}

}  // namespace

KernelResidualReport verify_kernel_pdes(const KernelSet& ks, const PlantParams& plant,
                                        const DesignGains& gains) {
  using O = Residual::Order;
  const double dx = ks.dx();
  const double lam = ks.reaction_sum;
  const Eigen::Index n = plant.dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Fg = plant.A - plant.a * I;
  const Eigen::MatrixXd Fp = plant.A + plant.B * gains.K - plant.a * I;
  const double B = plant.B.norm();

  const double sg = ks.gamma.cwiseAbs().maxCoeff();
  const double sp = ks.psi.cwiseAbs().maxCoeff();
  const double sq = ks.q.max_abs(), sl = ks.l.max_abs();

  KernelResidualReport r;
  r.dx = dx;
  auto add = [&](std::string name, double value, double scale, O order) {
    r.entries.push_back({std::move(name), value, scale, order});
  };

  add("gamma_ode", row_ode_residual(ks.gamma, Fg, dx), sg * std::max(1.0, Fg.norm()), O::Second);
  add("psi_ode", row_ode_residual(ks.psi, Fp, dx), sp * std::max(1.0, Fp.norm()), O::Second);
  add("gamma_initial",
      (ks.gamma.row(0) - gains.K).cwiseAbs().maxCoeff() + ks.gamma_prime.row(0).cwiseAbs().maxCoeff(), sg,
      O::Exact);
  add("psi_initial",
      (ks.psi.row(0) - gains.K).cwiseAbs().maxCoeff() + ks.psi_prime.row(0).cwiseAbs().maxCoeff(), sp,
      O::Exact);

  add("k_pde", wave_residual(ks.k, 0.0, dx), ks.k.max_abs(), O::Second);
  add("n_pde", wave_residual(ks.n, 0.0, dx), ks.n.max_abs(), O::Second);
  add("q_pde", wave_residual(ks.q, lam, dx), sq * std::max(1.0, std::abs(lam)), O::Second);
  add("l_pde", wave_residual(ks.l, -lam, dx), sl * std::max(1.0, std::abs(lam)), O::Second);

  auto gB = [&](std::size_t i) { return (ks.gamma.row(static_cast<Eigen::Index>(i)) * plant.B)(0, 0); };
  auto pB = [&](std::size_t i) { return (ks.psi.row(static_cast<Eigen::Index>(i)) * plant.B)(0, 0); };
  add("k_boundary", y_boundary_residual(ks.k, dx, [&](std::size_t i) { return -gB(i); }), sg * B, O::Second);
  add("n_boundary", y_boundary_residual(ks.n, dx, [&](std::size_t i) { return -pB(i); }), sp * B, O::Second);
  add("q_boundary", y_boundary_residual(ks.q, dx, [](std::size_t) { return 0.0; }),
      sq * std::max(1.0, std::abs(lam)), O::Second);
  add("l_boundary", y_boundary_residual(ks.l, dx, [](std::size_t) { return 0.0; }),
      sl * std::max(1.0, std::abs(lam)), O::Second);

  auto half_diag = [&](std::size_t i) { return -0.5 * lam * ks.grid.x(i); };
  add("k_diagonal", diagonal_residual(ks.k, [](std::size_t) { return 0.0; }), ks.k.max_abs(), O::Exact);
  add("n_diagonal", diagonal_residual(ks.n, [](std::size_t) { return 0.0; }), ks.n.max_abs(), O::Exact);
  add("q_diagonal", diagonal_residual(ks.q, half_diag), sq, O::Exact);
  add("l_diagonal", diagonal_residual(ks.l, half_diag), sl, O::Exact);

  add("gamma_prime_fd", row_derivative_residual(ks.gamma, ks.gamma_prime, dx),
      ks.gamma_prime.cwiseAbs().maxCoeff() * std::max(1.0, Fg.norm()), O::Second);
  add("psi_prime_fd", row_derivative_residual(ks.psi, ks.psi_prime, dx),
      ks.psi_prime.cwiseAbs().maxCoeff() * std::max(1.0, Fp.norm()), O::Second);
  add("k_x_fd", x_derivative_residual(ks.k, ks.k_x, dx), ks.k_x.max_abs() * std::max(1.0, Fg.norm()),
      O::Second);
  add("q_x_fd", x_derivative_residual(ks.q, ks.q_x, dx), ks.q_x.max_abs() * std::max(1.0, std::abs(lam)),
      O::Second);
  add("l_x_fd", x_derivative_residual(ks.l, ks.l_x, dx), ks.l_x.max_abs() * std::max(1.0, std::abs(lam)),
      O::Second);
  return r;
}

}  // namespace cascade
