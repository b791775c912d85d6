#include "cascade/certify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "cascade/bessel_series.hpp"
#include "cascade/error.hpp"

namespace cascade {

using std::numbers::pi;

void validate(const TuningParams& t, Actuation actuation) {
  if (!(t.delta1 > 0.0) || t.delta1 > t.delta0)
    throw InvalidArgument("tuning needs 0 < delta1 <= delta0");
  if (!(t.r > 0.0)) throw InvalidArgument("tuning needs r > 0");
  if (actuation == Actuation::Neumann && !(t.r1 > 0.0 && t.r1 < 2.0))
    throw InvalidArgument("Neumann tuning needs 0 < r1 < 2");
}

double halanay_decay(double delta0, double delta1, double h) {
  if (delta1 > delta0) throw InvalidArgument("Halanay decay needs delta1 <= delta0");
  if (delta1 < 0.0 || !(h > 0.0)) throw InvalidArgument("Halanay decay needs delta1 >= 0 and h > 0");
  auto g = [&](double d) { return d - delta0 + delta1 * std::exp(2.0 * d * h); };
  double lo = 0.0, hi = delta0 - delta1;
  if (g(lo) >= 0.0) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Maxima and constants

namespace {

double max_row_norm(const Eigen::MatrixXd& rows) {
  return rows.rows() == 0 ? 0.0 : rows.rowwise().norm().maxCoeff();
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

KernelMaxima kernel_maxima(const KernelSet& ks) {
  KernelMaxima m;
  m.gamma = max_row_norm(ks.gamma_half);
  m.gamma_prime = max_row_norm(ks.gamma_prime_half);
  m.k = max_abs(ks.k_half);
  m.k_x = max_abs(ks.kx_half);
  m.n_1 = max_abs(ks.n_half);
  m.n_x_1 = max_abs(ks.nx_half);
  const auto last = ks.psi.rows() - 1;
  m.psi_1 = ks.psi.row(last).norm();
  m.psi_prime_1 = ks.psi_prime.row(last).norm();

  // q and l are analytic, so the midpoints are evaluated directly.
  const double lam = ks.reaction_sum;
  const std::size_t H = 2 * ks.grid.intervals;
  for (std::size_t i = 0; i <= H; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(H);
    for (std::size_t j = 0; j <= i; ++j) {
      const double y = static_cast<double>(j) / static_cast<double>(H);
      const auto q = bessel::q_kernel(lam, x, y);
      const auto l = bessel::l_kernel(lam, x, y);
      m.q = std::max(m.q, std::abs(q.value));
      m.q_x = std::max(m.q_x, std::abs(q.dx));
      m.l = std::max(m.l, std::abs(l.value));
      if (i == H) {
        m.l_1 = std::max(m.l_1, std::abs(l.value));
        m.l_x_1 = std::max(m.l_x_1, std::abs(l.dx));
      }
    }
  }
  m.q_diag = 0.5 * std::abs(lam);
  m.l_11 = 0.5 * std::abs(lam);
  return m;
}

double zeta_bound(const KernelMaxima& m) {
  const double a = (1.0 + m.q) * m.gamma;
  return a * a;
}

double zeta_bound(const KernelSet& ks) { return zeta_bound(kernel_maxima(ks)); }

SaturationConstants saturation_constants_dirichlet(const KernelSet& ks) {
  const KernelMaxima m = kernel_maxima(ks);
  SaturationConstants s;
  s.zeta = zeta_bound(m);
  s.c1 = m.psi_1;
  s.c2 = m.n_1 * (1.0 + m.l) + m.l_1;
  const double g = m.gamma * (1.0 + m.q);
  s.M1 = 1.0 + 2.0 * g * g;
  const double kq = (1.0 + m.k) * (1.0 + m.q);
  s.M2 = 2.0 * kq * kq;
  return s;
}

SaturationConstants saturation_constants_neumann(const KernelSet& ks) {
  const KernelMaxima m = kernel_maxima(ks);
  SaturationConstants s;
  s.zeta = zeta_bound(m);
  s.c1 = m.psi_prime_1;
  s.xi = m.n_x_1 * (1.0 + m.l) + m.l_x_1;
  s.c2 = std::sqrt(2.0) * m.l_11 + s.xi;
  s.c3 = m.l_11;
  const double d2 = (m.q_diag + m.q_x) * (m.q_diag + m.q_x);
  const double q1 = (1.0 + m.q) * (1.0 + m.q);
  const double k1 = (1.0 + m.k) * (1.0 + m.k);
  s.M1 = (8.0 * d2 + 2.0 * q1) * m.gamma * m.gamma + 4.0 * m.gamma_prime * m.gamma_prime + 1.0;
  s.M2 = 8.0 * d2 * k1 + 4.0 * m.k_x * m.k_x + 2.0 * k1 * q1;
  return s;
}

SaturationConstants saturation_constants(const KernelSet& ks, Actuation actuation) {
  return actuation == Actuation::Dirichlet ? saturation_constants_dirichlet(ks)
                                           : saturation_constants_neumann(ks);
}

// ---------------------------------------------------------------------------
// LMI assembly

namespace {

Eigen::MatrixXd witness_P(const TuningParams& t, Eigen::Index n) {
  if (t.P.size() == 0) return Eigen::MatrixXd::Identity(n, n);
  if (t.P.rows() != n || t.P.cols() != n) throw InvalidArgument("P must be n x n");
  return t.P;
}

// Xi + weight * R, the (2n+1) x (2n+1) block shared by both actuations.
Eigen::MatrixXd theta1(const PlantParams& plant, const DesignGains& gains, const TuningParams& t,
                       double zeta, double weight) {
  const Eigen::Index n = plant.dim();
  if (gains.K.size() != n || plant.A1.rows() != n || plant.B.rows() != n)
    throw InvalidArgument("plant and gain dimensions disagree");
  const Eigen::MatrixXd P = witness_P(t, n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Acl = plant.A + plant.B * gains.K;
  const Eigen::MatrixXd D = plant.A1 - plant.a2 * I;

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n + 1);
  T.topLeftCorner(n, n) = P * Acl + Acl.transpose() * P + 2.0 * t.delta0 * P;
  T.block(0, n, n, n) = P * plant.A1;
  T.block(n, 0, n, n) = (P * plant.A1).transpose();
  T.block(0, 2 * n, n, 1) = P * plant.B;
  T.block(2 * n, 0, 1, n) = (P * plant.B).transpose();
  T.block(n, n, n, n) = -2.0 * t.delta1 * P + weight * zeta * D.transpose() * D;
  T(2 * n, 2 * n) = -t.lambda;
  return T;
}

}  // namespace

DirichletLmis assemble_dirichlet_lmis(const PlantParams& plant, const DesignGains& gains,
                                      const TuningParams& t, double zeta) {
  DirichletLmis out;
  out.theta1 = theta1(plant, gains, t, zeta, t.p1 / t.r);
  out.theta2.resize(2, 2);
  out.theta2(0, 0) = (-2.0 * gains.c + 2.0 * t.delta0 + t.r - pi * pi / 2.0) * t.p1 + pi * pi / 4.0 * t.lambda;
  out.theta2(0, 1) = out.theta2(1, 0) = plant.a2 * t.p1;
  out.theta2(1, 1) = -2.0 * t.delta1 * t.p1;
  return out;
}

NeumannLmis assemble_neumann_lmis(const PlantParams& plant, const DesignGains& gains,
                                  const TuningParams& t, double zeta) {
  NeumannLmis out;
  out.theta1 = theta1(plant, gains, t, zeta, t.p1 / t.r + t.p2 / t.r1);
  out.theta2 = Eigen::MatrixXd::Zero(3, 3);
  out.theta2(0, 0) = (-2.0 * gains.c + 2.0 * t.delta0 + t.r) * t.p1 + 2.0 * t.lambda;
  out.theta2(0, 1) = out.theta2(1, 0) = plant.a2 * t.p1;
  out.theta2(1, 1) = -2.0 * t.delta1 * t.p1;
  out.theta2(1, 2) = out.theta2(2, 1) = -plant.a2 * t.p2;
  out.theta2(2, 2) = -(2.0 - t.r1) * t.p2 + t.lambda1;
  out.scalar = -2.0 * t.p1 - 2.0 * t.p2 * gains.c + t.lambda + 2.0 * t.delta0 * t.p2 - pi * pi / 4.0 * t.lambda1;
  return out;
}

std::vector<Eigen::MatrixXd> witness_matrices(const PlantParams& plant, const DesignGains& gains,
                                              Actuation actuation, const TuningParams& w, double zeta,
                                              double* scalar) {
  if (actuation == Actuation::Dirichlet) {
    auto m = assemble_dirichlet_lmis(plant, gains, w, zeta);
    if (scalar) *scalar = 0.0;
    return {std::move(m.theta1), std::move(m.theta2)};
  }
  auto m = assemble_neumann_lmis(plant, gains, w, zeta);
  if (scalar) *scalar = m.scalar;
  return {std::move(m.theta1), std::move(m.theta2)};
}

namespace {

double max_eigenvalue(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw InvalidArgument("LMI matrix must be square");
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  if (M.rows() == 1) return M(0, 0);
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("LMI matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

FeasibilityResult check_feasibility(std::span<const Eigen::MatrixXd> matrices, double margin) {
  FeasibilityResult r;
  r.feasible = true;
  for (const auto& M : matrices) {
    const double e = max_eigenvalue(M);
    r.max_eigenvalues.push_back(e);
    if (!(e <= -margin)) r.feasible = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Witness search

std::string_view to_string(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::Feasible: return "feasible";
    case CertificateStatus::Infeasible: return "infeasible";
    case CertificateStatus::Undetermined: return "undetermined";
  }
  return "undetermined";
}

CertificateStatus certificate_status_from_string(std::string_view s) {
  if (s == "feasible") return CertificateStatus::Feasible;
  if (s == "infeasible") return CertificateStatus::Infeasible;
  if (s == "undetermined") return CertificateStatus::Undetermined;
  throw InvalidArgument("unknown certificate status '" + std::string(s) + "'");
}

std::vector<double> Certificate::admissible_coefficients() const {
  std::vector<double> c{beta * constants.M1, beta * constants.M2};
  if (actuation == Actuation::Neumann) c.push_back(4.0 * beta);
  return c;
}

namespace {

constexpr double kFloor = 1e-8;

// The unknowns scaled by 1/beta, so the upper bounds are all 1 and the
// saturation bounds become lower bounds lo_* <= 1.
struct Problem {
  const PlantParams* plant;
  const DesignGains* gains;
  Actuation actuation;
  TuningParams base;
  double zeta;
  Eigen::Index n;
  double lo_P, lo_p1, lo_p2;
  double margin;  // already divided by beta

  bool neumann() const { return actuation == Actuation::Neumann; }
  Eigen::Index tri() const { return n * (n + 1) / 2; }
  Eigen::Index size() const { return tri() + (neumann() ? 4 : 2); }

  TuningParams decode(const Eigen::VectorXd& v) const {
    TuningParams t = base;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) L(i, j) = v(k++);
    t.P = L * L.transpose();
    t.p1 = std::clamp(v(k++), lo_p1, 1.0);
    const double s = v(k++);
    if (neumann()) {
      t.lambda = std::max(std::abs(s), kFloor);
      t.p2 = std::clamp(v(k++), lo_p2, 1.0);
      t.lambda1 = std::max(0.0, v(k++));
    } else {
      t.lambda = 2.0 * t.p1 * std::clamp(s, kFloor, 1.0);
    }
    return t;
  }

  Eigen::VectorXd encode(const TuningParams& t) const {
    Eigen::VectorXd v(size());
    const Eigen::MatrixXd P = witness_P(t, n);
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    Eigen::MatrixXd L = llt.info() == Eigen::Success ? Eigen::MatrixXd(llt.matrixL())
                                                       : Eigen::MatrixXd::Identity(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) v(k++) = L(i, j);
    v(k++) = t.p1;
    if (neumann()) {
      v(k++) = t.lambda;
      v(k++) = t.p2;
      v(k++) = t.lambda1;
    } else {
      v(k++) = t.p1 > 0.0 ? t.lambda / (2.0 * t.p1) : 0.5;
    }
    return v;
  }

  // <= 0 iff the decoded witness satisfies every constraint.
  double phi(const Eigen::VectorXd& v) const {
    const TuningParams t = decode(v);
    double scalar = 0.0;
    const auto mats = witness_matrices(*plant, *gains, actuation, t, zeta, &scalar);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& M : mats) worst = std::max(worst, max_eigenvalue(M) + margin);
    if (neumann()) worst = std::max(worst, scalar);
    if (n == 1) {
      worst = std::max({worst, t.P(0, 0) - 1.0, lo_P - t.P(0, 0)});
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.P, Eigen::EigenvaluesOnly);
      worst = std::max({worst, es.eigenvalues().maxCoeff() - 1.0, lo_P - es.eigenvalues().minCoeff()});
    }
    return std::isfinite(worst) ? worst : std::numeric_limits<double>::max();
  }

  Eigen::VectorXd random_start(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    TuningParams t = base;
    t.P = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) t.P(i, i) = lo_P + (1.0 - lo_P) * U(rng);
    t.p1 = lo_p1 + (1.0 - lo_p1) * U(rng);
    t.p2 = lo_p2 + (1.0 - lo_p2) * U(rng);
    t.lambda = neumann() ? U(rng) : 2.0 * t.p1 * (0.05 + 0.95 * U(rng));
    t.lambda1 = U(rng);
    return encode(t);
  }
};

struct SearchResult {
  Eigen::VectorXd x;
  double phi = 0.0;
  bool converged = false;
};

// Opportunistic pattern search over +-coordinate and +-random directions
// with step expansion on success and halving on failure.
SearchResult pattern_search(const Problem& pb, Eigen::VectorXd x, const SearchConfig& cfg,
                            std::mt19937_64& rng) {
  const Eigen::Index m = x.size();
  std::normal_distribution<double> N01;
  double fx = pb.phi(x);
  double step = cfg.initial_step;
  int evals = 1;
  bool converged = false;
  std::vector<Eigen::VectorXd> dirs;
  while (fx > 0.0 && evals < cfg.max_evals_per_seed) {
    dirs.clear();
    for (Eigen::Index i = 0; i < m; ++i) {
      dirs.push_back(Eigen::VectorXd::Unit(m, i));
      dirs.push_back(-Eigen::VectorXd::Unit(m, i));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::VectorXd d(m);
      for (Eigen::Index j = 0; j < m; ++j) d(j) = N01(rng);
      d.normalize();
      dirs.push_back(d);
      dirs.push_back(-d);
    }
    bool improved = false;
    for (const auto& d : dirs) {
      Eigen::VectorXd y = x + step * d;
      const double fy = pb.phi(y);
      ++evals;
      if (fy < fx) {
        x = std::move(y);
        fx = fy;
        improved = true;
        break;
      }
      if (evals >= cfg.max_evals_per_seed) break;
    }
    if (improved) {
      step = std::min(2.0 * step, 1.0);
    } else {
      step *= 0.5;
      if (step < cfg.min_step) {
        converged = true;
        break;
      }
    }
  }
  return {std::move(x), fx, converged || fx <= 0.0};
}

struct Attempt {
  bool feasible = false;
  bool all_converged = true;
  TuningParams witness;  // normalized
  double phi = std::numeric_limits<double>::infinity();
};

Attempt attempt(const Problem& pb, const std::vector<Eigen::VectorXd>& starts, const SearchConfig& cfg,
                std::uint64_t stream) {
  const auto S = static_cast<std::ptrdiff_t>(starts.size());
  std::vector<SearchResult> res(starts.size());
#pragma omp parallel for schedule(dynamic, 1) if (cfg.exec == Exec::Parallel)
  for (std::ptrdiff_t s = 0; s < S; ++s) {
    std::mt19937_64 rng(cfg.seed * 1000003ULL + stream * 97ULL + static_cast<std::uint64_t>(s));
    res[static_cast<std::size_t>(s)] = pattern_search(pb, starts[static_cast<std::size_t>(s)], cfg, rng);
  }
  Attempt a;
  for (const auto& r : res) {
    a.all_converged = a.all_converged && r.converged;
    if (r.phi < a.phi) {
      a.phi = r.phi;
      a.witness = pb.decode(r.x);
    }
  }
  a.feasible = a.phi <= 0.0;
  return a;
}

std::vector<Eigen::VectorXd> starts_for(const Problem& pb, const SearchConfig& cfg,
                                        const std::vector<TuningParams>& warm, std::uint64_t stream) {
  std::vector<Eigen::VectorXd> starts;
  for (const auto& w : warm) starts.push_back(pb.encode(w));
  std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  while (static_cast<int>(starts.size()) < std::max(cfg.seeds, static_cast<int>(warm.size()) + 1))
    starts.push_back(pb.random_start(rng));
  return starts;
}

// Scale a witness into the unit box, keeping the LMIs intact.
TuningParams fit_unit_box(TuningParams t, Actuation actuation, Eigen::Index n) {
  const Eigen::MatrixXd P = witness_P(t, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
  double s = std::max(es.eigenvalues().maxCoeff(), t.p1);
  if (actuation == Actuation::Neumann) s = std::max(s, t.p2);
  if (!(s > 0.0)) return t;
  t.P = P / s;
  t.p1 /= s;
  t.p2 /= s;
  t.lambda /= s;
  t.lambda1 /= s;
  return t;
}

TuningParams scaled(TuningParams t, double s) {
  t.P *= s;
  t.p1 *= s;
  t.p2 *= s;
  t.lambda *= s;
  t.lambda1 *= s;
  return t;
}

Problem make_problem(const PlantParams& plant, const DesignGains& gains, Actuation actuation,
                     const TuningParams& tuning, double zeta, double margin) {
  Problem pb{&plant, &gains, actuation, tuning, zeta, plant.dim(), kFloor, kFloor, kFloor, margin};
  return pb;
}

}  // namespace

Certificate minimize_beta(const PlantParams& plant, const DesignGains& gains, Actuation actuation,
                          const KernelSet& ks, const TuningParams& tuning, const SearchConfig& cfg) {
  validate(plant, gains);
  validate(tuning, actuation);

  Certificate cert;
  cert.actuation = actuation;
  cert.constants = saturation_constants(ks, actuation);
  cert.delta = halanay_decay(tuning.delta0, tuning.delta1, plant.h);
  cert.witness = tuning;

  const double f = actuation == Actuation::Dirichlet ? 2.0 : 3.0;
  const double ub2 = plant.u_bar * plant.u_bar;
  const double need_P = f * cert.constants.c1 * cert.constants.c1 / ub2;
  const double need_p1 = f * cert.constants.c2 * cert.constants.c2 / ub2;
  const double need_p2 = actuation == Actuation::Neumann ? f * cert.constants.c3 * cert.constants.c3 / ub2 : 0.0;
  double lower = std::max({need_P, need_p1, need_p2});
  if (!(lower > 0.0)) lower = cfg.beta_cap * 1e-15;

  if (lower > cfg.beta_cap) {
    cert.status = CertificateStatus::Infeasible;
    std::ostringstream os;
    os << "saturation bounds force beta >= " << lower << " above the cap " << cfg.beta_cap;
    cert.diagnostic = os.str();
    return cert;
  }

  std::uint64_t stream = 0;
  auto test = [&](double beta, const std::vector<TuningParams>& warm) {
    Problem pb = make_problem(plant, gains, actuation, tuning, cert.constants.zeta, cfg.margin / beta);
    pb.lo_P = std::max(kFloor, need_P / beta);
    pb.lo_p1 = std::max(kFloor, need_p1 / beta);
    pb.lo_p2 = std::max(kFloor, need_p2 / beta);
    const std::uint64_t id = stream++;
    return attempt(pb, starts_for(pb, cfg, warm, id), cfg, id);
  };

  std::vector<TuningParams> warm{fit_unit_box(tuning, actuation, plant.dim())};

  Attempt at_cap = test(cfg.beta_cap, warm);
  if (!at_cap.feasible) {
    cert.status = at_cap.all_converged ? CertificateStatus::Infeasible : CertificateStatus::Undetermined;
    cert.witness = scaled(at_cap.witness, cfg.beta_cap);
    std::ostringstream os;
    os << "no witness at beta = " << cfg.beta_cap << " (best violation " << at_cap.phi << ")";
    cert.diagnostic = os.str();
    return cert;
  }

  double hi = cfg.beta_cap;
  TuningParams best = at_cap.witness;
  warm = {best};
  Attempt at_lower = test(lower, warm);
  if (at_lower.feasible) {
    hi = lower;
    best = at_lower.witness;
  } else {
    double lo = lower;
    while (hi / lo > 1.0 + cfg.rel_width) {
      const double mid = std::sqrt(lo * hi);
      // Previous witness shrunk into the new box is the first start.
      warm = {fit_unit_box(scaled(best, hi / mid), actuation, plant.dim())};
      Attempt a = test(mid, warm);
      if (a.feasible) {
        hi = mid;
        best = a.witness;
      } else {
        lo = mid;
      }
    }
  }

  cert.beta = hi;
  cert.witness = scaled(best, hi);
  const auto mats = witness_matrices(plant, gains, actuation, cert.witness, cert.constants.zeta);
  const auto check = check_feasibility(mats, cfg.margin);
  cert.status = check.feasible ? CertificateStatus::Feasible : CertificateStatus::Undetermined;
  if (!check.feasible) cert.diagnostic = "witness failed re-verification";
  return cert;
}

Certificate find_stability_witness(const PlantParams& plant, const DesignGains& gains, Actuation actuation,
                                   const KernelSet& ks, const TuningParams& tuning, const SearchConfig& cfg) {
  validate(plant, gains);
  validate(tuning, actuation);
  Certificate cert;
  cert.actuation = actuation;
  cert.constants = saturation_constants(ks, actuation);
  cert.delta = halanay_decay(tuning.delta0, tuning.delta1, plant.h);

  Problem pb = make_problem(plant, gains, actuation, tuning, cert.constants.zeta, cfg.margin);
  const Attempt a = attempt(pb, starts_for(pb, cfg, {fit_unit_box(tuning, actuation, plant.dim())}, 0), cfg, 0);
  cert.witness = a.witness;
  if (a.feasible)
    cert.status = CertificateStatus::Feasible;
  else
    cert.status = a.all_converged ? CertificateStatus::Infeasible : CertificateStatus::Undetermined;
  return cert;
}

Membership admissible_set_membership(const Certificate& c, double X0_max, double u0_norm_sq,
                                     std::optional<double> u0_deriv_norm_sq) {
  if (!c.feasible()) throw InvalidArgument("membership needs a feasible certificate");
  double v = c.constants.M1 * X0_max * X0_max + c.constants.M2 * u0_norm_sq;
  if (c.actuation == Actuation::Neumann) {
    if (!u0_deriv_norm_sq) throw InvalidArgument("Neumann membership needs ||u0'||^2");
    v += 4.0 * *u0_deriv_norm_sq;
  }
  v *= c.beta;
  return {v, v <= 1.0};
}

}  // namespace cascade
