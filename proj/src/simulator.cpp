#include "cascade/simulator.hpp"

#include <cmath>
#include <deque>
#include <memory>
#include <ostream>

#include "cascade/error.hpp"

namespace cascade {

InitialData InitialData::constant(Eigen::VectorXd X0, std::vector<double> u0) {
  InitialData d;
  d.X = [X0 = std::move(X0)](double) { return X0; };
  d.field = [u0 = std::move(u0)](double) { return u0; };
  return d;
}

InitialData InitialData::zero(Eigen::Index n, const UniformGrid& grid) {
  return constant(Eigen::VectorXd::Zero(n), std::vector<double>(grid.nodes(), 0.0));
}

// ---------------------------------------------------------------------------
// History

DelayHistory::DelayHistory(InitialData init, double dt, double h) : init_(std::move(init)), dt_(dt), h_(h) {
  if (!(dt > 0.0) || !(h > 0.0)) throw InvalidArgument("history needs dt > 0 and h > 0");
  const auto cap = static_cast<std::size_t>(std::ceil(h / dt - 1e-9)) + 2;
  X_.resize(cap);
  u_.resize(cap);
}

void DelayHistory::push(const Eigen::VectorXd& X, std::span<const double> u) {
  if (!empty_) ++latest_;
  empty_ = false;
  const std::size_t slot = latest_ % X_.size();
  X_[slot] = X;
  u_[slot].assign(u.begin(), u.end());
}

DelayHistory::Sample DelayHistory::at(double s) const {
  if (s < -h_ * (1.0 + 1e-12) - 1e-14) throw InvalidArgument("delayed time precedes the initial window");
  if (s <= 0.0 || empty_) return {init_.X(std::max(s, -h_)), init_.field(std::max(s, -h_))};

  const double r = s / dt_;
  auto k = static_cast<std::size_t>(std::floor(r));
  double frac = r - static_cast<double>(k);
  if (frac < 1e-9) {
    frac = 0.0;
  } else if (frac > 1.0 - 1e-9) {
    ++k;
    frac = 0.0;
  }
  if (k > latest_ || (k == latest_ && frac > 0.0))
    throw InvalidArgument("delayed time lies after the newest stored step");
  if (latest_ - k >= X_.size()) throw InvalidArgument("delayed time fell out of the history buffer");

  const std::size_t a = k % X_.size();
  if (frac == 0.0) return {X_[a], u_[a]};
  const std::size_t b = (k + 1) % X_.size();
  Sample out{(1.0 - frac) * X_[a] + frac * X_[b], u_[a]};
  for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] = (1.0 - frac) * u_[a][i] + frac * u_[b][i];
  return out;
}

DelayHistory::Sample delayed_sample(const DelayHistory& history, double t, const DelayProfile& tau) {
  return history.at(t - tau(t));
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

void check_cfl(double dt, double dx) {
  if (dt > 0.5 * dx * dx * (1.0 + 1e-12))
    throw InvalidArgument("explicit scheme needs dt <= dx^2/2 (dt = " + std::to_string(dt) +
                          ", dx = " + std::to_string(dx) + ")");
}

// Euler update of the interior nodes 0..last of
//   v_t = v_xx + rate v + a2 v_delayed + forcing_i
// with the mirror ghost at x = 0 and `ghost_right` beyond node N.
template <typename Forcing>
void heat_update(std::span<const double> v, std::span<const double> vd, double a2, double rate, double dt,
                 double dx, std::size_t last, double ghost_right, Forcing forcing, std::vector<double>& out) {
  const std::size_t N = v.size() - 1;
  const double r = dt / (dx * dx);
  out.resize(v.size());
  for (std::size_t i = 0; i <= last; ++i) {
    const double left = i == 0 ? v[1] : v[i - 1];
    const double right = i == N ? ghost_right : v[i + 1];
    out[i] = v[i] + r * (right - 2.0 * v[i] + left) + dt * (rate * v[i] + a2 * vd[i] + forcing(i));
  }
}

}  // namespace

StepResult step_explicit(const PlantParams& plant, const ControlLaw& law, const DelayHistory& history,
                         double t, double dt, const Eigen::VectorXd& X, std::span<const double> u) {
  const KernelSet& ks = law.kernels();
  const double dx = ks.dx();
  check_cfl(dt, dx);
  const std::size_t N = ks.grid.intervals;
  if (u.size() != N + 1) throw GridMismatch("field does not match the control law grid");

  const auto d = delayed_sample(history, t, plant.delay);
  StepResult r;
  r.X = X + dt * (plant.A * X + plant.A1 * d.X + plant.B * u[0]);
  auto none = [](std::size_t) { return 0.0; };

  if (law.actuation() == Actuation::Neumann) {
    r.U_raw = law.raw(X, u);
    r.U_applied = law.apply(r.U_raw);
    r.saturated = r.U_applied != r.U_raw;
    heat_update(u, d.u, plant.a2, plant.a, dt, dx, N, u[N - 1] + 2.0 * dx * r.U_applied, none, r.u);
    return r;
  }

  heat_update(u, d.u, plant.a2, plant.a, dt, dx, N - 1, 0.0, none, r.u);
  // u_N = sat(alpha + w u_N), with U affine in the boundary node.
  const auto& g = law.field_gain();
  double alpha = law.state_gain().dot(r.X);
  for (std::size_t j = 0; j < N; ++j) alpha += g(static_cast<Eigen::Index>(j)) * r.u[j];
  const double w = g(static_cast<Eigen::Index>(N));
  const double ub = law.u_bar();
  double uN = alpha / (1.0 - w);
  if (law.saturated() && std::abs(uN) > ub) uN = (alpha + w * ub >= ub) ? ub : -ub;
  r.u[N] = uN;
  r.U_raw = alpha + w * uN;
  r.U_applied = uN;
  r.saturated = law.saturated() && std::abs(r.U_raw) > ub;
  return r;
}

std::string_view to_string(SimStatus s) {
  switch (s) {
    case SimStatus::Converged: return "converged";
    case SimStatus::Bounded: return "bounded";
    case SimStatus::Diverged: return "diverged";
  }
  return "bounded";
}

std::size_t Trajectory::saturated_samples_after(double t) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] > t && sat_active[k]) ++n;
  return n;
}

std::optional<double> Trajectory::first_exceedance(double level) const {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (!(norm_sq[k] <= level)) return times[k];
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Driver shared by both simulations

namespace {

struct Quadrature {
  explicit Quadrature(const UniformGrid& g) : grid(g), w(g) {}
  UniformGrid grid;
  VolterraWeights w;

  double l2(std::span<const double> f) const {
    double s = 0.0;
    const auto row = w.row(grid.intervals);
    for (std::size_t i = 0; i < f.size(); ++i) s += row[i] * f[i] * f[i];
    return s;
  }
  // int f_x^2 with centered differences inside, second-order one-sided at the ends.
  double h1(std::span<const double> f) const {
    const std::size_t n = f.size();
    const double dx = grid.dx();
    const auto row = w.row(grid.intervals);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d;
      if (i == 0)
        d = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
      else if (i + 1 == n)
        d = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
      else
        d = (f[i + 1] - f[i - 1]) / (2.0 * dx);
      s += row[i] * d * d;
    }
    return s;
  }
};

using Stepper = std::function<StepResult(const DelayHistory&, double, const Eigen::VectorXd&,
                                         std::span<const double>)>;
using Lyapunov = std::function<double(const Eigen::VectorXd&, std::span<const double>)>;
struct BoundaryValue {
  double raw = 0.0;
  double applied = 0.0;
  bool saturated = false;
};
using Boundary = std::function<BoundaryValue(const Eigen::VectorXd&, std::span<const double>)>;

Trajectory run(const UniformGrid& grid, Actuation actuation, const InitialData& init, double h_window,
               const SimulationOptions& opt, const Stepper& step, const Boundary& boundary,
               const Lyapunov& lyap, double delta0, double delta1) {
  const Quadrature quad(grid);
  const double dt = opt.dt;
  const bool h1 = actuation == Actuation::Neumann;
  auto norm = [&](const Eigen::VectorXd& X, std::span<const double> u) {
    return X.squaredNorm() + quad.l2(u) + (h1 ? quad.h1(u) : 0.0);
  };

  Trajectory tr;
  tr.dt = dt;
  tr.actuation = actuation;

  DelayHistory hist(init, dt, h_window);
  Eigen::VectorXd X = init.X(0.0);
  std::vector<double> u = init.field(0.0);
  if (u.size() != grid.nodes()) throw GridMismatch("initial field does not match the simulation grid");
  hist.push(X, u);

  std::deque<std::pair<double, double>> window;  // (time, V), V decreasing from front
  auto push_window = [&](double t, double v) {
    while (!window.empty() && window.back().second <= v) window.pop_back();
    window.emplace_back(t, v);
  };
  if (lyap) {
    const auto M = static_cast<std::size_t>(std::ceil(h_window / dt - 1e-9));
    for (std::size_t j = 0; j <= M; ++j) {
      const double th = std::min(0.0, -h_window + static_cast<double>(j) * dt);
      const double v = lyap(init.X(th), init.field(th));
      tr.sup_V_initial = std::max(tr.sup_V_initial, v);
      push_window(th, v);
    }
  }

  const auto steps = static_cast<std::size_t>(std::llround(opt.T / dt));
  const std::size_t stride = std::max<std::size_t>(1, opt.trajectory_stride);
  double V_prev = lyap ? lyap(X, u) : 0.0;

  auto record = [&](std::size_t k, double t, double n2, double U_raw, double U, bool sat, double V) {
    tr.max_norm_sq = std::max(tr.max_norm_sq, n2);
    tr.max_abs_U = std::max(tr.max_abs_U, std::abs(U));
    if (sat) ++tr.saturated_steps;
    if (lyap && tr.sup_V_initial > 0.0) tr.max_V_ratio = std::max(tr.max_V_ratio, V / tr.sup_V_initial);
    if (k % stride == 0 || k == steps) {
      tr.times.push_back(t);
      tr.X.push_back(X);
      tr.U.push_back(U);
      tr.U_raw.push_back(U_raw);
      tr.sat_active.push_back(sat ? 1 : 0);
      tr.norm_sq.push_back(n2);
      if (lyap) tr.V.push_back(V);
    }
    if (opt.field_stride > 0 && k % opt.field_stride == 0) {
      tr.field_times.push_back(t);
      tr.fields.emplace_back(grid, u);
    }
  };

  tr.initial_norm_sq = norm(X, u);
  {
    const BoundaryValue b = boundary(X, u);
    record(0, 0.0, tr.initial_norm_sq, b.raw, b.applied, b.saturated, V_prev);
  }

  tr.status = SimStatus::Bounded;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    StepResult r = step(hist, t, X, u);
    X = std::move(r.X);
    u = std::move(r.u);
    hist.push(X, u);
    const double tn = static_cast<double>(k + 1) * dt;
    const double n2 = norm(X, u);

    double V = 0.0;
    if (lyap) {
      V = lyap(X, u);
      while (!window.empty() && window.front().first < t - h_window - 1e-12) window.pop_front();
      const double sup = window.empty() ? V_prev : std::max(window.front().second, V_prev);
      const double lhs = (V - V_prev) / dt + 2.0 * delta0 * V_prev - 2.0 * delta1 * sup;
      if (lhs > 1e-9 * std::max(1.0, sup)) ++tr.halanay_violations;
      push_window(tn, V);
      V_prev = V;
    }

    // Dirichlet steps already solved for the control at the new time.
    BoundaryValue b{r.U_raw, r.U_applied, r.saturated};
    if (actuation == Actuation::Neumann) b = boundary(X, u);
    const double U_raw = b.raw, U = b.applied;
    const bool sat = b.saturated;
    if (!std::isfinite(n2) || n2 > opt.divergence_threshold) {
      record(steps, tn, n2, U_raw, U, sat, V);
      tr.status = SimStatus::Diverged;
      return tr;
    }
    record(k + 1, tn, n2, U_raw, U, sat, V);
  }
  if (tr.final_norm_sq() <= opt.convergence_ratio * tr.initial_norm_sq) tr.status = SimStatus::Converged;
  return tr;
}

}  // namespace

Trajectory simulate(const PlantParams& plant, const ControlLaw& law, const InitialData& init,
                    const SimulationOptions& opt) {
  const KernelSet& ks = law.kernels();
  check_cfl(opt.dt, ks.dx());
  PlantParams p = plant;
  if (opt.delay) p.delay = *opt.delay;
  const double h_window = std::max(p.h, p.delay.max_delay());

  const Stepper step = [&](const DelayHistory& hist, double t, const Eigen::VectorXd& X, std::span<const double> u) {
    return step_explicit(p, law, hist, t, opt.dt, X, u);
  };
  const Boundary boundary = [&](const Eigen::VectorXd& X, std::span<const double> u) {
    const double raw = law.raw(X, u);
    const double applied = law.apply(raw);
    return BoundaryValue{raw, applied, applied != raw};
  };

  Lyapunov lyap;
  std::shared_ptr<Transforms> T;
  double d0 = 0.0, d1 = 0.0;
  if (opt.monitor) {
    T = std::make_shared<Transforms>(ks);
    const TuningParams w = opt.monitor->witness;
    d0 = w.delta0;
    d1 = w.delta1;
    const bool neu = law.actuation() == Actuation::Neumann;
    const Quadrature quad(ks.grid);
    lyap = [T, w, neu, quad](const Eigen::VectorXd& X, std::span<const double> u) {
      CoupledState s{X, Field(quad.grid, std::vector<double>(u.begin(), u.end()))};
      const CoupledState z = T->w_to_z(T->u_to_w(s));
      const Eigen::MatrixXd P = w.P.size() ? w.P : Eigen::MatrixXd::Identity(X.size(), X.size());
      double v = X.dot(P * X) + w.p1 * quad.l2(z.field.values);
      if (neu) v += w.p2 * quad.h1(z.field.values);
      return v;
    };
  }

  return run(ks.grid, law.actuation(), init, h_window, opt, step, boundary, lyap, d0, d1);
}

Trajectory simulate_target(const PlantParams& plant, const DesignGains& gains, const KernelSet& ks,
                           Actuation actuation, const InitialData& init_z, const SimulationOptions& opt) {
  const double dx = ks.dx();
  check_cfl(opt.dt, dx);
  PlantParams p = plant;
  if (opt.delay) p.delay = *opt.delay;
  const double h_window = std::max(p.h, p.delay.max_delay());
  const std::size_t N = ks.grid.intervals;
  const Eigen::Index n = p.dim();

  // g(x_i) (A1 - a2 I)
  const VolterraWeights W(ks.grid);
  const Eigen::MatrixXd D = p.A1 - p.a2 * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd gD(static_cast<Eigen::Index>(N + 1), n);
  for (std::size_t i = 0; i <= N; ++i) {
    Eigen::RowVectorXd g = ks.gamma.row(static_cast<Eigen::Index>(i));
    const auto wr = W.row(i);
    for (std::size_t j = 0; j <= i; ++j) g -= wr[j] * ks.q(i, j) * ks.gamma.row(static_cast<Eigen::Index>(j));
    gD.row(static_cast<Eigen::Index>(i)) = g * D;
  }
  const Eigen::MatrixXd Acl = p.A + p.B * gains.K;

  const Stepper step = [&](const DelayHistory& hist, double t, const Eigen::VectorXd& X, std::span<const double> z) {
    const auto d = delayed_sample(hist, t, p.delay);
    StepResult r;
    r.X = X + opt.dt * (Acl * X + p.A1 * d.X + p.B * z[0]);
    const Eigen::VectorXd gXd = gD * d.X;
    auto forcing = [&](std::size_t i) { return -gXd(static_cast<Eigen::Index>(i)); };
    if (actuation == Actuation::Dirichlet) {
      heat_update(z, d.u, p.a2, -gains.c, opt.dt, dx, N - 1, 0.0, forcing, r.u);
      r.u[N] = 0.0;
    } else {
      heat_update(z, d.u, p.a2, -gains.c, opt.dt, dx, N, z[N - 1], forcing, r.u);
    }
    return r;
  };
  const Boundary boundary = [](const Eigen::VectorXd&, std::span<const double>) { return BoundaryValue{}; };

  Lyapunov lyap;
  double d0 = 0.0, d1 = 0.0;
  if (opt.monitor) {
    const TuningParams w = opt.monitor->witness;
    d0 = w.delta0;
    d1 = w.delta1;
    const bool neu = actuation == Actuation::Neumann;
    const Quadrature quad(ks.grid);
    lyap = [w, neu, quad](const Eigen::VectorXd& X, std::span<const double> z) {
      const Eigen::MatrixXd P = w.P.size() ? w.P : Eigen::MatrixXd::Identity(X.size(), X.size());
      double v = X.dot(P * X) + w.p1 * quad.l2(z);
      if (neu) v += w.p2 * quad.h1(z);
      return v;
    };
  }
  return run(ks.grid, actuation, init_z, h_window, opt, step, boundary, lyap, d0, d1);
}

InitialData to_target_coordinates(const InitialData& init, const KernelSet& ks) {
  auto T = std::make_shared<Transforms>(ks);
  InitialData out;
  out.X = init.X;
  out.field = [T, init, grid = ks.grid](double th) {
    CoupledState s{init.X(th), Field(grid, init.field(th))};
    return T->w_to_z(T->u_to_w(s)).field.values;
  };
  return out;
}

// ---------------------------------------------------------------------------
// CSV

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const auto n = tr.X.empty() ? 0 : tr.X.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",X_" << (i + 1);
  os << ",U,sat_active,norm_sq";
  const bool with_v = !tr.V.empty();
  if (with_v) os << ",V";
  os << '\n';
  os.precision(12);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << tr.times[k];
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << tr.X[k](i);
    os << ',' << tr.U[k] << ',' << int(tr.sat_active[k]) << ',' << tr.norm_sq[k];
    if (with_v) os << ',' << tr.V[k];
    os << '\n';
  }
}

void write_field_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.fields.empty()) return;
  os << "t";
  const auto& g = tr.fields.front().grid;
  os.precision(12);
  for (std::size_t i = 0; i < g.nodes(); ++i) os << ",x=" << g.x(i);
  os << '\n';
  for (std::size_t k = 0; k < tr.fields.size(); ++k) {
    os << tr.field_times[k];
    for (double v : tr.fields[k].values) os << ',' << v;
    os << '\n';
  }
}

}  // namespace cascade
