#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cascade/error.hpp"
#include "cascade/simulator.hpp"
#include "cascade/verify.hpp"
#include "fixtures.hpp"

using namespace cascade;
using std::numbers::pi;

namespace {

PlantParams heat_only() {
  auto p = fixtures::scalar_plant(0.0, 0.0, 0.0, 0.0, 1.0);
  return p;
}

InitialData smooth_history(const UniformGrid& g) {
  InitialData init;
  init.X = [](double t) { return Eigen::VectorXd::Constant(1, std::sin(3.0 * t)); };
  init.field = [g](double t) {
    std::vector<double> u(g.nodes());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::cos(t + g.x(i));
    return u;
  };
  return init;
}

}  // namespace

TEST(Simulator, HeatKernelOracle) {
  const auto g = UniformGrid::from_step(0.04);
  const auto ks = zero_kernels(g, 1);
  const ControlLaw law(Actuation::Neumann, ks, 1.0);
  SimulationOptions o;
  o.T = 0.1;
  o.field_stride = 1;
  const auto tr = simulate(heat_only(), law, InitialData::constant(Eigen::VectorXd::Zero(1), fixtures::cosine(g, 1.0)), o);
  ASSERT_NEAR(tr.field_times.back(), 0.1, 1e-12);
  const Field& u = tr.fields.back();
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    err = std::max(err, std::abs(u[i] - std::exp(-pi * pi * 0.1) * std::cos(pi * g.x(i))));
  EXPECT_LE(err, 2e-3);
}

TEST(Simulator, ZeroDataStaysZero) {
  const auto p = fixtures::example1();
  const auto g = UniformGrid::from_step(0.04);
  const auto ks = build_kernels(p, fixtures::example1_gains(), g);
  const ControlLaw law(Actuation::Dirichlet, ks, p.u_bar);
  SimulationOptions o;
  o.T = 1.0;
  const auto tr = simulate(p, law, InitialData::zero(1, g), o);
  for (double n : tr.norm_sq) EXPECT_EQ(n, 0.0);
  EXPECT_EQ(tr.max_abs_U, 0.0);
  EXPECT_EQ(tr.final_norm_sq(), 0.0);
}

TEST(Simulator, CflViolationRejected) {
  const auto p = fixtures::example1();
  const auto g = UniformGrid::from_step(0.04);
  const auto ks = build_kernels(p, fixtures::example1_gains(), g);
  const ControlLaw law(Actuation::Dirichlet, ks, p.u_bar);
  SimulationOptions o;
  o.dt = 0.001;
  EXPECT_THROW(simulate(p, law, InitialData::zero(1, g), o), InvalidArgument);
}

TEST(DelayHistory, CapacityAndInitialWindow) {
  const auto g = UniformGrid::from_step(0.1);
  const DelayHistory h(smooth_history(g), 0.01, 0.4);
  EXPECT_EQ(h.capacity(), 42u);
  const auto s = h.at(-0.25);
  EXPECT_DOUBLE_EQ(s.X(0), std::sin(-0.75));
  EXPECT_DOUBLE_EQ(s.u[3], std::cos(-0.25 + 0.3));
  EXPECT_THROW(h.at(-0.5), InvalidArgument);
}

TEST(DelayHistory, AlignedLagIsExactLookup) {
  const auto g = UniformGrid::from_step(0.1);
  const auto init = smooth_history(g);
  const double dt = 0.01;
  DelayHistory h(init, dt, 0.4);
  for (int k = 0; k <= 100; ++k) h.push(init.X(k * dt), init.field(k * dt));
  const auto s = delayed_sample(h, 100 * dt, DelayProfile{ConstantDelay{0.4}});
  EXPECT_EQ(s.X(0), init.X(60 * dt)(0));
  EXPECT_EQ(s.u, init.field(60 * dt));
}

TEST(DelayHistory, SinusoidalDelayMatchesDenseStorage) {
  const auto g = UniformGrid::from_step(0.1);
  const auto init = smooth_history(g);
  const DelayProfile tau{SinusoidalDelay{0.2, 0.4, 1.0}};
  for (double dt : {0.01, 0.005}) {
    DelayHistory h(init, dt, 0.4);
    std::vector<double> dense;  // every stored X, never evicted
    double worst_dense = 0.0, worst_exact = 0.0;
    const int steps = static_cast<int>(std::lround(3.0 / dt));
    for (int k = 0; k <= steps; ++k) {
      const double t = k * dt;
      h.push(init.X(t), init.field(t));
      dense.push_back(init.X(t)(0));
      if (t < 0.5) continue;
      const double s = t - tau(t);
      const double r = s / dt;
      const auto j = static_cast<std::size_t>(std::floor(r));
      const double f = r - static_cast<double>(j);
      const double ref = (1.0 - f) * dense[j] + f * dense[std::min(j + 1, dense.size() - 1)];
      const auto got = delayed_sample(h, t, tau);
      worst_dense = std::max(worst_dense, std::abs(got.X(0) - ref));
      worst_exact = std::max(worst_exact, std::abs(got.X(0) - std::sin(3.0 * s)));
    }
    EXPECT_LE(worst_dense, 1e-9) << dt;
    EXPECT_LE(worst_exact, 9.0 / 8.0 * dt * dt * 1.01) << dt;  // |X''| dt^2 / 8
  }
}

TEST(DelayHistory, OutOfWindowRejected) {
  const auto g = UniformGrid::from_step(0.1);
  const auto init = smooth_history(g);
  DelayHistory h(init, 0.01, 0.1);
  for (int k = 0; k <= 100; ++k) h.push(init.X(k * 0.01), init.field(k * 0.01));
  EXPECT_NO_THROW(h.at(0.9));
  EXPECT_THROW(h.at(0.5), InvalidArgument);
  EXPECT_THROW(h.at(1.005), InvalidArgument);
}

TEST(Simulator, DualSimulationAgreesAtSecondOrder) {
  for (auto act : {Actuation::Dirichlet, Actuation::Neumann}) {
    const bool dir = act == Actuation::Dirichlet;
    const auto p = dir ? fixtures::example1() : fixtures::example2();
    const auto gains = dir ? fixtures::example1_gains() : fixtures::example2_gains();
    double prev = 0.0;
    for (double dx : {0.04, 0.02}) {
      const auto g = UniformGrid::from_step(dx);
      const auto ks = build_kernels(p, gains, g);
      const double dt = 0.125 * dx * dx;
      const auto init = InitialData::constant(Eigen::VectorXd::Constant(1, 0.82), fixtures::cosine(g, 0.29));
      const auto d = dual_simulation(p, gains, ks, act, init, 1.0, dt);
      EXPECT_LE(d.z_error, (dx * dx + dt) * d.z_scale) << to_string(act) << dx;
      EXPECT_LE(d.X_error, (dx * dx + dt) * d.X_scale) << to_string(act) << dx;
      if (prev > 0.0) EXPECT_GT(prev / d.z_error, 3.0);
      prev = d.z_error;
    }
  }
}

TEST(Simulator, TargetDecouplesWhenA1EqualsA2) {
  auto p = fixtures::example1();
  p.A1 = Eigen::MatrixXd::Constant(1, 1, p.a2);
  const auto g = UniformGrid::from_step(0.04);
  const auto ks = build_kernels(p, fixtures::example1_gains(), g);
  SimulationOptions o;
  o.T = 1.0;
  o.field_stride = 500;
  const auto tr = simulate_target(p, fixtures::example1_gains(), ks, Actuation::Dirichlet,
                                  InitialData::constant(Eigen::VectorXd::Constant(1, 1.0), std::vector<double>(g.nodes(), 0.0)), o);
  for (const auto& f : tr.fields)
    for (double v : f.values) EXPECT_EQ(v, 0.0);
  // X' = -X + 0.1 X(t - 0.4) with X == 1 on the window
  EXPECT_LT(tr.X.back()(0), 1.0);
  EXPECT_GT(tr.X.back()(0), 0.0);
}

TEST(Simulator, Example1InsideRunAvoidsSaturation) {
  const auto p = fixtures::example1();
  const auto g = UniformGrid::from_step(0.04);
  const auto ks = build_kernels(p, fixtures::example1_gains(), g);
  const ControlLaw law(Actuation::Dirichlet, ks, p.u_bar);
  SimulationOptions o;
  o.trajectory_stride = 10;
  const auto tr = simulate(p, law, InitialData::constant(Eigen::VectorXd::Constant(1, 0.82), fixtures::cosine(g, 0.29)), o);
  EXPECT_EQ(tr.saturated_steps, 0u);
  EXPECT_EQ(tr.saturated_samples_after(1.0), 0u);
  EXPECT_NE(tr.status, SimStatus::Diverged);
  EXPECT_LT(tr.final_norm_sq(), 0.1 * tr.initial_norm_sq);
  for (std::size_t k = 1; k < tr.times.size(); ++k) EXPECT_GT(tr.times[k], tr.times[k - 1]);
}

TEST(Simulator, SaturationFlagsConsistent) {
  const auto p = fixtures::example1();
  const auto g = UniformGrid::from_step(0.04);
  const auto ks = build_kernels(p, fixtures::example1_gains(), g);
  const ControlLaw law(Actuation::Dirichlet, ks, p.u_bar);
  SimulationOptions o;
  o.T = 2.0;
  const auto tr = simulate(p, law, InitialData::constant(Eigen::VectorXd::Constant(1, 5.0), fixtures::cosine(g, 4.0)), o);
  std::size_t flagged = 0;
  for (std::size_t k = 0; k < tr.U.size(); ++k) {
    EXPECT_EQ(bool(tr.sat_active[k]), std::abs(tr.U_raw[k]) > p.u_bar);
    EXPECT_NEAR(tr.U[k], saturate(tr.U_raw[k], p.u_bar), 1e-12 * p.u_bar);
    flagged += tr.sat_active[k];
  }
  EXPECT_GT(flagged, 0u);
  EXPECT_EQ(tr.max_abs_U, p.u_bar);
}

TEST(Simulator, GridConvergenceOfTerminalNorm) {
  const auto p = fixtures::example1();
  double prev = 0.0;
  for (double dx : {0.04, 0.02}) {
    const auto g = UniformGrid::from_step(dx);
    const auto ks = build_kernels(p, fixtures::example1_gains(), g);
    const ControlLaw law(Actuation::Dirichlet, ks, p.u_bar);
    SimulationOptions o;
    o.T = 3.0;
    o.dt = 0.125 * dx * dx;
    o.trajectory_stride = 100;
    const auto tr = simulate(p, law, InitialData::constant(Eigen::VectorXd::Constant(1, 0.82), fixtures::cosine(g, 0.29)), o);
    if (prev > 0.0) EXPECT_LE(std::abs(tr.final_norm_sq() - prev) / prev, 10.0 * 0.04 * 0.04);
    prev = tr.final_norm_sq();
  }
}

TEST(Simulator, CertifiedRunRespectsLyapunovBound) {
  for (auto act : {Actuation::Dirichlet, Actuation::Neumann}) {
    const bool dir = act == Actuation::Dirichlet;
    const auto p = dir ? fixtures::example1(0.28) : fixtures::example2(0.2);
    const auto gains = dir ? fixtures::example1_gains() : fixtures::example2_gains();
    const auto g = UniformGrid::from_step(0.04);
    const auto ks = build_kernels(p, gains, g);
    TuningParams t;
    t.delta0 = t.delta1 = dir ? 0.3 : 0.5;
    const Certificate cert = minimize_beta(p, gains, act, ks, t);
    ASSERT_TRUE(cert.feasible());
    const double X0 = dir ? 0.6 : 0.03, amp = dir ? 0.2 : 0.02;
    const Field u0(g, fixtures::cosine(g, amp));
    const auto m = admissible_set_membership(cert, X0, norm_sq(u0),
                                             dir ? std::nullopt : std::optional<double>(derivative_norm_sq(u0)));
    ASSERT_TRUE(m.inside) << m.value;
    const ControlLaw law(act, ks, p.u_bar);
    SimulationOptions o;
    o.monitor = Monitor{cert.witness};
    o.trajectory_stride = 10;
    const auto tr = simulate(p, law, InitialData::constant(Eigen::VectorXd::Constant(1, X0), u0.values), o);
    ASSERT_FALSE(tr.V.empty());
    for (double v : tr.V) EXPECT_LE(v, tr.sup_V_initial * (1.0 + 1e-9));
    EXPECT_LE(tr.max_V_ratio, 1.0 + 1e-9);
    EXPECT_EQ(tr.halanay_violations, 0u);
    EXPECT_EQ(tr.saturated_steps, 0u);
    EXPECT_EQ(tr.status, SimStatus::Converged);
  }
}

TEST(Simulator, BlowUpEndsWithDivergedStatus) {
  auto p = fixtures::scalar_plant(1.0, 0.4, 0.2, 0.1, 1e-3);
  const auto g = UniformGrid::from_step(0.2);
  const auto ks = build_kernels(p, fixtures::gains(0.0, 0.8), g);
  const ControlLaw law(Actuation::Dirichlet, ks, p.u_bar);
  SimulationOptions o;
  o.T = 100.0;
  o.dt = 0.01;
  const auto tr = simulate(p, law, InitialData::constant(Eigen::VectorXd::Constant(1, 1.0), std::vector<double>(g.nodes(), 0.0)), o);
  EXPECT_EQ(tr.status, SimStatus::Diverged);
  EXPECT_LT(tr.times.back(), 100.0);
  EXPECT_TRUE(tr.first_exceedance(1e3).has_value());
}

TEST(Simulator, CsvExport) {
  const auto p = fixtures::example1();
  const auto g = UniformGrid::from_step(0.1);
  const auto ks = build_kernels(p, fixtures::example1_gains(), g);
  const ControlLaw law(Actuation::Dirichlet, ks, p.u_bar);
  SimulationOptions o;
  o.T = 0.1;
  o.dt = 0.001;
  o.trajectory_stride = 10;
  o.field_stride = 50;
  const auto tr = simulate(p, law, InitialData::constant(Eigen::VectorXd::Constant(1, 0.1), fixtures::cosine(g, 0.1)), o);
  std::ostringstream a, b;
  write_trajectory_csv(a, tr);
  write_field_csv(b, tr);
  std::istringstream ia(a.str()), ib(b.str());
  std::string line;
  std::getline(ia, line);
  EXPECT_EQ(line, "t,X_1,U,sat_active,norm_sq");
  std::size_t rows = 0;
  while (std::getline(ia, line)) ++rows;
  EXPECT_EQ(rows, tr.times.size());
  std::getline(ib, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), static_cast<long>(g.nodes()));
  rows = 0;
  while (std::getline(ib, line)) ++rows;
  EXPECT_EQ(rows, tr.fields.size());
}
