#include "cascade/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cascade/controller.hpp"
#include "cascade/error.hpp"

namespace cascade {

namespace {

double max_abs_diff(const Field& a, const Field& b) {
  if (a.size() != b.size()) throw GridMismatch("fields differ in length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const Field& a) {
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

RoundTrip transform_round_trip(const CoupledState& s, const KernelSet& ks) {
  const Transforms tf(ks);
  const CoupledState w = tf.u_to_w(s);
  const CoupledState z = tf.w_to_z(w);
  const CoupledState u_back = tf.w_to_u(tf.z_to_w(z));
  const CoupledState z_back = tf.w_to_z(tf.u_to_w(tf.w_to_u(tf.z_to_w(z))));
  return {max_abs_diff(s.field, u_back.field), max_abs_diff(z.field, z_back.field)};
}

double controller_dual_gap(const CoupledState& s, const KernelSet& ks, Actuation act) {
  const CoupledState z = w_to_z(u_to_w(s, ks), ks);
  if (act == Actuation::Dirichlet) return std::abs(dirichlet_u(s, ks) - dirichlet_u_from_z(z, ks));
  return std::abs(neumann_u(s, ks) - neumann_u_from_z(z, ks));
}

DualSimulation dual_simulation(const PlantParams& plant, const DesignGains& gains, const KernelSet& ks,
                               Actuation act, const InitialData& init, double T, double dt) {
  const ControlLaw law(act, ks, plant.u_bar, false);
  SimulationOptions o;
  o.T = T;
  o.dt = dt;
  o.field_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 / dt)));
  const Trajectory orig = simulate(plant, law, init, o);
  const Trajectory target = simulate_target(plant, gains, ks, act, to_target_coordinates(init, ks), o);
  if (orig.fields.size() != target.fields.size() || orig.X.size() != target.X.size())
    throw NumericalError("dual simulation ended early");

  const Transforms tf(ks);
  DualSimulation d;
  for (std::size_t k = 0; k < orig.fields.size(); ++k) {
    const std::size_t step = k * o.field_stride / o.trajectory_stride;
    const CoupledState z = tf.w_to_z(tf.u_to_w({orig.X[step], orig.fields[k]}));
    d.z_error = std::max(d.z_error, max_abs_diff(z.field, target.fields[k]));
    d.z_scale = std::max(d.z_scale, max_abs(z.field));
  }
  for (std::size_t k = 0; k < orig.X.size(); ++k) {
    d.X_error = std::max(d.X_error, (orig.X[k] - target.X[k]).lpNorm<Eigen::Infinity>());
    d.X_scale = std::max(d.X_scale, orig.X[k].lpNorm<Eigen::Infinity>());
  }
  return d;
}

std::vector<Check> verify_all(const PlantParams& plant, const DesignGains& gains, const KernelSet& ks,
                              Actuation act, const InitialData& init, double dt) {
  std::vector<Check> out;
  const double dx = ks.dx();

  const KernelResidualReport report = verify_kernel_pdes(ks, plant, gains);
  for (const auto& r : report.entries) out.push_back({r.name, r.value, r.tolerance(dx)});

  const Field u0(ks.grid, init.field(0.0));
  Field smooth(ks.grid);
  for (std::size_t i = 0; i < smooth.size(); ++i) {
    const double x = ks.grid.x(i);
    smooth[i] = 1.0 + x * x - 0.5 * std::cos(2.0 * std::numbers::pi * x);
  }
  const std::vector<CoupledState> states = {{init.X(0.0), u0},
                                            {Eigen::VectorXd::Ones(plant.dim()), smooth}};

  const double rt_tol = 1e-6 * std::pow(dx / 0.01, 4);
  RoundTrip rt;
  double gap = 0.0, gap_scale = 1.0;
  for (const auto& s : states) {
    const RoundTrip r = transform_round_trip(s, ks);
    rt.u_error = std::max(rt.u_error, r.u_error / std::max(1.0, max_abs(s.field)));
    rt.z_error = std::max(rt.z_error, r.z_error / std::max(1.0, max_abs(s.field)));
    gap = std::max(gap, controller_dual_gap(s, ks, act));
    gap_scale = std::max(gap_scale, std::abs(ControlLaw(act, ks, plant.u_bar, false).raw(s)));
  }
  out.push_back({"round_trip_u", rt.u_error, rt_tol});
  out.push_back({"round_trip_z", rt.z_error, rt_tol});
  out.push_back({"controller_dual", gap, 1e-4 * gap_scale});

  const DualSimulation d = dual_simulation(plant, gains, ks, act, init, 1.0, dt);
  const double rel = dx * dx + dt;
  out.push_back({"dual_simulation_z", d.z_error, rel * std::max(1.0, d.z_scale)});
  out.push_back({"dual_simulation_X", d.X_error, rel * std::max(1.0, d.X_scale)});
  return out;
}

}  // namespace cascade
