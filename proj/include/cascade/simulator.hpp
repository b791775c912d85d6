#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cascade/certify.hpp"
#include "cascade/controller.hpp"
#include "cascade/grid.hpp"
#include "cascade/kernels.hpp"
#include "cascade/plant.hpp"
#include "cascade/transform.hpp"

namespace cascade {

// History (X(theta), u(., theta)) on [-h, 0].
struct InitialData {
  std::function<Eigen::VectorXd(double)> X;
  std::function<std::vector<double>(double)> field;  // samples on the simulation grid

  static InitialData constant(Eigen::VectorXd X0, std::vector<double> u0);
  static InitialData zero(Eigen::Index n, const UniformGrid& grid);
};

// Ring buffer of the last ceil(h/dt) + 2 snapshots at t_k = k dt, with
// linear interpolation between them and direct evaluation of the initial
// data for t <= 0.
class DelayHistory {
 public:
  DelayHistory(InitialData init, double dt, double h);

  double dt() const { return dt_; }
  std::size_t capacity() const { return X_.size(); }
  std::size_t latest_step() const { return latest_; }

  // Stores the state at step k = latest_step() + 1 (or k = 0 on first push).
  void push(const Eigen::VectorXd& X, std::span<const double> u);

  struct Sample {
    Eigen::VectorXd X;
    std::vector<double> u;
  };
  // State at time s. Throws InvalidArgument when s < -h or s lies outside
  // the stored window.
  Sample at(double s) const;

 private:
  InitialData init_;
  double dt_, h_;
  std::vector<Eigen::VectorXd> X_;
  std::vector<std::vector<double>> u_;
  std::size_t latest_ = 0;
  bool empty_ = true;
};

// (X(t - tau(t)), u(., t - tau(t)))
DelayHistory::Sample delayed_sample(const DelayHistory& history, double t, const DelayProfile& tau);

struct StepResult {
  Eigen::VectorXd X;
  std::vector<double> u;
  double U_raw = 0.0;      // unsaturated control at the new time (Dirichlet) or the old one (Neumann)
  double U_applied = 0.0;  // boundary value / flux actually imposed
  bool saturated = false;
};

// One forward-Euler step from (X, u) at time t. Throws InvalidArgument when
// dt > dx^2 / 2.
StepResult step_explicit(const PlantParams& plant, const ControlLaw& law, const DelayHistory& history,
                         double t, double dt, const Eigen::VectorXd& X, std::span<const double> u);

enum class SimStatus { Converged, Bounded, Diverged };
std::string_view to_string(SimStatus s);

struct Monitor {
  TuningParams witness;  // P, p1, p2, delta0, delta1
};

struct SimulationOptions {
  double T = 10.0;
  double dt = 2e-4;
  std::optional<DelayProfile> delay;  // defaults to plant.delay
  std::size_t trajectory_stride = 1;
  std::size_t field_stride = 0;       // 0: no field snapshots
  std::optional<Monitor> monitor;
  double divergence_threshold = 1e12;
  double convergence_ratio = 1e-2;
};

struct Trajectory {
  double dt = 0.0;
  Actuation actuation = Actuation::Dirichlet;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> X;
  std::vector<double> U;
  std::vector<double> U_raw;
  std::vector<char> sat_active;
  std::vector<double> norm_sq;
  std::vector<double> V;  // empty without a monitor

  std::vector<double> field_times;
  std::vector<Field> fields;

  SimStatus status = SimStatus::Bounded;
  double initial_norm_sq = 0.0;
  double max_norm_sq = 0.0;
  double max_abs_U = 0.0;
  std::size_t saturated_steps = 0;
  // Monitoring
  double sup_V_initial = 0.0;
  double max_V_ratio = 0.0;  // max V(t) / sup_{[-h,0]} V
  std::size_t halanay_violations = 0;

  double final_norm_sq() const { return norm_sq.empty() ? 0.0 : norm_sq.back(); }
  std::size_t saturated_samples_after(double t) const;
  // First recorded time at which norm_sq exceeds `level`, if any.
  std::optional<double> first_exceedance(double level) const;
};

// Closed loop in original coordinates. Blow-up ends the run with status
// Diverged instead of throwing.
Trajectory simulate(const PlantParams& plant, const ControlLaw& law, const InitialData& init,
                    const SimulationOptions& options);

// Target system, driven by g(x) (A1 - a2 I) X(t - tau) with
// g = gamma - int q gamma, and z(1) = 0 or z_x(1) = 0.
Trajectory simulate_target(const PlantParams& plant, const DesignGains& gains, const KernelSet& kernels,
                           Actuation actuation, const InitialData& init_z, const SimulationOptions& options);

// Maps initial data through u_to_w, w_to_z at every theta.
InitialData to_target_coordinates(const InitialData& init, const KernelSet& kernels);

// CSV with columns t, X_1..X_n, U, sat_active, norm_sq[, V].
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
// One row per stored field snapshot: t, u(x_0), ..., u(x_N).
void write_field_csv(std::ostream& os, const Trajectory& tr);

}  // namespace cascade
