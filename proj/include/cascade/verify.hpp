#pragma once

#include <string>
#include <vector>

#include "cascade/kernels.hpp"
#include "cascade/plant.hpp"
#include "cascade/simulator.hpp"
#include "cascade/transform.hpp"

namespace cascade {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value <= tolerance; }
};

// max |u - w_to_u(z_to_w(w_to_z(u_to_w(u))))| and the same for z.
struct RoundTrip {
  double u_error = 0.0;
  double z_error = 0.0;
};
RoundTrip transform_round_trip(const CoupledState& s, const KernelSet& kernels);

// |U(u) - U(z(u))| between the literal law and its target-coordinate form.
double controller_dual_gap(const CoupledState& s, const KernelSet& kernels, Actuation actuation);

// Original closed loop (unsaturated) mapped through u_to_w, w_to_z against a
// direct target-system run from mapped initial data, compared at every
// field snapshot.
struct DualSimulation {
  double z_error = 0.0;  // max abs field difference
  double X_error = 0.0;  // max |X - X_target|
  double z_scale = 0.0;  // max |z|
  double X_scale = 0.0;
};
DualSimulation dual_simulation(const PlantParams& plant, const DesignGains& gains, const KernelSet& kernels,
                               Actuation actuation, const InitialData& init, double T, double dt);

// Everything above plus the kernel residuals, with tolerances that scale
// with the grid: round trips 1e-6 (dx / 0.01)^4, controller gap 1e-4 scale,
// dual simulation (dx^2 + dt) relative to the state scale.
std::vector<Check> verify_all(const PlantParams& plant, const DesignGains& gains, const KernelSet& kernels,
                              Actuation actuation, const InitialData& init, double dt);

}  // namespace cascade
