#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cascade/certify.hpp"
#include "cascade/kernels.hpp"
#include "cascade/plant.hpp"
#include "cascade/simulator.hpp"

namespace cascade {

using json = nlohmann::ordered_json;

// Initial profile of the field, constant on [-h, 0].
struct FieldProfile {
  enum class Kind { Zero, Cosine, Samples };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;       // Cosine: amplitude * cos(mode * pi * x)
  double mode = 1.0;
  std::vector<double> samples;  // Samples: uniform on [0, 1], resampled linearly

  std::vector<double> sample(const UniformGrid& grid) const;
};

struct InitialSpec {
  Eigen::VectorXd X;
  FieldProfile u;
};

struct SimulationSpec {
  double T = 10.0;
  double dx = 0.04;
  double dt = 2e-4;
  DelayProfile delay{ConstantDelay{0.4}};
  InitialSpec initial;
  bool monitor = false;
};

struct OutputSpec {
  std::string dir = "out";
  std::size_t field_dump_stride = 0;
  std::size_t trajectory_stride = 50;
};

struct Scenario {
  std::string name;
  PlantParams plant;
  DesignGains gains;
  Actuation actuation = Actuation::Dirichlet;
  TuningParams tuning;
  int seeds = 8;
  std::uint64_t seed = 1;
  int max_evals = 20000;  // per seed and per beta probe
  SimulationSpec simulation;
  OutputSpec output;

  UniformGrid grid() const { return UniformGrid::from_step(simulation.dx); }
  InitialData initial_data() const;
  SimulationOptions simulation_options() const;
  SearchConfig search_config() const;
};

// Parsing validates the embedded plant, gains and tuning and the CFL
// condition; failures raise InvalidArgument.
Scenario scenario_from_json(const json& j);
json to_json(const Scenario& s);

json to_json(const KernelSet& k);
KernelSet kernels_from_json(const json& j);

json to_json(const Certificate& c);
Certificate certificate_from_json(const json& j);

json to_json(const KernelResidualReport& r);

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace cascade
