#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cascade/grid.hpp"
#include "cascade/plant.hpp"

namespace fixtures {

inline cascade::PlantParams scalar_plant(double A, double A1, double a, double a2, double u_bar) {
  cascade::PlantParams p;
  p.A = Eigen::MatrixXd::Constant(1, 1, A);
  p.A1 = Eigen::MatrixXd::Constant(1, 1, A1);
  p.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.a = a;
  p.a2 = a2;
  p.u_bar = u_bar;
  return p;
}

inline cascade::DesignGains gains(double K, double c) {
  cascade::DesignGains g;
  g.K = Eigen::RowVectorXd::Constant(1, K);
  g.c = c;
  return g;
}

inline cascade::PlantParams example1(double A1 = 0.4) { return scalar_plant(1.0, A1, 0.2, 0.1, 20.0); }
inline cascade::DesignGains example1_gains() { return gains(-2.0, 0.8); }
inline cascade::PlantParams example2(double A1 = 0.4) { return scalar_plant(1.0, A1, 0.2, 0.1, 50.0); }
inline cascade::DesignGains example2_gains() { return gains(-4.0, 1.8); }

inline std::vector<double> cosine(const cascade::UniformGrid& g, double amplitude, double mode = 1.0) {
  std::vector<double> v(g.nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = amplitude * std::cos(mode * std::numbers::pi * g.x(i));
  return v;
}

}  // namespace fixtures
