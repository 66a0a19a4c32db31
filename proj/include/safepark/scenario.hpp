// Copyright 2026 The safepark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "safepark/cbf.hpp"
#include "safepark/clf.hpp"
#include "safepark/qp.hpp"
#include "safepark/vehicle.hpp"

namespace safepark::sim {

struct Scenario {
  vehicle::VehicleParams vehicle;
  clf::Gains gains;
  cbf::BarrierParams barrier;
  std::vector<cbf::CircularObstacle> obstacles;
  qp::QpParams qp;
  vehicle::CartesianState init;
  double dt = 1e-3;
  double control_dt = 1e-3;
  double t_max = 30.0;
  double rho_stop = 1e-2;
  std::uint64_t seed = 42;

  // Throws ValidationError naming the first violated invariant, including a
  // start state outside the safe set.
  void validate() const;

  // Integration steps per control update.
  long steps_per_control() const;
};

// Parking around a single obstacle at (-2, 0) from (-3.15, 2.96, -1.43).
Scenario paper_sim_scenario();

// Laboratory geometry: obstacle at (-0.6, 0.4), start (-1.08, 1.37, 0.78).
Scenario paper_exp_scenario();

}  // namespace safepark::sim

namespace safepark::cli {

// Reads the sectioned scenario format:
//
//   [vehicle]   mass, inertia, wheel_radius, axle
//   [gains]     lambda, k_rho, k_alpha, k_z, k_omega, mu, epsilon (optional)
//   [barrier]   l_v, l_omega, alpha_h_slope
//   [[obstacle]] cx, cy, radius, scale        (repeatable)
//   [qp]        m_weight, gamma (optional)
//   [sim]       dt, control_dt, t_max, rho_stop, seed
//   [init]      x, y, theta, v, omega
//
// Throws ParseError (with line and section) on malformed input and
// ValidationError on invariant violations.
sim::Scenario parse_scenario(std::istream& in, const std::string& source = "<input>");
sim::Scenario load_scenario(const std::filesystem::path& path);

void write_scenario(const sim::Scenario& scenario, std::ostream& out);

}  // namespace safepark::cli
