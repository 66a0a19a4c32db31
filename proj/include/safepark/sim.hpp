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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safepark/qp.hpp"
#include "safepark/scenario.hpp"

namespace safepark::sim {

enum class Controller { Nominal, ClfQp, ClfCbfQp };

// CLI spelling: nominal, clf-qp, clf-cbf-qp.
std::string_view controller_name(Controller controller);
Controller parse_controller(std::string_view name);

struct LogRow {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double psi = 0.0;
  double z = 0.0;
  double omega_err = 0.0;
  double V = 0.0;
  double W = 0.0;
  double h = 0.0;   // smallest barrier value over obstacles, 0 without obstacles
  double h0 = 0.0;  // admissible-set value of that same obstacle
  double u_v = 0.0;
  double u_omega = 0.0;
  double tau_l = 0.0;
  double tau_r = 0.0;
  std::optional<qp::Region> region;  // empty for the nominal controller
  double f1_residual = 0.0;
  double f2_residual = 0.0;  // worst row; 0 without obstacles

  bool operator==(const LogRow&) const = default;
};

enum class Termination { Horizon, Converged, Frozen };

struct TrajectoryLog {
  std::string label;
  std::vector<LogRow> rows;
  Termination termination = Termination::Horizon;
};

// Fixed-step closed-loop simulation with zero-order-hold control refreshed
// every control_dt. Stops at t_max, or once rho < rho_stop with
// |(z, omega_err)| < 1e-3. Throws UnsafeStart when the initial state violates
// a barrier, and DegenerateQp (with the offending state in the message) if
// the QP leaves the region the theory guarantees.
TrajectoryLog run(const Scenario& scenario, Controller controller);

// theta shifted by a multiple of 2*pi so that alpha lies in (-pi, pi].
vehicle::CartesianState normalize_heading(const vehicle::CartesianState& state);

}  // namespace safepark::sim
