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

// Force-controlled unicycle: Cartesian kinematics with double-integrator
// velocity dynamics, the wheel-torque feedback transform, polar geometry
// relative to the parking target at the origin, and a fixed-step RK4.

#pragma once

#include <functional>
#include <optional>

namespace safepark::vehicle {

// Polar quantities are not evaluated closer than this to the origin.
inline constexpr double kRhoMin = 1e-6;

struct VehicleParams {
  double mass = 1.0;          // kg
  double inertia = 0.025;     // kg m^2
  double wheel_radius = 0.03; // m
  double axle = 0.15;         // m, enters the torque matrix as 2*axle

  // Throws ValidationError unless every field is strictly positive.
  void validate() const;
};

// theta lives on the real line; it is never wrapped.
struct CartesianState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;

  bool operator==(const CartesianState&) const = default;
};

struct PolarPose {
  double rho = 0.0;
  double alpha = 0.0;
  double psi = 0.0;
};

struct PolarRate {
  double rho_dot = 0.0;
  double alpha_dot = 0.0;
  double psi_dot = 0.0;
};

// Commanded accelerations (v_dot, omega_dot).
struct ControlInput {
  double u_v = 0.0;
  double u_omega = 0.0;
};

struct WheelTorques {
  double tau_l = 0.0;
  double tau_r = 0.0;
};

// Time derivative of the state, laid out as a CartesianState.
CartesianState cartesian_rhs(const CartesianState& state,
                             const ControlInput& input);

WheelTorques wheel_torque_map(const VehicleParams& params,
                              const ControlInput& input);

// Inverse of wheel_torque_map through the force-balance equation.
ControlInput accels_from_torques(const VehicleParams& params,
                                 const WheelTorques& torques);

// The 2*pi shift of `angle` closest to `reference`.
double nearest_branch(double angle, double reference);

// rho = |(x, y)|, psi = atan2(-y, -x), alpha = psi - theta. When prev_psi is
// given, psi is moved onto the branch nearest to it. Throws DegeneratePose
// when rho < kRhoMin.
PolarPose polar_pose(const CartesianState& state,
                     std::optional<double> prev_psi = std::nullopt);

// Polar kinematics. Throws DegeneratePose when rho <= 0.
PolarRate polar_rhs(const PolarPose& pose, double v, double omega);

// One classical RK4 step with the input held over the step.
CartesianState rk4_step(const CartesianState& state, const ControlInput& input,
                        double dt);

using Feedback = std::function<ControlInput(const CartesianState&)>;

// RK4 with the feedback law re-evaluated at every stage, i.e. the
// continuous-time closed loop rather than a sampled one.
CartesianState rk4_step(const CartesianState& state, const Feedback& feedback,
                        double dt);

}  // namespace safepark::vehicle
