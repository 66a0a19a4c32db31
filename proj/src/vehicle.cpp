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

#include "safepark/vehicle.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "safepark/errors.hpp"

namespace safepark::vehicle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CartesianState axpy(const CartesianState& s, double h, const CartesianState& d) {
  return {s.x + h * d.x, s.y + h * d.y, s.theta + h * d.theta, s.v + h * d.v,
          s.omega + h * d.omega};
}

template <typename InputAt>
CartesianState rk4(const CartesianState& s, double dt, InputAt&& input_at) {
  const CartesianState k1 = cartesian_rhs(s, input_at(s));
  const CartesianState s2 = axpy(s, 0.5 * dt, k1);
  const CartesianState k2 = cartesian_rhs(s2, input_at(s2));
  const CartesianState s3 = axpy(s, 0.5 * dt, k2);
  const CartesianState k3 = cartesian_rhs(s3, input_at(s3));
  const CartesianState s4 = axpy(s, dt, k3);
  const CartesianState k4 = cartesian_rhs(s4, input_at(s4));
  const double w = dt / 6.0;
  return {s.x + w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.y + w * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
          s.theta + w * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta),
          s.v + w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
          s.omega + w * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega)};
}

}  // namespace

void VehicleParams::validate() const {
  auto require = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ValidationError(
          fmt::format("vehicle.{} must be positive and finite, got {}", name, value));
    }
  };
  require(mass, "mass");
  require(inertia, "inertia");
  require(wheel_radius, "wheel_radius");
  require(axle, "axle");
}

CartesianState cartesian_rhs(const CartesianState& state,
                             const ControlInput& input) {
  return {state.v * std::cos(state.theta), state.v * std::sin(state.theta),
          state.omega, input.u_v, input.u_omega};
}

WheelTorques wheel_torque_map(const VehicleParams& p, const ControlInput& input) {
  const double half_r = 0.5 * p.wheel_radius;
  const double yaw = p.inertia / (2.0 * p.axle);
  return {half_r * (p.mass * input.u_v + yaw * input.u_omega),
          half_r * (p.mass * input.u_v - yaw * input.u_omega)};
}

ControlInput accels_from_torques(const VehicleParams& p,
                                 const WheelTorques& torques) {
  const double force = (torques.tau_l + torques.tau_r) / p.wheel_radius;
  const double moment =
      2.0 * p.axle * (torques.tau_l - torques.tau_r) / p.wheel_radius;
  return {force / p.mass, moment / p.inertia};
}

double nearest_branch(double angle, double reference) {
  return angle + kTwoPi * std::round((reference - angle) / kTwoPi);
}

PolarPose polar_pose(const CartesianState& state, std::optional<double> prev_psi) {
  const double rho = std::hypot(state.x, state.y);
  if (!(rho >= kRhoMin)) {
    throw DegeneratePose(fmt::format(
        "polar pose undefined: rho = {} below minimum {}", rho, kRhoMin));
  }
  double psi = std::atan2(-state.y, -state.x);
  if (prev_psi) psi = nearest_branch(psi, *prev_psi);
  return {rho, psi - state.theta, psi};
}

PolarRate polar_rhs(const PolarPose& pose, double v, double omega) {
  if (!(pose.rho > 0.0)) {
    throw DegeneratePose(fmt::format("polar kinematics need rho > 0, got {}", pose.rho));
  }
  const double lateral = v / pose.rho * std::sin(pose.alpha);
  return {-v * std::cos(pose.alpha), lateral - omega, lateral};
}

CartesianState rk4_step(const CartesianState& state, const ControlInput& input,
                        double dt) {
  return rk4(state, dt, [&input](const CartesianState&) { return input; });
}

CartesianState rk4_step(const CartesianState& state, const Feedback& feedback,
                        double dt) {
  return rk4(state, dt, feedback);
}

}  // namespace safepark::vehicle
