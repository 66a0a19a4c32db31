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

#include "safepark/cbf.hpp"

#include <cmath>

#include <fmt/format.h>

#include "safepark/errors.hpp"

namespace safepark::cbf {

CircularObstacle::CircularObstacle(double cx, double cy, double radius, double scale)
    : cx_(cx), cy_(cy), radius_(radius), scale_(scale) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError(fmt::format("obstacle radius must be positive, got {}", radius));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError(fmt::format("obstacle scale must be positive, got {}", scale));
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw ValidationError("obstacle center must be finite");
  }
}

double CircularObstacle::value(double x, double y) const {
  const double dx = x - cx_;
  const double dy = y - cy_;
  return scale_ * (dx * dx + dy * dy - radius_ * radius_);
}

Eigen::Vector2d CircularObstacle::gradient(double x, double y) const {
  return {2.0 * scale_ * (x - cx_), 2.0 * scale_ * (y - cy_)};
}

void BarrierParams::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ValidationError(
          fmt::format("barrier.{} must be positive and finite, got {}", name, value));
    }
  };
  positive(l_v, "l_v");
  positive(l_omega, "l_omega");
  positive(alpha_h_slope, "alpha_h_slope");
}

BarrierValue barrier(const vehicle::CartesianState& s, const AdmissibleField& field,
                     const BarrierParams& p) {
  const double h0 = field.value(s.x, s.y);
  return {h0 - p.l_v * s.v * s.v - p.l_omega * s.omega * s.omega, h0};
}

CbfTerms cbf_terms(const vehicle::CartesianState& s, const vehicle::PolarPose& pose,
                   const AdmissibleField& field, const BarrierParams& p) {
  if (!(pose.rho >= vehicle::kRhoMin)) {
    throw DegeneratePose(fmt::format("CBF terms need rho >= {}, got {}",
                                     vehicle::kRhoMin, pose.rho));
  }
  const Eigen::Vector2d grad = field.gradient(s.x, s.y);
  const double lie_drift =
      grad.x() * s.v * std::cos(s.theta) + grad.y() * s.v * std::sin(s.theta);
  const double h = barrier(s, field, p).h;
  // g2 = [0; diag(rho, 1)] since the decision variable is (u_v / rho, u_omega).
  return {-lie_drift - p.alpha_h_slope * h,
          Eigen::Vector2d(2.0 * p.l_v * s.v * pose.rho, 2.0 * p.l_omega * s.omega)};
}

}  // namespace safepark::cbf
