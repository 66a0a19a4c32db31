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

// Backstepped zeroing barrier h = h0(x, y) - l_v v^2 - l_omega omega^2 over a
// planar admissible set {h0 >= 0}.

#pragma once

#include <Eigen/Core>

#include "safepark/vehicle.hpp"

namespace safepark::cbf {

// A continuously differentiable h0 : R^2 -> R whose 0-superlevel set is the
// admissible region.
class AdmissibleField {
 public:
  virtual ~AdmissibleField() = default;
  virtual double value(double x, double y) const = 0;
  virtual Eigen::Vector2d gradient(double x, double y) const = 0;
};

// h0 = scale * ((x - cx)^2 + (y - cy)^2 - radius^2), positive outside the disc.
class CircularObstacle final : public AdmissibleField {
 public:
  CircularObstacle(double cx, double cy, double radius, double scale);

  double value(double x, double y) const override;
  Eigen::Vector2d gradient(double x, double y) const override;

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double radius() const { return radius_; }
  double scale() const { return scale_; }

 private:
  double cx_;
  double cy_;
  double radius_;
  double scale_;
};

struct BarrierParams {
  double l_v = 1.0;
  double l_omega = 1.0;
  double alpha_h_slope = 2.0;  // alpha_h(s) = alpha_h_slope * s

  void validate() const;
};

struct BarrierValue {
  double h = 0.0;
  double h0 = 0.0;
};

BarrierValue barrier(const vehicle::CartesianState& state,
                     const AdmissibleField& field, const BarrierParams& params);

// CBF row of the QP over the scaled input (u_v / rho, u_omega):
// a2 + b2 . u_bar <= 0  <=>  h_dot >= -alpha_h(h).
struct CbfTerms {
  double a2 = 0.0;
  Eigen::Vector2d b2 = Eigen::Vector2d::Zero();
};

CbfTerms cbf_terms(const vehicle::CartesianState& state,
                   const vehicle::PolarPose& pose, const AdmissibleField& field,
                   const BarrierParams& params);

}  // namespace safepark::cbf
