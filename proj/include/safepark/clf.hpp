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

// Global strict control Lyapunov function for the force-controlled unicycle
// in polar coordinates (rho, alpha, psi) with velocity errors (z, omega_err),
// the feedback-linearizing nominal controller, and the affine CLF constraint
// data consumed by the QP.
//
// V = mu * (ln(W + 1) + 1 / (W + 1) - 1) + (z^2 / k_z + omega_err^2 / k_omega) / 2
// W = W1 + W2 + c_Q * W1^2
// W1 = (rho^2 + alpha^2 + lambda * psi^2) / 2
// W2 = [alpha psi] P [alpha psi]^T

#pragma once

#include <array>

#include <Eigen/Core>

#include "safepark/vehicle.hpp"

namespace safepark::clf {

struct Gains {
  double lambda = 3.0;
  double k_rho = 2.0;
  double k_alpha = 2.0;
  double k_z = 4.0;
  double k_omega = 4.0;
  double mu = 0.05;
  double epsilon = 0.025;  // margin coefficient, mu / 2 unless configured

  void validate() const;
};

// z = (v - v*) / rho, omega_err = omega - omega*.
struct ErrorCoords {
  double z = 0.0;
  double omega_err = 0.0;
};

struct SymMatrix2 {
  double p11 = 0.0;
  double p12 = 0.0;
  double p22 = 0.0;

  double det() const { return p11 * p22 - p12 * p12; }
  double max_eigenvalue() const;
};

struct PMatrix {
  SymMatrix2 p;
  double lambda_max = 0.0;
  double det = 0.0;
};

// Closed-form solution of A^T P + P A = -I, A = [[-k_alpha, -k_rho lambda], [k_rho, 0]].
PMatrix p_matrix(const Gains& gains);

// Closed-form determinant of P, computed independently of its entries.
double p_matrix_det_closed_form(const Gains& gains);

// max |(A^T P + P A + I)_ij| for the given (possibly perturbed) P.
double lyapunov_equation_residual(const SymMatrix2& p, const Gains& gains);

// Coefficient c_Q with  integral_0^{W1} Q(l) dl = c_Q * W1^2.
double quadratic_coefficient(const Gains& gains);

// Q(l), the linear integrand whose integral augments W.
double q_function(double l, const Gains& gains);

struct ScalarW {
  double w1 = 0.0;
  double w2 = 0.0;
  double w = 0.0;
  double w_sharp = 0.0;
};

ScalarW scalar_w(const vehicle::PolarPose& pose, const Gains& gains);

// Gradient of W over (rho, alpha, psi).
std::array<double, 3> grad_w(const vehicle::PolarPose& pose, const Gains& gains);

struct LyapunovBreakdown {
  double w1 = 0.0;
  double w2 = 0.0;
  double w = 0.0;
  double w_sharp = 0.0;
  double u_quad = 0.0;
  double v_total = 0.0;
  std::array<double, 5> grad{};  // over (rho, alpha, psi, z, omega_err)
};

LyapunovBreakdown lyapunov(const vehicle::PolarPose& pose,
                           const ErrorCoords& err, const Gains& gains);

struct Sinc {
  double value = 1.0;
  double derivative = 0.0;
};

// Unnormalized sinc and its derivative; Taylor series near zero.
Sinc stable_sinc(double s);

struct DesiredVelocities {
  double v_star = 0.0;
  double omega_star = 0.0;
};

DesiredVelocities desired_velocities(const vehicle::PolarPose& pose,
                                     const Gains& gains);

// Throws DegeneratePose when pose.rho < kRhoMin.
ErrorCoords error_coords(const vehicle::CartesianState& state,
                         const vehicle::PolarPose& pose, const Gains& gains);

struct DesiredRates {
  double v_star_dot = 0.0;
  double omega_star_dot = 0.0;
};

// Time derivatives of (v*, omega*) along the actual motion (v, omega).
DesiredRates desired_rates(const vehicle::CartesianState& state,
                           const vehicle::PolarPose& pose, const Gains& gains);

// Feedback-linearizing law giving z' = -k_z z and omega_err' = -k_omega omega_err.
vehicle::ControlInput nominal_control(const vehicle::CartesianState& state,
                                      const vehicle::PolarPose& pose,
                                      const Gains& gains);

// Pose-block drift on the manifold z = omega_err = 0.
std::array<double, 3> nominal_drift(const vehicle::PolarPose& pose,
                                    const Gains& gains);

// <grad W, f_nom>.
double w_dot_nominal(const vehicle::PolarPose& pose, const Gains& gains);

// CLF row of the QP over the scaled input (u_v / rho, u_omega):
// a1 = L_f1 V + sigma, b1 = L_g1 V.
struct ClfTerms {
  double a1 = 0.0;
  Eigen::Vector2d b1 = Eigen::Vector2d::Zero();
  double lie_drift = 0.0;  // L_f1 V
  double sigma = 0.0;      // nonnegative margin
};

ClfTerms clf_terms(const vehicle::CartesianState& state,
                   const vehicle::PolarPose& pose, const ErrorCoords& err,
                   const Gains& gains);

}  // namespace safepark::clf
