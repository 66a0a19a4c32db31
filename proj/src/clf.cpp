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

#include "safepark/clf.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "safepark/errors.hpp"

namespace safepark::clf {

using vehicle::CartesianState;
using vehicle::PolarPose;

namespace {

constexpr double kSincSeriesThreshold = 0.1;

// ln(1 + w) - w / (1 + w), i.e. the closed form of
// integral_0^{ln(w+1)} (1 - e^{-s}) ds. The series avoids cancellation for
// small w: sum_{n>=2} (-1)^n (n-1)/n w^n.
double log_barrier_integral(double w) {
  if (w < 1e-3) {
    double term = w * w;
    double sum = 0.0;
    double sign = 1.0;
    for (int n = 2; n <= 8; ++n) {
      sum += sign * (n - 1.0) / n * term;
      term *= w;
      sign = -sign;
    }
    return sum;
  }
  return std::log1p(w) - w / (1.0 + w);
}

}  // namespace

void Gains::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ValidationError(
          fmt::format("gains.{} must be positive and finite, got {}", name, value));
    }
  };
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) {
    throw ValidationError(fmt::format("gains.lambda must be >= 1, got {}", lambda));
  }
  positive(k_rho, "k_rho");
  positive(k_alpha, "k_alpha");
  positive(k_z, "k_z");
  positive(k_omega, "k_omega");
  positive(mu, "mu");
  positive(epsilon, "epsilon");
}

double SymMatrix2::max_eigenvalue() const {
  const double half_trace = 0.5 * (p11 + p22);
  const double half_gap = 0.5 * (p11 - p22);
  return half_trace + std::hypot(half_gap, p12);
}

PMatrix p_matrix(const Gains& g) {
  const double kr2 = g.k_rho * g.k_rho;
  SymMatrix2 p;
  p.p11 = (1.0 + g.lambda) / (2.0 * g.k_alpha * g.lambda);
  p.p12 = 1.0 / (2.0 * g.k_rho * g.lambda);
  p.p22 = (g.k_alpha * g.k_alpha + kr2 * g.lambda * g.lambda + kr2 * g.lambda) /
          (2.0 * g.k_alpha * kr2 * g.lambda);
  return {p, p.max_eigenvalue(), p.det()};
}

double p_matrix_det_closed_form(const Gains& g) {
  const double kr2 = g.k_rho * g.k_rho;
  const double ka2 = g.k_alpha * g.k_alpha;
  return (ka2 + kr2 * g.lambda * g.lambda + 2.0 * kr2 * g.lambda + kr2) /
         (4.0 * ka2 * kr2 * g.lambda);
}

double lyapunov_equation_residual(const SymMatrix2& p, const Gains& g) {
  Eigen::Matrix2d a;
  a << -g.k_alpha, -g.k_rho * g.lambda, g.k_rho, 0.0;
  Eigen::Matrix2d pm;
  pm << p.p11, p.p12, p.p12, p.p22;
  const Eigen::Matrix2d r = a.transpose() * pm + pm * a + Eigen::Matrix2d::Identity();
  return r.cwiseAbs().maxCoeff();
}

double quadratic_coefficient(const Gains& g) {
  const double lm = p_matrix(g).lambda_max;
  return 8.0 / (std::numbers::pi * std::numbers::pi) * (g.k_rho * g.k_rho / g.k_alpha) *
         g.lambda * g.lambda * lm * lm;
}

double q_function(double l, const Gains& g) {
  return 2.0 * quadratic_coefficient(g) * l;
}

ScalarW scalar_w(const PolarPose& pose, const Gains& g) {
  const SymMatrix2 p = p_matrix(g).p;
  const double a = pose.alpha;
  const double s = pose.psi;
  ScalarW out;
  out.w1 = 0.5 * (pose.rho * pose.rho + a * a + g.lambda * s * s);
  out.w2 = p.p11 * a * a + 2.0 * p.p12 * a * s + p.p22 * s * s;
  out.w = out.w1 + out.w2 + quadratic_coefficient(g) * out.w1 * out.w1;
  out.w_sharp = std::log1p(out.w);
  return out;
}

std::array<double, 3> grad_w(const PolarPose& pose, const Gains& g) {
  const SymMatrix2 p = p_matrix(g).p;
  const double w1 = 0.5 * (pose.rho * pose.rho + pose.alpha * pose.alpha +
                           g.lambda * pose.psi * pose.psi);
  const double scale = 1.0 + 2.0 * quadratic_coefficient(g) * w1;
  return {scale * pose.rho,
          scale * pose.alpha + 2.0 * (p.p11 * pose.alpha + p.p12 * pose.psi),
          scale * g.lambda * pose.psi + 2.0 * (p.p12 * pose.alpha + p.p22 * pose.psi)};
}

LyapunovBreakdown lyapunov(const PolarPose& pose, const ErrorCoords& err,
                           const Gains& g) {
  const ScalarW sw = scalar_w(pose, g);
  LyapunovBreakdown out;
  out.w1 = sw.w1;
  out.w2 = sw.w2;
  out.w = sw.w;
  out.w_sharp = sw.w_sharp;
  out.u_quad = 0.5 * (err.z * err.z / g.k_z + err.omega_err * err.omega_err / g.k_omega);
  out.v_total = g.mu * log_barrier_integral(sw.w) + out.u_quad;

  const double dv_dw = g.mu * sw.w / ((sw.w + 1.0) * (sw.w + 1.0));
  const auto gw = grad_w(pose, g);
  out.grad = {dv_dw * gw[0], dv_dw * gw[1], dv_dw * gw[2], err.z / g.k_z,
              err.omega_err / g.k_omega};
  return out;
}

Sinc stable_sinc(double s) {
  if (std::abs(s) < kSincSeriesThreshold) {
    // Taylor terms through s^10; the first dropped term is below 1e-21 here.
    const double s2 = s * s;
    const double value =
        1.0 - s2 / 6.0 * (1.0 - s2 / 20.0 * (1.0 - s2 / 42.0 * (1.0 - s2 / 72.0 *
                                                                   (1.0 - s2 / 110.0))));
    const double derivative =
        -s / 3.0 * (1.0 - s2 / 10.0 * (1.0 - s2 / 28.0 * (1.0 - s2 / 54.0 *
                                                                  (1.0 - s2 / 88.0))));
    return {value, derivative};
  }
  const double sn = std::sin(s);
  return {sn / s, (s * std::cos(s) - sn) / (s * s)};
}

DesiredVelocities desired_velocities(const PolarPose& pose, const Gains& g) {
  const double sinc2 = stable_sinc(2.0 * pose.alpha).value;
  return {g.k_rho * std::cos(pose.alpha) * pose.rho,
          g.k_alpha * pose.alpha + g.k_rho * sinc2 * (pose.alpha + g.lambda * pose.psi)};
}

ErrorCoords error_coords(const CartesianState& state, const PolarPose& pose,
                         const Gains& g) {
  if (!(pose.rho >= vehicle::kRhoMin)) {
    throw DegeneratePose(fmt::format("error coordinates need rho >= {}, got {}",
                                     vehicle::kRhoMin, pose.rho));
  }
  const DesiredVelocities d = desired_velocities(pose, g);
  return {(state.v - d.v_star) / pose.rho, state.omega - d.omega_star};
}

DesiredRates desired_rates(const CartesianState& state, const PolarPose& pose,
                           const Gains& g) {
  if (!(pose.rho >= vehicle::kRhoMin)) {
    throw DegeneratePose(fmt::format("desired rates need rho >= {}, got {}",
                                     vehicle::kRhoMin, pose.rho));
  }
  const vehicle::PolarRate r = vehicle::polar_rhs(pose, state.v, state.omega);
  const Sinc sc = stable_sinc(2.0 * pose.alpha);
  const double heading = pose.alpha + g.lambda * pose.psi;
  DesiredRates out;
  // The 1/rho of alpha_dot cancels against the rho factor of v*.
  out.v_star_dot =
      g.k_rho * (pose.rho * state.omega * std::sin(pose.alpha) - state.v);
  out.omega_star_dot =
      g.k_alpha * r.alpha_dot +
      g.k_rho * (2.0 * r.alpha_dot * sc.derivative * heading +
                 sc.value * (r.alpha_dot + g.lambda * r.psi_dot));
  return out;
}

vehicle::ControlInput nominal_control(const CartesianState& state,
                                      const PolarPose& pose, const Gains& g) {
  const ErrorCoords e = error_coords(state, pose, g);
  const DesiredRates d = desired_rates(state, pose, g);
  const double c = std::cos(pose.alpha);
  return {d.v_star_dot - pose.rho * (g.k_rho * c * c * e.z + c * e.z * e.z + g.k_z * e.z),
          d.omega_star_dot - g.k_omega * e.omega_err};
}

std::array<double, 3> nominal_drift(const PolarPose& pose, const Gains& g) {
  const double c = std::cos(pose.alpha);
  const double sinc2 = stable_sinc(2.0 * pose.alpha).value;
  return {-g.k_rho * c * c * pose.rho,
          -g.k_alpha * pose.alpha - g.k_rho * sinc2 * g.lambda * pose.psi,
          g.k_rho * sinc2 * pose.alpha};
}

double w_dot_nominal(const PolarPose& pose, const Gains& g) {
  const auto gw = grad_w(pose, g);
  const auto f = nominal_drift(pose, g);
  return gw[0] * f[0] + gw[1] * f[1] + gw[2] * f[2];
}

ClfTerms clf_terms(const CartesianState& state, const PolarPose& pose,
                   const ErrorCoords& err, const Gains& g) {
  if (!(pose.rho >= vehicle::kRhoMin)) {
    throw DegeneratePose(fmt::format("CLF terms need rho >= {}, got {}",
                                     vehicle::kRhoMin, pose.rho));
  }
  const LyapunovBreakdown lb = lyapunov(pose, err, g);
  const vehicle::PolarRate fk = vehicle::polar_rhs(pose, state.v, state.omega);
  const DesiredRates d = desired_rates(state, pose, g);
  const double c = std::cos(pose.alpha);
  const double f_z = -d.v_star_dot / pose.rho + g.k_rho * c * c * err.z + c * err.z * err.z;
  const double f_omega = -d.omega_star_dot;

  ClfTerms out;
  out.lie_drift = lb.grad[0] * fk.rho_dot + lb.grad[1] * fk.alpha_dot +
                  lb.grad[2] * fk.psi_dot + lb.grad[3] * f_z + lb.grad[4] * f_omega;
  const double wp1 = lb.w + 1.0;
  out.sigma = 0.5 * (err.z * err.z + err.omega_err * err.omega_err) -
              g.epsilon * lb.w * w_dot_nominal(pose, g) / (wp1 * wp1);
  out.a1 = out.lie_drift + out.sigma;
  out.b1 = Eigen::Vector2d(lb.grad[3], lb.grad[4]);
  return out;
}

}  // namespace safepark::clf
