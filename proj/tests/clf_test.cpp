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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "safepark/errors.hpp"
#include "safepark/scenario.hpp"
#include "safepark/sim.hpp"
#include "support.hpp"

namespace safepark::clf {
namespace {

using std::numbers::pi;
using vehicle::CartesianState;
using vehicle::PolarPose;

Gains gains_223() {
  Gains g;
  g.k_rho = 2;
  g.k_alpha = 2;
  g.lambda = 3;
  g.k_z = 4;
  g.k_omega = 4;
  g.mu = 0.05;
  g.epsilon = 0.025;
  return g;
}

Gains random_gains(std::mt19937_64& rng) {
  Gains g;
  g.k_rho = testing::uniform(rng, 0.1, 10);
  g.k_alpha = testing::uniform(rng, 0.1, 10);
  g.lambda = testing::uniform(rng, 1, 10);
  return g;
}

TEST(PMatrix, ReferenceGains) {
  const PMatrix pm = p_matrix(gains_223());
  EXPECT_NEAR(pm.p.p11, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(pm.p.p12, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(pm.p.p22, 13.0 / 12.0, 1e-15);
  EXPECT_NEAR(pm.det, 17.0 / 48.0, 1e-15);
  EXPECT_NEAR(p_matrix_det_closed_form(gains_223()), 17.0 / 48.0, 1e-15);
  EXPECT_LE(lyapunov_equation_residual(pm.p, gains_223()), 1e-12);
  // Larger root of x^2 - (17/12) x + 17/48.
  EXPECT_NEAR(pm.lambda_max, 1.0924810190538703, 1e-12);
}

TEST(PMatrix, RandomGainsSolveLyapunovEquation) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Gains g = random_gains(rng);
    const PMatrix pm = p_matrix(g);
    ASSERT_LE(lyapunov_equation_residual(pm.p, g), 1e-12);
    ASSERT_GT(pm.p.p11, 0.0);
    ASSERT_GT(pm.det, 0.0);
    ASSERT_NEAR(pm.p.det(), p_matrix_det_closed_form(g), 1e-12);
  }
}

TEST(PMatrix, AdversarialGains) {
  Gains g;
  g.lambda = 1;
  g.k_rho = 0.1;
  g.k_alpha = 0.1;
  EXPECT_LE(lyapunov_equation_residual(p_matrix(g).p, g), 1e-12);
}

TEST(PMatrix, TamperedMatrixFailsEquation) {
  SymMatrix2 p = p_matrix(gains_223()).p;
  p.p12 += 0.1;
  EXPECT_GT(lyapunov_equation_residual(p, gains_223()), 1e-3);
}

TEST(ScalarW, Origin) {
  const ScalarW w = scalar_w({0, 0, 0}, gains_223());
  EXPECT_EQ(w.w1, 0.0);
  EXPECT_EQ(w.w2, 0.0);
  EXPECT_EQ(w.w, 0.0);
  EXPECT_EQ(w.w_sharp, 0.0);
}

TEST(ScalarW, UnitRadius) {
  EXPECT_NEAR(quadratic_coefficient(gains_223()), 17.414, 1e-3);
  const ScalarW w = scalar_w({1, 0, 0}, gains_223());
  EXPECT_DOUBLE_EQ(w.w1, 0.5);
  EXPECT_EQ(w.w2, 0.0);
  EXPECT_NEAR(w.w, 4.8535, 1e-3);
  EXPECT_NEAR(w.w_sharp, 1.7670, 1e-3);
  EXPECT_NEAR(w.w, 4.853419876383794, 1e-12);
}

TEST(ScalarW, QuadratureOfAugmentingIntegral) {
  const Gains g = gains_223();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const PolarPose p{testing::uniform(rng, 0, 3), testing::uniform(rng, -3, 3),
                      testing::uniform(rng, -3, 3)};
    const ScalarW w = scalar_w(p, g);
    const double integral =
        testing::simpson([&](double l) { return q_function(l, g); }, 0.0, w.w1);
    ASSERT_NEAR(w.w - w.w1 - w.w2, integral, 1e-9 * std::max(1.0, integral));
  }
}

TEST(Lyapunov, Origin) {
  const LyapunovBreakdown lb = lyapunov({0, 0, 0}, {0, 0}, gains_223());
  EXPECT_EQ(lb.v_total, 0.0);
  for (double gi : lb.grad) EXPECT_EQ(gi, 0.0);
}

TEST(Lyapunov, UnitRadius) {
  const LyapunovBreakdown lb = lyapunov({1, 0, 0}, {0, 0}, gains_223());
  EXPECT_NEAR(lb.v_total, 0.046892, 1e-4);
  EXPECT_NEAR(lb.v_total, 0.046893319168601046, 1e-12);
}

TEST(Lyapunov, ClosedFormMatchesQuadrature) {
  const Gains g = gains_223();
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const PolarPose p{testing::uniform(rng, 0, 3), testing::uniform(rng, -3, 3),
                      testing::uniform(rng, -3, 3)};
    const ErrorCoords e{testing::uniform(rng, -2, 2), testing::uniform(rng, -2, 2)};
    const LyapunovBreakdown lb = lyapunov(p, e, g);
    const double integral = testing::simpson(
        [](double s) { return (std::exp(s) - 1.0) / std::exp(s); }, 0.0, lb.w_sharp);
    const double expected =
        g.mu * integral + 0.5 * (e.z * e.z / g.k_z + e.omega_err * e.omega_err / g.k_omega);
    ASSERT_NEAR(lb.v_total, expected, 1e-11);
  }
}

TEST(Lyapunov, SmallWBranchIsContinuous) {
  // The integral term switches to a series for tiny W; both sides must agree.
  const Gains g = gains_223();
  for (double r : {1e-3, 3e-3, 1e-2, 3e-2}) {
    const LyapunovBreakdown lb = lyapunov({r, 0, 0}, {0, 0}, g);
    const double w = lb.w;
    const double reference = g.mu * (std::log1p(w) - w / (1 + w));
    EXPECT_NEAR(lb.v_total, reference, 1e-15 + 1e-9 * reference);
    EXPECT_GT(lb.v_total, 0.0);
  }
}

TEST(Lyapunov, PositiveAwayFromOrigin) {
  const Gains g = gains_223();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100000; ++i) {
    const PolarPose p{testing::uniform(rng, 1e-9, 10), testing::uniform(rng, -10, 10),
                      testing::uniform(rng, -10, 10)};
    const ErrorCoords e{testing::uniform(rng, -10, 10), testing::uniform(rng, -10, 10)};
    ASSERT_GT(lyapunov(p, e, g).v_total, 0.0);
  }
}

TEST(Lyapunov, MonotoneAlongRays) {
  const Gains g = gains_223();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const double d[5] = {testing::uniform(rng, 0, 1), testing::uniform(rng, -1, 1),
                         testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1),
                         testing::uniform(rng, -1, 1)};
    double prev = -1.0;
    for (int k = 0; k <= 1000; ++k) {
      const double t = 0.01 * k;
      const double v =
          lyapunov({t * d[0], t * d[1], t * d[2]}, {t * d[3], t * d[4]}, g).v_total;
      ASSERT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Lyapunov, GradientMatchesCentralDifferences) {
  const Gains g = gains_223();
  std::mt19937_64 rng(19);
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 5> x{testing::uniform(rng, 0.05, 5), testing::uniform(rng, -3, 3),
                            testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3),
                            testing::uniform(rng, -3, 3)};
    auto value = [&](const std::array<double, 5>& y) {
      return lyapunov({y[0], y[1], y[2]}, {y[3], y[4]}, g).v_total;
    };
    const auto grad = lyapunov({x[0], x[1], x[2]}, {x[3], x[4]}, g).grad;
    double err = 0.0;
    double scale = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      auto plus = x;
      auto minus = x;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (value(plus) - value(minus)) / (2 * h);
      err = std::max(err, std::abs(fd - grad[j]));
      scale = std::max(scale, std::abs(grad[j]));
    }
    ASSERT_LE(err / std::max(scale, 1e-12), 1e-6) << "sample " << i;
  }
}

TEST(Sinc, SpecialValues) {
  const Sinc zero = stable_sinc(0.0);
  EXPECT_EQ(zero.value, 1.0);
  EXPECT_EQ(zero.derivative, 0.0);
  const Sinc at_pi = stable_sinc(pi);
  EXPECT_NEAR(at_pi.value, 0.0, 1e-16);
  EXPECT_NEAR(at_pi.derivative, -1.0 / pi, 1e-15);
}

TEST(Sinc, SeriesAgreesAcrossThreshold) {
  for (double s : {-2e-4, -1.0001e-4, -0.9999e-4, 5e-5, 0.9999e-4, 1.0001e-4, 2e-4}) {
    const Sinc v = stable_sinc(s);
    EXPECT_NEAR(v.value, std::sin(s) / s, 2.5e-16);
    EXPECT_NEAR(v.derivative, -s / 3 + s * s * s / 30, 1e-13);
  }
}

TEST(Sinc, DerivativeAccurateNearZero) {
  // Reference values computed at 40 digits.
  EXPECT_NEAR(stable_sinc(0.1).derivative, -0.03330001190255757157, 2e-15);
  EXPECT_NEAR(stable_sinc(0.0999).derivative, -0.03326677840986807336, 1e-16);
  EXPECT_NEAR(stable_sinc(0.05).derivative, -0.01666250037200658761, 1e-16);
  EXPECT_NEAR(stable_sinc(1e-3).derivative, -3.333333000000011974e-4, 1e-18);
}

TEST(Sinc, DerivativeMatchesFiniteDifference) {
  for (double s : {-7.0, -2.0, -0.3, 0.01, 0.5, 1.7, 4.0}) {
    const double fd = testing::central_difference(
        [](double x) { return stable_sinc(x).value; }, s, 1e-6);
    EXPECT_NEAR(stable_sinc(s).derivative, fd, 1e-9);
  }
}

TEST(Sinc, DeviationBound) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100000; ++i) {
    const double s = testing::uniform(rng, -10, 10);
    ASSERT_LE(std::abs(stable_sinc(2 * s).value - 1.0), 2.0 / pi * std::abs(s));
  }
}

TEST(DesiredVelocities, Examples) {
  const Gains g = gains_223();
  DesiredVelocities d = desired_velocities({1, 0, 0}, g);
  EXPECT_EQ(d.v_star, 2.0);
  EXPECT_EQ(d.omega_star, 0.0);
  d = desired_velocities({1, 0, 1}, g);
  EXPECT_EQ(d.v_star, 2.0);
  EXPECT_EQ(d.omega_star, 6.0);
  d = desired_velocities({1, pi / 2, 0}, g);
  EXPECT_NEAR(d.v_star, 0.0, 1e-15);
  EXPECT_NEAR(d.omega_star, pi, 1e-15);
}

TEST(ErrorCoords, Examples) {
  const Gains g = gains_223();
  const CartesianState rest{-1, 0, 0, 0, 0};
  ErrorCoords e = error_coords(rest, vehicle::polar_pose(rest), g);
  EXPECT_EQ(e.z, -2.0);
  EXPECT_EQ(e.omega_err, 0.0);

  const CartesianState on{-1, 0, 0, 2, 0};
  e = error_coords(on, vehicle::polar_pose(on), g);
  EXPECT_EQ(e.z, 0.0);
  EXPECT_EQ(e.omega_err, 0.0);

  // rho = 0.5 sideways to the target: v* = 0, so z = v / rho.
  const CartesianState side{0, -0.5, 0, 1, 0};
  const PolarPose p = vehicle::polar_pose(side);
  EXPECT_NEAR(desired_velocities(p, g).v_star, 0.0, 1e-15);
  EXPECT_NEAR(error_coords(side, p, g).z, 2.0, 1e-14);

  EXPECT_THROW(error_coords(rest, {1e-8, 0, 0}, g), DegeneratePose);
}

TEST(DesiredRates, Examples) {
  const Gains g = gains_223();
  const CartesianState rest{-1, 0, 0, 0, 0};
  DesiredRates r = desired_rates(rest, vehicle::polar_pose(rest), g);
  EXPECT_EQ(r.v_star_dot, 0.0);
  EXPECT_EQ(r.omega_star_dot, 0.0);

  const CartesianState moving{-1, 0, 0, 1, 0};
  r = desired_rates(moving, vehicle::polar_pose(moving), g);
  EXPECT_EQ(r.v_star_dot, -g.k_rho);
}

TEST(DesiredRates, MatchFiniteDifferencesAlongTrajectories) {
  const Gains g = gains_223();
  std::mt19937_64 rng(29);
  constexpr double kDt = 1e-5;
  for (int traj = 0; traj < 20; ++traj) {
    CartesianState s{testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3),
                     testing::uniform(rng, -pi, pi), testing::uniform(rng, -1, 1),
                     testing::uniform(rng, -1, 1)};
    if (std::hypot(s.x, s.y) < 0.5) continue;
    const vehicle::ControlInput u{testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)};
    const PolarPose p = vehicle::polar_pose(s);
    const auto desired_at = [&](const CartesianState& q) {
      return desired_velocities(vehicle::polar_pose(q, p.psi), g);
    };
    const DesiredVelocities fwd = desired_at(vehicle::rk4_step(s, u, kDt));
    const DesiredVelocities back = desired_at(vehicle::rk4_step(s, u, -kDt));
    const DesiredRates r = desired_rates(s, p, g);
    EXPECT_NEAR((fwd.v_star - back.v_star) / (2 * kDt), r.v_star_dot, 1e-5);
    EXPECT_NEAR((fwd.omega_star - back.omega_star) / (2 * kDt), r.omega_star_dot, 1e-5);
  }
}

TEST(NominalControl, RestOnAxis) {
  const CartesianState rest{-1, 0, 0, 0, 0};
  const vehicle::ControlInput u = nominal_control(rest, vehicle::polar_pose(rest), gains_223());
  EXPECT_DOUBLE_EQ(u.u_v, 8.0);
  EXPECT_EQ(u.u_omega, 0.0);
}

TEST(NominalControl, OnManifoldReturnsDesiredRates) {
  const Gains g = gains_223();
  CartesianState s{-1.2, 0.7, 0.4, 0, 0};
  const PolarPose p = vehicle::polar_pose(s);
  const DesiredVelocities d = desired_velocities(p, g);
  s.v = d.v_star;
  s.omega = d.omega_star;
  const DesiredRates r = desired_rates(s, p, g);
  const vehicle::ControlInput u = nominal_control(s, p, g);
  EXPECT_NEAR(u.u_v, r.v_star_dot, 1e-14);
  EXPECT_NEAR(u.u_omega, r.omega_star_dot, 1e-14);
}

TEST(NominalControl, VelocityErrorsDecayExponentially) {
  const Gains g = gains_223();
  const vehicle::Feedback law = [&](const CartesianState& s) {
    return nominal_control(s, vehicle::polar_pose(s), g);
  };
  CartesianState s{-2, 1, -0.3, 0, 0};
  const ErrorCoords e0 = error_coords(s, vehicle::polar_pose(s), g);
  for (int k = 0; k < 1000; ++k) s = vehicle::rk4_step(s, law, 1e-3);
  const ErrorCoords e1 = error_coords(s, vehicle::polar_pose(s), g);
  EXPECT_NEAR(e1.z / e0.z, std::exp(-g.k_z), 1e-6 * std::exp(-g.k_z));
}

TEST(WDotNominal, Examples) {
  const Gains g = gains_223();
  EXPECT_EQ(w_dot_nominal({0, 0, 0}, g), 0.0);
  EXPECT_NEAR(w_dot_nominal({1, 0, 0}, g), -36.83, 1e-2);
  EXPECT_NEAR(w_dot_nominal({1, 0, 0}, g), -36.82735901107035, 1e-11);
}

TEST(WDotNominal, FirstBlockIdentity) {
  const Gains g = gains_223();
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10000; ++i) {
    const PolarPose p{testing::uniform(rng, 0, 5), testing::uniform(rng, -5, 5),
                      testing::uniform(rng, -5, 5)};
    const auto f = nominal_drift(p, g);
    const double lhs = p.rho * f[0] + p.alpha * f[1] + g.lambda * p.psi * f[2];
    const double c = std::cos(p.alpha);
    const double rhs = -g.k_rho * c * c * p.rho * p.rho - g.k_alpha * p.alpha * p.alpha;
    ASSERT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(WDotNominal, StrictDecreaseBound) {
  const Gains g = gains_223();
  std::mt19937_64 rng(37);
  for (int i = 0; i < 100000; ++i) {
    const PolarPose p{testing::uniform(rng, 1e-9, 5), testing::uniform(rng, -5, 5),
                      testing::uniform(rng, -5, 5)};
    const double c = std::cos(p.alpha);
    const double bound = -0.5 * (p.alpha * p.alpha + p.psi * p.psi) -
                         g.k_rho * c * c * p.rho * p.rho;
    ASSERT_LE(w_dot_nominal(p, g), bound + 1e-9);
  }
}

TEST(ClfTerms, ManifoldValue) {
  const Gains g = gains_223();
  CartesianState s{-1.5, -0.8, 0.9, 0, 0};
  const PolarPose p = vehicle::polar_pose(s);
  const DesiredVelocities d = desired_velocities(p, g);
  s.v = d.v_star;
  s.omega = d.omega_star;
  const ErrorCoords e = error_coords(s, p, g);
  const ClfTerms t = clf_terms(s, p, e, g);
  EXPECT_NEAR(t.b1.norm(), 0.0, 1e-15);
  const double w = scalar_w(p, g).w;
  const double expected = (g.mu - g.epsilon) * w * w_dot_nominal(p, g) / ((w + 1) * (w + 1));
  EXPECT_NEAR(t.a1, expected, 1e-12);
  EXPECT_LT(t.a1, 0.0);
}

TEST(ClfTerms, SigmaNonNegative) {
  const Gains g = gains_223();
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10000; ++i) {
    const CartesianState s{testing::uniform(rng, -5, 5), testing::uniform(rng, -5, 5),
                           testing::uniform(rng, -5, 5), testing::uniform(rng, -3, 3),
                           testing::uniform(rng, -3, 3)};
    if (std::hypot(s.x, s.y) < 1e-3) continue;
    const PolarPose p = vehicle::polar_pose(s);
    ASSERT_GE(clf_terms(s, p, error_coords(s, p, g), g).sigma, 0.0);
  }
}

// With the nominal input and no slack the CLF row holds.
TEST(ClfTerms, NominalInputIsFeasible) {
  const Gains g = gains_223();
  std::mt19937_64 rng(43);
  for (int i = 0; i < 10000; ++i) {
    const CartesianState s{testing::uniform(rng, -5, 5), testing::uniform(rng, -5, 5),
                           testing::uniform(rng, -5, 5), testing::uniform(rng, -3, 3),
                           testing::uniform(rng, -3, 3)};
    if (std::hypot(s.x, s.y) < 1e-2) continue;
    const PolarPose p = vehicle::polar_pose(s);
    const ClfTerms t = clf_terms(s, p, error_coords(s, p, g), g);
    const vehicle::ControlInput u = nominal_control(s, p, g);
    const Eigen::Vector2d u_bar(u.u_v / p.rho, u.u_omega);
    ASSERT_LE(t.a1 + t.b1.dot(u_bar), 1e-9 * std::max(1.0, std::abs(t.a1)));
  }
}

TEST(ClfTerms, NominalFeasibleAlongParkingRun) {
  const sim::Scenario s = sim::paper_sim_scenario();
  const sim::TrajectoryLog log = sim::run(s, sim::Controller::Nominal);
  for (const auto& r : log.rows) {
    const CartesianState st{r.x, r.y, r.theta, r.v, r.omega};
    const PolarPose p{r.rho, r.alpha, r.psi};
    const ClfTerms t = clf_terms(st, p, error_coords(st, p, s.gains), s.gains);
    const Eigen::Vector2d u_bar(r.u_v / r.rho, r.u_omega);
    ASSERT_LE(t.a1 + t.b1.dot(u_bar), 1e-9) << "t=" << r.t;
  }
}

// Lie derivative along f1 + g1 u_bar equals the time derivative of V.
TEST(ClfTerms, LieDerivativeMatchesTimeDerivative) {
  const Gains g = gains_223();
  std::mt19937_64 rng(47);
  constexpr double kDt = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const CartesianState s{testing::uniform(rng, -4, 4), testing::uniform(rng, -4, 4),
                           testing::uniform(rng, -3, 3), testing::uniform(rng, -2, 2),
                           testing::uniform(rng, -2, 2)};
    if (std::hypot(s.x, s.y) < 0.3) continue;
    const vehicle::ControlInput u{testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3)};
    const PolarPose p = vehicle::polar_pose(s);
    const ClfTerms t = clf_terms(s, p, error_coords(s, p, g), g);
    const double predicted = t.lie_drift + t.b1.dot(Eigen::Vector2d(u.u_v / p.rho, u.u_omega));
    auto v_at = [&](const CartesianState& q) {
      const PolarPose pq = vehicle::polar_pose(q, p.psi);
      return lyapunov(pq, error_coords(q, pq, g), g).v_total;
    };
    const double fd =
        (v_at(vehicle::rk4_step(s, u, kDt)) - v_at(vehicle::rk4_step(s, u, -kDt))) / (2 * kDt);
    EXPECT_NEAR(predicted, fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(ClfTerms, VanishAtOrigin) {
  const Gains g = gains_223();
  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const PolarPose p{scale, 0.5 * scale, -0.3 * scale};
    const DesiredVelocities d = desired_velocities(p, g);
    const double theta = p.psi - p.alpha;
    const CartesianState s{-p.rho * std::cos(p.psi), -p.rho * std::sin(p.psi), theta,
                           d.v_star + 0.2 * scale * p.rho, d.omega_star + 0.1 * scale};
    const ClfTerms t = clf_terms(s, p, error_coords(s, p, g), g);
    const double size = std::abs(t.a1) + t.b1.norm();
    // Both terms vanish to first order in the distance to the origin.
    if (std::isfinite(prev)) EXPECT_NEAR(size / prev, 0.1, 2e-3);
    prev = size;
  }
}

TEST(Gains, Validation) {
  EXPECT_NO_THROW(Gains{}.validate());
  Gains g;
  g.lambda = 0.5;
  EXPECT_THROW(g.validate(), ValidationError);
  g = Gains{};
  g.k_z = 0;
  EXPECT_THROW(g.validate(), ValidationError);
  g = Gains{};
  g.epsilon = -1;
  EXPECT_THROW(g.validate(), ValidationError);
}

}  // namespace
}  // namespace safepark::clf
