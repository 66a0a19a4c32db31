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

#include "safepark/sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "safepark/errors.hpp"

namespace safepark::sim {

using vehicle::CartesianState;
using vehicle::PolarPose;

namespace {

constexpr double kConvergedVelocityError = 1e-3;

struct BarrierSummary {
  double h = 0.0;
  double h0 = 0.0;
};

BarrierSummary worst_barrier(const Scenario& s, const CartesianState& state) {
  BarrierSummary out;
  bool first = true;
  for (const auto& obstacle : s.obstacles) {
    const cbf::BarrierValue b = cbf::barrier(state, obstacle, s.barrier);
    if (first || b.h < out.h) {
      out = {b.h, b.h0};
      first = false;
    }
  }
  return out;
}

qp::Region region_from_multipliers(double lambda1, double lambda2) {
  const bool clf = lambda1 > 0.0;
  const bool cbf = lambda2 > 0.0;
  if (clf && cbf) return qp::Region::BothActive;
  if (clf) return qp::Region::ClfActive;
  if (cbf) return qp::Region::CbfActive;
  return qp::Region::BothInactive;
}

struct ControlDecision {
  Eigen::Vector2d u_bar = Eigen::Vector2d::Zero();
  Eigen::Vector2d slack = Eigen::Vector2d::Zero();
  std::optional<qp::Region> region;
};

std::string describe(double t, const CartesianState& s) {
  return fmt::format("t={} x={} y={} theta={} v={} omega={}", t, s.x, s.y, s.theta,
                     s.v, s.omega);
}

}  // namespace

std::string_view controller_name(Controller controller) {
  switch (controller) {
    case Controller::Nominal: return "nominal";
    case Controller::ClfQp: return "clf-qp";
    case Controller::ClfCbfQp: return "clf-cbf-qp";
  }
  return "?";
}

Controller parse_controller(std::string_view name) {
  for (Controller c : {Controller::Nominal, Controller::ClfQp, Controller::ClfCbfQp}) {
    if (controller_name(c) == name) return c;
  }
  throw std::invalid_argument(fmt::format(
      "unknown controller '{}' (expected nominal, clf-qp or clf-cbf-qp)", name));
}

CartesianState normalize_heading(const CartesianState& state) {
  if (std::hypot(state.x, state.y) < vehicle::kRhoMin) return state;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double alpha = std::atan2(-state.y, -state.x) - state.theta;
  const double k = std::ceil((alpha - std::numbers::pi) / kTwoPi);
  CartesianState out = state;
  out.theta += kTwoPi * k;
  return out;
}

TrajectoryLog run(const Scenario& s, Controller controller) {
  // The start check runs first so an unsafe start is reported as such rather
  // than as a generic validation failure.
  for (const auto& obstacle : s.obstacles) {
    const cbf::BarrierValue b = cbf::barrier(s.init, obstacle, s.barrier);
    if (b.h < 0.0) {
      throw UnsafeStart(fmt::format(
          "initial state violates the barrier of obstacle ({}, {}, r={}): h = {}",
          obstacle.cx(), obstacle.cy(), obstacle.radius(), b.h));
    }
  }
  s.validate();

  TrajectoryLog log;
  log.label = std::string(controller_name(controller));

  const long per_control = s.steps_per_control();
  const long total_steps = std::lround(s.t_max / s.dt);
  const qp::QpParams& qp_params = s.qp;

  CartesianState state = normalize_heading(s.init);
  std::optional<double> prev_psi;
  vehicle::ControlInput held;

  for (long k = 0; k <= total_steps; ++k) {
    const double t = static_cast<double>(k) * s.dt;
    if (k % per_control == 0 || k == total_steps) {
      if (std::hypot(state.x, state.y) < vehicle::kRhoMin) {
        log.termination = Termination::Frozen;
        break;
      }
      const PolarPose pose = vehicle::polar_pose(state, prev_psi);
      prev_psi = pose.psi;
      const clf::ErrorCoords err = clf::error_coords(state, pose, s.gains);
      const clf::LyapunovBreakdown lb = clf::lyapunov(pose, err, s.gains);
      const clf::ClfTerms ct = clf::clf_terms(state, pose, err, s.gains);
      const double a1_bar = qp::gamma_f(ct.a1, qp_params.gamma);

      std::vector<qp::BarrierRow> rows;
      rows.reserve(s.obstacles.size());
      for (const auto& obstacle : s.obstacles) {
        const cbf::CbfTerms bt = cbf::cbf_terms(state, pose, obstacle, s.barrier);
        rows.push_back({bt.a2, bt.b2});
      }

      LogRow row;
      row.t = t;
      row.x = state.x;
      row.y = state.y;
      row.theta = state.theta;
      row.v = state.v;
      row.omega = state.omega;
      row.rho = pose.rho;
      row.alpha = pose.alpha;
      row.psi = pose.psi;
      row.z = err.z;
      row.omega_err = err.omega_err;
      row.V = lb.v_total;
      row.W = lb.w;
      const BarrierSummary bs = worst_barrier(s, state);
      row.h = bs.h;
      row.h0 = bs.h0;

      const bool converged =
          pose.rho < s.rho_stop &&
          std::hypot(err.z, err.omega_err) < kConvergedVelocityError;

      ControlDecision decision;
      if (converged) {
        decision.region = qp::Region::Degenerate;
      } else {
        try {
          switch (controller) {
            case Controller::Nominal: {
              const vehicle::ControlInput u = clf::nominal_control(state, pose, s.gains);
              decision.u_bar = {u.u_v / pose.rho, u.u_omega};
              break;
            }
            case Controller::ClfQp: {
              decision.u_bar = qp::clf_only(ct.a1, ct.b1, qp_params);
              decision.region = ct.a1 < 0.0 ? qp::Region::BothInactive
                                            : qp::Region::ClfActive;
              const double b1n = ct.b1.squaredNorm();
              if (ct.a1 >= 0.0 && b1n > 0.0) {
                const double m = qp_params.m_weight;
                decision.slack = -(a1_bar / ((m + 1.0) * b1n)) * ct.b1;
              }
              break;
            }
            case Controller::ClfCbfQp: {
              if (rows.size() == 1) {
                const auto terms = qp::ConstraintTerms::make(
                    ct.a1, ct.b1, rows[0].a, rows[0].b, qp_params.gamma);
                const qp::QpSolution sol = qp::solve_closed_form(terms, qp_params);
                decision.u_bar = sol.u;
                decision.slack = sol.slack;
                decision.region = sol.region;
              } else {
                const qp::OracleSolution sol =
                    qp::active_set_oracle(ct.a1, ct.b1, rows, qp_params);
                decision.u_bar = sol.u;
                decision.slack = sol.slack;
                double lambda2 = 0.0;
                for (std::size_t i = 1; i < sol.multipliers.size(); ++i) {
                  lambda2 = std::max(lambda2, sol.multipliers[i]);
                }
                decision.region = region_from_multipliers(sol.multipliers[0], lambda2);
              }
              break;
            }
          }
        } catch (const DegenerateQp& e) {
          throw DegenerateQp(fmt::format("{} at {}", e.what(), describe(t, state)));
        }
      }

      held = {pose.rho * decision.u_bar.x(), decision.u_bar.y()};
      row.u_v = held.u_v;
      row.u_omega = held.u_omega;
      const vehicle::WheelTorques tau = vehicle::wheel_torque_map(s.vehicle, held);
      row.tau_l = tau.tau_l;
      row.tau_r = tau.tau_r;
      row.region = decision.region;
      row.f1_residual = a1_bar + ct.b1.dot(decision.u_bar + decision.slack);
      if (!rows.empty()) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& r : rows) worst = std::max(worst, r.a + r.b.dot(decision.u_bar));
        row.f2_residual = worst;
      }
      log.rows.push_back(row);

      if (converged) {
        log.termination = Termination::Converged;
        break;
      }
    }
    if (k == total_steps) break;
    state = vehicle::rk4_step(state, held, s.dt);
  }
  return log;
}

}  // namespace safepark::sim
