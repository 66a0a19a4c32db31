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

#include "safepark/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "safepark/errors.hpp"

namespace safepark::qp {

namespace {

constexpr double kDegenerateNorm2 = kDegenerateNorm * kDegenerateNorm;

QpSolution finish(const ConstraintTerms& t, const QpParams& p, Region region,
                  const Eigen::Vector2d& u, double lambda1, double lambda2) {
  QpSolution s;
  s.region = region;
  s.u = u;
  s.lambda1 = lambda1;
  s.lambda2 = lambda2;
  s.slack = -lambda1 / p.m_weight * t.b1;
  s.f1_residual = t.a1_bar + t.b1.dot(u + s.slack);
  s.f2_residual = t.a2 + t.b2.dot(u);
  return s;
}

}  // namespace

QpParams QpParams::stability_mode(double m_weight) {
  return {(m_weight + 1.0) / m_weight, m_weight};
}

void QpParams::validate() const {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw ValidationError(fmt::format("qp.gamma must be >= 1, got {}", gamma));
  }
  if (!(m_weight >= 1.0) || !std::isfinite(m_weight)) {
    throw ValidationError(fmt::format("qp.m_weight must be >= 1, got {}", m_weight));
  }
}

double gamma_f(double s, double gamma) { return s >= 0.0 ? gamma * s : s; }

ConstraintTerms ConstraintTerms::make(double a1, const Eigen::Vector2d& b1, double a2,
                                      const Eigen::Vector2d& b2, double gamma) {
  return {a1, gamma_f(a1, gamma), b1, a2, b2};
}

std::string_view region_name(Region region) {
  switch (region) {
    case Region::BothInactive: return "BothInactive";
    case Region::ClfActive: return "ClfActive";
    case Region::CbfActive: return "CbfActive";
    case Region::BothActive: return "BothActive";
    case Region::Degenerate: return "Degenerate";
  }
  return "?";
}

Region parse_region(std::string_view name) {
  for (Region r : {Region::BothInactive, Region::ClfActive, Region::CbfActive,
                   Region::BothActive, Region::Degenerate}) {
    if (region_name(r) == name) return r;
  }
  throw std::invalid_argument(fmt::format("unknown QP region '{}'", name));
}

RegionPredicates classify(const ConstraintTerms& t, const QpParams& p) {
  const double m = p.m_weight;
  const double b1n = t.b1.squaredNorm();
  const double b2n = t.b2.squaredNorm();
  const double cross = t.b1.dot(t.b2);
  const double clf_threshold = m / (m + 1.0) * cross / b1n * t.a1_bar;
  const double cbf_threshold = cross / b2n * t.a2;

  RegionPredicates r;
  r.both_inactive = t.a1 < 0.0 && t.a2 < 0.0;
  r.clf_active = t.a1 >= 0.0 && t.a2 < clf_threshold;
  r.cbf_active = t.a2 >= 0.0 && t.a1_bar < cbf_threshold;
  r.both_active = !r.both_inactive && t.a1_bar >= cbf_threshold && t.a2 >= clf_threshold;
  return r;
}

QpSolution solve_closed_form(const ConstraintTerms& t, const QpParams& p) {
  const double m = p.m_weight;
  const double b1n = t.b1.squaredNorm();
  const double b2n = t.b2.squaredNorm();
  const bool clf_vanishes = b1n < kDegenerateNorm2;
  const bool cbf_vanishes = b2n < kDegenerateNorm2;

  if (clf_vanishes && t.a1 >= 0.0) {
    throw DegenerateQp(fmt::format(
        "CLF row degenerate: |b1| = {:.3e} with a1 = {:.6e} >= 0", std::sqrt(b1n), t.a1));
  }
  if (cbf_vanishes && t.a2 > 0.0) {
    throw DegenerateQp(fmt::format(
        "CBF row degenerate: |b2| = {:.3e} with a2 = {:.6e} > 0", std::sqrt(b2n), t.a2));
  }

  const Eigen::Vector2d zero = Eigen::Vector2d::Zero();
  if (clf_vanishes && cbf_vanishes) {
    return finish(t, p, Region::BothInactive, zero, 0.0, 0.0);
  }
  if (clf_vanishes) {
    if (t.a2 < 0.0) return finish(t, p, Region::BothInactive, zero, 0.0, 0.0);
    return finish(t, p, Region::CbfActive, -t.a2 / b2n * t.b2, 0.0, t.a2 / b2n);
  }
  if (cbf_vanishes) {
    if (t.a1 < 0.0) return finish(t, p, Region::BothInactive, zero, 0.0, 0.0);
    const double lambda1 = m / (m + 1.0) * t.a1_bar / b1n;
    return finish(t, p, Region::ClfActive, -lambda1 * t.b1, lambda1, 0.0);
  }

  const RegionPredicates r = classify(t, p);
  // Regions partition the input space; on a shared boundary the laws agree,
  // so ties take the first match.
  if (r.both_inactive) {
    return finish(t, p, Region::BothInactive, zero, 0.0, 0.0);
  }
  if (r.clf_active) {
    const double lambda1 = m / (m + 1.0) * t.a1_bar / b1n;
    return finish(t, p, Region::ClfActive, -lambda1 * t.b1, lambda1, 0.0);
  }
  if (r.cbf_active) {
    const double lambda2 = t.a2 / b2n;
    return finish(t, p, Region::CbfActive, -lambda2 * t.b2, 0.0, lambda2);
  }
  const double cross = t.b1.dot(t.b2);
  const double denom = (1.0 + 1.0 / m) * b1n * b2n - cross * cross;
  const double mu1 = (b2n * t.a1_bar - cross * t.a2) / denom;
  const double mu2 = (-cross * t.a1_bar + (1.0 + 1.0 / m) * b1n * t.a2) / denom;
  return finish(t, p, Region::BothActive, -mu1 * t.b1 - mu2 * t.b2, mu1, mu2);
}

Eigen::Vector2d clf_only(double a1, const Eigen::Vector2d& b1, const QpParams& p) {
  const double b1n = b1.squaredNorm();
  if (b1n < kDegenerateNorm2) {
    if (a1 >= 0.0) {
      throw DegenerateQp(fmt::format(
          "CLF row degenerate: |b1| = {:.3e} with a1 = {:.6e} >= 0", std::sqrt(b1n), a1));
    }
    return Eigen::Vector2d::Zero();
  }
  if (a1 < 0.0) return Eigen::Vector2d::Zero();
  const double m = p.m_weight;
  return -(m / (m + 1.0)) * gamma_f(a1, p.gamma) / b1n * b1;
}

OracleSolution active_set_oracle(double a1, const Eigen::Vector2d& b1,
                                 std::span<const BarrierRow> barriers,
                                 const QpParams& p) {
  // Decision vector z = (u, delta), cost 1/2 z^T H z with H = diag(1, 1, m, m),
  // constraints c_i + g_i . z <= 0.
  const int rows = 1 + static_cast<int>(barriers.size());
  if (rows > 20) {
    throw std::invalid_argument("active_set_oracle: too many constraint rows");
  }
  Eigen::MatrixXd g(rows, 4);
  Eigen::VectorXd c(rows);
  g.row(0) << b1.x(), b1.y(), b1.x(), b1.y();
  c(0) = gamma_f(a1, p.gamma);
  for (int i = 1; i < rows; ++i) {
    const BarrierRow& row = barriers[static_cast<std::size_t>(i - 1)];
    g.row(i) << row.b.x(), row.b.y(), 0.0, 0.0;
    c(i) = row.a;
  }
  Eigen::Vector4d h_inv(1.0, 1.0, 1.0 / p.m_weight, 1.0 / p.m_weight);

  OracleSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  bool found = false;

  for (unsigned mask = 0; mask < (1u << rows); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < rows; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const int k = static_cast<int>(active.size());
    Eigen::Vector4d z = Eigen::Vector4d::Zero();
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
    if (k > 0) {
      Eigen::MatrixXd gs(k, 4);
      Eigen::VectorXd cs(k);
      for (int j = 0; j < k; ++j) {
        gs.row(j) = g.row(active[j]);
        cs(j) = c(active[j]);
      }
      const Eigen::MatrixXd gram = gs * h_inv.asDiagonal() * gs.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      lu.setThreshold(1e-12);
      if (!lu.isInvertible()) continue;
      lambda = lu.solve(cs);
      z = -(h_inv.asDiagonal() * (gs.transpose() * lambda));
    }

    bool ok = true;
    for (int j = 0; j < k && ok; ++j) {
      if (lambda(j) < -1e-12 * (1.0 + std::abs(lambda(j)))) ok = false;
    }
    for (int i = 0; i < rows && ok; ++i) {
      const double slack = c(i) + g.row(i).dot(z);
      const double scale = 1.0 + std::abs(c(i)) + g.row(i).norm() * z.norm();
      if (slack > 1e-10 * scale) ok = false;
    }
    if (!ok) continue;

    const double objective =
        0.5 * (z.head<2>().squaredNorm() + p.m_weight * z.tail<2>().squaredNorm());
    if (objective < best.objective) {
      found = true;
      best.objective = objective;
      best.u = z.head<2>();
      best.slack = z.tail<2>();
      best.multipliers.assign(static_cast<std::size_t>(rows), 0.0);
      for (int j = 0; j < k; ++j) {
        best.multipliers[static_cast<std::size_t>(active[j])] = lambda(j);
      }
    }
  }
  if (!found) {
    throw NoFeasibleActiveSet("active-set enumeration found no KKT point");
  }
  return best;
}

OracleSolution active_set_oracle(const ConstraintTerms& t, const QpParams& p) {
  const BarrierRow row{t.a2, t.b2};
  return active_set_oracle(t.a1, t.b1, std::span<const BarrierRow>(&row, 1), p);
}

}  // namespace safepark::qp
