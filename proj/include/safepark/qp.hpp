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

// The gamma-m QP
//
//   min  1/2 (u^T u + m delta^T delta)
//   s.t. gamma_f(a1) + b1 (u + delta) <= 0     (CLF, softened by delta)
//        a2 + b2 u <= 0                        (CBF, hard)
//
// solved in closed form by enumerating the four KKT regions, plus an
// independent brute-force active-set solver used as a test oracle and for
// more than one barrier row.

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace safepark::qp {

// Gradients shorter than this are treated as vanishing.
inline constexpr double kDegenerateNorm = 1e-12;

struct QpParams {
  double gamma = 2.0;
  double m_weight = 1.0;

  // gamma chosen so that gamma * m / (m + 1) = 1.
  static QpParams stability_mode(double m_weight);

  void validate() const;
};

double gamma_f(double s, double gamma);

struct ConstraintTerms {
  double a1 = 0.0;
  double a1_bar = 0.0;
  Eigen::Vector2d b1 = Eigen::Vector2d::Zero();
  double a2 = 0.0;
  Eigen::Vector2d b2 = Eigen::Vector2d::Zero();

  static ConstraintTerms make(double a1, const Eigen::Vector2d& b1, double a2,
                              const Eigen::Vector2d& b2, double gamma);
};

enum class Region { BothInactive, ClfActive, CbfActive, BothActive, Degenerate };

std::string_view region_name(Region region);

// Throws std::invalid_argument for unknown names.
Region parse_region(std::string_view name);

struct QpSolution {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Region region = Region::BothInactive;
  double f1_residual = 0.0;  // gamma_f(a1) + b1 (u + delta)
  double f2_residual = 0.0;  // a2 + b2 u
  // Recovered from the KKT stationarity in delta; diagnostic only.
  Eigen::Vector2d slack = Eigen::Vector2d::Zero();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Membership of each Omega region, evaluated literally.
struct RegionPredicates {
  bool both_inactive = false;
  bool clf_active = false;
  bool cbf_active = false;
  bool both_active = false;

  int count() const {
    return int{both_inactive} + int{clf_active} + int{cbf_active} + int{both_active};
  }
};

// Requires |b1|, |b2| >= kDegenerateNorm.
RegionPredicates classify(const ConstraintTerms& t, const QpParams& p);

// Throws DegenerateQp for vanishing b1 with a1 >= 0 or vanishing b2 with a2 > 0.
QpSolution solve_closed_form(const ConstraintTerms& t, const QpParams& p);

// Pointwise min-norm CLF controller (no barrier). Throws DegenerateQp for
// vanishing b1 with a1 >= 0.
Eigen::Vector2d clf_only(double a1, const Eigen::Vector2d& b1, const QpParams& p);

struct BarrierRow {
  double a = 0.0;
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
};

struct OracleSolution {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Eigen::Vector2d slack = Eigen::Vector2d::Zero();
  std::vector<double> multipliers;  // CLF first, then one per barrier row
  double objective = 0.0;
};

// Enumerates every active subset of the 1 + k constraints and keeps the
// primal-dual feasible KKT point of least cost. a1 is the raw CLF drift term;
// gamma_f is applied here. Throws NoFeasibleActiveSet if nothing qualifies.
OracleSolution active_set_oracle(double a1, const Eigen::Vector2d& b1,
                                 std::span<const BarrierRow> barriers,
                                 const QpParams& p);

OracleSolution active_set_oracle(const ConstraintTerms& t, const QpParams& p);

}  // namespace safepark::qp
