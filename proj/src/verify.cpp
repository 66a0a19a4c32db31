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

#include "safepark/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace safepark::sim {

using vehicle::PolarPose;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random planar vector with log-uniform norm in [lo, hi].
Eigen::Vector2d random_vector(std::mt19937_64& rng, double lo, double hi) {
  const double norm = std::exp(uniform(rng, std::log(lo), std::log(hi)));
  const double angle = uniform(rng, -std::numbers::pi, std::numbers::pi);
  return norm * Eigen::Vector2d(std::cos(angle), std::sin(angle));
}

CheckResult upper_bound_check(std::string name, double worst, double threshold,
                              std::string detail = {}) {
  return {std::move(name), worst <= threshold, worst, threshold, std::move(detail)};
}

std::array<double, 5> unpack(const PolarPose& p, const clf::ErrorCoords& e) {
  return {p.rho, p.alpha, p.psi, e.z, e.omega_err};
}

double v_at(const std::array<double, 5>& x, const clf::Gains& g) {
  return clf::lyapunov({x[0], x[1], x[2]}, {x[3], x[4]}, g).v_total;
}

}  // namespace

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Report verify_clf(const clf::Gains& gains, long n, std::uint64_t seed,
                  const ClfVerifyOptions& options) {
  Report report{"clf", {}};
  gains.validate();

  // Positive definiteness.
  {
    double min_v = kInf;
    for (long i = 0; i < n; ++i) {
      auto rng = sample_rng(seed, static_cast<std::uint64_t>(i));
      const PolarPose pose{uniform(rng, 1e-9, 10.0), uniform(rng, -10.0, 10.0),
                           uniform(rng, -10.0, 10.0)};
      const clf::ErrorCoords err{uniform(rng, -10.0, 10.0), uniform(rng, -10.0, 10.0)};
      min_v = std::min(min_v, clf::lyapunov(pose, err, gains).v_total);
    }
    const double at_origin = clf::lyapunov({0.0, 0.0, 0.0}, {0.0, 0.0}, gains).v_total;
    report.checks.push_back({"positive_definiteness", min_v > 0.0 && at_origin == 0.0,
                             min_v, 0.0,
                             fmt::format("min V over samples {:.3e}, V(0) = {}", min_v,
                                         at_origin)});
  }

  // Lyapunov equation and determinant.
  {
    const clf::PMatrix pm = clf::p_matrix(gains);
    clf::SymMatrix2 p = pm.p;
    if (options.tamper_p) options.tamper_p(p);
    report.checks.push_back(upper_bound_check(
        "lyapunov_equation", clf::lyapunov_equation_residual(p, gains), 1e-12));
    const double closed = clf::p_matrix_det_closed_form(gains);
    const double diff = std::abs(pm.det - closed);
    CheckResult det = upper_bound_check("p_determinant", diff, 1e-12,
                                        fmt::format("det(P) = {:.12g}", pm.det));
    det.passed = det.passed && pm.det > 0.0;
    report.checks.push_back(det);
  }

  // Exact W1 derivative identity and the strict decrease bound along f_nom.
  {
    double worst_identity = 0.0;
    double worst_bound = -kInf;
    for (long i = 0; i < n; ++i) {
      auto rng = sample_rng(seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(i));
      const PolarPose pose{uniform(rng, 0.0, 5.0), uniform(rng, -5.0, 5.0),
                           uniform(rng, -5.0, 5.0)};
      if (pose.rho <= 0.0) continue;
      const auto f = clf::nominal_drift(pose, gains);
      const double w1_dot =
          pose.rho * f[0] + pose.alpha * f[1] + gains.lambda * pose.psi * f[2];
      const double c = std::cos(pose.alpha);
      const double expected = -gains.k_rho * c * c * pose.rho * pose.rho -
                              gains.k_alpha * pose.alpha * pose.alpha;
      worst_identity = std::max(worst_identity, std::abs(w1_dot - expected));

      const double bound = -0.5 * (pose.alpha * pose.alpha + pose.psi * pose.psi) -
                           gains.k_rho * c * c * pose.rho * pose.rho;
      worst_bound = std::max(worst_bound, clf::w_dot_nominal(pose, gains) - bound);
    }
    report.checks.push_back(upper_bound_check("w1_derivative_identity", worst_identity, 1e-10));
    report.checks.push_back(upper_bound_check(
        "w_dot_bound", worst_bound, 1e-9, "max of W_dot - (-|xi|^2/2 - k_rho cos^2 rho^2)"));
  }

  // |sinc(2s) - 1| <= (2/pi)|s|.
  {
    double worst = -kInf;
    for (long i = 0; i < n; ++i) {
      auto rng = sample_rng(seed ^ 0x27d4eb2fULL, static_cast<std::uint64_t>(i));
      const double s = uniform(rng, -10.0, 10.0);
      const double gap =
          std::abs(clf::stable_sinc(2.0 * s).value - 1.0) - 2.0 / std::numbers::pi * std::abs(s);
      worst = std::max(worst, gap);
    }
    report.checks.push_back(upper_bound_check("sinc_bound", worst, 0.0));
  }

  // Analytic gradient against central differences.
  {
    double worst = 0.0;
    for (long i = 0; i < n; ++i) {
      auto rng = sample_rng(seed ^ 0x165667b1ULL, static_cast<std::uint64_t>(i));
      const PolarPose pose{uniform(rng, 0.1, 5.0), uniform(rng, -5.0, 5.0),
                           uniform(rng, -5.0, 5.0)};
      const clf::ErrorCoords err{uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0)};
      const auto grad = clf::lyapunov(pose, err, gains).grad;
      const auto x = unpack(pose, err);
      double diff = 0.0;
      double norm = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        auto xp = x;
        auto xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (v_at(xp, gains) - v_at(xm, gains)) / (xp[j] - xm[j]);
        diff = std::max(diff, std::abs(fd - grad[j]));
        norm = std::max(norm, std::abs(grad[j]));
      }
      worst = std::max(worst, diff / std::max(norm, std::numeric_limits<double>::min()));
    }
    report.checks.push_back(upper_bound_check("gradient", worst, 1e-6,
                                              "max-norm relative error vs central differences"));
  }
  return report;
}

Report verify_qp(long n, std::uint64_t seed, QpDrawMode mode) {
  Report report{"qp", {}};
  double worst_dev = 0.0;
  double worst_f2 = -kInf;
  double worst_f1 = -kInf;
  long partition_failures = 0;
  double worst_clf_only = 0.0;

  for (long i = 0; i < n; ++i) {
    auto rng = sample_rng(seed, static_cast<std::uint64_t>(i));
    const double m = uniform(rng, 1.0, 5.0);
    const qp::QpParams params{uniform(rng, 1.0, 3.0), m};
    const double a1 = uniform(rng, -10.0, 10.0);
    const Eigen::Vector2d b1 = random_vector(rng, 1e-3, 10.0);
    double a2 = uniform(rng, -10.0, 10.0);
    Eigen::Vector2d b2;
    switch (mode) {
      case QpDrawMode::General:
        b2 = random_vector(rng, 1e-3, 10.0);
        break;
      case QpDrawMode::ParallelGradients: {
        const double c = std::exp(uniform(rng, std::log(1e-2), std::log(1e2)));
        b2 = (uniform(rng, 0.0, 1.0) < 0.5 ? -c : c) * b1;
        break;
      }
      case QpDrawMode::VanishingBarrier:
        b2 = Eigen::Vector2d::Zero();
        a2 = -std::abs(a2);
        break;
    }
    const auto terms = qp::ConstraintTerms::make(a1, b1, a2, b2, params.gamma);
    const qp::QpSolution cf = qp::solve_closed_form(terms, params);
    const qp::OracleSolution oracle = qp::active_set_oracle(terms, params);

    worst_dev = std::max(worst_dev, (cf.u - oracle.u).cwiseAbs().maxCoeff());
    worst_f2 = std::max(worst_f2, cf.f2_residual);
    worst_f1 = std::max(worst_f1, cf.f1_residual);
    if (mode == QpDrawMode::VanishingBarrier) {
      const Eigen::Vector2d u = qp::clf_only(a1, b1, params);
      worst_clf_only = std::max(worst_clf_only, (cf.u - u).cwiseAbs().maxCoeff());
    } else if (qp::classify(terms, params).count() != 1) {
      ++partition_failures;
    }
  }

  report.checks.push_back(upper_bound_check("oracle_equivalence", worst_dev, 1e-8,
                                            "max |u_closed_form - u_active_set|"));
  report.checks.push_back(upper_bound_check("safety_residual", worst_f2, 1e-10));
  report.checks.push_back(upper_bound_check("clf_residual", worst_f1, 1e-9));
  if (mode == QpDrawMode::VanishingBarrier) {
    report.checks.push_back(upper_bound_check("matches_clf_only", worst_clf_only, 1e-12));
  } else {
    report.checks.push_back({"region_partition", partition_failures == 0,
                             static_cast<double>(partition_failures), 0.0,
                             "draws not in exactly one region"});
  }
  if (mode == QpDrawMode::General) {
    const ContinuityResult c = continuity_ratio_test(100, seed);
    report.checks.push_back({"continuity", c.passed, c.max_ratio, 2.0 * 1.3,
                             fmt::format("{} segments, jump ratio in [{:.4f}, {:.4f}]",
                                         c.segments, c.min_ratio, c.max_ratio)});
  }
  return report;
}

double max_control_jump(const qp::ConstraintTerms& from, const qp::ConstraintTerms& to,
                        const qp::QpParams& params, double step) {
  const long steps = std::lround(1.0 / step);
  auto at = [&](long k) {
    const double s = static_cast<double>(k) / static_cast<double>(steps);
    const double a1 = (1.0 - s) * from.a1 + s * to.a1;
    const double a2 = (1.0 - s) * from.a2 + s * to.a2;
    const Eigen::Vector2d b1 = (1.0 - s) * from.b1 + s * to.b1;
    const Eigen::Vector2d b2 = (1.0 - s) * from.b2 + s * to.b2;
    return qp::solve_closed_form(qp::ConstraintTerms::make(a1, b1, a2, b2, params.gamma),
                                 params)
        .u;
  };
  double worst = 0.0;
  Eigen::Vector2d prev = at(0);
  for (long k = 1; k <= steps; ++k) {
    const Eigen::Vector2d cur = at(k);
    worst = std::max(worst, (cur - prev).norm());
    prev = cur;
  }
  return worst;
}

ContinuityResult continuity_ratio_test(int n_segments, std::uint64_t seed) {
  ContinuityResult out;
  out.min_ratio = kInf;
  out.max_ratio = -kInf;
  const qp::QpParams params = qp::QpParams::stability_mode(1.0);
  std::uint64_t draw = 0;
  while (out.segments < n_segments) {
    auto rng = sample_rng(seed ^ 0x9e3779b97f4a7c15ULL, draw++);
    auto random_terms = [&] {
      return qp::ConstraintTerms::make(uniform(rng, -5.0, 5.0), random_vector(rng, 0.5, 5.0),
                                       uniform(rng, -5.0, 5.0), random_vector(rng, 0.5, 5.0),
                                       params.gamma);
    };
    const auto from = random_terms();
    const auto to = random_terms();
    if (qp::solve_closed_form(from, params).region ==
        qp::solve_closed_form(to, params).region) {
      continue;
    }
    // Keep both gradients well away from zero along the whole segment.
    bool near_zero = false;
    for (int k = 0; k <= 100 && !near_zero; ++k) {
      const double s = k / 100.0;
      near_zero = ((1.0 - s) * from.b1 + s * to.b1).norm() < 0.2 ||
                  ((1.0 - s) * from.b2 + s * to.b2).norm() < 0.2;
    }
    if (near_zero) continue;

    const double coarse = max_control_jump(from, to, params, 1e-3);
    const double fine = max_control_jump(from, to, params, 5e-4);
    const double ratio = coarse / fine;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.segments;
  }
  out.passed = out.min_ratio >= 2.0 / 1.3 && out.max_ratio <= 2.0 * 1.3;
  return out;
}

}  // namespace safepark::sim
