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

// Randomized property suites for the Lyapunov construction and the QP law.
// Sample i draws from its own generator seeded with (seed, i), so results do
// not depend on evaluation order.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "safepark/clf.hpp"
#include "safepark/qp.hpp"

namespace safepark::sim {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // worst observed value of the checked quantity
  double threshold = 0.0;  // bound it is compared against
  std::string detail;
};

struct Report {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const;
};

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

struct ClfVerifyOptions {
  // Test hook: mutates P before the Lyapunov-equation check.
  std::function<void(clf::SymMatrix2&)> tamper_p;
};

Report verify_clf(const clf::Gains& gains, long n_samples, std::uint64_t seed,
                  const ClfVerifyOptions& options = {});

enum class QpDrawMode {
  General,           // independent b1, b2
  ParallelGradients, // b2 = c * b1
  VanishingBarrier,  // b2 = 0, a2 <= 0
};

Report verify_qp(long n_samples, std::uint64_t seed,
                 QpDrawMode mode = QpDrawMode::General);

// Largest step-to-step change of the closed-form control along the segment
// from `from` to `to` (terms interpolated linearly, a1_bar re-derived),
// sampled with the given parameter step.
double max_control_jump(const qp::ConstraintTerms& from, const qp::ConstraintTerms& to,
                        const qp::QpParams& params, double step);

struct ContinuityResult {
  int segments = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool passed = false;
};

// Lipschitz check across region boundaries: halving the sampling step from
// 1e-3 must halve the largest jump, within a factor 1.3.
ContinuityResult continuity_ratio_test(int n_segments, std::uint64_t seed);

}  // namespace safepark::sim
