/*
 * Copyright 2026 The cranuad Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cranuad/gamp.hpp"

namespace cranuad {

// Comparisons between the scalar engine functions and their quadrature
// references, each over a randomized grid that reaches 8-40 standardized
// deviations into the tails. Every function returns the worst absolute error
// observed.
double check_trunc_moments(int points, std::uint64_t seed);
double check_denoiser(int points, std::uint64_t seed);
double check_coord_llr(int points, std::uint64_t seed);
double check_bin_masses(int points, std::uint64_t seed);

struct EnumerationAgreement {
  double spearman_mean = 0.0;
  double auc_gamp = 0.0;
  double auc_oracle = 0.0;
};

// H-GAMP against the pattern-enumeration oracle on random unquantized
// instances (N=8, M=16, R alternating 1/2, p=0.25, 0 dB SNR).
EnumerationAgreement check_enumeration(int instances, std::uint64_t seed,
                                       const GampOptions& opts);

// Rank statistics used by the agreement checks.
double spearman(const Vec& a, const Vec& b);
double auc_score(const std::vector<double>& scores,
                 const std::vector<int>& labels);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// The oracle-check battery: scalar grids plus enumeration agreement, with
// the same pass thresholds the acceptance suite pins.
std::vector<CheckResult> run_oracle_checks(int points, int instances,
                                           std::uint64_t seed);

}  // namespace cranuad
