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

#include <utility>
#include <vector>

#include "cranuad/linalg.hpp"

namespace cranuad {

/// Scalar uniform quantizer over a finite grid [lo, lo + levels*step] whose
/// outermost cells extend to -inf / +inf, so the bins partition the real
/// line. Every representative is the midpoint of its finite grid cell; for
/// the outer bins this clamps the reconstruction to (grid edge -/+ step/2).
/// Immutable after construction.
struct QuantizerSpec {
  int levels = 0;
  double step = 0.0;
  double lo = 0.0;  // lower edge of the finite grid
  std::vector<double> representatives;

  double edge(int k) const { return lo + k * step; }  // k in [0, levels]
  double hi() const { return edge(levels); }
};

QuantizerSpec make_uniform_quantizer(int levels, double lo, double hi);

// Received-sample quantizer: the per-sample bit budget is split evenly
// between the real and imaginary parts (2^(b/2) levels each) and the grid
// covers three standard deviations of one real component in each direction.
// bits_per_complex must be even and >= 2.
QuantizerSpec design_sample_quantizer(int bits_per_complex, double sigma_real);

// LLR quantizer: the grid covers the empirical [2.5%, 97.5%] interval of the
// calibration samples (kept asymmetric; local LLRs skew negative for small
// activation probabilities). A degenerate sample range widens to +/-1 around
// the constant. levels >= 2 and a nonempty sample set are required.
QuantizerSpec design_llr_quantizer(int levels,
                                   std::vector<double> calibration_samples);

int quantize(const QuantizerSpec& spec, double value);

// Interval covered by one bin; the outer bins are half-infinite. Adjacent
// bins share exactly one endpoint and the union over bins is the real line.
std::pair<double, double> bin_interval(const QuantizerSpec& spec, int index);

double representative(const QuantizerSpec& spec, int index);

// Level count 2^floor(M*b/N) for forwarding N LLRs within the M*b fronthaul
// bits of one slot. Budgets below one bit per LLR are rejected.
int dtf_llr_levels(int M, int bits_per_complex, int N);

// Standard deviation of one real component of a received sample under the
// generative model; places the sample-quantizer grid without a calibration
// pass. Per-real-component variance: (p * sum_n gamma_nr^2 * Es/M + sv2) / 2.
double analytic_sample_sigma(double p, const Vec& gamma_col, double Es, int M,
                             double sigma_v2);

}  // namespace cranuad
