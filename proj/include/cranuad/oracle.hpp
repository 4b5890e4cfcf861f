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
#include <functional>
#include <utility>
#include <vector>

#include "cranuad/gamp.hpp"
#include "cranuad/linalg.hpp"

namespace cranuad {

// Brute-force references. Everything here is deliberately independent of the
// message-passing implementation: posteriors by pattern enumeration, scalar
// moments by adaptive quadrature.

struct ExactPosterior {
  // log p(lambda) + log p(W | lambda) for all 2^N activity patterns, indexed
  // by the pattern bitmask (bit n = UE n active).
  std::vector<double> pattern_logpost;
  Vec llr;  // exact per-UE marginal LLRs
  int ill_conditioned = 0;  // patterns whose covariance solve looked shaky
};

// Exact UE posteriors for an unquantized scenario: given a pattern, each
// received vector w_r is zero-mean complex Gaussian with covariance
// sum_{n active} gamma_nr^2 s_n s_n^H + sigma_v^2 I and the RRHs are
// independent. N <= 16 enforced (2^N determinant evaluations).
ExactPosterior exact_posterior_unquantized(const CMat& s, const Mat& gamma,
                                           double sigma_v2, const CMat& w,
                                           double p);
Vec exact_llr_unquantized(const CMat& s, const Mat& gamma, double sigma_v2,
                          const CMat& w, double p);

// Stochastic reference for the quantized channel: per activity pattern, the
// likelihood of the observed bins is estimated by Monte Carlo integration
// over the active channels (the bin-mass product is computed exactly given
// the fading draw, so this is importance sampling under the prior). The
// result carries sampling noise of order 1/sqrt(samples); use it only for
// rank-correlation style comparisons, never for tight value asserts.
Vec sampled_llr_quantized(const CMat& s, const Mat& gamma, double sigma_v2,
                          const std::vector<QuantizerSpec>& specs,
                          const std::vector<int>& spec_index,
                          const std::vector<int>& bins, double p,
                          long samples, std::uint64_t seed);

// Adaptive Gauss-Kronrod (7/15) quadrature. Subdivides until the error
// estimate meets max(abs_tol, rel_tol*|I|); throws std::runtime_error when
// refinement stalls.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol = 1e-13, double rel_tol = 1e-11);

// Quadrature references for the scalar functions used by the engine. The
// integrands are tilted by the dominant exponential factor so the far tail
// (standardized endpoints of 40 and beyond) stays in normal double range.
TruncatedMoments trunc_moments_quadrature(double lo, double hi, double mean,
                                          double var);
std::pair<double, double> bg_denoise_quadrature(double r_hat, double v_r,
                                                double rho);
double gauss_mass_quadrature(double lo, double hi, double mean, double var);

}  // namespace cranuad
