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

#include "cranuad/hgamp.hpp"
#include "cranuad/model.hpp"

namespace cranuad {

enum class Scheme { QF, DtF };
const char* scheme_name(Scheme s);

// Fronthaul budget of one RRH: b bits per received complex sample.
struct FronthaulBudget {
  int bits = 0;

  // 2^(b/2) levels for each of the real/imaginary sample quantizers.
  // Requires even bits >= 2.
  int sample_levels() const;
  long qf_bits_per_slot(int M) const;  // exactly M*b
  // N * floor(M*b/N), always <= M*b.
  long dtf_bits_per_slot(int M, int N) const;
};

struct ActivityEstimate {
  IVec lambda_hat;
  Vec llr_used;
  double threshold = 0.0;
  Scheme scheme = Scheme::QF;
};

// Quantize-and-forward: per RRH, quantize Re/Im of every received sample
// with the analytic-sigma uniform quantizer, stack the bins RRH-major, and
// run H-GAMP on the real-lifted joint system (groups of 2R coordinates) with
// the quantized-Gaussian output channel.
PosteriorSummary qf_detect(const Scenario& sc, const SystemConfig& cfg,
                           int bits, const GampOptions& opts = {});

// Infinite-resolution reference: the same pipeline observing the exact
// received values.
PosteriorSummary qf_detect_unquantized(const Scenario& sc,
                                       const SystemConfig& cfg,
                                       const GampOptions& opts = {});

// Detect-and-forward local stage: H-GAMP on the single-RRH lifted system
// (groups of 2) with the unquantized channel; the RRH owns its analog
// samples, only the fronthaul is constrained. Returns per-UE local LLRs.
Vec dtf_local(const CVec& w_r, const CMat& s, const Vec& gamma_col, double p,
              double sigma_v2, const GampOptions& opts = {});

// All R local stages of a scenario; row r holds RRH r's LLRs.
Mat dtf_local_all(const Scenario& sc, const SystemConfig& cfg,
                  const GampOptions& opts = {});

// Fusion at the CU: each local LLR is replaced by its bin representative
// under the calibrated quantizer and the representatives are summed over
// RRHs. The sum rule is exact only for conditionally i.i.d. observations;
// unequal large-scale fading makes it an approximation.
Vec dtf_fuse(const Mat& local_llrs, const QuantizerSpec& llr_quantizer);

// lambda_hat[n] = 1 iff llr[n] >= l_th (ties decide active).
ActivityEstimate threshold_test(const Vec& llrs, double l_th, Scheme scheme);

}  // namespace cranuad
