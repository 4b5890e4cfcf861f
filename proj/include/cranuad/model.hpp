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

#include <iosfwd>
#include <random>
#include <vector>

#include "cranuad/linalg.hpp"

namespace cranuad {

struct SystemConfig {
  int N = 0;            // user count
  int M = 0;            // signature length in complex symbols
  int R = 0;            // radio heads
  double p = 0.0;       // activation probability, in (0,1)
  double Es = 0.0;      // signature energy budget, E[||s_n||^2]
  double snr_db = 0.0;  // per-user SNR, rho = Es / (M sigma_v^2), in dB
  Mat gamma;            // N x R large-scale fading gains, nonnegative

  double noise_variance() const;  // sigma_v^2 per complex sample
  void validate() const;          // throws std::invalid_argument
};

// Dense-network configuration: gamma = 1 for every UE/RRH pair.
SystemConfig make_dense_config(int N, int M, int R, double p, double Es,
                               double snr_db);

// One realization of everything random in a slot. All draws are stored so a
// scenario can be recomputed and cross-checked exactly.
struct Scenario {
  CMat S;       // M x N signatures
  IVec lambda;  // activity indicators, {0,1}
  CMat H;       // N x R small-scale fading
  CMat V;       // M x R noise
  CMat W;       // M x R received signals
  double sigma_v2 = 0.0;
};

// Signatures with i.i.d. circularly-symmetric complex Gaussian entries of
// variance Es/M, so E[||s_n||^2] = Es.
CMat gen_signatures(int N, int M, double Es, std::mt19937_64& rng);

IVec gen_activity(int N, double p, std::mt19937_64& rng);

// Draws the noise and assembles W(:,r) = sum_n lambda_n gamma_nr h_nr s_n + v_r.
Scenario synthesize_rx(const SystemConfig& cfg, CMat S, IVec lambda, CMat H,
                       std::mt19937_64& rng);

// Draws signatures, activity, fading and noise, in that order. Within each
// matrix the draw order is column-major with Re before Im.
Scenario draw_scenario(const SystemConfig& cfg, std::mt19937_64& rng);

// Recomputes the received signal from the stored draws; used by synthesize_rx
// itself so the consistency check is bit-exact.
CMat recompute_received(const CMat& S, const IVec& lambda, const CMat& H,
                        const Mat& gamma, const CMat& V);

// Stacked sensing matrix of the quantize-and-forward scheme, RM x RN. Rows
// are RRH-major (all M samples of RRH 1 first); columns are UE-major with
// the R per-RRH channel slots of one UE adjacent, i.e. complex column n*R+r
// holds gamma_nr * s_n in row block r.
CMat build_qf_matrix(const CMat& S, const Mat& gamma);

struct RealLift {
  Mat A;                         // 2a x 2b
  std::vector<int> group_index;  // real column -> UE index
};

// Complex a x b matrix -> real 2a x 2b matrix of [[Re,-Im],[Im,Re]] blocks.
// For conforming pairs, lift_matrix(A) * lift_vector(x) = lift_vector(A*x).
Mat lift_matrix(const CMat& a);
Vec lift_vector(const CVec& x);
CVec unlift_vector(const Vec& x);

// Lift of the stacked QF matrix together with the coordinate -> UE map; each
// UE owns 2R adjacent real coordinates.
RealLift lift_qf_matrix(const CMat& a_qf, int N, int R);

// Plain-text scenario table (printed with full precision, so load is exact).
void dump_scenario(const Scenario& sc, std::ostream& os);
Scenario load_scenario(std::istream& is);

}  // namespace cranuad
