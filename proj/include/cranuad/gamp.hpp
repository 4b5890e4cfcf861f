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
#include <stdexcept>
#include <utility>
#include <vector>

#include "cranuad/linalg.hpp"
#include "cranuad/quantizer.hpp"

namespace cranuad {

// The four matrix-vector products the engine needs: the real system matrix
// and its elementwise square, in both directions. Implementations must be
// deterministic for a fixed input (fixed reduction order).
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Vec mul(const Vec& x) const = 0;       // A x
  virtual Vec mul_t(const Vec& s) const = 0;     // A^T s
  virtual Vec mul_sq(const Vec& v) const = 0;    // (A .* A) v
  virtual Vec mul_sq_t(const Vec& v) const = 0;  // (A .* A)^T v
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Mat a);
  Eigen::Index rows() const override { return a_.rows(); }
  Eigen::Index cols() const override { return a_.cols(); }
  Vec mul(const Vec& x) const override;
  Vec mul_t(const Vec& s) const override;
  Vec mul_sq(const Vec& v) const override;
  Vec mul_sq_t(const Vec& v) const override;
  const Mat& matrix() const { return a_; }

 private:
  Mat a_;
  Mat a_sq_;
};

// Real lift of a block-diagonal complex system. Block r is the M x N complex
// matrix S * diag(gamma(:,r)); real rows follow the RRH-major stacking and
// real columns the UE-major slot ordering, so the products agree with
// DenseOperator(lift_qf_matrix(build_qf_matrix(S, gamma)).A) up to rounding
// while doing R times less work.
class ComplexBlockOperator final : public LinearOperator {
 public:
  ComplexBlockOperator(const CMat& s, const Mat& gamma);
  Eigen::Index rows() const override { return 2 * r_ * m_; }
  Eigen::Index cols() const override { return 2 * r_ * n_; }
  Vec mul(const Vec& x) const override;
  Vec mul_t(const Vec& s) const override;
  Vec mul_sq(const Vec& v) const override;
  Vec mul_sq_t(const Vec& v) const override;

 private:
  std::vector<CMat> blocks_;
  std::vector<Mat> re_sq_;
  std::vector<Mat> im_sq_;
  Eigen::Index m_ = 0, n_ = 0, r_ = 0;
};

struct TruncatedMoments {
  double mean = 0.0;
  double var = 0.0;
};

// First two moments of N(mean, var) restricted to (lo, hi); either endpoint
// may be infinite. One-sided tails are evaluated through the scaled
// complementary error function in extended precision, which keeps the result
// accurate for standardized endpoints far beyond 40. An interval with no
// mass at working precision degrades to the nearest endpoint with a floored
// variance instead of failing.
TruncatedMoments trunc_gauss_moments(double lo, double hi, double mean,
                                     double var);

// log[ phi(r; 0, 0.5 + v_r) / phi(r; 0, v_r) ]: the evidence carried by one
// noisy coordinate r = x + w for the Gaussian component being present in x.
// Shared by the denoiser posterior and the group sparsity updates.
double coord_llr(double r_hat, double v_r);

// Probability mass of N(mean, var) on bin `index` of the quantizer. Summed
// over all bins this is 1 for any mean/var.
double bin_mass(const QuantizerSpec& spec, int index, double mean, double var);

// Observation side of the generalized linear model. Quantized: per-coordinate
// bin indices with a per-coordinate quantizer; the likelihood of a bin is the
// Gaussian mass of its interval. Unquantized: the noisy value itself is
// observed. noise_var is per real coordinate (sigma_v^2 / 2 of the complex
// model).
struct OutputChannel {
  double noise_var = 0.0;
  std::vector<QuantizerSpec> specs;  // empty => unquantized
  std::vector<int> spec_index;       // per coordinate, into specs
  std::vector<int> bins;             // per coordinate (quantized)
  Vec values;                        // per coordinate (unquantized)

  bool quantized() const { return !specs.empty(); }
  Eigen::Index size() const {
    return quantized() ? static_cast<Eigen::Index>(bins.size())
                       : values.size();
  }
};

OutputChannel make_quantized_channel(std::vector<QuantizerSpec> specs,
                                     std::vector<int> spec_index,
                                     std::vector<int> bins, double noise_var);
OutputChannel make_unquantized_channel(Vec values, double noise_var);

struct GampOptions {
  double damping = 0.8;     // convex combination weight on the new iterate
  double var_floor = 1e-12;
  double var_ceil = 1e12;
  double rho_clamp = 1e-12;   // rho_hat kept in [rho_clamp, 1 - rho_clamp]
  double llr_clamp = 500.0;   // applied before any logistic
  double tol = 1e-6;          // relative change of x_hat
  int max_iters = 50;
  std::ostream* trace = nullptr;  // per-iteration CSV: iter,residual,mean_rho
};

struct GampState {
  Vec x_hat, v_x;    // per coordinate
  Vec s_hat, v_s;    // per observation
  Vec p_hat, v_p;    // per observation
  Vec r_hat, v_r;    // per coordinate
  Vec rho_hat;       // per-coordinate sparsity level, in (0,1)
  int iter = 0;
};

class GampDivergence : public std::runtime_error {
 public:
  explicit GampDivergence(int iteration);
  int iteration;
};

// x_hat = 0, v_x = prior_rho/2, s_hat = 0, rho_hat = prior_rho.
GampState init_gamp_state(Eigen::Index n_coords, Eigen::Index n_obs,
                          double prior_rho);

// Nonlinear factor step. With v = v_p + noise_var and (m_t, v_t) the moments
// of N(p_hat, v) truncated to the observed bin: s_hat = (m_t - p_hat)/v and
// v_s = (1 - v_t/v)/v. Note both occurrences of the factor variance use the
// noise-augmented v; this is equivalent to the standard noiseless-z update
// with the pre-quantization noise folded into the linear output.
void output_update(const OutputChannel& ch, const Vec& p_hat, const Vec& v_p,
                   Vec& s_hat, Vec& v_s);

// Posterior mean/variance of x under the spike-and-slab prior
// x ~ N(0, 1/2) w.p. rho, x = 0 otherwise, given r = x + N(0, v_r).
std::pair<double, double> bg_denoise(double r_hat, double v_r, double rho,
                                     double llr_clamp = 500.0);
void input_denoise(const Vec& r_hat, const Vec& v_r, const Vec& rho_hat,
                   const GampOptions& opts, Vec& x_hat, Vec& v_x);

// One full basic-GAMP iteration: linear/nonlinear factor step, then
// linear/nonlinear variable step, with damping on (s_hat, x_hat).
// Throws GampDivergence when any state vector stops being finite.
void gamp_iterate(GampState& st, const LinearOperator& op,
                  const OutputChannel& ch, const GampOptions& opts);

// Basic GAMP with a fixed sparsity level, iterated until the relative change
// of x_hat drops below opts.tol or opts.max_iters is reached.
GampState gamp_run(const LinearOperator& op, const OutputChannel& ch,
                   double prior_rho, const GampOptions& opts = {},
                   bool* converged = nullptr);

}  // namespace cranuad
