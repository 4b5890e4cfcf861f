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
#include "cranuad/gamp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cranuad/mathutil.hpp"

namespace cranuad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const long double kSqrt2 = 1.41421356237309504880168872420969808L;
const long double kSqrt2OverPi = 0.79788456080286535587989211986876373L;

// erfcx(x) = exp(x^2) erfc(x) in extended precision. For x below the
// crossover the product form is exact (erfcl stays in the normal range of
// long double up to x ~ 105); beyond it the asymptotic series
// 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!!/(2x^2)^k has already converged to
// full long double precision.
long double erfcx_ld(long double x) {
  if (x < 0.0L) {
    // Only reached for mildly negative arguments in this codebase.
    return 2.0L * std::exp(x * x) - erfcx_ld(-x);
  }
  if (x < 100.0L) {
    return std::exp(x * x) * erfcl(x);
  }
  const long double inv2 = 1.0L / (2.0L * x * x);
  long double sum = 1.0L, term = 1.0L;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0L * k - 1.0L) * inv2;
    sum += term;
  }
  return sum / (x * 1.77245385090551602729816748334114518L /*sqrt(pi)*/);
}

struct StdMoments {
  long double mean;  // standardized conditional mean
  long double var;   // standardized conditional variance
  bool degenerate;
};

// Moments of a standard normal truncated to (a, b) with 0 < a < b <= inf.
// Everything is expressed relative to exp(-a^2/2), so the far tail never
// underflows: with d = exp(-(b^2-a^2)/2),
//   phi(a)/Z = sqrt(2/pi) / (erfcx(a/sqrt2) - erfcx(b/sqrt2) d).
StdMoments tail_moments(long double a, long double b) {
  const long double ea = erfcx_ld(a / kSqrt2);
  long double d = 0.0L, eb = 0.0L;
  const bool b_finite = std::isfinite(static_cast<double>(b));
  if (b_finite) {
    const long double delta = 0.5L * (b - a) * (b + a);
    d = std::exp(-delta);
    eb = erfcx_ld(b / kSqrt2);
  }
  const long double zs = ea - eb * d;
  if (!(zs > 0.0L)) return {0.0L, 0.0L, true};
  const long double u = kSqrt2OverPi / zs;   // phi(a)/Z
  const long double ud = u * d;              // phi(b)/Z
  const long double m = u - ud;
  const long double second = a * u - (b_finite ? b * ud : 0.0L);
  long double v = 1.0L + second - m * m;
  if (v < 0.0L) v = 0.0L;
  return {m, v, false};
}

// Moments for a <= 0 <= ... (interval not strictly in one tail). Plain
// double arithmetic suffices: Z has no leading-order cancellation here.
StdMoments central_moments(double a, double b) {
  const double ca = std::isfinite(a) ? 0.5 * std::erfc(a / 1.4142135623730951) : 1.0;
  const double cb = std::isfinite(b) ? 0.5 * std::erfc(b / 1.4142135623730951) : 0.0;
  const double z = ca - cb;  // P(a < u < b)
  if (!(z > 0.0)) return {0.0L, 0.0L, true};
  const double pa = std::isfinite(a) ? normal_pdf(a, 0.0, 1.0) : 0.0;
  const double pb = std::isfinite(b) ? normal_pdf(b, 0.0, 1.0) : 0.0;
  const double m = (pa - pb) / z;
  const double apa = std::isfinite(a) ? a * pa : 0.0;
  const double bpb = std::isfinite(b) ? b * pb : 0.0;
  double v = 1.0 + (apa - bpb) / z - m * m;
  if (v < 0.0) v = 0.0;
  return {m, v, false};
}

}  // namespace

TruncatedMoments trunc_gauss_moments(double lo, double hi, double mean,
                                     double var) {
  if (!(var > 0.0)) {
    throw std::invalid_argument("trunc_gauss_moments: var must be positive");
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("trunc_gauss_moments: requires lo < hi");
  }
  const double sd = std::sqrt(var);
  double a = std::isfinite(lo) ? (lo - mean) / sd : -kInf;
  double b = std::isfinite(hi) ? (hi - mean) / sd : kInf;
  if (a == -kInf && b == kInf) return {mean, var};

  // Mirror so the interval sits on the right of the mean; undone at the end.
  bool flipped = false;
  if (std::isfinite(b) && (a == -kInf || a + b < 0.0)) {
    std::swap(a, b);
    a = -a;
    b = -b;
    flipped = true;
  }

  StdMoments sm = a > 0.0
                      ? tail_moments(static_cast<long double>(a),
                                     static_cast<long double>(b))
                      : central_moments(a, b);
  if (sm.degenerate) {
    // No mass at working precision: collapse to the endpoint nearest the
    // mean with a floored variance.
    const double edge = flipped ? hi : lo;
    const double nearest = std::isfinite(edge) ? edge : (flipped ? lo : hi);
    return {nearest, var * 1e-12};
  }
  double m = static_cast<double>(sm.mean);
  if (flipped) m = -m;
  TruncatedMoments out;
  out.mean = mean + sd * m;
  out.var = std::min(var * static_cast<double>(sm.var), var);
  out.mean = std::clamp(out.mean, std::isfinite(lo) ? lo : -kInf,
                        std::isfinite(hi) ? hi : kInf);
  return out;
}

double coord_llr(double r_hat, double v_r) {
  const double v_slab = 0.5 + v_r;
  return 0.5 * std::log(v_r / v_slab) +
         0.5 * r_hat * r_hat * (1.0 / v_r - 1.0 / v_slab);
}

double bin_mass(const QuantizerSpec& spec, int index, double mean, double var) {
  const auto [lo, hi] = bin_interval(spec, index);
  const double sd = std::sqrt(var);
  double a = std::isfinite(lo) ? (lo - mean) / sd : -kInf;
  double b = std::isfinite(hi) ? (hi - mean) / sd : kInf;
  if (std::isfinite(b) && (a == -kInf || a + b < 0.0)) {
    std::swap(a, b);
    a = -a;
    b = -b;
  }
  if (a > 0.0) {
    // Z = 0.5 exp(-a^2/2) (erfcx(a/sqrt2) - erfcx(b/sqrt2) exp(-(b^2-a^2)/2))
    const long double la = a, lb = b;
    const long double ea = erfcx_ld(la / kSqrt2);
    long double tail = 0.0L;
    if (std::isfinite(b)) {
      tail = erfcx_ld(lb / kSqrt2) * std::exp(-0.5L * (lb - la) * (lb + la));
    }
    const long double z = 0.5L * std::exp(-0.5L * la * la) * (ea - tail);
    return static_cast<double>(std::max(z, 0.0L));
  }
  const double ca = std::isfinite(a) ? 0.5 * std::erfc(a / 1.4142135623730951) : 1.0;
  const double cb = std::isfinite(b) ? 0.5 * std::erfc(b / 1.4142135623730951) : 0.0;
  return std::max(ca - cb, 0.0);
}

DenseOperator::DenseOperator(Mat a) : a_(std::move(a)) {
  a_sq_ = a_.cwiseProduct(a_);
}

Vec DenseOperator::mul(const Vec& x) const { return a_ * x; }
Vec DenseOperator::mul_t(const Vec& s) const { return a_.transpose() * s; }
Vec DenseOperator::mul_sq(const Vec& v) const { return a_sq_ * v; }
Vec DenseOperator::mul_sq_t(const Vec& v) const {
  return a_sq_.transpose() * v;
}

ComplexBlockOperator::ComplexBlockOperator(const CMat& s, const Mat& gamma) {
  m_ = s.rows();
  n_ = s.cols();
  r_ = gamma.cols();
  if (gamma.rows() != n_) {
    throw std::invalid_argument("block operator: gamma must be N x R");
  }
  blocks_.reserve(r_);
  re_sq_.reserve(r_);
  im_sq_.reserve(r_);
  for (Eigen::Index r = 0; r < r_; ++r) {
    CMat block = s * gamma.col(r).asDiagonal();
    re_sq_.push_back(block.real().cwiseAbs2());
    im_sq_.push_back(block.imag().cwiseAbs2());
    blocks_.push_back(std::move(block));
  }
}

// Real coordinate layout: observation block r occupies rows [2rM, 2rM+2M)
// with (Re, Im) interleaved per sample; UE n's slot for RRH r occupies
// columns 2(nR+r) and 2(nR+r)+1.
Vec ComplexBlockOperator::mul(const Vec& x) const {
  Vec out(rows());
  CVec xr(n_), yr(m_);
  for (Eigen::Index r = 0; r < r_; ++r) {
    for (Eigen::Index n = 0; n < n_; ++n) {
      const Eigen::Index c = 2 * (n * r_ + r);
      xr[n] = cplx(x[c], x[c + 1]);
    }
    yr.noalias() = blocks_[r] * xr;
    for (Eigen::Index m = 0; m < m_; ++m) {
      out[2 * (r * m_ + m)] = yr[m].real();
      out[2 * (r * m_ + m) + 1] = yr[m].imag();
    }
  }
  return out;
}

Vec ComplexBlockOperator::mul_t(const Vec& s) const {
  Vec out(cols());
  CVec sr(m_), tr(n_);
  for (Eigen::Index r = 0; r < r_; ++r) {
    for (Eigen::Index m = 0; m < m_; ++m) {
      const Eigen::Index i = 2 * (r * m_ + m);
      sr[m] = cplx(s[i], s[i + 1]);
    }
    // lift(B)^T = lift(B^H), so the real transpose is the complex adjoint.
    tr.noalias() = blocks_[r].adjoint() * sr;
    for (Eigen::Index n = 0; n < n_; ++n) {
      const Eigen::Index c = 2 * (n * r_ + r);
      out[c] = tr[n].real();
      out[c + 1] = tr[n].imag();
    }
  }
  return out;
}

Vec ComplexBlockOperator::mul_sq(const Vec& v) const {
  Vec out(rows());
  Vec u(n_), w(n_);
  for (Eigen::Index r = 0; r < r_; ++r) {
    for (Eigen::Index n = 0; n < n_; ++n) {
      const Eigen::Index c = 2 * (n * r_ + r);
      u[n] = v[c];
      w[n] = v[c + 1];
    }
    const Vec out_re = re_sq_[r] * u + im_sq_[r] * w;
    const Vec out_im = im_sq_[r] * u + re_sq_[r] * w;
    for (Eigen::Index m = 0; m < m_; ++m) {
      out[2 * (r * m_ + m)] = out_re[m];
      out[2 * (r * m_ + m) + 1] = out_im[m];
    }
  }
  return out;
}

Vec ComplexBlockOperator::mul_sq_t(const Vec& v) const {
  Vec out(cols());
  Vec a(m_), b(m_);
  for (Eigen::Index r = 0; r < r_; ++r) {
    for (Eigen::Index m = 0; m < m_; ++m) {
      const Eigen::Index i = 2 * (r * m_ + m);
      a[m] = v[i];
      b[m] = v[i + 1];
    }
    const Vec out_re = re_sq_[r].transpose() * a + im_sq_[r].transpose() * b;
    const Vec out_im = im_sq_[r].transpose() * a + re_sq_[r].transpose() * b;
    for (Eigen::Index n = 0; n < n_; ++n) {
      const Eigen::Index c = 2 * (n * r_ + r);
      out[c] = out_re[n];
      out[c + 1] = out_im[n];
    }
  }
  return out;
}

OutputChannel make_quantized_channel(std::vector<QuantizerSpec> specs,
                                     std::vector<int> spec_index,
                                     std::vector<int> bins, double noise_var) {
  if (spec_index.size() != bins.size()) {
    throw std::invalid_argument("channel: spec_index/bins size mismatch");
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto s = static_cast<std::size_t>(spec_index[i]);
    if (s >= specs.size() || bins[i] < 0 || bins[i] >= specs[s].levels) {
      throw std::invalid_argument("channel: bin index out of range");
    }
  }
  OutputChannel ch;
  ch.noise_var = noise_var;
  ch.specs = std::move(specs);
  ch.spec_index = std::move(spec_index);
  ch.bins = std::move(bins);
  return ch;
}

OutputChannel make_unquantized_channel(Vec values, double noise_var) {
  OutputChannel ch;
  ch.noise_var = noise_var;
  ch.values = std::move(values);
  return ch;
}

GampDivergence::GampDivergence(int it)
    : std::runtime_error("gamp diverged at iteration " + std::to_string(it)),
      iteration(it) {}

GampState init_gamp_state(Eigen::Index n_coords, Eigen::Index n_obs,
                          double prior_rho) {
  GampState st;
  st.x_hat = Vec::Zero(n_coords);
  st.v_x = Vec::Constant(n_coords, 0.5 * prior_rho);
  st.s_hat = Vec::Zero(n_obs);
  st.v_s = Vec::Zero(n_obs);
  st.p_hat = Vec::Zero(n_obs);
  st.v_p = Vec::Zero(n_obs);
  st.r_hat = Vec::Zero(n_coords);
  st.v_r = Vec::Zero(n_coords);
  st.rho_hat = Vec::Constant(n_coords, prior_rho);
  st.iter = 0;
  return st;
}

void output_update(const OutputChannel& ch, const Vec& p_hat, const Vec& v_p,
                   Vec& s_hat, Vec& v_s) {
  const auto n = ch.size();
  s_hat.resize(n);
  v_s.resize(n);
  if (ch.quantized()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = v_p[i] + ch.noise_var;
      const auto& spec = ch.specs[ch.spec_index[i]];
      const auto [lo, hi] = bin_interval(spec, ch.bins[i]);
      const auto tm = trunc_gauss_moments(lo, hi, p_hat[i], v);
      s_hat[i] = (tm.mean - p_hat[i]) / v;
      v_s[i] = std::max((1.0 - tm.var / v) / v, 0.0);
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = v_p[i] + ch.noise_var;
      s_hat[i] = (ch.values[i] - p_hat[i]) / v;
      v_s[i] = 1.0 / v;
    }
  }
}

std::pair<double, double> bg_denoise(double r_hat, double v_r, double rho,
                                     double llr_clamp) {
  if (rho <= 0.0) return {0.0, 0.0};
  const double g = 0.5 / (0.5 + v_r);
  double pi = 1.0;
  if (rho < 1.0) {
    const double t = log_odds(rho) + coord_llr(r_hat, v_r);
    pi = logistic(std::clamp(t, -llr_clamp, llr_clamp));
  }
  const double cond_mean = g * r_hat;
  const double x_hat = pi * cond_mean;
  const double second = pi * (g * v_r + cond_mean * cond_mean);
  return {x_hat, std::max(second - x_hat * x_hat, 0.0)};
}

void input_denoise(const Vec& r_hat, const Vec& v_r, const Vec& rho_hat,
                   const GampOptions& opts, Vec& x_hat, Vec& v_x) {
  const auto n = r_hat.size();
  x_hat.resize(n);
  v_x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto [m, v] = bg_denoise(r_hat[j], v_r[j], rho_hat[j], opts.llr_clamp);
    x_hat[j] = m;
    v_x[j] = v;
  }
}

namespace {
inline void clamp_vec(Vec& v, double lo, double hi) {
  v = v.cwiseMax(lo).cwiseMin(hi);
}
}  // namespace

void gamp_iterate(GampState& st, const LinearOperator& op,
                  const OutputChannel& ch, const GampOptions& opts) {
  const double beta = opts.damping;

  // Factor update, linear step.
  st.v_p = op.mul_sq(st.v_x);
  clamp_vec(st.v_p, opts.var_floor, opts.var_ceil);
  st.p_hat = op.mul(st.x_hat) - st.v_p.cwiseProduct(st.s_hat);

  // Factor update, nonlinear step, damped on s_hat.
  Vec s_new, v_s_new;
  output_update(ch, st.p_hat, st.v_p, s_new, v_s_new);
  st.s_hat = beta * s_new + (1.0 - beta) * st.s_hat;
  st.v_s = std::move(v_s_new);

  // Variable update, linear step.
  const Vec denom = op.mul_sq_t(st.v_s);
  st.v_r = denom.cwiseMax(1.0 / opts.var_ceil).cwiseInverse();
  clamp_vec(st.v_r, opts.var_floor, opts.var_ceil);
  st.r_hat = st.x_hat + st.v_r.cwiseProduct(op.mul_t(st.s_hat));

  // Variable update, nonlinear step, damped on x_hat.
  Vec x_new, v_x_new;
  input_denoise(st.r_hat, st.v_r, st.rho_hat, opts, x_new, v_x_new);
  st.x_hat = beta * x_new + (1.0 - beta) * st.x_hat;
  st.v_x = std::move(v_x_new);
  clamp_vec(st.v_x, opts.var_floor, opts.var_ceil);

  ++st.iter;
  if (!st.x_hat.allFinite() || !st.v_x.allFinite() || !st.s_hat.allFinite() ||
      !st.v_s.allFinite()) {
    throw GampDivergence(st.iter);
  }
}

GampState gamp_run(const LinearOperator& op, const OutputChannel& ch,
                   double prior_rho, const GampOptions& opts, bool* converged) {
  if (opts.max_iters < 1) {
    throw std::invalid_argument("gamp: max_iters must be >= 1");
  }
  GampState st = init_gamp_state(op.cols(), op.rows(), prior_rho);
  if (converged) *converged = false;
  Vec x_prev = st.x_hat;
  for (int t = 0; t < opts.max_iters; ++t) {
    gamp_iterate(st, op, ch, opts);
    const double residual =
        (st.x_hat - x_prev).norm() / std::max(st.x_hat.norm(), 1e-12);
    if (opts.trace) {
      *opts.trace << st.iter << ',' << residual << ',' << st.rho_hat.mean()
                  << '\n';
    }
    if (residual < opts.tol) {
      if (converged) *converged = true;
      break;
    }
    x_prev = st.x_hat;
  }
  return st;
}

}  // namespace cranuad
