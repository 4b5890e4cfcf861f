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
#include "cranuad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>

#include "cranuad/mathutil.hpp"

namespace cranuad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log N(w; 0, Sigma) for a circularly-symmetric complex Gaussian, through a
// Cholesky factor. Returns the log-density and a crude condition estimate.
std::pair<double, double> complex_gauss_logpdf(const CMat& sigma,
                                               const CVec& w) {
  const Eigen::LLT<CMat> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("oracle: covariance not positive definite");
  }
  const CMat l = llt.matrixL();
  double logdet = 0.0;
  double dmin = kInf, dmax = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    logdet += 2.0 * std::log(d);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  const CVec y = l.triangularView<Eigen::Lower>().solve(w);
  const double quad = y.squaredNorm();
  const double m = static_cast<double>(w.size());
  const double cond = (dmax / dmin) * (dmax / dmin);
  return {-m * std::log(M_PI) - logdet - quad, cond};
}

double logsumexp(const std::vector<double>& v) {
  double mx = -kInf;
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

double logmeanexp(const std::vector<double>& v) {
  return logsumexp(v) - std::log(static_cast<double>(v.size()));
}

}  // namespace

ExactPosterior exact_posterior_unquantized(const CMat& s, const Mat& gamma,
                                           double sigma_v2, const CMat& w,
                                           double p) {
  const auto M = s.rows();
  const auto N = s.cols();
  const auto R = gamma.cols();
  if (N > 16) {
    throw std::invalid_argument(
        "oracle: pattern enumeration limited to N <= 16");
  }
  if (gamma.rows() != N || w.rows() != M || w.cols() != R) {
    throw std::invalid_argument("oracle: dimension mismatch");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("oracle: p must lie in (0,1)");
  }

  ExactPosterior out;
  const std::size_t patterns = std::size_t{1} << N;
  out.pattern_logpost.resize(patterns);
  const double lp1 = std::log(p), lp0 = std::log1p(-p);

  for (std::size_t mask = 0; mask < patterns; ++mask) {
    double logpost = 0.0;
    int actives = 0;
    for (Eigen::Index r = 0; r < R; ++r) {
      CMat sigma = sigma_v2 * CMat::Identity(M, M);
      for (Eigen::Index n = 0; n < N; ++n) {
        if (mask & (std::size_t{1} << n)) {
          const double g2 = gamma(n, r) * gamma(n, r);
          sigma.noalias() += g2 * s.col(n) * s.col(n).adjoint();
        }
      }
      const auto [logpdf, cond] = complex_gauss_logpdf(sigma, w.col(r));
      if (cond > 1e12) {
        if (out.ill_conditioned == 0) {
          std::cerr << "oracle: covariance condition estimate above 1e12\n";
        }
        ++out.ill_conditioned;
      }
      logpost += logpdf;
    }
    for (Eigen::Index n = 0; n < N; ++n) {
      actives += (mask >> n) & 1u;
    }
    logpost += actives * lp1 + (N - actives) * lp0;
    out.pattern_logpost[mask] = logpost;
  }

  out.llr.resize(N);
  std::vector<double> on, off;
  on.reserve(patterns / 2);
  off.reserve(patterns / 2);
  for (Eigen::Index n = 0; n < N; ++n) {
    on.clear();
    off.clear();
    for (std::size_t mask = 0; mask < patterns; ++mask) {
      if (mask & (std::size_t{1} << n)) {
        on.push_back(out.pattern_logpost[mask]);
      } else {
        off.push_back(out.pattern_logpost[mask]);
      }
    }
    out.llr[n] = logsumexp(on) - logsumexp(off);
  }
  return out;
}

Vec exact_llr_unquantized(const CMat& s, const Mat& gamma, double sigma_v2,
                          const CMat& w, double p) {
  return exact_posterior_unquantized(s, gamma, sigma_v2, w, p).llr;
}

Vec sampled_llr_quantized(const CMat& s, const Mat& gamma, double sigma_v2,
                          const std::vector<QuantizerSpec>& specs,
                          const std::vector<int>& spec_index,
                          const std::vector<int>& bins, double p,
                          long samples, std::uint64_t seed) {
  const auto M = s.rows();
  const auto N = s.cols();
  const auto R = gamma.cols();
  if (N > 12) {
    throw std::invalid_argument("sampled oracle: N <= 12 (2^N pattern sweep)");
  }
  if (static_cast<Eigen::Index>(bins.size()) != 2 * R * M ||
      bins.size() != spec_index.size()) {
    throw std::invalid_argument("sampled oracle: bin vector must be 2RM long");
  }
  const double noise = sigma_v2 / 2.0;  // per real component

  // log p(bins | x) for one fading draw: product of per-component masses.
  const auto loglik_given_x = [&](const CMat& x) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < R; ++r) {
      const CVec z = s * (gamma.col(r).asDiagonal() * x.col(r));
      for (Eigen::Index m = 0; m < M; ++m) {
        const std::size_t i = 2 * (static_cast<std::size_t>(r) * M + m);
        const auto& spec_re = specs[spec_index[i]];
        const auto& spec_im = specs[spec_index[i + 1]];
        acc += std::log(
            std::max(bin_mass(spec_re, bins[i], z[m].real(), noise), 1e-300));
        acc += std::log(std::max(
            bin_mass(spec_im, bins[i + 1], z[m].imag(), noise), 1e-300));
      }
    }
    return acc;
  };

  const std::size_t patterns = std::size_t{1} << N;
  std::vector<double> logpost(patterns);
  const double lp1 = std::log(p), lp0 = std::log1p(-p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::vector<double> draw_logliks(samples);
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    int actives = 0;
    for (Eigen::Index n = 0; n < N; ++n) actives += (mask >> n) & 1u;
    for (long k = 0; k < samples; ++k) {
      CMat x = CMat::Zero(N, R);
      for (Eigen::Index n = 0; n < N; ++n) {
        if (mask & (std::size_t{1} << n)) {
          for (Eigen::Index r = 0; r < R; ++r) {
            x(n, r) = cplx(g(rng), g(rng));
          }
        }
      }
      draw_logliks[k] = loglik_given_x(x);
    }
    logpost[mask] =
        logmeanexp(draw_logliks) + actives * lp1 + (N - actives) * lp0;
  }

  Vec llr(N);
  std::vector<double> on, off;
  for (Eigen::Index n = 0; n < N; ++n) {
    on.clear();
    off.clear();
    for (std::size_t mask = 0; mask < patterns; ++mask) {
      (mask & (std::size_t{1} << n) ? on : off).push_back(logpost[mask]);
    }
    llr[n] = logsumexp(on) - logsumexp(off);
  }
  return llr;
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK values).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, integral, error;
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  double kronrod = 0.0, gauss = 0.0;
  for (int i = 0; i < 7; ++i) {
    kronrod += kWgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) gauss += kWg[i / 2] * (fv[i] + fv[14 - i]);
  }
  kronrod += kWgk[7] * fv[7];
  gauss += kWg[3] * fv[7];
  const double integral = kronrod * h;
  const double error = std::abs((kronrod - gauss) * h);
  return {a, b, integral, error};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol, double rel_tol) {
  if (!(hi > lo)) return 0.0;
  // Seed with panels of width <= 2 so a narrow feature inside a wide range
  // cannot slip between the nodes of the first rule evaluation.
  const int panels =
      std::clamp(static_cast<int>(std::ceil((hi - lo) / 2.0)), 1, 256);
  std::vector<Segment> segs;
  segs.reserve(panels);
  for (int i = 0; i < panels; ++i) {
    const double a = lo + (hi - lo) * i / panels;
    const double b = lo + (hi - lo) * (i + 1) / panels;
    segs.push_back(gk15(f, a, b));
  }
  for (int round = 0; round < 2000; ++round) {
    long double total = 0.0L, err = 0.0L;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].integral;
      err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    const double bound =
        std::max(abs_tol, rel_tol * std::abs(static_cast<double>(total)));
    if (static_cast<double>(err) <= bound) return static_cast<double>(total);
    const Segment w = segs[worst];
    const double mid = 0.5 * (w.a + w.b);
    if (!(mid > w.a && mid < w.b)) {
      // Interval exhausted at machine precision; accept what we have.
      return static_cast<double>(total);
    }
    segs[worst] = gk15(f, w.a, mid);
    segs.push_back(gk15(f, mid, w.b));
  }
  throw std::runtime_error("integrate: refinement did not converge");
}

TruncatedMoments trunc_moments_quadrature(double lo, double hi, double mean,
                                          double var) {
  if (!(var > 0.0) || !(lo < hi)) {
    throw std::invalid_argument("trunc quadrature: bad interval or variance");
  }
  const double sd = std::sqrt(var);
  double a = std::isfinite(lo) ? (lo - mean) / sd : -kInf;
  double b = std::isfinite(hi) ? (hi - mean) / sd : kInf;
  bool flipped = false;
  if (std::isfinite(b) && (a == -kInf || a + b < 0.0)) {
    std::swap(a, b);
    a = -a;
    b = -b;
    flipped = true;
  }

  double m_std = 0.0, v_std = 0.0;
  if (a > 0.0) {
    // Tilt by exp(-a^2/2): integrate g(t) = exp(-a t - t^2/2) over the offset
    // t = u - a, which stays in normal double range arbitrarily far out.
    const double t_cut = -a + std::sqrt(a * a + 1520.0);  // g(t_cut) ~ e^-760
    const double t_max = std::min(std::isfinite(b) ? b - a : kInf, t_cut);
    const auto g = [a](double t) { return std::exp(-t * (a + 0.5 * t)); };
    const double i0 = integrate(g, 0.0, t_max);
    const double i1 = integrate([&](double t) { return t * g(t); }, 0.0, t_max);
    const double i2 =
        integrate([&](double t) { return t * t * g(t); }, 0.0, t_max);
    if (!(i0 > 0.0)) throw std::runtime_error("trunc quadrature: zero mass");
    m_std = a + i1 / i0;
    v_std = i2 / i0 - (i1 / i0) * (i1 / i0);
  } else {
    const double a_cut = std::max(a, -42.0);
    const double b_cut = std::min(b, 42.0);
    const auto phi = [](double u) { return normal_pdf(u, 0.0, 1.0); };
    const double z = integrate(phi, a_cut, b_cut);
    if (!(z > 0.0)) throw std::runtime_error("trunc quadrature: zero mass");
    const double m1 =
        integrate([&](double u) { return u * phi(u); }, a_cut, b_cut);
    const double m2 =
        integrate([&](double u) { return u * u * phi(u); }, a_cut, b_cut);
    m_std = m1 / z;
    v_std = m2 / z - m_std * m_std;
  }
  if (flipped) m_std = -m_std;
  return {mean + sd * m_std, var * v_std};
}

std::pair<double, double> bg_denoise_quadrature(double r_hat, double v_r,
                                                double rho) {
  if (rho <= 0.0) return {0.0, 0.0};
  // Slab posterior factor: phi(x; 0, 0.5) phi(r - x; 0, v_r). The integrand
  // is offset by its peak value so extreme r stays representable.
  const double g = 0.5 / (0.5 + v_r);
  const double x_peak = g * r_hat;
  const double peak_log = normal_logpdf(x_peak, 0.0, 0.5) +
                          normal_logpdf(r_hat - x_peak, 0.0, v_r);
  const auto f = [&](double x) {
    return std::exp(normal_logpdf(x, 0.0, 0.5) +
                    normal_logpdf(r_hat - x, 0.0, v_r) - peak_log);
  };
  const double width = 14.0 * std::sqrt(g * v_r);
  const double lo = x_peak - width, hi = x_peak + width;
  const double s0 = integrate(f, lo, hi);
  const double s1 = integrate([&](double x) { return x * f(x); }, lo, hi);
  const double s2 = integrate([&](double x) { return x * x * f(x); }, lo, hi);
  double spike_over_slab = 0.0;
  if (rho < 1.0) {
    const double log_spike = std::log1p(-rho) + normal_logpdf(r_hat, 0.0, v_r);
    spike_over_slab = std::exp(log_spike - std::log(rho) - peak_log);
  }
  const double denom = s0 + spike_over_slab;
  const double mean = s1 / denom;
  const double second = s2 / denom;
  return {mean, second - mean * mean};
}

double gauss_mass_quadrature(double lo, double hi, double mean, double var) {
  const double sd = std::sqrt(var);
  double a = std::isfinite(lo) ? (lo - mean) / sd : -kInf;
  double b = std::isfinite(hi) ? (hi - mean) / sd : kInf;
  if (std::isfinite(b) && (a == -kInf || a + b < 0.0)) {
    std::swap(a, b);
    a = -a;
    b = -b;
  }
  if (a > 0.0) {
    // Mass = phi(a) * integral of the tilted tail integrand; phi(a) is free
    // to underflow gracefully where the true mass is below double range.
    const double t_cut = -a + std::sqrt(a * a + 1520.0);
    const double t_max = std::min(std::isfinite(b) ? b - a : kInf, t_cut);
    const double i0 = integrate(
        [a](double t) { return std::exp(-t * (a + 0.5 * t)); }, 0.0, t_max);
    return normal_pdf(a, 0.0, 1.0) * i0;
  }
  const double a_cut = std::max(a, -42.0);
  const double b_cut = std::min(b, 42.0);
  return integrate([](double u) { return normal_pdf(u, 0.0, 1.0); }, a_cut,
                   b_cut);
}

}  // namespace cranuad
