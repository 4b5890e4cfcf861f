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
#include "cranuad/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "cranuad/detectors.hpp"
#include "cranuad/mathutil.hpp"
#include "cranuad/oracle.hpp"
#include "cranuad/rng.hpp"

namespace cranuad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

// Random interval relative to N(mean, var): central, one- and two-sided tail
// cases, with tail offsets reaching 40 standardized deviations.
std::pair<double, double> random_interval(std::mt19937_64& rng, double mean,
                                          double sd, int style) {
  switch (style % 4) {
    case 0: {  // central bin
      const double a = mean + sd * uniform(rng, -4.0, 4.0);
      return {a, a + sd * log_uniform(rng, 0.01, 8.0)};
    }
    case 1: {  // finite bin deep in one tail
      const double off = uniform(rng, 8.0, 40.0);
      const double width = log_uniform(rng, 0.01, 4.0);
      if (uniform(rng, 0.0, 1.0) < 0.5) {
        return {mean + sd * off, mean + sd * (off + width)};
      }
      return {mean - sd * (off + width), mean - sd * off};
    }
    case 2: {  // semi-infinite tail
      const double off = uniform(rng, 0.0, 40.0);
      if (uniform(rng, 0.0, 1.0) < 0.5) return {mean + sd * off, kInf};
      return {-kInf, mean - sd * off};
    }
    default: {  // wide straddling interval
      return {mean - sd * uniform(rng, 0.0, 45.0),
              mean + sd * uniform(rng, 0.0, 45.0) + sd * 1e-3};
    }
  }
}

}  // namespace

double check_trunc_moments(int points, std::uint64_t seed) {
  auto rng = make_rng(seed, SeedStream::Instance, 1);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double var = log_uniform(rng, 1e-2, 1e2);
    const double mean = uniform(rng, -10.0, 10.0);
    const auto [lo, hi] = random_interval(rng, mean, std::sqrt(var), i);
    const auto got = trunc_gauss_moments(lo, hi, mean, var);
    const auto ref = trunc_moments_quadrature(lo, hi, mean, var);
    worst = std::max(worst, std::abs(got.mean - ref.mean));
    worst = std::max(worst, std::abs(got.var - ref.var));
  }
  return worst;
}

double check_denoiser(int points, std::uint64_t seed) {
  auto rng = make_rng(seed, SeedStream::Instance, 2);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    double rho = uniform(rng, 0.0, 1.0);
    if (i % 7 == 0) rho = 1e-6;
    if (i % 7 == 1) rho = 1.0 - 1e-6;
    const double v_r = log_uniform(rng, 1e-3, 1e2);
    const double scale = std::sqrt(0.5 + v_r);
    const double r_hat = i % 3 == 0 ? uniform(rng, -40.0, 40.0) * scale
                                    : uniform(rng, -5.0, 5.0) * scale;
    const auto [m, v] = bg_denoise(r_hat, v_r, rho);
    const auto [mq, vq] = bg_denoise_quadrature(r_hat, v_r, rho);
    worst = std::max(worst, std::abs(m - mq));
    worst = std::max(worst, std::abs(v - vq));
  }
  return worst;
}

double check_coord_llr(int points, std::uint64_t seed) {
  auto rng = make_rng(seed, SeedStream::Instance, 3);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double v_r = log_uniform(rng, 1e-2, 1e2);
    const double r_hat = uniform(rng, -40.0, 40.0) * std::sqrt(0.5 + v_r);
    const double got = coord_llr(r_hat, v_r);
    const double ref =
        normal_logpdf(r_hat, 0.0, 0.5 + v_r) - normal_logpdf(r_hat, 0.0, v_r);
    worst = std::max(worst, std::abs(got - ref));
  }
  return worst;
}

double check_bin_masses(int points, std::uint64_t seed) {
  auto rng = make_rng(seed, SeedStream::Instance, 4);
  double worst = 0.0;
  int evaluated = 0;
  while (evaluated < points) {
    std::uniform_int_distribution<int> level_bits(1, 6);
    const double sigma = log_uniform(rng, 0.1, 10.0);
    const auto spec = make_uniform_quantizer(1 << level_bits(rng),
                                             -3.0 * sigma, 3.0 * sigma);
    const double var = log_uniform(rng, 1e-2, 1e2);
    double z = uniform(rng, -5.0, 5.0) * sigma;
    if (evaluated % 3 == 0) {
      // Push the conditional mean far outside the grid.
      z = (uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0) *
          (3.0 * sigma + uniform(rng, 8.0, 40.0) * std::sqrt(var));
    }
    double total = 0.0;
    for (int bin = 0; bin < spec.levels; ++bin) {
      const double got = bin_mass(spec, bin, z, var);
      const auto [lo, hi] = bin_interval(spec, bin);
      const double ref = gauss_mass_quadrature(lo, hi, z, var);
      worst = std::max(worst, std::abs(got - ref));
      total += got;
      ++evaluated;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

double spearman(const Vec& a, const Vec& b) {
  const auto ranks = [](const Vec& v) {
    const auto n = v.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index i, Eigen::Index j) { return v[i] < v[j]; });
    Vec rank(n);
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * (i + j);  // average rank for ties
      for (Eigen::Index k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    return rank;
  };
  const Vec ra = ranks(a), rb = ranks(b);
  const Vec ca = ra.array() - ra.mean();
  const Vec cb = rb.array() - rb.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (denom == 0.0) return 0.0;
  return ca.dot(cb) / denom;
}

double auc_score(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  // Mann-Whitney statistic with average ranks for ties.
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] < scores[j];
  });
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0, i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  const double u = rank_sum_pos - 0.5 * n_pos * (n_pos + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

EnumerationAgreement check_enumeration(int instances, std::uint64_t seed,
                                       const GampOptions& opts) {
  std::vector<double> gamp_scores, oracle_scores;
  std::vector<int> labels;
  double spearman_sum = 0.0;
  for (int k = 0; k < instances; ++k) {
    const int R = (k % 2) + 1;
    const SystemConfig sys = make_dense_config(8, 16, R, 0.25, 16.0, 0.0);
    auto rng = make_rng(seed, SeedStream::Instance,
                        1000 + static_cast<std::uint64_t>(k));
    const Scenario sc = draw_scenario(sys, rng);
    const Vec gamp_llr = qf_detect_unquantized(sc, sys, opts).llr;
    const Vec oracle_llr =
        exact_llr_unquantized(sc.S, sys.gamma, sc.sigma_v2, sc.W, sys.p);
    spearman_sum += spearman(gamp_llr, oracle_llr);
    for (int n = 0; n < sys.N; ++n) {
      gamp_scores.push_back(gamp_llr[n]);
      oracle_scores.push_back(oracle_llr[n]);
      labels.push_back(sc.lambda[n]);
    }
  }
  EnumerationAgreement out;
  out.spearman_mean = spearman_sum / instances;
  out.auc_gamp = auc_score(gamp_scores, labels);
  out.auc_oracle = auc_score(oracle_scores, labels);
  return out;
}

std::vector<CheckResult> run_oracle_checks(int points, int instances,
                                           std::uint64_t seed) {
  std::vector<CheckResult> results;
  const auto scalar = [&](const std::string& name, double worst) {
    std::ostringstream detail;
    detail << "max abs err " << worst << " (tol 1e-8)";
    results.push_back({name, worst <= 1e-8, detail.str()});
  };
  scalar("trunc_gauss_moments vs quadrature",
         check_trunc_moments(points, seed));
  scalar("input_denoise vs quadrature", check_denoiser(points, seed));
  scalar("coord_llr vs density evaluation", check_coord_llr(points, seed));
  scalar("bin masses vs quadrature", check_bin_masses(points, seed));

  GampOptions opts;
  opts.tol = 1e-8;
  opts.max_iters = 200;
  const EnumerationAgreement agree = check_enumeration(instances, seed, opts);
  {
    std::ostringstream detail;
    detail << "mean spearman " << agree.spearman_mean << " (needs >= 0.9)";
    results.push_back(
        {"H-GAMP vs enumeration rank order", agree.spearman_mean >= 0.9,
         detail.str()});
  }
  {
    const double diff = std::abs(agree.auc_gamp - agree.auc_oracle);
    std::ostringstream detail;
    detail << "auc " << agree.auc_gamp << " vs oracle " << agree.auc_oracle
           << " (|diff| <= 0.05)";
    results.push_back({"H-GAMP vs enumeration AUC", diff <= 0.05,
                       detail.str()});
  }
  return results;
}

}  // namespace cranuad
