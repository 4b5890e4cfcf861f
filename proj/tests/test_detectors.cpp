// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "cranuad/detectors.hpp"
#include "cranuad/mathutil.hpp"
#include "cranuad/oracle.hpp"
#include "cranuad/rng.hpp"

using namespace cranuad;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("threshold test extremes and tie rule") {
  Vec llrs(2);
  llrs << 0.5, -0.2;
  const auto all = threshold_test(llrs, -kInf, Scheme::QF);
  CHECK(all.lambda_hat.sum() == 2);
  const auto none = threshold_test(llrs, kInf, Scheme::QF);
  CHECK(none.lambda_hat.sum() == 0);
  const auto tie = threshold_test(llrs, 0.5, Scheme::QF);
  CHECK(tie.lambda_hat[0] == 1);  // equality decides active
  CHECK(tie.lambda_hat[1] == 0);
}

TEST_CASE("fronthaul budget accounting") {
  const int M = 128, N = 256;
  for (int b : {2, 4, 6, 8, 10}) {
    const FronthaulBudget budget{b};
    CHECK(budget.sample_levels() == 1 << (b / 2));
    CHECK(budget.qf_bits_per_slot(M) == static_cast<long>(M) * b);
    CHECK(budget.dtf_bits_per_slot(M, N) <= static_cast<long>(M) * b);
    CHECK(budget.dtf_bits_per_slot(M, N) ==
          static_cast<long>(N) * (static_cast<long>(M) * b / N));
  }
  CHECK_THROWS_AS(FronthaulBudget{3}.sample_levels(), std::invalid_argument);
}

TEST_CASE("QF converges to the unquantized detector as b grows") {
  const SystemConfig cfg = make_dense_config(32, 16, 2, 0.25, 16.0, 0.0);
  auto rng = make_rng(73, SeedStream::Instance, 0);
  const Scenario sc = draw_scenario(cfg, rng);
  // Convergence to the unquantized LLRs requires that no sample clips on the
  // 3-sigma grid; clipped samples keep a b-independent information loss.
  const double sigma = analytic_sample_sigma(cfg.p, cfg.gamma.col(0), cfg.Es,
                                             cfg.M, sc.sigma_v2);
  REQUIRE(sc.W.real().cwiseAbs().maxCoeff() < 3.0 * sigma);
  REQUIRE(sc.W.imag().cwiseAbs().maxCoeff() < 3.0 * sigma);
  GampOptions opts;
  opts.max_iters = 100;
  opts.tol = 1e-8;
  const Vec ideal = qf_detect_unquantized(sc, cfg, opts).llr;
  double prev_gap = kInf;
  double gap32 = kInf;
  for (int b : {4, 8, 16, 32}) {
    const Vec got = qf_detect(sc, cfg, b, opts).llr;
    const double gap = (got - ideal).cwiseAbs().maxCoeff();
    if (b > 4) CHECK(gap < prev_gap);
    prev_gap = gap;
    gap32 = gap;
  }
  CHECK(gap32 < 0.05);
}

TEST_CASE("null scenario at high SNR never accumulates strong evidence") {
  const SystemConfig cfg = make_dense_config(24, 16, 2, 0.2, 16.0, 20.0);
  auto rng = make_rng(71, SeedStream::Instance, 1);
  CMat s = gen_signatures(cfg.N, cfg.M, cfg.Es, rng);
  CMat h = CMat::Ones(cfg.N, cfg.R);
  const Scenario sc =
      synthesize_rx(cfg, std::move(s), IVec::Zero(cfg.N), std::move(h), rng);
  const PosteriorSummary ps = qf_detect(sc, cfg, 8);
  CHECK(ps.llr.maxCoeff() < log_odds(cfg.p) + 2.0);
}

TEST_CASE("DtF local detection is deterministic across identical RRHs") {
  const SystemConfig cfg = make_dense_config(12, 8, 2, 0.25, 8.0, 3.0);
  auto rng = make_rng(72, SeedStream::Instance, 2);
  Scenario sc = draw_scenario(cfg, rng);
  sc.W.col(1) = sc.W.col(0);  // same observation, same gains
  const Mat locals = dtf_local_all(sc, cfg);
  CHECK((locals.row(0) - locals.row(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("orthogonal signatures, lone active user dominates locally") {
  const int M = 4;
  const SystemConfig cfg = make_dense_config(2, M, 1, 0.25, 4.0, 4000.0);
  CMat s = CMat::Zero(M, 2);
  s(0, 0) = cplx(2.0, 0.0);  // ||s_n||^2 = 4 = Es, exactly orthogonal pair
  s(1, 1) = cplx(0.0, 2.0);
  IVec lambda(2);
  lambda << 1, 0;
  auto rng = make_rng(73, SeedStream::Instance, 3);
  const Scenario sc =
      synthesize_rx(cfg, s, lambda, CMat::Ones(2, 1), rng);
  GampOptions opts;
  opts.max_iters = 100;
  const Vec local =
      dtf_local(sc.W.col(0), sc.S, cfg.gamma.col(0), cfg.p, sc.sigma_v2, opts);
  CHECK(local[0] > local[1]);
  // The exact posterior agrees on the ordering.
  const Vec exact =
      exact_llr_unquantized(sc.S, cfg.gamma, std::max(sc.sigma_v2, 1e-6),
                            sc.W, cfg.p);
  CHECK(exact[0] > exact[1]);
}

TEST_CASE("fine fusion quantizer reproduces the local LLRs") {
  Mat locals(1, 4);
  locals << -3.2, 0.7, 11.9, -20.4;
  const auto fine = make_uniform_quantizer(1 << 20, -50.0, 50.0);
  const Vec fused = dtf_fuse(locals, fine);
  for (int n = 0; n < 4; ++n) {
    CHECK(std::abs(fused[n] - locals(0, n)) <= fine.step / 2.0 + 1e-12);
  }
}

TEST_CASE("opposite local LLRs cancel under a symmetric quantizer") {
  Mat locals(2, 1);
  locals << 0.6, -0.6;
  const auto spec = make_uniform_quantizer(4, -2.0, 2.0);
  CHECK(dtf_fuse(locals, spec)[0] == 0.0);
}

TEST_CASE("fusion is invariant to the RRH order") {
  Mat locals(3, 2);
  locals << 0.4, -1.7, 2.2, 0.9, -5.0, 0.1;
  const auto spec = make_uniform_quantizer(8, -6.0, 6.0);
  const Vec base = dtf_fuse(locals, spec);
  Mat shuffled(3, 2);
  shuffled.row(0) = locals.row(2);
  shuffled.row(1) = locals.row(0);
  shuffled.row(2) = locals.row(1);
  CHECK((dtf_fuse(shuffled, spec) - base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("quantized detector ranks UEs like the sampled reference") {
  // Stochastic reference (importance sampling); rank agreement only.
  const SystemConfig cfg = make_dense_config(4, 8, 1, 0.3, 8.0, 5.0);
  const int bits = 4;
  double spearman_sum = 0.0;
  const int instances = 4;
  for (int k = 0; k < instances; ++k) {
    auto rng = make_rng(310 + k, SeedStream::Instance, 5);
    const Scenario sc = draw_scenario(cfg, rng);

    const double sigma = analytic_sample_sigma(cfg.p, cfg.gamma.col(0),
                                               cfg.Es, cfg.M, sc.sigma_v2);
    const QuantizerSpec spec = design_sample_quantizer(bits, sigma);
    std::vector<int> spec_index(2 * cfg.M, 0);
    std::vector<int> bins(2 * cfg.M);
    for (int m = 0; m < cfg.M; ++m) {
      bins[2 * m] = quantize(spec, sc.W(m, 0).real());
      bins[2 * m + 1] = quantize(spec, sc.W(m, 0).imag());
    }
    const Vec reference =
        sampled_llr_quantized(sc.S, cfg.gamma, sc.sigma_v2, {spec}, spec_index,
                              bins, cfg.p, 50000, 991 + k);
    GampOptions opts;
    opts.max_iters = 150;
    const Vec detected = qf_detect(sc, cfg, bits, opts).llr;
    // Spearman over 4 UEs: count concordant pairs by rank comparison.
    int concordant = 0, pairs = 0;
    for (int i = 0; i < cfg.N; ++i) {
      for (int j = i + 1; j < cfg.N; ++j) {
        ++pairs;
        concordant += (detected[i] < detected[j]) ==
                              (reference[i] < reference[j])
                          ? 1
                          : 0;
      }
    }
    spearman_sum += static_cast<double>(concordant) / pairs;
  }
  CHECK(spearman_sum / instances >= 0.8);
}

TEST_CASE("QF rejects odd bit budgets, DtF fusion requires calibration") {
  const SystemConfig cfg = make_dense_config(4, 4, 1, 0.3, 4.0, 0.0);
  auto rng = make_rng(74, SeedStream::Instance, 4);
  const Scenario sc = draw_scenario(cfg, rng);
  CHECK_THROWS_AS(qf_detect(sc, cfg, 3), std::invalid_argument);
  CHECK_THROWS_AS(dtf_fuse(Mat::Zero(1, 4), QuantizerSpec{}),
                  std::invalid_argument);
}
