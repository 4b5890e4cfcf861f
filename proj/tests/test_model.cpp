// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "cranuad/model.hpp"
#include "cranuad/rng.hpp"

using namespace cranuad;

TEST_CASE("signature energy matches the budget in expectation") {
  auto rng = make_rng(42, SeedStream::Instance, 0);
  const int N = 4, M = 16;
  const double Es = 16.0;
  double energy_sum = 0.0;
  int count = 0;
  while (count < 100000) {
    const CMat s = gen_signatures(N, M, Es, rng);
    for (int n = 0; n < N; ++n) energy_sum += s.col(n).squaredNorm();
    count += N;
  }
  CHECK(energy_sum / count == doctest::Approx(Es).epsilon(0.02));
}

TEST_CASE("single-entry signature variance") {
  auto rng = make_rng(1, SeedStream::Instance, 0);
  double sum = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    sum += std::norm(gen_signatures(1, 1, 4.0, rng)(0, 0));
  }
  CHECK(sum / draws == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("signature generation validates its arguments") {
  auto rng = make_rng(1, SeedStream::Instance, 0);
  CHECK_THROWS_AS(gen_signatures(0, 4, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(gen_signatures(4, 0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(gen_signatures(4, 4, -1.0, rng), std::invalid_argument);
}

TEST_CASE("activity draws are Bernoulli(p)") {
  auto rng = make_rng(9, SeedStream::Instance, 0);
  CHECK_THROWS_AS(gen_activity(8, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(gen_activity(8, 1.0, rng), std::invalid_argument);
  double count = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) count += gen_activity(64, 0.25, rng).sum();
  CHECK(count / draws == doctest::Approx(16.0).epsilon(0.5 / 16.0));
}

TEST_CASE("all-inactive scenario receives pure noise") {
  const SystemConfig cfg = make_dense_config(6, 8, 2, 0.3, 8.0, 0.0);
  auto rng = make_rng(3, SeedStream::Instance, 0);
  CMat s = gen_signatures(cfg.N, cfg.M, cfg.Es, rng);
  CMat h = CMat::Ones(cfg.N, cfg.R);
  const Scenario sc =
      synthesize_rx(cfg, std::move(s), IVec::Zero(cfg.N), std::move(h), rng);
  CHECK((sc.W - sc.V).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noiseless single user receives its signature") {
  // snr_db large enough that Es/(M*10^(snr/10)) underflows to exactly zero.
  const SystemConfig cfg = make_dense_config(1, 8, 1, 0.5, 8.0, 4000.0);
  CHECK(cfg.noise_variance() == 0.0);
  auto rng = make_rng(4, SeedStream::Instance, 0);
  CMat s = gen_signatures(cfg.N, cfg.M, cfg.Es, rng);
  const CMat s_copy = s;
  const Scenario sc = synthesize_rx(cfg, std::move(s), IVec::Ones(1),
                                    CMat::Ones(1, 1), rng);
  CHECK((sc.W.col(0) - s_copy.col(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise variance follows the per-user SNR definition") {
  const SystemConfig cfg =
      make_dense_config(256, 128, 1, 48.0 / 256.0, 128.0, -10.81);
  CHECK(cfg.noise_variance() ==
        doctest::Approx(std::pow(10.0, 1.081)).epsilon(1e-12));
  CHECK(cfg.noise_variance() == doctest::Approx(12.05).epsilon(1e-3));
}

TEST_CASE("scenario is reproducible and self-consistent") {
  const SystemConfig cfg = make_dense_config(16, 8, 3, 0.25, 8.0, 0.0);
  auto rng1 = make_rng(77, SeedStream::Scenario, 5);
  auto rng2 = make_rng(77, SeedStream::Scenario, 5);
  const Scenario a = draw_scenario(cfg, rng1);
  const Scenario b = draw_scenario(cfg, rng2);
  CHECK((a.W - b.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.S - b.S).cwiseAbs().maxCoeff() == 0.0);
  // Recomputing the received signal from the stored draws is bit-exact.
  const CMat w = recompute_received(a.S, a.lambda, a.H, cfg.gamma, a.V);
  CHECK((w - a.W).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("QF matrix collapses to S*Gamma for a single RRH") {
  auto rng = make_rng(8, SeedStream::Instance, 0);
  const CMat s = gen_signatures(3, 4, 4.0, rng);
  Mat gamma(3, 1);
  gamma << 0.5, 2.0, 0.0;
  const CMat a = build_qf_matrix(s, gamma);
  CHECK(a.rows() == 4);
  CHECK(a.cols() == 3);
  const CMat expect = s * gamma.col(0).asDiagonal();
  CHECK((a - expect).cwiseAbs().maxCoeff() == 0.0);
  // Zero gain zeroes the whole column.
  CHECK(a.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("QF matrix reproduces the stacked per-RRH observations") {
  auto rng = make_rng(11, SeedStream::Instance, 0);
  const int N = 2, M = 2, R = 2;
  const CMat s = gen_signatures(N, M, 2.0, rng);
  const Mat gamma = Mat::Ones(N, R);
  const CMat a = build_qf_matrix(s, gamma);
  CHECK(a.rows() == R * M);
  CHECK(a.cols() == R * N);

  // Random group-structured x: slot r of UE n at index n*R + r.
  CMat x_by_rrh(N, R);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int n = 0; n < N; ++n) {
    for (int r = 0; r < R; ++r) x_by_rrh(n, r) = cplx(g(rng), g(rng));
  }
  CVec x(N * R);
  for (int n = 0; n < N; ++n) {
    for (int r = 0; r < R; ++r) x[n * R + r] = x_by_rrh(n, r);
  }
  const CVec stacked = a * x;
  for (int r = 0; r < R; ++r) {
    const CVec w_r = s * (gamma.col(r).asDiagonal() * x_by_rrh.col(r));
    CHECK((stacked.segment(r * M, M) - w_r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("real lift of the imaginary unit") {
  CMat unit(1, 1);
  unit(0, 0) = cplx(0.0, 1.0);
  const Mat lifted = lift_matrix(unit);
  CHECK(lifted(0, 0) == 0.0);
  CHECK(lifted(0, 1) == -1.0);
  CHECK(lifted(1, 0) == 1.0);
  CHECK(lifted(1, 1) == 0.0);
}

TEST_CASE("lift is a multiplicative homomorphism") {
  auto rng = make_rng(21, SeedStream::Instance, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  CMat a(3, 3);
  CVec x(3);
  for (int i = 0; i < 3; ++i) {
    x[i] = cplx(g(rng), g(rng));
    for (int j = 0; j < 3; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  const Vec lhs = lift_matrix(a) * lift_vector(x);
  const Vec rhs = lift_vector(a * x);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);

  // A real matrix lifts to duplicated 2x2 diagonal blocks.
  const CMat real_only = a.real().cast<cplx>();
  const Mat lifted = lift_matrix(real_only);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(lifted(2 * i, 2 * j) == lifted(2 * i + 1, 2 * j + 1));
      CHECK(lifted(2 * i, 2 * j + 1) == 0.0);
      CHECK(lifted(2 * i + 1, 2 * j) == 0.0);
    }
  }
  CHECK((unlift_vector(lift_vector(x)) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("QF lift group bookkeeping: 2R coordinates per UE") {
  auto rng = make_rng(31, SeedStream::Instance, 0);
  const int N = 3, M = 4, R = 2;
  const CMat s = gen_signatures(N, M, 1.0, rng);
  const RealLift lift = lift_qf_matrix(build_qf_matrix(s, Mat::Ones(N, R)), N, R);
  CHECK(lift.A.rows() == 2 * R * M);
  CHECK(lift.A.cols() == 2 * R * N);
  for (int n = 0; n < N; ++n) {
    int members = 0;
    for (int v : lift.group_index) members += v == n ? 1 : 0;
    CHECK(members == 2 * R);
  }
  // Coordinates of one UE are adjacent.
  for (int j = 0; j + 1 < static_cast<int>(lift.group_index.size()); ++j) {
    CHECK(lift.group_index[j] <= lift.group_index[j + 1]);
  }
}

TEST_CASE("scenario dump/load round-trips exactly") {
  const SystemConfig cfg = make_dense_config(5, 4, 2, 0.4, 4.0, 3.0);
  auto rng = make_rng(55, SeedStream::Scenario, 0);
  const Scenario sc = draw_scenario(cfg, rng);
  std::stringstream ss;
  dump_scenario(sc, ss);
  const Scenario back = load_scenario(ss);
  CHECK((back.S - sc.S).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.H - sc.H).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.V - sc.V).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.W - sc.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.lambda == sc.lambda);
  CHECK(back.sigma_v2 == sc.sigma_v2);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(make_dense_config(0, 4, 1, 0.5, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_dense_config(4, 4, 1, 1.5, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_dense_config(4, 4, 1, 0.5, 0.0, 0.0),
                  std::invalid_argument);
  SystemConfig bad = make_dense_config(4, 4, 1, 0.5, 1.0, 0.0);
  bad.gamma(1, 0) = -0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
