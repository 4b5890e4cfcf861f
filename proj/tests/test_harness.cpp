// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cranuad/harness.hpp"

using namespace cranuad;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.N = 32;
  cfg.M = 16;
  cfg.p = 0.25;
  cfg.snr_db = 0.0;
  cfg.r_grid = {2};
  cfg.b_grid = {4};
  cfg.schemes = {Scheme::QF, Scheme::DtF};
  cfg.thresholds = default_threshold_grid();
  cfg.trials = 6;
  cfg.calib_trials = 4;
  cfg.seed = 99;
  cfg.workers = 1;
  cfg.gamp.max_iters = 40;
  return cfg;
}

std::string csv_of(const std::vector<RocCurve>& curves) {
  std::ostringstream os;
  emit_csv(curves, os);
  return os.str();
}

}  // namespace

TEST_CASE("metrics definitions, including far above one") {
  IVec truth(6), est(6);
  truth << 1, 1, 1, 0, 0, 0;
  est << 1, 1, 0, 1, 0, 0;
  const auto m = metrics(truth, est);
  REQUIRE(m.has_value());
  CHECK(m->cdr == doctest::Approx(2.0 / 3.0));
  CHECK(m->far == doctest::Approx(1.0 / 3.0));

  const auto perfect = metrics(truth, truth);
  CHECK(perfect->cdr == doctest::Approx(1.0));
  CHECK(perfect->far == doctest::Approx(0.0));

  IVec truth10 = IVec::Zero(10), all = IVec::Ones(10);
  truth10[0] = truth10[1] = 1;
  const auto greedy = metrics(truth10, all);
  CHECK(greedy->cdr == doctest::Approx(1.0));
  CHECK(greedy->far == doctest::Approx(4.0));  // 8 false alarms / 2 actives

  CHECK_FALSE(metrics(IVec::Zero(4), IVec::Ones(4)).has_value());
}

TEST_CASE("cdr_at_far interpolation and range errors") {
  RocCurve roc;
  roc.points.resize(2);
  roc.points[0] = {0.0, 0.3, 0.0, 0.8, 0.02, 10};
  roc.points[1] = {1.0, 0.1, 0.0, 0.6, 0.04, 10};
  CHECK(cdr_at_far(roc, 0.2) == doctest::Approx(0.7));
  CHECK(cdr_at_far(roc, 0.3) == doctest::Approx(0.8));
  CHECK(cdr_at_far(roc, 0.1) == doctest::Approx(0.6));
  CHECK(cdr_ci95_at_far(roc, 0.2) == doctest::Approx(0.03));
  CHECK_THROWS_WITH_AS(cdr_at_far(roc, 0.5),
                       doctest::Contains("achievable range"),
                       std::invalid_argument);
}

TEST_CASE("single-trial curve is stepwise and monotone") {
  ExperimentConfig cfg = tiny_config();
  cfg.trials = 1;
  cfg.schemes = {Scheme::QF};
  const auto curves = run_experiment(cfg);
  REQUIRE(curves.size() == 1);
  const RocCurve& roc = curves.front();
  CHECK(roc.points.front().n_trials == 1);
  double prev_far = 1e300, prev_cdr = 1e300;
  for (const auto& pt : roc.points) {
    CHECK(pt.far_mean <= prev_far + 1e-12);
    CHECK(pt.cdr_mean <= prev_cdr + 1e-12);
    prev_far = pt.far_mean;
    prev_cdr = pt.cdr_mean;
  }
  // Stepwise: every ratio is a multiple of 1/actives for one fixed active
  // count somewhere in [1, N].
  bool found_step = false;
  for (int actives = 1; actives <= 32 && !found_step; ++actives) {
    bool all_multiples = true;
    for (const auto& pt : roc.points) {
      const double scaled = pt.cdr_mean * actives;
      all_multiples &= std::abs(scaled - std::round(scaled)) < 1e-9;
      const double scaled_far = pt.far_mean * actives;
      all_multiples &= std::abs(scaled_far - std::round(scaled_far)) < 1e-9;
    }
    found_step = all_multiples;
  }
  CHECK(found_step);
}

TEST_CASE("aggregated threshold sweep stays monotone with both schemes") {
  const auto curves = run_experiment(tiny_config());
  REQUIRE(curves.size() == 2);
  for (const auto& roc : curves) {
    double prev_far = 1e300, prev_cdr = 1e300;
    for (const auto& pt : roc.points) {
      CHECK(pt.far_mean <= prev_far + 1e-12);
      CHECK(pt.cdr_mean <= prev_cdr + 1e-12);
      prev_far = pt.far_mean;
      prev_cdr = pt.cdr_mean;
    }
    CHECK(roc.trials_total == 6);
    CHECK(roc.failures + roc.degenerate + roc.points.front().n_trials == 6);
  }
}

TEST_CASE("identical seeds give bit-identical CSV for any worker count") {
  ExperimentConfig cfg = tiny_config();
  cfg.workers = 1;
  const std::string csv1 = csv_of(run_experiment(cfg));
  cfg.workers = 3;
  const std::string csv3 = csv_of(run_experiment(cfg));
  CHECK(csv1 == csv3);
  CHECK(csv1.substr(0, 6) == "scheme");
}

TEST_CASE("confidence intervals shrink like one over sqrt trials") {
  ExperimentConfig cfg = tiny_config();
  cfg.schemes = {Scheme::QF};
  cfg.trials = 100;
  const auto coarse = run_experiment(cfg);
  cfg.trials = 400;
  const auto fine = run_experiment(cfg);
  double sum_ratio = 0.0;
  int counted = 0;
  for (std::size_t i = 0; i < coarse.front().points.size(); ++i) {
    const double c = coarse.front().points[i].cdr_ci95;
    const double f = fine.front().points[i].cdr_ci95;
    if (c > 1e-4 && f > 1e-4) {
      sum_ratio += c / f;
      ++counted;
    }
  }
  REQUIRE(counted > 5);
  const double ratio = sum_ratio / counted;  // expect ~2
  CHECK(ratio > 1.5);
  CHECK(ratio < 2.5);
}

TEST_CASE("degenerate zero-active trials are excluded and counted") {
  ExperimentConfig cfg = tiny_config();
  cfg.N = 4;
  cfg.M = 8;
  cfg.p = 0.05;
  cfg.schemes = {Scheme::QF};
  cfg.trials = 60;
  cfg.seed = 7;
  const auto curves = run_experiment(cfg);
  const RocCurve& roc = curves.front();
  CHECK(roc.degenerate > 0);  // (1-p)^4 ~ 0.81, so many all-idle draws
  CHECK(roc.points.front().n_trials + roc.degenerate + roc.failures == 60);
}

TEST_CASE("empty result set yields a header-only CSV") {
  const std::string csv = csv_of({});
  CHECK(csv ==
        "scheme,N,M,R,p,b,snr_db,threshold,far_mean,far_ci95,cdr_mean,"
        "cdr_ci95,trials,failures,seed\n");
}

TEST_CASE("config file parsing, overrides and validation") {
  const std::string path = "/tmp/cranuad_test_config.cfg";
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "N = 64\nM = 32\np = 48/256\nsnr_db = -3.5\n"
        << "R = 1, 2\nb = 2,4\nschemes = qf, dtf\n"
        << "thresholds = -4:4:9\ntrials = 3\ncalib_trials = 2\n"
        << "seed = 123\nworkers = 2\nout = /tmp/x.csv\n"
        << "damping = 0.7\nmax_iters = 30\ntol = 1e-5\n";
  }
  const ExperimentConfig cfg = load_config(path);
  CHECK(cfg.N == 64);
  CHECK(cfg.p == doctest::Approx(0.1875));
  CHECK(cfg.r_grid == std::vector<int>{1, 2});
  CHECK(cfg.b_grid == std::vector<int>{2, 4});
  CHECK(cfg.schemes.size() == 2);
  CHECK(cfg.thresholds.size() == 9);
  CHECK(cfg.thresholds.front() == doctest::Approx(-4.0));
  CHECK(cfg.thresholds.back() == doctest::Approx(4.0));
  CHECK(cfg.seed == 123);
  CHECK(cfg.gamp.damping == doctest::Approx(0.7));
  std::remove(path.c_str());

  ExperimentConfig bad = tiny_config();
  bad.b_grid = {3};  // odd bits with QF in the scheme list
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.gamma_file = "/tmp/whatever";
  bad.r_grid = {1, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("gamma file feeds the system config") {
  const std::string path = "/tmp/cranuad_test_gamma.txt";
  {
    std::ofstream out(path);
    for (int n = 0; n < 8; ++n) out << 0.5 << ' ' << 2.0 << '\n';
  }
  ExperimentConfig cfg = tiny_config();
  cfg.N = 8;
  cfg.M = 4;
  cfg.r_grid = {2};
  cfg.gamma_file = path;
  const SystemConfig sys = cfg.system_for(2);
  CHECK(sys.gamma(3, 0) == doctest::Approx(0.5));
  CHECK(sys.gamma(5, 1) == doctest::Approx(2.0));
  std::remove(path.c_str());
}
