// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cranuad/oracle.hpp"
#include "cranuad/quantizer.hpp"

using namespace cranuad;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("sample quantizer grid, b=4 sigma=1") {
  const auto spec = design_sample_quantizer(4, 1.0);
  CHECK(spec.levels == 4);
  CHECK(spec.step == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(spec.lo == doctest::Approx(-3.0));
  for (int k = 0; k <= 4; ++k) {
    CHECK(spec.edge(k) == doctest::Approx(-3.0 + 1.5 * k));
  }
  CHECK(representative(spec, 0) == doctest::Approx(-2.25));
  CHECK(representative(spec, 1) == doctest::Approx(-0.75));
  CHECK(representative(spec, 2) == doctest::Approx(0.75));
  CHECK(representative(spec, 3) == doctest::Approx(2.25));
}

TEST_CASE("sample quantizer degenerates to a sign quantizer at b=2") {
  const auto spec = design_sample_quantizer(2, 2.0);
  CHECK(spec.levels == 2);
  CHECK(representative(spec, 0) == doctest::Approx(-3.0));
  CHECK(representative(spec, 1) == doctest::Approx(3.0));
  const auto [lo0, hi0] = bin_interval(spec, 0);
  CHECK(lo0 == -kInf);
  CHECK(hi0 == doctest::Approx(0.0));
}

TEST_CASE("sample quantizer level count, b=8") {
  const auto spec = design_sample_quantizer(8, 1.0);
  CHECK(spec.levels == 16);
  CHECK(spec.step == doctest::Approx(0.375));
}

TEST_CASE("sample quantizer rejects odd or tiny bit budgets") {
  CHECK_THROWS_AS(design_sample_quantizer(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(design_sample_quantizer(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(design_sample_quantizer(4, 0.0), std::invalid_argument);
}

TEST_CASE("quantize interval membership and saturation") {
  const auto spec = design_sample_quantizer(4, 1.0);
  CHECK(quantize(spec, 0.1) == 2);  // [0, 1.5)
  CHECK(quantize(spec, -100.0) == 0);
  CHECK(quantize(spec, 100.0) == 3);
  CHECK(quantize(spec, 0.0) == 2);  // edges belong to the upper bin
  const auto [lo, hi] = bin_interval(spec, 0);
  CHECK(lo == -kInf);
  CHECK(hi == doctest::Approx(-1.5));
  const auto [lo3, hi3] = bin_interval(spec, 3);
  CHECK(lo3 == doctest::Approx(1.5));
  CHECK(hi3 == kInf);
  CHECK_THROWS_AS(bin_interval(spec, 4), std::out_of_range);
  CHECK_THROWS_AS(bin_interval(spec, -1), std::out_of_range);
}

TEST_CASE("idempotence: quantizing a representative returns its bin") {
  for (int bits : {2, 4, 6, 8}) {
    const auto spec = design_sample_quantizer(bits, 0.7);
    for (int k = 0; k < spec.levels; ++k) {
      CHECK(quantize(spec, representative(spec, k)) == k);
    }
  }
}

TEST_CASE("partition and monotonicity over random values") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  const auto spec = design_sample_quantizer(6, 1.3);
  double prev_value = -1e9;
  int prev_bin = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng);
    const int bin = quantize(spec, v);
    const auto [lo, hi] = bin_interval(spec, bin);
    CHECK(v >= lo);
    CHECK(v < hi);
    // No other bin contains the value: the neighbors exclude it.
    if (bin > 0) CHECK(v >= bin_interval(spec, bin - 1).second);
    if (bin + 1 < spec.levels) CHECK(v < bin_interval(spec, bin + 1).first);
  }
  // Monotone in the argument.
  std::vector<double> sorted(200);
  for (auto& v : sorted) v = u(rng);
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted) {
    const int bin = quantize(spec, v);
    CHECK(bin >= prev_bin);
    CHECK(v >= prev_value);
    prev_bin = bin;
    prev_value = v;
  }
}

TEST_CASE("adjacent bins share endpoints and masses sum to one") {
  const auto spec = design_sample_quantizer(6, 2.0);
  for (int k = 0; k + 1 < spec.levels; ++k) {
    CHECK(bin_interval(spec, k).second ==
          doctest::Approx(bin_interval(spec, k + 1).first).epsilon(1e-15));
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double z = u(rng);
    const double var = 0.1 + std::abs(u(rng));
    double total = 0.0;
    for (int k = 0; k < spec.levels; ++k) {
      const auto [lo, hi] = bin_interval(spec, k);
      total += gauss_mass_quadrature(lo, hi, z, var);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("llr quantizer level budget") {
  CHECK(dtf_llr_levels(128, 2, 256) == 2);
  CHECK(dtf_llr_levels(128, 4, 256) == 4);
  CHECK(dtf_llr_levels(128, 8, 256) == 16);
  CHECK(dtf_llr_levels(128, 3, 256) == 2);  // floor of fractional budget
  CHECK_THROWS_AS(dtf_llr_levels(128, 1, 256), std::invalid_argument);
}

TEST_CASE("llr quantizer covers the 95% calibration interval") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(-2.0, 3.0);
  std::vector<double> samples(20000);
  for (auto& s : samples) s = g(rng);
  const auto spec = design_llr_quantizer(8, samples);
  CHECK(spec.levels == 8);
  // Roughly the 2.5%/97.5% points of N(-2, 9).
  CHECK(spec.lo == doctest::Approx(-2.0 - 1.96 * 3.0).epsilon(0.05));
  CHECK(spec.hi() == doctest::Approx(-2.0 + 1.96 * 3.0).epsilon(0.05));
}

TEST_CASE("llr quantizer degenerate calibration widens around the constant") {
  const auto spec = design_llr_quantizer(4, std::vector<double>(50, 2.5));
  CHECK(spec.lo == doctest::Approx(1.5));
  CHECK(spec.hi() == doctest::Approx(3.5));
  CHECK_THROWS_AS(design_llr_quantizer(1, std::vector<double>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(design_llr_quantizer(4, std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("analytic per-component sigma of the received samples") {
  Vec gamma(2);
  gamma << 1.0, 1.0;
  // p * sum(gamma^2) * Es/M = 0.5 * 2 * 2 = 2, noise 3 -> sqrt(5/2).
  CHECK(analytic_sample_sigma(0.5, gamma, 4.0, 2, 3.0) ==
        doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
}
