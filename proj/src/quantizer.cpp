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
#include "cranuad/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cranuad {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Linear-interpolation percentile on a sorted sample.
double percentile(const std::vector<double>& sorted, double q) {
  const auto n = sorted.size();
  if (n == 1) return sorted.front();
  const double pos = q * static_cast<double>(n - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= n) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}
}  // namespace

QuantizerSpec make_uniform_quantizer(int levels, double lo, double hi) {
  if (levels < 2) throw std::invalid_argument("quantizer: levels must be >= 2");
  if (!(hi > lo)) throw std::invalid_argument("quantizer: empty grid range");
  QuantizerSpec spec;
  spec.levels = levels;
  spec.lo = lo;
  spec.step = (hi - lo) / levels;
  spec.representatives.resize(levels);
  for (int k = 0; k < levels; ++k) {
    spec.representatives[k] = lo + (k + 0.5) * spec.step;
  }
  return spec;
}

QuantizerSpec design_sample_quantizer(int bits_per_complex, double sigma_real) {
  if (bits_per_complex < 2 || bits_per_complex % 2 != 0) {
    throw std::invalid_argument(
        "sample quantizer: bits per complex sample must be even and >= 2");
  }
  if (!(sigma_real > 0.0)) {
    throw std::invalid_argument("sample quantizer: sigma must be positive");
  }
  const int levels = 1 << (bits_per_complex / 2);
  return make_uniform_quantizer(levels, -3.0 * sigma_real, 3.0 * sigma_real);
}

QuantizerSpec design_llr_quantizer(int levels,
                                   std::vector<double> calibration_samples) {
  if (levels < 2) {
    throw std::invalid_argument("llr quantizer: levels must be >= 2");
  }
  if (calibration_samples.empty()) {
    throw std::invalid_argument("llr quantizer: no calibration samples");
  }
  std::sort(calibration_samples.begin(), calibration_samples.end());
  double lo = percentile(calibration_samples, 0.025);
  double hi = percentile(calibration_samples, 0.975);
  if (!(hi - lo > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)))) {
    // Degenerate calibration range: widen to +/-1 around the constant.
    const double c = 0.5 * (lo + hi);
    lo = c - 1.0;
    hi = c + 1.0;
  }
  return make_uniform_quantizer(levels, lo, hi);
}

int quantize(const QuantizerSpec& spec, double value) {
  const double pos = std::floor((value - spec.lo) / spec.step);
  if (pos < 0.0) return 0;
  if (pos >= spec.levels) return spec.levels - 1;
  return static_cast<int>(pos);
}

std::pair<double, double> bin_interval(const QuantizerSpec& spec, int index) {
  if (index < 0 || index >= spec.levels) {
    throw std::out_of_range("quantizer: bin index out of range");
  }
  const double lo = index == 0 ? -kInf : spec.edge(index);
  const double hi = index == spec.levels - 1 ? kInf : spec.edge(index + 1);
  return {lo, hi};
}

double representative(const QuantizerSpec& spec, int index) {
  if (index < 0 || index >= spec.levels) {
    throw std::out_of_range("quantizer: bin index out of range");
  }
  return spec.representatives[index];
}

int dtf_llr_levels(int M, int bits_per_complex, int N) {
  if (M < 1 || N < 1 || bits_per_complex < 1) {
    throw std::invalid_argument("llr levels: invalid dimensions");
  }
  const long budget_bits =
      static_cast<long>(M) * bits_per_complex / static_cast<long>(N);
  if (budget_bits < 1) {
    throw std::invalid_argument(
        "llr levels: fronthaul budget below one bit per LLR is unsupported");
  }
  // Past 2^20 levels the quantizer is transparent at double precision; the
  // cap keeps the representative table bounded.
  if (budget_bits > 20) return 1 << 20;
  return 1 << budget_bits;
}

double analytic_sample_sigma(double p, const Vec& gamma_col, double Es, int M,
                             double sigma_v2) {
  const double signal = p * gamma_col.squaredNorm() * Es / M;
  return std::sqrt(0.5 * (signal + sigma_v2));
}

}  // namespace cranuad
