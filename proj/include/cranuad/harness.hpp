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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cranuad/detectors.hpp"

namespace cranuad {

// Default threshold grid: 61 points uniform on [-15, 15], wide around the
// prior log-odds of the reference configurations.
std::vector<double> default_threshold_grid();

struct ExperimentConfig {
  int N = 256;
  int M = 128;
  double p = 48.0 / 256.0;
  double Es = -1.0;  // <= 0 means the default Es = M
  double snr_db = -10.81;
  std::vector<int> r_grid{1};
  std::vector<int> b_grid{4};
  std::vector<Scheme> schemes{Scheme::QF};
  std::vector<double> thresholds = default_threshold_grid();
  int trials = 200;
  int calib_trials = 200;
  std::uint64_t seed = 1;
  int workers = 1;  // 0 = hardware concurrency
  std::string out_path;
  std::string gamma_file;  // optional N x R table; requires a single-R grid
  GampOptions gamp;

  double effective_es() const { return Es > 0.0 ? Es : static_cast<double>(M); }
  SystemConfig system_for(int R) const;
  void validate() const;
};

struct TrialMetrics {
  double cdr = 0.0;
  double far = 0.0;
};

// cdr = correctly detected actives / actives, far = detected inactives /
// actives (the false-alarm ratio may exceed 1 under this normalization).
// A trial with no active UE has no defined ratios and returns nullopt.
std::optional<TrialMetrics> metrics(const IVec& truth, const IVec& estimate);

struct RocPoint {
  double threshold = 0.0;
  double far_mean = 0.0, far_ci95 = 0.0;
  double cdr_mean = 0.0, cdr_ci95 = 0.0;
  int n_trials = 0;
};

struct RocCurve {
  Scheme scheme = Scheme::QF;
  int N = 0, M = 0, R = 0, b = 0;
  double p = 0.0, snr_db = 0.0;
  std::uint64_t seed = 0;
  std::vector<RocPoint> points;  // ordered by threshold
  int trials_total = 0;
  int failures = 0;    // diverged trials
  int degenerate = 0;  // zero-active trials, excluded from the averages
};

// Correct-detection ratio at a target false-alarm ratio, linearly
// interpolated between the two bracketing threshold points. Throws when the
// curve does not span the target, naming the achievable range.
double cdr_at_far(const RocCurve& roc, double far_target);
double cdr_ci95_at_far(const RocCurve& roc, double far_target);

// Pooled local-LLR samples from dedicated calibration trials (own seed
// stream, never reused for evaluation).
std::vector<double> collect_dtf_calibration(const ExperimentConfig& cfg, int R);

// Runs every (scheme, R, b) cell of the config. Scenarios are shared across
// cells of the same R through the per-trial seed scheme, detections are
// evaluated on the threshold grid, and per-threshold means carry
// normal-approximation 95% confidence intervals. Deterministic for a fixed
// (config, seed) regardless of worker count. Throws if any cell's divergence
// rate exceeds 5%.
std::vector<RocCurve> run_experiment(const ExperimentConfig& cfg);

void emit_csv(const std::vector<RocCurve>& curves, std::ostream& os);

ExperimentConfig load_config(const std::string& path);

// Shared worker pool: body(t) for t in [0, n); any body must only touch its
// own slot of preallocated storage.
void parallel_trials(int n, int workers, const std::function<void(int)>& body);

}  // namespace cranuad
