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
#include "cranuad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cranuad/rng.hpp"

namespace cranuad {

std::vector<double> default_threshold_grid() {
  std::vector<double> grid(61);
  for (int i = 0; i < 61; ++i) grid[i] = -15.0 + 0.5 * i;
  return grid;
}

SystemConfig ExperimentConfig::system_for(int R) const {
  SystemConfig sys;
  sys.N = N;
  sys.M = M;
  sys.R = R;
  sys.p = p;
  sys.Es = effective_es();
  sys.snr_db = snr_db;
  if (!gamma_file.empty()) {
    std::ifstream in(gamma_file);
    if (!in) {
      throw std::invalid_argument("config: cannot open gamma file " +
                                  gamma_file);
    }
    sys.gamma.resize(N, R);
    for (int n = 0; n < N; ++n) {
      for (int r = 0; r < R; ++r) {
        if (!(in >> sys.gamma(n, r))) {
          throw std::invalid_argument("config: gamma file truncated");
        }
      }
    }
  } else {
    sys.gamma = Mat::Ones(N, R);
  }
  sys.validate();
  return sys;
}

void ExperimentConfig::validate() const {
  if (r_grid.empty() || b_grid.empty() || schemes.empty() ||
      thresholds.empty()) {
    throw std::invalid_argument("config: grids must be nonempty");
  }
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!gamma_file.empty() && r_grid.size() != 1) {
    throw std::invalid_argument(
        "config: gamma file requires a single-R grid (the table is N x R)");
  }
  const bool has_qf =
      std::find(schemes.begin(), schemes.end(), Scheme::QF) != schemes.end();
  const bool has_dtf =
      std::find(schemes.begin(), schemes.end(), Scheme::DtF) != schemes.end();
  for (int b : b_grid) {
    if (has_qf) FronthaulBudget{b}.sample_levels();
    if (has_dtf) dtf_llr_levels(M, b, N);
  }
  if (has_dtf && calib_trials < 1) {
    throw std::invalid_argument("config: DtF requires calibration trials");
  }
  for (int R : r_grid) system_for(R);
}

std::optional<TrialMetrics> metrics(const IVec& truth, const IVec& estimate) {
  if (truth.size() != estimate.size()) {
    throw std::invalid_argument("metrics: length mismatch");
  }
  int actives = 0, hits = 0, false_alarms = 0;
  for (Eigen::Index n = 0; n < truth.size(); ++n) {
    if (truth[n] != 0) {
      ++actives;
      if (estimate[n] != 0) ++hits;
    } else if (estimate[n] != 0) {
      ++false_alarms;
    }
  }
  if (actives == 0) return std::nullopt;
  return TrialMetrics{static_cast<double>(hits) / actives,
                      static_cast<double>(false_alarms) / actives};
}

namespace {

double interp_at_far(const RocCurve& roc, double far_target,
                     const std::function<double(const RocPoint&)>& field) {
  if (roc.points.size() < 1) {
    throw std::invalid_argument("roc: empty curve");
  }
  // Thresholds ascend, so the false-alarm ratio is nonincreasing over points.
  double far_max = roc.points.front().far_mean;
  double far_min = roc.points.back().far_mean;
  if (far_target > far_max || far_target < far_min) {
    std::ostringstream msg;
    msg << "roc: far target " << far_target << " outside achievable range ["
        << far_min << ", " << far_max << "]";
    throw std::invalid_argument(msg.str());
  }
  for (std::size_t i = 0; i + 1 < roc.points.size(); ++i) {
    const auto& hi = roc.points[i];      // larger far (lower threshold)
    const auto& lo = roc.points[i + 1];  // smaller far
    if (far_target <= hi.far_mean && far_target >= lo.far_mean) {
      const double span = hi.far_mean - lo.far_mean;
      if (span <= 0.0) return field(lo);
      const double w = (hi.far_mean - far_target) / span;
      return field(hi) + w * (field(lo) - field(hi));
    }
  }
  return field(roc.points.back());
}

}  // namespace

double cdr_at_far(const RocCurve& roc, double far_target) {
  return interp_at_far(roc, far_target,
                       [](const RocPoint& p) { return p.cdr_mean; });
}

double cdr_ci95_at_far(const RocCurve& roc, double far_target) {
  return interp_at_far(roc, far_target,
                       [](const RocPoint& p) { return p.cdr_ci95; });
}

void parallel_trials(int n, int workers, const std::function<void(int)>& body) {
  int count = workers > 0
                  ? workers
                  : static_cast<int>(std::thread::hardware_concurrency());
  count = std::max(1, std::min(count, n));
  if (count == 1) {
    for (int t = 0; t < n; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int t = next.fetch_add(1); t < n; t = next.fetch_add(1)) {
      try {
        body(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> collect_dtf_calibration(const ExperimentConfig& cfg,
                                            int R) {
  const SystemConfig sys = cfg.system_for(R);
  std::vector<std::vector<double>> per_trial(cfg.calib_trials);
  std::atomic<int> failures{0};
  parallel_trials(cfg.calib_trials, cfg.workers, [&](int t) {
    auto rng = make_rng(cfg.seed, SeedStream::Calibration,
                        static_cast<std::uint64_t>(t));
    const Scenario sc = draw_scenario(sys, rng);
    try {
      const Mat locals = dtf_local_all(sc, sys, cfg.gamp);
      auto& samples = per_trial[t];
      samples.reserve(static_cast<std::size_t>(locals.size()));
      for (Eigen::Index r = 0; r < locals.rows(); ++r) {
        for (Eigen::Index n = 0; n < locals.cols(); ++n) {
          samples.push_back(locals(r, n));
        }
      }
    } catch (const GampDivergence&) {
      failures.fetch_add(1);
    }
  });
  std::vector<double> samples;
  for (const auto& chunk : per_trial) {
    samples.insert(samples.end(), chunk.begin(), chunk.end());
  }
  if (samples.empty()) {
    throw std::runtime_error("calibration: all trials diverged");
  }
  return samples;
}

namespace {

struct CellSpec {
  Scheme scheme;
  int R, b;
  QuantizerSpec llr_quant;  // DtF only
};

struct CellTrial {
  enum class Status : std::uint8_t { Ok, Failed, Degenerate } status =
      Status::Degenerate;
  std::vector<double> cdr, far;  // per threshold
};

// Counts of {llr >= th} by binary search on the sorted LLRs.
void eval_thresholds(const Vec& llrs, const IVec& truth,
                     const std::vector<double>& thresholds, CellTrial& out) {
  std::vector<double> active, inactive;
  for (Eigen::Index n = 0; n < truth.size(); ++n) {
    (truth[n] != 0 ? active : inactive).push_back(llrs[n]);
  }
  std::sort(active.begin(), active.end());
  std::sort(inactive.begin(), inactive.end());
  const double n_active = static_cast<double>(active.size());
  out.cdr.resize(thresholds.size());
  out.far.resize(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double th = thresholds[i];
    const auto hits = active.end() -
                      std::lower_bound(active.begin(), active.end(), th);
    const auto fps = inactive.end() -
                     std::lower_bound(inactive.begin(), inactive.end(), th);
    out.cdr[i] = static_cast<double>(hits) / n_active;
    out.far[i] = static_cast<double>(fps) / n_active;
  }
  out.status = CellTrial::Status::Ok;
}

RocCurve aggregate_cell(const ExperimentConfig& cfg, const CellSpec& cell,
                        const std::vector<std::vector<CellTrial>>& outcomes,
                        std::size_t cell_idx) {
  RocCurve curve;
  curve.scheme = cell.scheme;
  curve.N = cfg.N;
  curve.M = cfg.M;
  curve.R = cell.R;
  curve.b = cell.b;
  curve.p = cfg.p;
  curve.snr_db = cfg.snr_db;
  curve.seed = cfg.seed;
  curve.trials_total = cfg.trials;

  const std::size_t n_th = cfg.thresholds.size();
  std::vector<double> cdr_sum(n_th, 0.0), far_sum(n_th, 0.0);
  std::vector<double> cdr_sq(n_th, 0.0), far_sq(n_th, 0.0);
  int used = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    const CellTrial& ct = outcomes[t][cell_idx];
    switch (ct.status) {
      case CellTrial::Status::Failed:
        ++curve.failures;
        continue;
      case CellTrial::Status::Degenerate:
        ++curve.degenerate;
        continue;
      case CellTrial::Status::Ok:
        break;
    }
    ++used;
    for (std::size_t i = 0; i < n_th; ++i) {
      cdr_sum[i] += ct.cdr[i];
      cdr_sq[i] += ct.cdr[i] * ct.cdr[i];
      far_sum[i] += ct.far[i];
      far_sq[i] += ct.far[i] * ct.far[i];
    }
  }
  curve.points.resize(n_th);
  for (std::size_t i = 0; i < n_th; ++i) {
    RocPoint& pt = curve.points[i];
    pt.threshold = cfg.thresholds[i];
    pt.n_trials = used;
    if (used > 0) {
      pt.cdr_mean = cdr_sum[i] / used;
      pt.far_mean = far_sum[i] / used;
    }
    if (used > 1) {
      const double cdr_var =
          std::max(0.0, (cdr_sq[i] - used * pt.cdr_mean * pt.cdr_mean) /
                            (used - 1));
      const double far_var =
          std::max(0.0, (far_sq[i] - used * pt.far_mean * pt.far_mean) /
                            (used - 1));
      pt.cdr_ci95 = 1.96 * std::sqrt(cdr_var / used);
      pt.far_ci95 = 1.96 * std::sqrt(far_var / used);
    }
  }
  return curve;
}

}  // namespace

std::vector<RocCurve> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentConfig sorted_cfg = cfg;
  std::sort(sorted_cfg.thresholds.begin(), sorted_cfg.thresholds.end());

  std::vector<RocCurve> curves;
  for (int R : sorted_cfg.r_grid) {
    const SystemConfig sys = sorted_cfg.system_for(R);

    // Cells of this R group, in config order.
    std::vector<CellSpec> cells;
    bool has_dtf = false;
    for (Scheme scheme : sorted_cfg.schemes) {
      for (int b : sorted_cfg.b_grid) {
        cells.push_back({scheme, R, b, {}});
        has_dtf |= scheme == Scheme::DtF;
      }
    }
    if (has_dtf) {
      // The calibration range is b-independent; only the level count varies.
      const std::vector<double> samples =
          collect_dtf_calibration(sorted_cfg, R);
      for (auto& cell : cells) {
        if (cell.scheme == Scheme::DtF) {
          cell.llr_quant = design_llr_quantizer(
              dtf_llr_levels(sorted_cfg.M, cell.b, sorted_cfg.N), samples);
        }
      }
    }

    std::vector<std::vector<CellTrial>> outcomes(
        sorted_cfg.trials, std::vector<CellTrial>(cells.size()));
    parallel_trials(sorted_cfg.trials, sorted_cfg.workers, [&](int t) {
      auto rng = make_rng(sorted_cfg.seed, SeedStream::Scenario,
                          static_cast<std::uint64_t>(t));
      const Scenario sc = draw_scenario(sys, rng);
      if (sc.lambda.sum() == 0) return;  // degenerate: ratios undefined

      Mat dtf_locals;
      bool dtf_locals_ok = false, dtf_attempted = false;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        CellTrial& ct = outcomes[t][c];
        try {
          if (cells[c].scheme == Scheme::QF) {
            const PosteriorSummary ps =
                qf_detect(sc, sys, cells[c].b, sorted_cfg.gamp);
            eval_thresholds(ps.llr, sc.lambda, sorted_cfg.thresholds, ct);
          } else {
            if (!dtf_attempted) {
              dtf_attempted = true;
              dtf_locals = dtf_local_all(sc, sys, sorted_cfg.gamp);
              dtf_locals_ok = true;
            }
            if (!dtf_locals_ok) throw GampDivergence(0);
            const Vec fused = dtf_fuse(dtf_locals, cells[c].llr_quant);
            eval_thresholds(fused, sc.lambda, sorted_cfg.thresholds, ct);
          }
        } catch (const GampDivergence&) {
          ct.status = CellTrial::Status::Failed;
        }
      }
    });

    for (std::size_t c = 0; c < cells.size(); ++c) {
      curves.push_back(aggregate_cell(sorted_cfg, cells[c], outcomes, c));
    }
  }

  for (const RocCurve& curve : curves) {
    const double rate =
        static_cast<double>(curve.failures) / curve.trials_total;
    if (rate > 0.05) {
      std::ostringstream msg;
      msg << "run aborted: divergence rate " << rate << " in cell "
          << scheme_name(curve.scheme) << " R=" << curve.R
          << " b=" << curve.b << " exceeds 5%";
      throw std::runtime_error(msg.str());
    }
  }
  return curves;
}

void emit_csv(const std::vector<RocCurve>& curves, std::ostream& os) {
  os << "scheme,N,M,R,p,b,snr_db,threshold,far_mean,far_ci95,cdr_mean,"
        "cdr_ci95,trials,failures,seed\n";
  char buf[512];
  for (const RocCurve& curve : curves) {
    for (const RocPoint& pt : curve.points) {
      std::snprintf(buf, sizeof(buf),
                    "%s,%d,%d,%d,%.10g,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                    "%d,%d,%llu\n",
                    scheme_name(curve.scheme), curve.N, curve.M, curve.R,
                    curve.p, curve.b, curve.snr_db, pt.threshold, pt.far_mean,
                    pt.far_ci95, pt.cdr_mean, pt.cdr_ci95, pt.n_trials,
                    curve.failures,
                    static_cast<unsigned long long>(curve.seed));
      os << buf;
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) out.push_back(trim(item));
  return out;
}

// Accepts plain decimals and fractions like "48/256".
double parse_number(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
  }
  return std::stod(s);
}

// "lo:hi:count" or a comma list.
std::vector<double> parse_thresholds(const std::string& s) {
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) {
      throw std::invalid_argument("config: thresholds expects lo:hi:count");
    }
    const double lo = parse_number(parts[0]);
    const double hi = parse_number(parts[1]);
    const int count = std::stoi(parts[2]);
    if (count < 2 || !(hi > lo)) {
      throw std::invalid_argument("config: bad threshold range");
    }
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
      grid[i] = lo + (hi - lo) * i / (count - 1);
    }
    return grid;
  }
  std::vector<double> grid;
  for (const auto& item : split(s, ',')) grid.push_back(parse_number(item));
  return grid;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "N") {
      cfg.N = std::stoi(value);
    } else if (key == "M") {
      cfg.M = std::stoi(value);
    } else if (key == "p") {
      cfg.p = parse_number(value);
    } else if (key == "Es") {
      cfg.Es = parse_number(value);
    } else if (key == "snr_db") {
      cfg.snr_db = parse_number(value);
    } else if (key == "R") {
      cfg.r_grid.clear();
      for (const auto& item : split(value, ',')) {
        cfg.r_grid.push_back(std::stoi(item));
      }
    } else if (key == "b") {
      cfg.b_grid.clear();
      for (const auto& item : split(value, ',')) {
        cfg.b_grid.push_back(std::stoi(item));
      }
    } else if (key == "schemes") {
      cfg.schemes.clear();
      for (auto item : split(value, ',')) {
        std::transform(item.begin(), item.end(), item.begin(), ::tolower);
        if (item == "qf") {
          cfg.schemes.push_back(Scheme::QF);
        } else if (item == "dtf") {
          cfg.schemes.push_back(Scheme::DtF);
        } else {
          throw std::invalid_argument("config: unknown scheme " + item);
        }
      }
    } else if (key == "thresholds") {
      cfg.thresholds = parse_thresholds(value);
    } else if (key == "trials") {
      cfg.trials = std::stoi(value);
    } else if (key == "calib_trials") {
      cfg.calib_trials = std::stoi(value);
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "workers") {
      cfg.workers = std::stoi(value);
    } else if (key == "out") {
      cfg.out_path = value;
    } else if (key == "gamma") {
      cfg.gamma_file = value;
    } else if (key == "damping") {
      cfg.gamp.damping = parse_number(value);
    } else if (key == "max_iters") {
      cfg.gamp.max_iters = std::stoi(value);
    } else if (key == "tol") {
      cfg.gamp.tol = parse_number(value);
    } else {
      throw std::invalid_argument("config: unknown key " + key);
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace cranuad
