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
#include "cranuad/detectors.hpp"

#include <stdexcept>

namespace cranuad {

const char* scheme_name(Scheme s) { return s == Scheme::QF ? "QF" : "DtF"; }

int FronthaulBudget::sample_levels() const {
  if (bits < 2 || bits % 2 != 0) {
    throw std::invalid_argument(
        "fronthaul budget: QF requires an even bit count >= 2");
  }
  return 1 << (bits / 2);
}

long FronthaulBudget::qf_bits_per_slot(int M) const {
  return static_cast<long>(M) * bits;
}

long FronthaulBudget::dtf_bits_per_slot(int M, int N) const {
  const long per_llr = static_cast<long>(M) * bits / N;
  return static_cast<long>(N) * per_llr;
}

namespace {

// Quantize Re/Im of every received sample, RRH-major, Re before Im.
OutputChannel build_qf_channel(const Scenario& sc, const SystemConfig& cfg,
                               int bits) {
  std::vector<QuantizerSpec> specs;
  specs.reserve(cfg.R);
  for (int r = 0; r < cfg.R; ++r) {
    const double sigma = analytic_sample_sigma(cfg.p, cfg.gamma.col(r), cfg.Es,
                                               cfg.M, sc.sigma_v2);
    specs.push_back(design_sample_quantizer(bits, sigma));
  }
  std::vector<int> spec_index(2 * static_cast<std::size_t>(cfg.R) * cfg.M);
  std::vector<int> bins(spec_index.size());
  for (int r = 0; r < cfg.R; ++r) {
    for (int m = 0; m < cfg.M; ++m) {
      const std::size_t i = 2 * (static_cast<std::size_t>(r) * cfg.M + m);
      spec_index[i] = r;
      spec_index[i + 1] = r;
      bins[i] = quantize(specs[r], sc.W(m, r).real());
      bins[i + 1] = quantize(specs[r], sc.W(m, r).imag());
    }
  }
  return make_quantized_channel(std::move(specs), std::move(spec_index),
                                std::move(bins), sc.sigma_v2 / 2.0);
}

Vec stack_received(const Scenario& sc, const SystemConfig& cfg) {
  Vec values(2 * static_cast<Eigen::Index>(cfg.R) * cfg.M);
  for (int r = 0; r < cfg.R; ++r) {
    for (int m = 0; m < cfg.M; ++m) {
      const Eigen::Index i = 2 * (static_cast<Eigen::Index>(r) * cfg.M + m);
      values[i] = sc.W(m, r).real();
      values[i + 1] = sc.W(m, r).imag();
    }
  }
  return values;
}

void check_scenario(const Scenario& sc, const SystemConfig& cfg) {
  cfg.validate();
  if (sc.S.rows() != cfg.M || sc.S.cols() != cfg.N || sc.W.cols() != cfg.R) {
    throw std::invalid_argument("detector: scenario/config dimension mismatch");
  }
}

}  // namespace

PosteriorSummary qf_detect(const Scenario& sc, const SystemConfig& cfg,
                           int bits, const GampOptions& opts) {
  check_scenario(sc, cfg);
  FronthaulBudget{bits}.sample_levels();  // validates the bit count
  const ComplexBlockOperator op(sc.S, cfg.gamma);
  const GroupStructure groups = make_contiguous_groups(cfg.N, 2 * cfg.R);
  const OutputChannel ch = build_qf_channel(sc, cfg, bits);
  return hgamp_run(op, ch, groups, cfg.p, opts);
}

PosteriorSummary qf_detect_unquantized(const Scenario& sc,
                                       const SystemConfig& cfg,
                                       const GampOptions& opts) {
  check_scenario(sc, cfg);
  const ComplexBlockOperator op(sc.S, cfg.gamma);
  const GroupStructure groups = make_contiguous_groups(cfg.N, 2 * cfg.R);
  const OutputChannel ch =
      make_unquantized_channel(stack_received(sc, cfg), sc.sigma_v2 / 2.0);
  return hgamp_run(op, ch, groups, cfg.p, opts);
}

Vec dtf_local(const CVec& w_r, const CMat& s, const Vec& gamma_col, double p,
              double sigma_v2, const GampOptions& opts) {
  if (w_r.size() != s.rows() || gamma_col.size() != s.cols()) {
    throw std::invalid_argument("dtf_local: dimension mismatch");
  }
  const ComplexBlockOperator op(s, gamma_col);
  const GroupStructure groups = make_contiguous_groups(s.cols(), 2);
  const OutputChannel ch =
      make_unquantized_channel(lift_vector(w_r), sigma_v2 / 2.0);
  return hgamp_run(op, ch, groups, p, opts).llr;
}

Mat dtf_local_all(const Scenario& sc, const SystemConfig& cfg,
                  const GampOptions& opts) {
  check_scenario(sc, cfg);
  Mat llrs(cfg.R, cfg.N);
  for (int r = 0; r < cfg.R; ++r) {
    llrs.row(r) = dtf_local(sc.W.col(r), sc.S, cfg.gamma.col(r), cfg.p,
                            sc.sigma_v2, opts)
                      .transpose();
  }
  return llrs;
}

Vec dtf_fuse(const Mat& local_llrs, const QuantizerSpec& llr_quantizer) {
  if (llr_quantizer.levels < 2) {
    throw std::invalid_argument("dtf_fuse: quantizer not calibrated");
  }
  Vec fused = Vec::Zero(local_llrs.cols());
  for (Eigen::Index r = 0; r < local_llrs.rows(); ++r) {
    for (Eigen::Index n = 0; n < local_llrs.cols(); ++n) {
      fused[n] += representative(llr_quantizer,
                                 quantize(llr_quantizer, local_llrs(r, n)));
    }
  }
  return fused;
}

ActivityEstimate threshold_test(const Vec& llrs, double l_th, Scheme scheme) {
  ActivityEstimate est;
  est.scheme = scheme;
  est.threshold = l_th;
  est.llr_used = llrs;
  est.lambda_hat.resize(llrs.size());
  for (Eigen::Index n = 0; n < llrs.size(); ++n) {
    est.lambda_hat[n] = llrs[n] >= l_th ? 1 : 0;
  }
  return est;
}

}  // namespace cranuad
