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
#include "cranuad/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cranuad {

double SystemConfig::noise_variance() const {
  // rho = Es / (M sigma_v^2) with rho given in dB.
  return Es / (M * std::pow(10.0, snr_db / 10.0));
}

void SystemConfig::validate() const {
  if (N < 1 || M < 1 || R < 1) {
    throw std::invalid_argument("system config: N, M, R must be >= 1");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("system config: p must lie in (0,1)");
  }
  if (!(Es > 0.0)) {
    throw std::invalid_argument("system config: Es must be positive");
  }
  if (gamma.rows() != N || gamma.cols() != R) {
    throw std::invalid_argument("system config: gamma must be N x R");
  }
  if ((gamma.array() < 0.0).any()) {
    throw std::invalid_argument("system config: gamma entries must be >= 0");
  }
}

SystemConfig make_dense_config(int N, int M, int R, double p, double Es,
                               double snr_db) {
  SystemConfig cfg;
  cfg.N = N;
  cfg.M = M;
  cfg.R = R;
  cfg.p = p;
  cfg.Es = Es;
  cfg.snr_db = snr_db;
  cfg.gamma = Mat::Ones(N, R);
  cfg.validate();
  return cfg;
}

namespace {

// Column-major fill, Re before Im, one complex entry per (row, col).
CMat draw_complex_gaussian(Eigen::Index rows, Eigen::Index cols,
                           double var_per_complex, std::mt19937_64& rng) {
  if (var_per_complex == 0.0) return CMat::Zero(rows, cols);
  std::normal_distribution<double> normal(0.0, std::sqrt(var_per_complex / 2));
  CMat out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(r, c) = cplx(re, im);
    }
  }
  return out;
}

}  // namespace

CMat gen_signatures(int N, int M, double Es, std::mt19937_64& rng) {
  if (N < 1 || M < 1) {
    throw std::invalid_argument("signatures: N and M must be >= 1");
  }
  if (!(Es > 0.0)) {
    throw std::invalid_argument("signatures: Es must be positive");
  }
  return draw_complex_gaussian(M, N, Es / M, rng);
}

IVec gen_activity(int N, double p, std::mt19937_64& rng) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("activity: p must lie in (0,1)");
  }
  std::bernoulli_distribution coin(p);
  IVec lambda(N);
  for (int n = 0; n < N; ++n) lambda[n] = coin(rng) ? 1 : 0;
  return lambda;
}

CMat recompute_received(const CMat& S, const IVec& lambda, const CMat& H,
                        const Mat& gamma, const CMat& V) {
  const auto R = H.cols();
  CMat W(S.rows(), R);
  for (Eigen::Index r = 0; r < R; ++r) {
    const CVec x_r = lambda.cast<double>().cwiseProduct(gamma.col(r))
                         .cast<cplx>()
                         .cwiseProduct(H.col(r));
    W.col(r) = S * x_r + V.col(r);
  }
  return W;
}

Scenario synthesize_rx(const SystemConfig& cfg, CMat S, IVec lambda, CMat H,
                       std::mt19937_64& rng) {
  cfg.validate();
  if (S.rows() != cfg.M || S.cols() != cfg.N || lambda.size() != cfg.N ||
      H.rows() != cfg.N || H.cols() != cfg.R) {
    throw std::invalid_argument("synthesize_rx: dimension mismatch");
  }
  Scenario sc;
  sc.sigma_v2 = cfg.noise_variance();
  sc.S = std::move(S);
  sc.lambda = std::move(lambda);
  sc.H = std::move(H);
  sc.V = draw_complex_gaussian(cfg.M, cfg.R, sc.sigma_v2, rng);
  sc.W = recompute_received(sc.S, sc.lambda, sc.H, cfg.gamma, sc.V);
  return sc;
}

Scenario draw_scenario(const SystemConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  CMat S = gen_signatures(cfg.N, cfg.M, cfg.Es, rng);
  IVec lambda = gen_activity(cfg.N, cfg.p, rng);
  CMat H = draw_complex_gaussian(cfg.N, cfg.R, 1.0, rng);
  return synthesize_rx(cfg, std::move(S), std::move(lambda), std::move(H), rng);
}

CMat build_qf_matrix(const CMat& S, const Mat& gamma) {
  const auto M = S.rows();
  const auto N = S.cols();
  const auto R = gamma.cols();
  if (gamma.rows() != N) {
    throw std::invalid_argument("qf matrix: gamma must be N x R");
  }
  CMat A = CMat::Zero(R * M, R * N);
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index r = 0; r < R; ++r) {
      A.block(r * M, n * R + r, M, 1) = gamma(n, r) * S.col(n);
    }
  }
  return A;
}

Mat lift_matrix(const CMat& a) {
  Mat out(2 * a.rows(), 2 * a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double re = a(i, j).real();
      const double im = a(i, j).imag();
      out(2 * i, 2 * j) = re;
      out(2 * i, 2 * j + 1) = -im;
      out(2 * i + 1, 2 * j) = im;
      out(2 * i + 1, 2 * j + 1) = re;
    }
  }
  return out;
}

Vec lift_vector(const CVec& x) {
  Vec out(2 * x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[2 * i] = x[i].real();
    out[2 * i + 1] = x[i].imag();
  }
  return out;
}

CVec unlift_vector(const Vec& x) {
  if (x.size() % 2 != 0) {
    throw std::invalid_argument("unlift: odd-length real vector");
  }
  CVec out(x.size() / 2);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = cplx(x[2 * i], x[2 * i + 1]);
  }
  return out;
}

RealLift lift_qf_matrix(const CMat& a_qf, int N, int R) {
  if (a_qf.cols() != static_cast<Eigen::Index>(N) * R) {
    throw std::invalid_argument("lift: QF matrix must have R*N columns");
  }
  RealLift lift;
  lift.A = lift_matrix(a_qf);
  lift.group_index.resize(2 * static_cast<std::size_t>(N) * R);
  for (std::size_t j = 0; j < lift.group_index.size(); ++j) {
    lift.group_index[j] = static_cast<int>(j / (2 * static_cast<std::size_t>(R)));
  }
  return lift;
}

namespace {

void put_matrix(std::ostream& os, const char* tag, const CMat& m) {
  os << tag << '\n';
  const auto flags = os.flags();
  os.precision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      os << m(r, c).real() << ' ' << m(r, c).imag() << '\n';
    }
  }
  os.flags(flags);
}

CMat get_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  std::string tag;
  is >> tag;
  CMat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      double re = 0, im = 0;
      is >> re >> im;
      m(r, c) = cplx(re, im);
    }
  }
  if (!is) throw std::runtime_error("scenario load: truncated matrix block");
  return m;
}

}  // namespace

void dump_scenario(const Scenario& sc, std::ostream& os) {
  os << "cranuad-scenario-v1\n";
  os << sc.S.rows() << ' ' << sc.S.cols() << ' ' << sc.H.cols() << '\n';
  os.precision(17);
  os << sc.sigma_v2 << '\n';
  os << "lambda\n";
  for (Eigen::Index n = 0; n < sc.lambda.size(); ++n) os << sc.lambda[n] << '\n';
  put_matrix(os, "S", sc.S);
  put_matrix(os, "H", sc.H);
  put_matrix(os, "V", sc.V);
  put_matrix(os, "W", sc.W);
}

Scenario load_scenario(std::istream& is) {
  std::string magic;
  is >> magic;
  if (magic != "cranuad-scenario-v1") {
    throw std::runtime_error("scenario load: unrecognized header");
  }
  Eigen::Index M = 0, N = 0, R = 0;
  is >> M >> N >> R;
  Scenario sc;
  is >> sc.sigma_v2;
  std::string tag;
  is >> tag;
  sc.lambda.resize(N);
  for (Eigen::Index n = 0; n < N; ++n) is >> sc.lambda[n];
  sc.S = get_matrix(is, M, N);
  sc.H = get_matrix(is, N, R);
  sc.V = get_matrix(is, M, R);
  sc.W = get_matrix(is, M, R);
  return sc;
}

}  // namespace cranuad
