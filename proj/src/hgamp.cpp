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
#include "cranuad/hgamp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cranuad/mathutil.hpp"

namespace cranuad {

void GroupStructure::validate(Eigen::Index n_coords) const {
  std::vector<char> seen(static_cast<std::size_t>(n_coords), 0);
  if (xi.size() != static_cast<std::size_t>(n_coords)) {
    throw std::invalid_argument("groups: xi must cover all coordinates");
  }
  for (std::size_t n = 0; n < groups.size(); ++n) {
    for (int j : groups[n]) {
      if (j < 0 || j >= n_coords || seen[j]) {
        throw std::invalid_argument("groups: not a disjoint cover");
      }
      if (xi[j] != static_cast<int>(n)) {
        throw std::invalid_argument("groups: xi inconsistent with groups");
      }
      seen[j] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("groups: coordinates left uncovered");
  }
}

GroupStructure make_contiguous_groups(Eigen::Index n_groups,
                                      Eigen::Index group_size) {
  GroupStructure gs;
  gs.groups.resize(n_groups);
  gs.xi.resize(static_cast<std::size_t>(n_groups * group_size));
  for (Eigen::Index n = 0; n < n_groups; ++n) {
    gs.groups[n].resize(group_size);
    for (Eigen::Index k = 0; k < group_size; ++k) {
      const auto j = n * group_size + k;
      gs.groups[n][k] = static_cast<int>(j);
      gs.xi[j] = static_cast<int>(n);
    }
  }
  return gs;
}

SparsityUpdate sparsity_update(const Vec& r_hat, const Vec& v_r,
                               const GroupStructure& gs, double p,
                               const GampOptions& opts) {
  SparsityUpdate out;
  out.rho_next.resize(r_hat.size());
  out.group_llr.resize(static_cast<Eigen::Index>(gs.groups.size()));
  const double prior = log_odds(p);
  Vec msg(r_hat.size());
  for (Eigen::Index j = 0; j < r_hat.size(); ++j) {
    msg[j] = std::clamp(coord_llr(r_hat[j], v_r[j]), -opts.llr_clamp,
                        opts.llr_clamp);
  }
  for (std::size_t n = 0; n < gs.groups.size(); ++n) {
    double total = 0.0;
    for (int j : gs.groups[n]) total += msg[j];
    out.group_llr[static_cast<Eigen::Index>(n)] = prior + total;
    for (int j : gs.groups[n]) {
      const double leave_one_out = prior + total - msg[j];
      const double rho =
          logistic(std::clamp(leave_one_out, -opts.llr_clamp, opts.llr_clamp));
      out.rho_next[j] = std::clamp(rho, opts.rho_clamp, 1.0 - opts.rho_clamp);
    }
  }
  return out;
}

PosteriorSummary hgamp_run(const LinearOperator& op, const OutputChannel& ch,
                           const GroupStructure& gs, double p,
                           const GampOptions& opts) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("hgamp: p must lie in (0,1)");
  }
  if (ch.size() != op.rows()) {
    throw std::invalid_argument("hgamp: channel/operator size mismatch");
  }
  if (opts.max_iters < 1) {
    throw std::invalid_argument("hgamp: max_iters must be >= 1");
  }
  gs.validate(op.cols());

  GampState st = init_gamp_state(op.cols(), op.rows(), p);
  PosteriorSummary summary;
  Vec x_prev = st.x_hat;
  for (int t = 0; t < opts.max_iters; ++t) {
    gamp_iterate(st, op, ch, opts);
    const SparsityUpdate su = sparsity_update(st.r_hat, st.v_r, gs, p, opts);
    st.rho_hat = su.rho_next;
    summary.llr = su.group_llr;

    const double residual =
        (st.x_hat - x_prev).norm() / std::max(st.x_hat.norm(), 1e-12);
    if (opts.trace) {
      *opts.trace << st.iter << ',' << residual << ',' << st.rho_hat.mean()
                  << '\n';
    }
    summary.iterations = st.iter;
    if (residual < opts.tol) {
      summary.converged = true;
      break;
    }
    x_prev = st.x_hat;
  }
  summary.rho_final = st.rho_hat;
  return summary;
}

}  // namespace cranuad
