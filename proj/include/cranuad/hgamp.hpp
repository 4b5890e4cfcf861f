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

#include "cranuad/gamp.hpp"

namespace cranuad {

// Nonoverlapping groups over the real coordinates; all coordinates of one
// group belong to the same UE (2R of them for the joint system, 2 for a
// single-RRH system).
struct GroupStructure {
  std::vector<std::vector<int>> groups;
  std::vector<int> xi;  // coordinate -> group index

  void validate(Eigen::Index n_coords) const;
};

GroupStructure make_contiguous_groups(Eigen::Index n_groups,
                                      Eigen::Index group_size);

struct PosteriorSummary {
  Vec llr;        // per-UE activity LLR
  Vec rho_final;  // per-coordinate sparsity levels at termination
  bool converged = false;
  int iterations = 0;
};

struct SparsityUpdate {
  Vec rho_next;   // per coordinate
  Vec group_llr;  // per group
};

// Group stage of an iteration. Per coordinate j of group n, with messages
// m_k = coord_llr(r_k, v_r_k), the next sparsity level is the logistic of the
// leave-one-out sum log(p/(1-p)) + sum_{k != j} m_k. The returned group LLR
// is the full sum log(p/(1-p)) + sum_k m_k, i.e. the sum-product belief at
// the group node, so l_leave_j + m_j = l_n for every member.
SparsityUpdate sparsity_update(const Vec& r_hat, const Vec& v_r,
                               const GroupStructure& gs, double p,
                               const GampOptions& opts = {});

// Hybrid GAMP: alternates one basic-GAMP stage with one sparsity stage until
// the x_hat stopping rule fires (tested after both stages). Divergence is
// propagated to the caller; there is no silent fallback.
PosteriorSummary hgamp_run(const LinearOperator& op, const OutputChannel& ch,
                           const GroupStructure& gs, double p,
                           const GampOptions& opts = {});

}  // namespace cranuad
