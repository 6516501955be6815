// Difference-of-convex baselines for the same objective: classic DCA
// (linearize f^m, solve the convex surrogate stochastically, keep the last
// iterate) and its proximal variant with an extra quadratic anchored at the
// current outer iterate.
#pragma once

#include "paucopt/agd.hpp"

namespace paucopt {

struct DcaConfig {
  int outer_iterations = 20;   // K
  double t_growth = 100.0;     // C in T = C (k+1)^2
  double step_c = 1.0;         // c in eta_t = c/((k+1) N+ N-), theta_t = c/((k+1) N-)
  double l_prox = 0.0;         // proximal weight; 0 recovers plain DCA
  Index batch_pos = 100;       // I, clamped to N+
  Index batch_neg = 100;       // J, clamped to N-
  double max_epochs = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

struct DcaResult {
  Vector w_final;  // last iterate, as the subproblem solver is specified
  Vector w_best;   // best training pAUC along the trace, for reporting
  int best_k = 0;
  double best_pauc = 0.0;
  RunTrace trace;
};

// Deterministic subgradient of f^m at w: the gradient sum over each row's
// top-m pairs, ties broken lowest-index-first.
Vector dca_subgradient_fm(const Vector& w, const BinaryDataset& ds, Index m);

DcaResult dca_run(const BinaryDataset& ds, const PAucRange& r, const DcaConfig& cfg,
                  const Vector& w0);

// Same loop with the subproblem augmented by (L/2)||w - w^(k)||^2, handled by
// the closed-form proximal primal step. l_prox == 0 runs the identical plain
// update path as dca_run.
DcaResult prox_dca_run(const BinaryDataset& ds, const PAucRange& r, const DcaConfig& cfg,
                       const Vector& w0);

}  // namespace paucopt
