// Stochastic inner solvers for the proximal-point subproblem
//   min_{v, lambda} g^l(v, lambda) + ||v - w||^2 / (2 mu):
// block coordinate descent over (v, lambda_i) for the pairwise loss, and its
// scalar-lambda specialization for the per-sample (SoRR) loss.
#pragma once

#include "paucopt/dataset.hpp"
#include "paucopt/ranked_range.hpp"

#include <vector>

namespace paucopt {

struct ProxProblem {
  Vector anchor;     // w, the proximal center
  double mu = 0.0;   // smoothing parameter, > 0
  Index l = 0;       // top-l rank of the dual objective
  double rho = 0.0;  // weak-convexity modulus bound; mu * rho < 1 certifies
                     // joint convexity of the subproblem
};

struct SbcdSchedule {
  Index iterations = 1;  // T
  double eta = 0.0;      // primal step
  double theta = 0.0;    // dual step
  Index batch_pos = 1;   // I
  Index batch_neg = 1;   // J
  // Constant steps by default (the analyzed schedule); diminishing divides
  // both by (t + 2), the usual strongly-convex decay.
  bool diminishing = false;
  // The SoRR listing updates lambda with the primal step size; kept
  // switchable, default mirrors the pairwise algorithm (theta).
  bool lambda_step_uses_eta = false;
};

struct ProxResult {
  Vector v_bar;        // uniform average of iterates 0..T-1
  Vector lambda_bar;   // same averaging for the dual block
  Vector v_last;       // final iterate, for diagnostics
  Vector lambda_last;
  std::vector<double> objective_trace;  // per-iterate subproblem value when requested
  bool theory_valid = false;            // mu * rho < 1 held
};

// Closed-form minimizer of G'v + ||v - w||^2/(2 mu) + ||v - v_t||^2/(2 eta),
// written centered on w so a zero subgradient at v_t == w is an exact fixed
// point.
inline Vector prox_primal_step(const Vector& w, const Vector& v_t, const Vector& g, double mu,
                               double eta) {
  return w + (mu * (v_t - w) - mu * eta * g) / (eta + mu);
}

ProxResult sbcd_solve(const BinaryDataset& ds, const ProxProblem& prob, const Vector& init_lambda,
                      const SbcdSchedule& sched, Rng& rng, bool record_objective = false);

ProxResult sgd_solve_sorr(const RegressionDataset& ds, const ProxProblem& prob,
                          double init_lambda, const SbcdSchedule& sched, Rng& rng,
                          bool record_objective = false);

}  // namespace paucopt
