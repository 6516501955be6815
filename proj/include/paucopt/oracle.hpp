// Reference implementations used by tests and certification: an independent
// selection-based top-l, deterministic high-precision proximal points, Moreau
// envelope values, and exhaustive minibatch enumeration.
#pragma once

#include "paucopt/dataset.hpp"
#include "paucopt/surrogate.hpp"

namespace paucopt {

struct OracleReport {
  bool converged = false;
  double gap_bound = 0.0;  // certified bound on ||v - v*|| at exit
  long iterations = 0;
};

struct ProxOracleResult {
  Vector v;
  OracleReport report;
};

// Sum of the l largest entries via selection (nth_element), independent of
// the sort-based implementation in ranked_range.
double top_l_sum_select(const Vector& s, Index l);

// argmin_v f^l(v) + ||v - w||^2 / (2 mu), solved deterministically to
// ||v - v*|| <= tol: subgradient burn-in, then Newton steps on the smooth
// restriction given by the current top-l index sets. The stopping certificate
// is ||g|| / (1/mu - rho) with g the minimum-norm evaluated subgradient of
// the prox objective. Requires mu * rho < 1.
// `init` warm-starts the solve; the default start is the anchor w.
ProxOracleResult prox_point_exact(const Vector& w, const BinaryDataset& ds, Index l, double mu,
                                  double tol = 1e-8, long max_iterations = 200000,
                                  const Vector* init = nullptr);
ProxOracleResult prox_point_exact_sorr(const Vector& w, const RegressionDataset& ds, Index l,
                                       double mu, double tol = 1e-8,
                                       long max_iterations = 200000,
                                       const Vector* init = nullptr);

// f^l_mu(w): the prox objective evaluated at the oracle prox point.
// Throws ValidationError on oracle non-convergence unless allow_unconverged.
double moreau_value(const Vector& w, const BinaryDataset& ds, Index l, double mu,
                    double tol = 1e-8, long max_iterations = 200000,
                    bool allow_unconverged = false);
double moreau_value_sorr(const Vector& w, const RegressionDataset& ds, Index l, double mu,
                         double tol = 1e-8, long max_iterations = 200000,
                         bool allow_unconverged = false);

// sum_ij grad s_ij(v) 1(s_ij(v) > lambda_i): the full primal subgradient the
// minibatch estimator is unbiased for.
Vector full_indicator_subgradient(const BinaryDataset& ds, const Vector& v, const Vector& lambda);

// Exact mean of the SBCD primal estimator over every (I, J)-subset pair.
// Enumeration guard: N+ <= 4, N- <= 6.
Vector enumerate_minibatch_mean(const BinaryDataset& ds, const Vector& lambda, const Vector& v,
                                Index subset_pos, Index subset_neg);

}  // namespace paucopt
