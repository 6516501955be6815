// Top-l and ranked-range primitives, the dual threshold objective, and the
// DC objectives for both the pairwise (pAUC) and per-sample (SoRR) losses.
#pragma once

#include "paucopt/dataset.hpp"
#include "paucopt/surrogate.hpp"

#include <vector>

namespace paucopt {

// FPR window [alpha, beta] mapped to negative ranks m = N-*alpha, n = N-*beta.
// Non-integer products are rounded to the nearest rank (flagged in `rounded`)
// and clamped to [0, N-]; m < n is required.
struct PAucRange {
  double alpha = 0.0;
  double beta = 1.0;
  Index m = 0;
  Index n = 0;
  bool rounded = false;

  static PAucRange from_rates(double alpha, double beta, Index n_neg);
  static PAucRange from_indices(Index m, Index n, Index n_neg);
};

// Per-positive-row interval of dual thresholds minimizing g^l(v, .):
// [lo_i, hi_i] = [(l+1)-th largest of S_i(v), l-th largest of S_i(v)].
struct LambdaIntervals {
  Vector lo;
  Vector hi;
};

// Sum of the l largest entries. The value is tie-invariant; index selection
// elsewhere breaks ties lowest-index-first.
double top_l_sum(const Vector& s, Index l);

// Indices of the l largest entries, ties broken by lower index.
std::vector<Index> top_l_indices(const Vector& s, Index l);

// Sum of the (m+1)-th through n-th largest entries.
double ranked_range_sum(const Vector& s, Index m, Index n);

// Row of pairwise losses S_i(w) = (l(w.x_i+ - w.x_j-))_j, given precomputed
// scores. Shared by the objective evaluations below.
void loss_row(double pos_score, const Vector& neg_scores, Vector& out);

Vector positive_scores(const Vector& w, const BinaryDataset& ds);
Vector negative_scores(const Vector& w, const BinaryDataset& ds);

// f^l(w) = sum_i top_l(S_i(w)). O(N+ N- (d + log N-)).
double f_l_pauc(const Vector& w, const BinaryDataset& ds, Index l);

// SoRR instantiation: the single row S(w) of per-sample losses.
Vector sorr_loss_vector(const Vector& w, const RegressionDataset& ds);
double f_l_sorr(const Vector& w, const RegressionDataset& ds, Index l);

// g^l(v, lambda) = l 1'lambda + sum_ij [s_ij(v) - lambda_i]_+.
double dual_objective(const Vector& v, const Vector& lambda, const BinaryDataset& ds, Index l);
// Same on explicit loss rows (one row per positive sample).
double dual_objective_rows(const Matrix& loss_rows, const Vector& lambda, Index l);

// Requires 1 <= l <= N- - 1; at l = N- the optimal set is a half-line.
LambdaIntervals optimal_lambda_intervals(const Vector& v, const BinaryDataset& ds, Index l);
LambdaIntervals optimal_lambda_intervals_rows(const Matrix& loss_rows, Index l);

// F(w) = f^n(w) - f^m(w), and the trained-loss normalization F / (N+ (n-m)).
double dc_objective(const Vector& w, const BinaryDataset& ds, const PAucRange& r);
double dc_objective_normalized(const Vector& w, const BinaryDataset& ds, const PAucRange& r);

double dc_objective_sorr(const Vector& w, const RegressionDataset& ds, Index m, Index n);
double dc_objective_sorr_normalized(const Vector& w, const RegressionDataset& ds, Index m, Index n);

// Per-row l-th largest loss at w; the default dual warm start (row max for
// l = 0, covering the degenerate branch).
Vector initial_lambda(const Vector& w, const BinaryDataset& ds, Index l);
double initial_lambda_sorr(const Vector& w, const RegressionDataset& ds, Index l);

}  // namespace paucopt
