// Linear scorer and the smooth surrogate losses with their constants.
//
// Two surrogates ship: the logistic pairwise loss l(z) = log(1 + exp(-z))
// on score differences z = w.x+ - w.x-, and the sigmoid cross-entropy
// per-sample loss for {0,1} targets. All loss math lives here; swapping in
// another smooth non-increasing surrogate means extending this module only.
#pragma once

#include "paucopt/common.hpp"
#include "paucopt/dataset.hpp"

namespace paucopt {

struct PairIndex {
  Index i = 0;  // positive row
  Index j = 0;  // negative row
};

// L bounds the gradient Lipschitz constant of a single pair/sample loss,
// B its gradient norm; rho = N+ * N- * L is the weak-convexity modulus of
// the top-l sums built from these losses.
struct SmoothnessConstants {
  double L = 0.0;
  double B = 0.0;
  double rho = 0.0;
};

// log(1 + exp(-z)), branch-safe for |z| large.
double logistic_loss(double z);
// d/dz logistic_loss = -sigmoid(-z), in (-1, 0).
double logistic_loss_slope(double z);
// Inverse of logistic_loss on (0, inf): returns z with logistic_loss(z) = y.
// y <= 0 yields +inf (the loss is always positive).
double logistic_loss_invert(double y);
double sigmoid(double z);

// Strict indicator 1(logistic_loss(z) > lambda) given the precomputed
// threshold zthr = logistic_loss_invert(lambda). The margin comparison is
// cheap; inside the inverse's round-trip uncertainty band the exact strict
// test decides, so boundary cases (lambda at a loss order statistic) behave
// identically to a direct evaluation.
inline bool logistic_loss_above(double z, double zthr, double lambda) {
  const double band = 1e-9 * (1.0 + (zthr < 0 ? -zthr : zthr));
  if (z < zthr - band) return true;
  if (z > zthr + band) return false;
  return logistic_loss(z) > lambda;
}

double score(const Vector& w, const Eigen::Ref<const Vector>& x);

double pair_z(const Vector& w, const BinaryDataset& ds, PairIndex p);
double pair_loss(const Vector& w, const BinaryDataset& ds, PairIndex p);
Vector pair_loss_grad(const Vector& w, const BinaryDataset& ds, PairIndex p);

// Sigmoid cross-entropy of sample j and its gradient (sigmoid(w.x) - y) x.
// Requires y in {0,1}.
double sorr_sample_loss_value(const Vector& w, const RegressionDataset& ds, Index j);
std::pair<double, Vector> sorr_sample_loss(const Vector& w, const RegressionDataset& ds, Index j);

// Exact max over pairs of ||x+ - x-||: L = max^2 / 4 (|l''| <= 1/4),
// B = max (|l'| < 1). O(N+ N- d); desk scale by design.
SmoothnessConstants estimate_constants(const BinaryDataset& ds);
SmoothnessConstants estimate_constants(const RegressionDataset& ds);

}  // namespace paucopt
