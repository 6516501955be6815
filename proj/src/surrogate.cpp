#include "paucopt/surrogate.hpp"

#include <cmath>
#include <limits>

namespace paucopt {

namespace {

void check_pair(const BinaryDataset& ds, PairIndex p) {
  if (p.i < 0 || p.i >= ds.n_pos() || p.j < 0 || p.j >= ds.n_neg())
    throw ValidationError("pair index out of range");
}

double check_target(double y) {
  if (y != 0.0 && y != 1.0) throw ValidationError("SoRR target must be 0 or 1");
  return y;
}

}  // namespace

double logistic_loss(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double logistic_loss_slope(double z) { return -sigmoid(-z); }

double logistic_loss_invert(double y) {
  if (!(y > 0.0)) return std::numeric_limits<double>::infinity();
  return -std::log(std::expm1(y));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double score(const Vector& w, const Eigen::Ref<const Vector>& x) {
  if (w.size() != x.size()) throw ValidationError("score: dimension mismatch");
  return w.dot(x);
}

double pair_z(const Vector& w, const BinaryDataset& ds, PairIndex p) {
  check_pair(ds, p);
  if (w.size() != ds.dim()) throw ValidationError("pair_z: dimension mismatch");
  return ds.positives.row(p.i).dot(w) - ds.negatives.row(p.j).dot(w);
}

double pair_loss(const Vector& w, const BinaryDataset& ds, PairIndex p) {
  return logistic_loss(pair_z(w, ds, p));
}

Vector pair_loss_grad(const Vector& w, const BinaryDataset& ds, PairIndex p) {
  const double c = logistic_loss_slope(pair_z(w, ds, p));
  return c * (ds.positives.row(p.i) - ds.negatives.row(p.j)).transpose();
}

double sorr_sample_loss_value(const Vector& w, const RegressionDataset& ds, Index j) {
  if (j < 0 || j >= ds.n()) throw ValidationError("sample index out of range");
  const double y = check_target(ds.targets(j));
  const double u = ds.features.row(j).dot(w);
  // CE(sigmoid(u), y) reduces to the logistic loss of a signed margin.
  return logistic_loss(y == 1.0 ? u : -u);
}

std::pair<double, Vector> sorr_sample_loss(const Vector& w, const RegressionDataset& ds, Index j) {
  const double value = sorr_sample_loss_value(w, ds, j);
  const double y = ds.targets(j);
  const double u = ds.features.row(j).dot(w);
  Vector grad = (sigmoid(u) - y) * ds.features.row(j).transpose();
  return {value, std::move(grad)};
}

SmoothnessConstants estimate_constants(const BinaryDataset& ds) {
  validate(ds);
  double max_sq = 0.0;
  for (Index i = 0; i < ds.n_pos(); ++i)
    for (Index j = 0; j < ds.n_neg(); ++j)
      max_sq = std::max(max_sq, (ds.positives.row(i) - ds.negatives.row(j)).squaredNorm());
  SmoothnessConstants c;
  c.L = max_sq / 4.0;
  c.B = std::sqrt(max_sq);
  c.rho = static_cast<double>(ds.n_pos()) * static_cast<double>(ds.n_neg()) * c.L;
  return c;
}

SmoothnessConstants estimate_constants(const RegressionDataset& ds) {
  validate(ds);
  double max_sq = 0.0;
  for (Index j = 0; j < ds.n(); ++j) max_sq = std::max(max_sq, ds.features.row(j).squaredNorm());
  SmoothnessConstants c;
  c.L = max_sq / 4.0;
  c.B = std::sqrt(max_sq);
  c.rho = static_cast<double>(ds.n()) * c.L;
  return c;
}

}  // namespace paucopt
