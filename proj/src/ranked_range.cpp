#include "paucopt/ranked_range.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace paucopt {

namespace {

void check_l(Index l, Index n, const char* who) {
  if (l < 0 || l > n) throw ValidationError(std::string(who) + ": l out of range");
}

// Descending copy; prefix sums of this order define all top-l values here.
Vector sorted_desc(const Vector& s) {
  Vector t = s;
  std::sort(t.data(), t.data() + t.size(), std::greater<double>());
  return t;
}

double prefix_sum(const Vector& desc, Index l) {
  double acc = 0.0;
  for (Index k = 0; k < l; ++k) acc += desc(k);
  return acc;
}

}  // namespace

PAucRange PAucRange::from_rates(double alpha, double beta, Index n_neg) {
  if (!(alpha >= 0.0 && alpha < beta && beta <= 1.0))
    throw ValidationError("need 0 <= alpha < beta <= 1");
  if (n_neg < 1) throw ValidationError("empty negative pool");
  PAucRange r;
  r.alpha = alpha;
  r.beta = beta;
  const double ma = alpha * static_cast<double>(n_neg);
  const double nb = beta * static_cast<double>(n_neg);
  r.m = std::clamp<Index>(static_cast<Index>(std::llround(ma)), 0, n_neg);
  r.n = std::clamp<Index>(static_cast<Index>(std::llround(nb)), 0, n_neg);
  r.rounded = std::abs(ma - static_cast<double>(r.m)) > 1e-9 ||
              std::abs(nb - static_cast<double>(r.n)) > 1e-9;
  if (r.m >= r.n)
    throw ValidationError("FPR window collapses: m >= n after rounding");
  return r;
}

PAucRange PAucRange::from_indices(Index m, Index n, Index n_neg) {
  if (!(0 <= m && m < n && n <= n_neg)) throw ValidationError("need 0 <= m < n <= N-");
  PAucRange r;
  r.m = m;
  r.n = n;
  r.alpha = static_cast<double>(m) / static_cast<double>(n_neg);
  r.beta = static_cast<double>(n) / static_cast<double>(n_neg);
  return r;
}

double top_l_sum(const Vector& s, Index l) {
  check_l(l, s.size(), "top_l_sum");
  return prefix_sum(sorted_desc(s), l);
}

std::vector<Index> top_l_indices(const Vector& s, Index l) {
  check_l(l, s.size(), "top_l_indices");
  std::vector<Index> idx(static_cast<std::size_t>(s.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::sort(idx.begin(), idx.end(), [&s](Index a, Index b) {
    if (s(a) != s(b)) return s(a) > s(b);
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(l));
  return idx;
}

double ranked_range_sum(const Vector& s, Index m, Index n) {
  if (!(0 <= m && m < n && n <= s.size()))
    throw ValidationError("ranked_range_sum: need 0 <= m < n <= len");
  const Vector desc = sorted_desc(s);
  return prefix_sum(desc, n) - prefix_sum(desc, m);
}

void loss_row(double pos_score, const Vector& neg_scores, Vector& out) {
  out.resize(neg_scores.size());
  for (Index j = 0; j < neg_scores.size(); ++j)
    out(j) = logistic_loss(pos_score - neg_scores(j));
}

Vector positive_scores(const Vector& w, const BinaryDataset& ds) {
  if (w.size() != ds.dim()) throw ValidationError("dimension mismatch");
  return ds.positives * w;
}

Vector negative_scores(const Vector& w, const BinaryDataset& ds) {
  if (w.size() != ds.dim()) throw ValidationError("dimension mismatch");
  return ds.negatives * w;
}

double f_l_pauc(const Vector& w, const BinaryDataset& ds, Index l) {
  check_l(l, ds.n_neg(), "f_l_pauc");
  if (l == 0) return 0.0;
  const Vector ps = positive_scores(w, ds);
  const Vector ns = negative_scores(w, ds);
  Vector row;
  double total = 0.0;
  for (Index i = 0; i < ds.n_pos(); ++i) {
    loss_row(ps(i), ns, row);
    total += top_l_sum(row, l);
  }
  return total;
}

Vector sorr_loss_vector(const Vector& w, const RegressionDataset& ds) {
  Vector s(ds.n());
  for (Index j = 0; j < ds.n(); ++j) s(j) = sorr_sample_loss_value(w, ds, j);
  return s;
}

double f_l_sorr(const Vector& w, const RegressionDataset& ds, Index l) {
  check_l(l, ds.n(), "f_l_sorr");
  if (l == 0) return 0.0;
  return top_l_sum(sorr_loss_vector(w, ds), l);
}

double dual_objective_rows(const Matrix& loss_rows, const Vector& lambda, Index l) {
  if (lambda.size() != loss_rows.rows())
    throw ValidationError("dual_objective: lambda size != row count");
  check_l(l, loss_rows.cols(), "dual_objective");
  double acc = static_cast<double>(l) * lambda.sum();
  for (Index i = 0; i < loss_rows.rows(); ++i)
    for (Index j = 0; j < loss_rows.cols(); ++j)
      acc += std::max(loss_rows(i, j) - lambda(i), 0.0);
  return acc;
}

double dual_objective(const Vector& v, const Vector& lambda, const BinaryDataset& ds, Index l) {
  if (lambda.size() != ds.n_pos()) throw ValidationError("dual_objective: lambda size != N+");
  check_l(l, ds.n_neg(), "dual_objective");
  const Vector ps = positive_scores(v, ds);
  const Vector ns = negative_scores(v, ds);
  double acc = static_cast<double>(l) * lambda.sum();
  for (Index i = 0; i < ds.n_pos(); ++i)
    for (Index j = 0; j < ds.n_neg(); ++j)
      acc += std::max(logistic_loss(ps(i) - ns(j)) - lambda(i), 0.0);
  return acc;
}

LambdaIntervals optimal_lambda_intervals_rows(const Matrix& loss_rows, Index l) {
  const Index cols = loss_rows.cols();
  if (l < 1 || l > cols - 1)
    throw ValidationError("optimal_lambda_intervals: need 1 <= l <= N- - 1");
  LambdaIntervals iv;
  iv.lo.resize(loss_rows.rows());
  iv.hi.resize(loss_rows.rows());
  Vector row(cols);
  for (Index i = 0; i < loss_rows.rows(); ++i) {
    row = loss_rows.row(i);
    std::sort(row.data(), row.data() + cols, std::greater<double>());
    iv.hi(i) = row(l - 1);  // l-th largest
    iv.lo(i) = row(l);      // (l+1)-th largest
  }
  return iv;
}

LambdaIntervals optimal_lambda_intervals(const Vector& v, const BinaryDataset& ds, Index l) {
  const Vector ps = positive_scores(v, ds);
  const Vector ns = negative_scores(v, ds);
  Matrix rows(ds.n_pos(), ds.n_neg());
  Vector row;
  for (Index i = 0; i < ds.n_pos(); ++i) {
    loss_row(ps(i), ns, row);
    rows.row(i) = row;
  }
  return optimal_lambda_intervals_rows(rows, l);
}

double dc_objective(const Vector& w, const BinaryDataset& ds, const PAucRange& r) {
  if (r.n > ds.n_neg()) throw ValidationError("range exceeds negative pool");
  const Vector ps = positive_scores(w, ds);
  const Vector ns = negative_scores(w, ds);
  Vector row;
  double total = 0.0;
  for (Index i = 0; i < ds.n_pos(); ++i) {
    loss_row(ps(i), ns, row);
    std::sort(row.data(), row.data() + row.size(), std::greater<double>());
    total += prefix_sum(row, r.n) - prefix_sum(row, r.m);
  }
  return total;
}

double dc_objective_normalized(const Vector& w, const BinaryDataset& ds, const PAucRange& r) {
  const double denom = static_cast<double>(ds.n_pos()) * static_cast<double>(r.n - r.m);
  return dc_objective(w, ds, r) / denom;
}

double dc_objective_sorr(const Vector& w, const RegressionDataset& ds, Index m, Index n) {
  return f_l_sorr(w, ds, n) - f_l_sorr(w, ds, m);
}

double dc_objective_sorr_normalized(const Vector& w, const RegressionDataset& ds, Index m, Index n) {
  return dc_objective_sorr(w, ds, m, n) / static_cast<double>(n - m);
}

Vector initial_lambda(const Vector& w, const BinaryDataset& ds, Index l) {
  check_l(l, ds.n_neg(), "initial_lambda");
  const Vector ps = positive_scores(w, ds);
  const Vector ns = negative_scores(w, ds);
  Vector lam(ds.n_pos());
  Vector row;
  for (Index i = 0; i < ds.n_pos(); ++i) {
    loss_row(ps(i), ns, row);
    std::sort(row.data(), row.data() + row.size(), std::greater<double>());
    lam(i) = row(l == 0 ? 0 : l - 1);
  }
  return lam;
}

double initial_lambda_sorr(const Vector& w, const RegressionDataset& ds, Index l) {
  check_l(l, ds.n(), "initial_lambda_sorr");
  Vector s = sorr_loss_vector(w, ds);
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  return s(l == 0 ? 0 : l - 1);
}

}  // namespace paucopt
