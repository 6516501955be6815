#include "paucopt/oracle.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace paucopt {

namespace {

// Pairwise (pAUC) instantiation: rows i over positives, columns j over
// negatives, s_ij = l(ps_i - ns_j), direction x_i+ - x_j-.
struct PaucSurface {
  const BinaryDataset& ds;
  Vector ps, ns;

  Index rows() const { return ds.n_pos(); }
  Index cols() const { return ds.n_neg(); }
  Index dim() const { return ds.dim(); }

  void refresh(const Vector& v) {
    ps = ds.positives * v;
    ns = ds.negatives * v;
  }
  double loss(Index i, Index j) const { return logistic_loss(ps(i) - ns(j)); }
  double grad_coeff(Index i, Index j) const { return logistic_loss_slope(ps(i) - ns(j)); }
  double hess_coeff(Index i, Index j) const {
    const double s = sigmoid(ns(j) - ps(i));
    return s * (1.0 - s);
  }
  void add_dir(Index i, Index j, double c, Vector& acc) const {
    acc.noalias() += c * (ds.positives.row(i) - ds.negatives.row(j)).transpose();
  }
  void add_outer(Index i, Index j, double c, Matrix& h) const {
    const Vector d = (ds.positives.row(i) - ds.negatives.row(j)).transpose();
    h.noalias() += c * d * d.transpose();
  }
  double rho() const { return estimate_constants(ds).rho; }
};

// Per-sample (SoRR) instantiation: a single row over samples.
struct SorrSurface {
  const RegressionDataset& ds;
  Vector u;

  Index rows() const { return 1; }
  Index cols() const { return ds.n(); }
  Index dim() const { return ds.dim(); }

  void refresh(const Vector& v) { u = ds.features * v; }
  double loss(Index, Index j) const {
    return logistic_loss(ds.targets(j) == 1.0 ? u(j) : -u(j));
  }
  double grad_coeff(Index, Index j) const { return sigmoid(u(j)) - ds.targets(j); }
  double hess_coeff(Index, Index j) const {
    const double s = sigmoid(u(j));
    return s * (1.0 - s);
  }
  void add_dir(Index, Index j, double c, Vector& acc) const {
    acc.noalias() += c * ds.features.row(j).transpose();
  }
  void add_outer(Index, Index j, double c, Matrix& h) const {
    h.noalias() += c * ds.features.row(j).transpose() * ds.features.row(j);
  }
  double rho() const { return estimate_constants(ds).rho; }
};

// Top-l membership of one row, expressed through a dual threshold placed in
// the per-row optimal interval [(l+1)-th, l-th largest value]. With a strict
// gap the threshold is the midpoint and the selection is unique; otherwise
// entries exactly at the threshold carry free mass in [0,1].
struct RowSelection {
  std::vector<Index> fixed;
  std::vector<Index> tied;
  double need = 0.0;
  std::vector<double> q;  // chosen mass for tied entries, |q| == |tied|
};

template <class Surface>
RowSelection select_row(const Surface& surf, Index i, Index l, double tie_band) {
  const Index cols = surf.cols();
  RowSelection sel;
  if (l == 0) return sel;
  std::vector<double> vals(static_cast<std::size_t>(cols));
  for (Index j = 0; j < cols; ++j) vals[static_cast<std::size_t>(j)] = surf.loss(i, j);
  std::vector<double> sorted = vals;
  std::nth_element(sorted.begin(), sorted.begin() + (l - 1), sorted.end(),
                   std::greater<double>());
  const double vl = sorted[static_cast<std::size_t>(l - 1)];

  if (l == cols) {
    for (Index j = 0; j < cols; ++j) sel.fixed.push_back(j);
    return sel;
  }
  double vnext = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < cols; ++j) {
    const double s = vals[static_cast<std::size_t>(j)];
    if (s < vl && s > vnext) vnext = s;
  }
  // vnext is the largest value strictly below vl; the (l+1)-th largest equals
  // either vl (duplicates spill past position l) or vnext
  Index count_ge_vl = 0;
  for (double s : vals)
    if (s >= vl) ++count_ge_vl;

  const double mid = 0.5 * (vl + vnext);
  const bool clean = count_ge_vl == l && vnext < mid && mid < vl &&
                     (vl - vnext) > tie_band * std::max(1.0, std::abs(vl));
  if (clean) {
    for (Index j = 0; j < cols; ++j)
      if (vals[static_cast<std::size_t>(j)] > mid) sel.fixed.push_back(j);
    return sel;
  }
  const double band = tie_band * std::max(1.0, std::abs(vl));
  Index n_fixed = 0;
  for (Index j = 0; j < cols; ++j) {
    const double s = vals[static_cast<std::size_t>(j)];
    if (s > vl + band) {
      sel.fixed.push_back(j);
      ++n_fixed;
    } else if (s >= vl - band) {
      sel.tied.push_back(j);
    }
  }
  sel.need = static_cast<double>(l - n_fixed);
  sel.q.assign(sel.tied.size(), sel.need / static_cast<double>(sel.tied.size()));
  return sel;
}

template <class Surface>
double f_l_value(const Surface& surf, Index l) {
  double total = 0.0;
  Vector row(surf.cols());
  for (Index i = 0; i < surf.rows(); ++i) {
    for (Index j = 0; j < surf.cols(); ++j) row(j) = surf.loss(i, j);
    total += top_l_sum_select(row, l);
  }
  return total;
}

// Subgradient of the prox objective for the given selections; the tied mass
// is then refined by accelerated projected gradient to approach the
// minimum-norm element over the exact subdifferential.
template <class Surface>
Vector selection_gradient(const Surface& surf, std::vector<RowSelection>& sels, const Vector& v,
                          const Vector& w, double mu, bool refine_q) {
  const Index d = surf.dim();
  Vector base = (v - w) / mu;
  std::vector<std::pair<Index, Index>> free_cols;
  std::vector<double> q;
  for (Index i = 0; i < surf.rows(); ++i) {
    auto& sel = sels[static_cast<std::size_t>(i)];
    for (Index j : sel.fixed) surf.add_dir(i, j, surf.grad_coeff(i, j), base);
    for (std::size_t b = 0; b < sel.tied.size(); ++b) {
      free_cols.emplace_back(i, sel.tied[b]);
      q.push_back(sel.q[b]);
    }
  }
  if (free_cols.empty()) return base;

  const Index nq = static_cast<Index>(q.size());
  Matrix dirs(d, nq);
  for (Index c = 0; c < nq; ++c) {
    Vector col = Vector::Zero(d);
    const auto [i, j] = free_cols[static_cast<std::size_t>(c)];
    surf.add_dir(i, j, surf.grad_coeff(i, j), col);
    dirs.col(c) = col;
  }

  Vector qv = Eigen::Map<Vector>(q.data(), nq);
  if (refine_q && nq > 0) {
    // Exact pairwise-exchange coordinate descent: moving mass between two
    // tied entries of one row keeps the row sum fixed, and the 1-D exchange
    // subproblem has a closed box-clamped minimizer. The within-row exchanges
    // span every feasible direction of the product polytope.
    Vector g = base + dirs * qv;
    std::vector<std::pair<Index, Index>> row_span;  // [begin, end) into qv per row
    {
      Index at = 0;
      for (Index i = 0; i < surf.rows(); ++i) {
        const Index len = static_cast<Index>(sels[static_cast<std::size_t>(i)].tied.size());
        row_span.emplace_back(at, at + len);
        at += len;
      }
    }
    for (int sweep = 0; sweep < 400; ++sweep) {
      double improved = 0.0;
      for (const auto& [begin, end] : row_span) {
        for (Index a = begin; a < end; ++a) {
          for (Index b = a + 1; b < end; ++b) {
            const Vector diff = dirs.col(a) - dirs.col(b);
            const double denom = diff.squaredNorm();
            if (denom < 1e-30) continue;
            double step = -g.dot(diff) / denom;
            const double max_up = std::min(1.0 - qv(a), qv(b));
            const double max_dn = std::min(qv(a), 1.0 - qv(b));
            step = std::clamp(step, -max_dn, max_up);
            if (step == 0.0) continue;
            qv(a) += step;
            qv(b) -= step;
            g.noalias() += step * diff;
            improved += std::abs(step);
          }
        }
      }
      if (improved < 1e-16) break;
    }
    std::size_t at = 0;
    for (Index i = 0; i < surf.rows(); ++i) {
      auto& sel = sels[static_cast<std::size_t>(i)];
      for (std::size_t b = 0; b < sel.tied.size(); ++b)
        sel.q[b] = qv(static_cast<Index>(at + b));
      at += sel.tied.size();
    }
    return g;
  }
  return base + dirs * qv;
}

// Weak-duality lower bound: for any feasible dual weights p (built from a
// selection: fixed entries 1, tied entries their mass), the smooth problem
// min_v sum p_ij s_ij(v) + ||v - w||^2/(2 mu) minorizes the prox objective.
// Solved by damped Newton; the residual gradient norm converts to a value
// slack through the quadratic's 1/mu strong convexity.
template <class Surface>
double dual_lower_bound(Surface& surf, const std::vector<RowSelection>& sels, const Vector& v0,
                        const Vector& w, double mu, Vector& v_out) {
  const Index d = surf.dim();
  Vector v = v0;
  double grad_norm = 0.0;
  for (int it = 0; it < 60; ++it) {
    surf.refresh(v);
    Vector g = (v - w) / mu;
    Matrix h = Matrix::Identity(d, d) / mu;
    for (Index i = 0; i < surf.rows(); ++i) {
      const auto& sel = sels[static_cast<std::size_t>(i)];
      for (Index j : sel.fixed) {
        surf.add_dir(i, j, surf.grad_coeff(i, j), g);
        surf.add_outer(i, j, surf.hess_coeff(i, j), h);
      }
      for (std::size_t b = 0; b < sel.tied.size(); ++b) {
        const double qw = sel.q[b];
        if (qw <= 0.0) continue;
        surf.add_dir(i, sel.tied[b], qw * surf.grad_coeff(i, sel.tied[b]), g);
        surf.add_outer(i, sel.tied[b], qw * surf.hess_coeff(i, sel.tied[b]), h);
      }
    }
    grad_norm = g.norm();
    if (grad_norm < 1e-13) break;
    v -= Eigen::LLT<Matrix>(h).solve(g);
  }
  surf.refresh(v);
  double value = (v - w).squaredNorm() / (2.0 * mu);
  for (Index i = 0; i < surf.rows(); ++i) {
    const auto& sel = sels[static_cast<std::size_t>(i)];
    for (Index j : sel.fixed) value += surf.loss(i, j);
    for (std::size_t b = 0; b < sel.tied.size(); ++b)
      value += sel.q[b] * surf.loss(i, sel.tied[b]);
  }
  v_out = v;
  return value - 0.5 * mu * grad_norm * grad_norm;
}

template <class Surface>
ProxOracleResult prox_exact_impl(Surface& surf, const Vector& w, Index l, double mu, double tol,
                                 long max_iterations, const Vector* init) {
  if (!(mu > 0.0)) throw ValidationError("prox oracle: mu must be > 0");
  if (l < 0 || l > surf.cols()) throw ValidationError("prox oracle: l out of range");
  const double rho = surf.rho();
  if (!(mu * rho < 1.0))
    throw ValidationError("prox oracle: mu * rho >= 1, subproblem not certifiably convex");
  const double sigma = 1.0 / mu - rho;

  ProxOracleResult res;
  if (l == 0) {  // pure quadratic
    res.v = w;
    res.report = {true, 0.0, 0};
    return res;
  }

  const Index d = surf.dim();
  Vector v = init != nullptr ? *init : w;
  if (init != nullptr && init->size() != d) throw ValidationError("prox oracle: bad init size");

  auto objective = [&](const Vector& point) {
    surf.refresh(point);
    return f_l_value(surf, l) + (point - w).squaredNorm() / (2.0 * mu);
  };

  // Certificates use exact ties only (sound); steps use a widened tie band so
  // the direction can travel along near-kink crossing planes, where pAUC
  // optima routinely sit (negative ranks swap on hyperplanes shared by all
  // rows).
  constexpr double kStepBand = 1e-9;

  std::vector<RowSelection> sels_step;
  Vector g_cert(d), g_step(d);
  long iters = 0;
  double gap = std::numeric_limits<double>::infinity();

  auto eval_state = [&]() {
    surf.refresh(v);
    std::vector<RowSelection> sels_cert;
    for (Index i = 0; i < surf.rows(); ++i) sels_cert.push_back(select_row(surf, i, l, 0.0));
    g_cert = selection_gradient(surf, sels_cert, v, w, mu, true);
    sels_step.clear();
    for (Index i = 0; i < surf.rows(); ++i)
      sels_step.push_back(select_row(surf, i, l, kStepBand));
    g_step = selection_gradient(surf, sels_step, v, w, mu, true);
    gap = g_cert.norm() / sigma;
  };

  // Weak-duality value certificate; also returns the dual solve's minimizer,
  // which is an excellent jump candidate at kink optima.
  struct DualProbe {
    double distance;
    Vector v_dual;
  };
  auto dual_probe = [&]() {
    const double p_here = objective(v);
    DualProbe best{std::numeric_limits<double>::infinity(), v};
    for (double band : {1e-12, 1e-9, 1e-6}) {
      surf.refresh(v);
      std::vector<RowSelection> wide;
      for (Index i = 0; i < surf.rows(); ++i) wide.push_back(select_row(surf, i, l, band));
      (void)selection_gradient(surf, wide, v, w, mu, true);
      Vector v_dual = v;
      const double lower = dual_lower_bound(surf, wide, v, w, mu, v_dual);
      const double dist = std::sqrt(2.0 * std::max(0.0, p_here - lower) / sigma);
      if (dist < best.distance) best = {dist, v_dual};
    }
    return best;
  };

  eval_state();
  int stalls = 0;
  while (iters < max_iterations && gap > tol) {
    ++iters;
    surf.refresh(v);
    const double p_now = f_l_value(surf, l) + (v - w).squaredNorm() / (2.0 * mu);

    Matrix h = Matrix::Identity(d, d) / mu;
    for (Index i = 0; i < surf.rows(); ++i) {
      const auto& sel = sels_step[static_cast<std::size_t>(i)];
      for (Index j : sel.fixed) surf.add_outer(i, j, surf.hess_coeff(i, j), h);
      for (std::size_t b = 0; b < sel.tied.size(); ++b)
        if (sel.q[b] > 0.0)
          surf.add_outer(i, sel.tied[b], sel.q[b] * surf.hess_coeff(i, sel.tied[b]), h);
    }
    const Vector delta = -Eigen::LLT<Matrix>(h).solve(g_step);
    const double slope = g_step.dot(delta);
    bool moved = false;
    double t = 1.0;
    while (t > 1e-12) {
      const Vector trial = v + t * delta;
      if (objective(trial) <= p_now + 1e-4 * t * slope) {
        v = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }

    if (!moved) {
      // Kink: line-search the steepest (min-norm) direction; the objective is
      // convex along the ray, so golden-section on an expanded bracket works.
      const Vector dir = -g_step;
      double hi = 4.0 / sigma;
      for (int grow = 0; grow < 40; ++grow) {
        if (objective(v + hi * dir) > objective(v + 0.5 * hi * dir)) break;
        hi *= 2.0;
      }
      double lo = 0.0;
      for (int it = 0; it < 90; ++it) {
        const double m1 = lo + 0.381966 * (hi - lo);
        const double m2 = hi - 0.381966 * (hi - lo);
        if (objective(v + m1 * dir) <= objective(v + m2 * dir)) hi = m2;
        else lo = m1;
      }
      const double step = 0.5 * (lo + hi);
      if (objective(v + step * dir) < p_now) {
        v += step * dir;
        moved = true;
      }
    }
    eval_state();

    stalls = moved ? 0 : stalls + 1;
    if (gap > tol && (stalls > 0 || gap < 64.0 * tol || iters % 10 == 0)) {
      const DualProbe probe = dual_probe();
      if (probe.distance <= tol) {
        gap = probe.distance;
        break;
      }
      if (objective(probe.v_dual) < objective(v)) {
        v = probe.v_dual;
        eval_state();
        stalls = 0;
      } else if (stalls >= 3) {  // stuck and the value certificate cannot close
        gap = std::min(gap, probe.distance);
        break;
      }
    }
  }

  res.v = v;
  res.report.converged = gap <= tol;
  res.report.gap_bound = gap;
  res.report.iterations = iters;
  return res;
}

template <class Surface>
double moreau_impl(Surface& surf, const Vector& w, Index l, double mu, double tol,
                   long max_iterations, bool allow_unconverged) {
  Surface local = surf;
  ProxOracleResult r = prox_exact_impl(local, w, l, mu, tol, max_iterations, nullptr);
  if (!r.report.converged && !allow_unconverged)
    throw ValidationError("moreau_value: prox oracle did not converge");
  local.refresh(r.v);
  return f_l_value(local, l) + (r.v - w).squaredNorm() / (2.0 * mu);
}

}  // namespace

double top_l_sum_select(const Vector& s, Index l) {
  if (l < 0 || l > s.size()) throw ValidationError("top_l_sum_select: l out of range");
  if (l == 0) return 0.0;
  std::vector<double> vals(s.data(), s.data() + s.size());
  std::nth_element(vals.begin(), vals.begin() + (l - 1), vals.end(), std::greater<double>());
  std::sort(vals.begin(), vals.begin() + l, std::greater<double>());
  double acc = 0.0;
  for (Index k = 0; k < l; ++k) acc += vals[static_cast<std::size_t>(k)];
  return acc;
}

ProxOracleResult prox_point_exact(const Vector& w, const BinaryDataset& ds, Index l, double mu,
                                  double tol, long max_iterations, const Vector* init) {
  validate(ds);
  PaucSurface surf{ds, {}, {}};
  return prox_exact_impl(surf, w, l, mu, tol, max_iterations, init);
}

ProxOracleResult prox_point_exact_sorr(const Vector& w, const RegressionDataset& ds, Index l,
                                       double mu, double tol, long max_iterations,
                                       const Vector* init) {
  validate(ds);
  SorrSurface surf{ds, {}};
  return prox_exact_impl(surf, w, l, mu, tol, max_iterations, init);
}

double moreau_value(const Vector& w, const BinaryDataset& ds, Index l, double mu, double tol,
                    long max_iterations, bool allow_unconverged) {
  validate(ds);
  PaucSurface surf{ds, {}, {}};
  return moreau_impl(surf, w, l, mu, tol, max_iterations, allow_unconverged);
}

double moreau_value_sorr(const Vector& w, const RegressionDataset& ds, Index l, double mu,
                         double tol, long max_iterations, bool allow_unconverged) {
  validate(ds);
  SorrSurface surf{ds, {}};
  return moreau_impl(surf, w, l, mu, tol, max_iterations, allow_unconverged);
}

Vector full_indicator_subgradient(const BinaryDataset& ds, const Vector& v, const Vector& lambda) {
  if (lambda.size() != ds.n_pos()) throw ValidationError("lambda size != N+");
  Vector g = Vector::Zero(ds.dim());
  for (Index i = 0; i < ds.n_pos(); ++i)
    for (Index j = 0; j < ds.n_neg(); ++j)
      if (pair_loss(v, ds, {i, j}) > lambda(i)) g += pair_loss_grad(v, ds, {i, j});
  return g;
}

Vector enumerate_minibatch_mean(const BinaryDataset& ds, const Vector& lambda, const Vector& v,
                                Index subset_pos, Index subset_neg) {
  if (ds.n_pos() > 4 || ds.n_neg() > 6)
    throw ValidationError("enumeration guard: instance too large");
  if (subset_pos < 1 || subset_pos > ds.n_pos() || subset_neg < 1 || subset_neg > ds.n_neg())
    throw ValidationError("subset sizes out of range");
  if (lambda.size() != ds.n_pos()) throw ValidationError("lambda size != N+");

  const double scale = static_cast<double>(ds.n_pos()) * static_cast<double>(ds.n_neg()) /
                       (static_cast<double>(subset_pos) * static_cast<double>(subset_neg));

  std::vector<bool> mask_i(static_cast<std::size_t>(ds.n_pos()), false);
  std::fill(mask_i.begin(), mask_i.begin() + subset_pos, true);
  Vector acc = Vector::Zero(ds.dim());
  long combos = 0;
  do {
    std::vector<bool> mask_j(static_cast<std::size_t>(ds.n_neg()), false);
    std::fill(mask_j.begin(), mask_j.begin() + subset_neg, true);
    do {
      Vector g = Vector::Zero(ds.dim());
      for (Index i = 0; i < ds.n_pos(); ++i) {
        if (!mask_i[static_cast<std::size_t>(i)]) continue;
        for (Index j = 0; j < ds.n_neg(); ++j) {
          if (!mask_j[static_cast<std::size_t>(j)]) continue;
          if (pair_loss(v, ds, {i, j}) > lambda(i)) g += pair_loss_grad(v, ds, {i, j});
        }
      }
      acc += scale * g;
      ++combos;
    } while (std::prev_permutation(mask_j.begin(), mask_j.end()));
  } while (std::prev_permutation(mask_i.begin(), mask_i.end()));

  return acc / static_cast<double>(combos);
}

}  // namespace paucopt
