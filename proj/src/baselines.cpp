#include "paucopt/baselines.hpp"

#include "paucopt/metrics.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace paucopt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

DcaResult dca_impl(const BinaryDataset& ds, const PAucRange& r, const DcaConfig& cfg,
                   const Vector& w0, double l_prox) {
  validate(ds);
  if (cfg.outer_iterations < 1) throw ValidationError("need K >= 1");
  if (!(cfg.t_growth > 0.0) || !(cfg.step_c > 0.0))
    throw ValidationError("need positive schedule constants");
  if (l_prox < 0.0) throw ValidationError("need L_prox >= 0");
  if (w0.size() != ds.dim()) throw ValidationError("w0 dimension mismatch");
  if (r.n > ds.n_neg()) throw ValidationError("range exceeds negative pool");

  const Index np = ds.n_pos(), nn = ds.n_neg(), d = ds.dim();
  const double pair_count = static_cast<double>(np) * static_cast<double>(nn);
  const Index batch_pos = std::min<Index>(cfg.batch_pos, np);
  const Index batch_neg = std::min<Index>(cfg.batch_neg, nn);
  const double epoch_per_inner =
      static_cast<double>(batch_pos) * static_cast<double>(batch_neg) / pair_count;
  const double neg_scale = static_cast<double>(nn) / static_cast<double>(batch_neg);
  const double pair_scale = pair_count / (static_cast<double>(batch_pos) * static_cast<double>(batch_neg));

  Rng rng(cfg.seed);
  Vector w = w0;
  Vector lam = initial_lambda(w0, ds, r.n);

  SubsetSampler pos_sampler(np), neg_sampler(nn);
  std::vector<Index> batch_i, batch_j;
  Vector ps(batch_pos), ns(batch_neg), zthr(batch_pos);
  Vector coef_i(batch_pos), coef_j(batch_neg);
  std::vector<long> active_count(static_cast<std::size_t>(batch_pos));
  Vector g(d);

  DcaResult res;
  res.best_pauc = -1.0;
  const auto start = Clock::now();
  double epochs = 0.0;
  bool budget_hit = false;

  for (int k = 0; k < cfg.outer_iterations && !budget_hit; ++k) {
    const Vector xi = dca_subgradient_fm(w, ds, r.m);
    if (r.m > 0) epochs += 1.0;  // the deterministic subgradient is a full pass over pairs

    const Index t_total = static_cast<Index>(std::llround(cfg.t_growth * (k + 1.0) * (k + 1.0)));
    const double eta = cfg.step_c / ((k + 1.0) * pair_count);
    const double theta = cfg.step_c / ((k + 1.0) * static_cast<double>(nn));
    const Vector anchor = w;  // proximal center of this outer iteration

    for (Index t = 0; t < t_total; ++t) {
      if (epochs >= cfg.max_epochs) {
        budget_hit = true;
        break;
      }
      pos_sampler.sample(batch_pos, rng, batch_i);
      neg_sampler.sample(batch_neg, rng, batch_j);

      for (Index a = 0; a < batch_pos; ++a) {
        ps(a) = ds.positives.row(batch_i[static_cast<std::size_t>(a)]).dot(w);
        zthr(a) = logistic_loss_invert(lam(batch_i[static_cast<std::size_t>(a)]));
      }
      for (Index b = 0; b < batch_neg; ++b)
        ns(b) = ds.negatives.row(batch_j[static_cast<std::size_t>(b)]).dot(w);

      coef_i.setZero();
      coef_j.setZero();
      std::fill(active_count.begin(), active_count.end(), 0L);
      for (Index a = 0; a < batch_pos; ++a) {
        const double psa = ps(a), thr = zthr(a);
        const double lam_a = lam(batch_i[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < batch_neg; ++b) {
          const double z = psa - ns(b);
          if (logistic_loss_above(z, thr, lam_a)) {
            const double c = logistic_loss_slope(z);
            coef_i(a) += c;
            coef_j(b) += c;
            ++active_count[static_cast<std::size_t>(a)];
          }
        }
      }

      g.setZero();
      for (Index a = 0; a < batch_pos; ++a)
        if (coef_i(a) != 0.0)
          g.noalias() += coef_i(a) * ds.positives.row(batch_i[static_cast<std::size_t>(a)]).transpose();
      for (Index b = 0; b < batch_neg; ++b)
        if (coef_j(b) != 0.0)
          g.noalias() -= coef_j(b) * ds.negatives.row(batch_j[static_cast<std::size_t>(b)]).transpose();
      g = pair_scale * g - xi;

      if (l_prox == 0.0) {
        w -= eta * g;
      } else {
        // argmin g'w + (L/2)||w - anchor||^2 + ||w - w_t||^2/(2 eta)
        w = anchor + ((w - anchor) - eta * g) / (l_prox * eta + 1.0);
      }
      if (!w.allFinite() || w.norm() > 1e8 * (1.0 + anchor.norm()))
        throw DivergenceError("DCA inner iterate diverged", t);

      for (Index a = 0; a < batch_pos; ++a) {
        const double g_lam = static_cast<double>(r.n) -
                             neg_scale * static_cast<double>(active_count[static_cast<std::size_t>(a)]);
        lam(batch_i[static_cast<std::size_t>(a)]) -= theta * g_lam;
      }
      if (!lam.allFinite()) throw DivergenceError("DCA dual iterate diverged", t);
      epochs += epoch_per_inner;
    }

    TraceRow row;
    row.k = k;
    row.epochs = epochs;
    row.normalized_loss = dc_objective_normalized(w, ds, r);
    row.train_pauc = pauc_range(positive_scores(w, ds), negative_scores(w, ds), r);
    row.xi_norm_est = std::numeric_limits<double>::quiet_NaN();
    row.wall_ms = elapsed_ms(start);
    row.inner_iterations = t_total;
    row.eps_k = 0.0;
    res.trace.rows.push_back(row);

    if (row.train_pauc > res.best_pauc) {
      res.best_pauc = row.train_pauc;
      res.best_k = k;
      res.w_best = w;
    }
  }

  if (res.trace.rows.empty()) throw ValidationError("no outer iteration completed");
  res.w_final = std::move(w);
  return res;
}

}  // namespace

Vector dca_subgradient_fm(const Vector& w, const BinaryDataset& ds, Index m) {
  validate(ds);
  if (m < 0 || m > ds.n_neg()) throw ValidationError("dca_subgradient_fm: m out of range");
  Vector g = Vector::Zero(ds.dim());
  if (m == 0) return g;

  const Vector ps = positive_scores(w, ds);
  const Vector ns = negative_scores(w, ds);
  Vector row;
  Vector coef_j = Vector::Zero(ds.n_neg());
  for (Index i = 0; i < ds.n_pos(); ++i) {
    loss_row(ps(i), ns, row);
    double coef_i = 0.0;
    for (Index j : top_l_indices(row, m)) {
      const double c = logistic_loss_slope(ps(i) - ns(j));
      coef_i += c;
      coef_j(j) += c;
    }
    g.noalias() += coef_i * ds.positives.row(i).transpose();
  }
  for (Index j = 0; j < ds.n_neg(); ++j)
    if (coef_j(j) != 0.0) g.noalias() -= coef_j(j) * ds.negatives.row(j).transpose();
  return g;
}

DcaResult dca_run(const BinaryDataset& ds, const PAucRange& r, const DcaConfig& cfg,
                  const Vector& w0) {
  return dca_impl(ds, r, cfg, w0, 0.0);
}

DcaResult prox_dca_run(const BinaryDataset& ds, const PAucRange& r, const DcaConfig& cfg,
                       const Vector& w0) {
  return dca_impl(ds, r, cfg, w0, cfg.l_prox);
}

}  // namespace paucopt
