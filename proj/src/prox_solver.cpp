#include "paucopt/prox_solver.hpp"

#include <cmath>
#include <limits>

namespace paucopt {

namespace {

void check_common(const ProxProblem& prob, const SbcdSchedule& sched, Index n_pos, Index n_neg,
                  Index dim) {
  if (!(prob.mu > 0.0)) throw ValidationError("prox problem: mu must be > 0");
  if (prob.anchor.size() != dim) throw ValidationError("prox problem: anchor dimension mismatch");
  if (sched.iterations < 1) throw ValidationError("schedule: need T >= 1");
  if (!(sched.eta > 0.0) || !(sched.theta > 0.0))
    throw ValidationError("schedule: steps must be > 0");
  if (sched.batch_pos < 1 || sched.batch_pos > n_pos)
    throw ValidationError("schedule: need 1 <= I <= N+");
  if (sched.batch_neg < 1 || sched.batch_neg > n_neg)
    throw ValidationError("schedule: need 1 <= J <= N-");
}

void check_divergence(const Vector& v, const Vector& w, long step) {
  if (!v.allFinite() || v.norm() > 1e8 * (1.0 + w.norm()))
    throw DivergenceError("inner solver diverged", step);
}

}  // namespace

ProxResult sbcd_solve(const BinaryDataset& ds, const ProxProblem& prob, const Vector& init_lambda,
                      const SbcdSchedule& sched, Rng& rng, bool record_objective) {
  validate(ds);
  const Index np = ds.n_pos(), nn = ds.n_neg(), d = ds.dim();
  check_common(prob, sched, np, nn, d);
  if (prob.l < 0 || prob.l > nn) throw ValidationError("prox problem: l out of range");
  if (init_lambda.size() != np) throw ValidationError("init lambda size != N+");

  const Vector& w = prob.anchor;
  const double mu = prob.mu;
  const double pair_scale = static_cast<double>(np) * static_cast<double>(nn) /
                            (static_cast<double>(sched.batch_pos) * static_cast<double>(sched.batch_neg));
  const double neg_scale = static_cast<double>(nn) / static_cast<double>(sched.batch_neg);

  Vector v = w;
  Vector lam = init_lambda;
  Vector v_acc = Vector::Zero(d);
  Vector lam_acc = Vector::Zero(np);

  SubsetSampler pos_sampler(np), neg_sampler(nn);
  std::vector<Index> batch_i, batch_j;
  Vector ps(sched.batch_pos), ns(sched.batch_neg), zthr(sched.batch_pos);
  Vector coef_i(sched.batch_pos), coef_j(sched.batch_neg);
  std::vector<long> active_count(static_cast<std::size_t>(sched.batch_pos));
  Vector g(d);

  ProxResult out;
  out.theory_valid = prob.mu * prob.rho < 1.0;
  if (record_objective) out.objective_trace.reserve(static_cast<std::size_t>(sched.iterations));

  for (Index t = 0; t < sched.iterations; ++t) {
    v_acc += v;
    lam_acc += lam;
    if (record_objective)
      out.objective_trace.push_back(dual_objective(v, lam, ds, prob.l) +
                                    (v - w).squaredNorm() / (2.0 * mu));
    const double decay = sched.diminishing ? 1.0 / static_cast<double>(t + 2) : 1.0;
    const double eta_t = sched.eta * decay;
    const double theta_t = sched.theta * decay;

    pos_sampler.sample(sched.batch_pos, rng, batch_i);
    neg_sampler.sample(sched.batch_neg, rng, batch_j);

    for (Index a = 0; a < sched.batch_pos; ++a) {
      ps(a) = ds.positives.row(batch_i[static_cast<std::size_t>(a)]).dot(v);
      // s_ij > lambda_i <=> z_ij < l^{-1}(lambda_i); the loss is positive so
      // lambda_i <= 0 activates every pair.
      zthr(a) = logistic_loss_invert(lam(batch_i[static_cast<std::size_t>(a)]));
    }
    for (Index b = 0; b < sched.batch_neg; ++b)
      ns(b) = ds.negatives.row(batch_j[static_cast<std::size_t>(b)]).dot(v);

    coef_i.setZero();
    coef_j.setZero();
    std::fill(active_count.begin(), active_count.end(), 0L);
    for (Index a = 0; a < sched.batch_pos; ++a) {
      const double psa = ps(a), thr = zthr(a);
      const double lam_a = lam(batch_i[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < sched.batch_neg; ++b) {
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
    for (Index a = 0; a < sched.batch_pos; ++a)
      if (coef_i(a) != 0.0)
        g.noalias() += coef_i(a) * ds.positives.row(batch_i[static_cast<std::size_t>(a)]).transpose();
    for (Index b = 0; b < sched.batch_neg; ++b)
      if (coef_j(b) != 0.0)
        g.noalias() -= coef_j(b) * ds.negatives.row(batch_j[static_cast<std::size_t>(b)]).transpose();
    g *= pair_scale;

    v = prox_primal_step(w, v, g, mu, eta_t);
    check_divergence(v, w, t);

    for (Index a = 0; a < sched.batch_pos; ++a) {
      const double g_lam = static_cast<double>(prob.l) -
                           neg_scale * static_cast<double>(active_count[static_cast<std::size_t>(a)]);
      lam(batch_i[static_cast<std::size_t>(a)]) -= theta_t * g_lam;
    }
    if (!lam.allFinite()) throw DivergenceError("dual iterate diverged", t);
  }

  const double inv_t = 1.0 / static_cast<double>(sched.iterations);
  out.v_bar = v_acc * inv_t;
  out.lambda_bar = lam_acc * inv_t;
  out.v_last = std::move(v);
  out.lambda_last = std::move(lam);
  return out;
}

ProxResult sgd_solve_sorr(const RegressionDataset& ds, const ProxProblem& prob,
                          double init_lambda, const SbcdSchedule& sched, Rng& rng,
                          bool record_objective) {
  validate(ds);
  const Index n = ds.n(), d = ds.dim();
  check_common(prob, sched, 1, n, d);
  if (prob.l < 0 || prob.l > n) throw ValidationError("prox problem: l out of range");
  for (Index j = 0; j < n; ++j)
    if (ds.targets(j) != 0.0 && ds.targets(j) != 1.0)
      throw ValidationError("SoRR targets must be 0 or 1");

  const Vector& w = prob.anchor;
  const double mu = prob.mu;
  const double scale = static_cast<double>(n) / static_cast<double>(sched.batch_neg);
  Vector v = w;
  double lam = init_lambda;
  Vector v_acc = Vector::Zero(d);
  double lam_acc = 0.0;

  SubsetSampler sampler(n);
  std::vector<Index> batch;
  Vector g(d);

  ProxResult out;
  out.theory_valid = prob.mu * prob.rho < 1.0;

  for (Index t = 0; t < sched.iterations; ++t) {
    v_acc += v;
    lam_acc += lam;
    if (record_objective) {
      const Vector losses = sorr_loss_vector(v, ds);
      double obj = static_cast<double>(prob.l) * lam;
      for (Index j = 0; j < n; ++j) obj += std::max(losses(j) - lam, 0.0);
      out.objective_trace.push_back(obj + (v - w).squaredNorm() / (2.0 * mu));
    }

    const double decay = sched.diminishing ? 1.0 / static_cast<double>(t + 2) : 1.0;
    const double eta_t = sched.eta * decay;
    const double lam_step = (sched.lambda_step_uses_eta ? sched.eta : sched.theta) * decay;

    sampler.sample(sched.batch_neg, rng, batch);
    // s_j > lambda in margin terms: y=1 needs u < l^{-1}(lambda), y=0 the
    // mirrored condition.
    const double zthr = logistic_loss_invert(lam);

    g.setZero();
    long active = 0;
    for (Index b = 0; b < sched.batch_neg; ++b) {
      const Index j = batch[static_cast<std::size_t>(b)];
      const double u = ds.features.row(j).dot(v);
      const double y = ds.targets(j);
      const double margin = (y == 1.0) ? u : -u;
      const bool hit = logistic_loss_above(margin, zthr, lam);
      if (hit) {
        g.noalias() += (sigmoid(u) - y) * ds.features.row(j).transpose();
        ++active;
      }
    }
    g *= scale;

    v = prox_primal_step(w, v, g, mu, eta_t);
    check_divergence(v, w, t);

    const double g_lam = static_cast<double>(prob.l) - scale * static_cast<double>(active);
    lam -= lam_step * g_lam;
    if (!std::isfinite(lam)) throw DivergenceError("dual iterate diverged", t);
  }

  const double inv_t = 1.0 / static_cast<double>(sched.iterations);
  out.v_bar = v_acc * inv_t;
  out.lambda_bar = Vector::Constant(1, lam_acc * inv_t);
  out.v_last = std::move(v);
  out.lambda_last = Vector::Constant(1, lam);
  return out;
}

}  // namespace paucopt
