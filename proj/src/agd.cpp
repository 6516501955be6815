#include "paucopt/agd.hpp"

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

void check_outer_config(const AgdConfig& cfg) {
  if (cfg.outer_iterations < 1) throw ValidationError("need K >= 1");
  if (!(cfg.t_growth > 0.0)) throw ValidationError("need T growth constant > 0");
  if (!(cfg.step_c > 0.0)) throw ValidationError("need step constant c > 0");
  if (!(cfg.max_epochs > 0.0)) throw ValidationError("need positive epoch budget");
}

// Theory holds when the subproblems are certifiably convex and the outer
// step respects the smoothed gradient's Lipschitz constant 2/(mu - mu^2 rho).
bool theory_flags(double mu, double gamma, double rho) {
  if (!(mu * rho < 1.0)) return false;
  const double l_mu = 2.0 / (mu - mu * mu * rho);
  return gamma <= 1.0 / l_mu;
}

CriticalityCertificate make_certificate(const Vector& w, const ProxOracleResult& pm,
                                        const ProxOracleResult& pn, double mu) {
  CriticalityCertificate cert;
  cert.mu = mu;
  cert.xi_norm = (pm.v - pn.v).norm() / mu;
  cert.dist_to_vm = (w - pm.v).norm();
  cert.dist_to_vn = (w - pn.v).norm();
  cert.high_confidence = pm.report.converged && pn.report.converged;
  return cert;
}

// The practical mu can sit far above the 1/rho theory cap (the reported
// experiments do exactly that); certification needs mu rho < 1, so fall back
// to mu = 1/(2 rho) when the training value is out of range.
double certification_mu(double mu, double rho) {
  if (rho > 0.0 && !(mu * rho < 1.0)) return 0.5 / rho;
  return mu;
}

}  // namespace

CriticalityCertificate certify(const Vector& w, const BinaryDataset& ds, const PAucRange& r,
                               double mu, double tol, long max_iterations) {
  const ProxOracleResult pm = prox_point_exact(w, ds, r.m, mu, tol, max_iterations);
  const ProxOracleResult pn = prox_point_exact(w, ds, r.n, mu, tol, max_iterations);
  return make_certificate(w, pm, pn, mu);
}

CriticalityCertificate certify_sorr(const Vector& w, const RegressionDataset& ds, Index m,
                                    Index n, double mu, double tol, long max_iterations) {
  const ProxOracleResult pm = prox_point_exact_sorr(w, ds, m, mu, tol, max_iterations);
  const ProxOracleResult pn = prox_point_exact_sorr(w, ds, n, mu, tol, max_iterations);
  return make_certificate(w, pm, pn, mu);
}

AgdResult agd_run(const BinaryDataset& ds, const PAucRange& r, const AgdConfig& cfg,
                  const Vector& w0) {
  validate(ds);
  check_outer_config(cfg);
  if (w0.size() != ds.dim()) throw ValidationError("w0 dimension mismatch");
  if (!w0.allFinite()) throw ValidationError("w0 must be finite");
  if (r.n > ds.n_neg()) throw ValidationError("range exceeds negative pool");

  const double np = static_cast<double>(ds.n_pos());
  const double nn = static_cast<double>(ds.n_neg());
  const double pair_count = np * nn;
  const SmoothnessConstants consts = estimate_constants(ds);
  const double mu = cfg.mu > 0.0 ? cfg.mu : 1e3 / pair_count;
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 2e3 / pair_count;
  const Index batch_pos = std::min<Index>(cfg.batch_pos, ds.n_pos());
  const Index batch_neg = std::min<Index>(cfg.batch_neg, ds.n_neg());
  const double epoch_per_inner =
      static_cast<double>(batch_pos) * static_cast<double>(batch_neg) / pair_count;

  Rng rng(cfg.seed);
  Vector w = w0;
  Vector lam_m = initial_lambda(w0, ds, r.m);
  Vector lam_n = initial_lambda(w0, ds, r.n);

  AgdResult res;
  res.theory_valid = theory_flags(mu, gamma, consts.rho);
  res.best_pauc = -1.0;
  std::vector<Vector> v_n_history;
  if (cfg.record_inner) res.trace.w_path.push_back(w);

  const auto start = Clock::now();
  double epochs = 0.0;
  int below_eps_streak = 0;

  // m = 0 collapses the f^m branch identically to zero: its prox point is
  // the anchor itself, no inner solve happens (the inner algorithm expects
  // l > 0), and the update reduces to a prox-gradient step on f^n_mu.
  const bool m_branch_trivial = r.m == 0;

  for (int k = 0; k < cfg.outer_iterations; ++k) {
    const Index t_k = static_cast<Index>(std::llround(cfg.t_growth * (k + 1.0) * (k + 1.0)));
    const double solves = m_branch_trivial ? 1.0 : 2.0;
    const double iteration_epochs = solves * static_cast<double>(t_k) * epoch_per_inner;
    if (k > 0 && epochs + iteration_epochs > cfg.max_epochs) break;

    SbcdSchedule sched;
    sched.iterations = t_k;
    sched.eta = cfg.step_c / ((k + 1.0) * pair_count);
    sched.theta = cfg.step_c / ((k + 1.0) * nn);
    sched.batch_pos = batch_pos;
    sched.batch_neg = batch_neg;

    ProxProblem prob{w, mu, r.m, consts.rho};
    ProxResult sol_m;
    try {
      if (m_branch_trivial) {
        sol_m.v_bar = w;
        sol_m.lambda_bar = lam_m;
      } else {
        sol_m = sbcd_solve(ds, prob, lam_m, sched, rng);
      }
      prob.l = r.n;
      ProxResult sol_n = sbcd_solve(ds, prob, lam_n, sched, rng);

      lam_m = sol_m.lambda_bar;
      lam_n = sol_n.lambda_bar;
      const Vector diff = sol_m.v_bar - sol_n.v_bar;
      const double xi_est = diff.norm() / mu;
      w -= (gamma / mu) * diff;
      epochs += iteration_epochs;

      v_n_history.push_back(sol_n.v_bar);
      if (cfg.record_inner) {
        res.trace.w_path.push_back(w);
        res.trace.v_bar_m.push_back(sol_m.v_bar);
        res.trace.v_bar_n.push_back(sol_n.v_bar);
        res.trace.lambda_bar_m.push_back(lam_m);
        res.trace.lambda_bar_n.push_back(lam_n);
      }

      TraceRow row;
      row.k = k;
      row.epochs = epochs;
      row.normalized_loss = dc_objective_normalized(w, ds, r);
      row.train_pauc = pauc_range(positive_scores(w, ds), negative_scores(w, ds), r);
      row.xi_norm_est = xi_est;
      row.wall_ms = elapsed_ms(start);
      row.inner_iterations = t_k;
      row.eps_k = 1.0 / std::sqrt(k + 1.0);
      res.trace.rows.push_back(row);

      if (row.train_pauc > res.best_pauc) {
        res.best_pauc = row.train_pauc;
        res.best_k = k;
        res.w_best = w;
      }

      if (cfg.epsilon > 0.0) {
        below_eps_streak = xi_est < cfg.epsilon ? below_eps_streak + 1 : 0;
        if (below_eps_streak >= 3) break;
      }
      if (epochs >= cfg.max_epochs) break;
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " in outer iteration " + std::to_string(k),
                            e.step());
    }
  }

  if (res.trace.rows.empty()) throw ValidationError("no outer iteration completed");
  if (res.best_pauc < 0.0) {
    res.w_best = w;
    res.best_k = static_cast<int>(res.trace.rows.size()) - 1;
  }

  std::uniform_int_distribution<std::size_t> pick(0, v_n_history.size() - 1);
  res.k_bar = static_cast<int>(pick(rng));
  res.v_n_kbar = v_n_history[static_cast<std::size_t>(res.k_bar)];

  if (cfg.certify_result) {
    const double mu_cert = certification_mu(mu, consts.rho);
    res.certificate = certify(res.w_best, ds, r, mu_cert);
    res.certificate.k = res.best_k;
  }
  return res;
}

AgdSorrResult agd_run_sorr(const RegressionDataset& ds, Index m, Index n, const AgdConfig& cfg,
                           const Vector& w0) {
  validate(ds);
  check_outer_config(cfg);
  if (w0.size() != ds.dim()) throw ValidationError("w0 dimension mismatch");
  if (!(0 <= m && m < n && n <= ds.n())) throw ValidationError("need 0 <= m < n <= N");

  const double count = static_cast<double>(ds.n());
  const SmoothnessConstants consts = estimate_constants(ds);
  const double mu = cfg.mu > 0.0 ? cfg.mu : 1e3 / count;
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 2e3 / count;
  const Index batch = std::min<Index>(cfg.batch_neg, ds.n());
  const double epoch_per_inner = static_cast<double>(batch) / count;

  Rng rng(cfg.seed);
  Vector w = w0;
  double lam_m = initial_lambda_sorr(w0, ds, m);
  double lam_n = initial_lambda_sorr(w0, ds, n);

  AgdSorrResult res;
  res.theory_valid = theory_flags(mu, gamma, consts.rho);
  res.best_loss = std::numeric_limits<double>::infinity();
  std::vector<Vector> v_n_history;
  if (cfg.record_inner) res.trace.w_path.push_back(w);

  const auto start = Clock::now();
  double epochs = 0.0;
  int below_eps_streak = 0;

  const bool m_branch_trivial = m == 0;

  for (int k = 0; k < cfg.outer_iterations; ++k) {
    const Index t_k = static_cast<Index>(std::llround(cfg.t_growth * (k + 1.0) * (k + 1.0)));
    const double solves = m_branch_trivial ? 1.0 : 2.0;
    const double iteration_epochs = solves * static_cast<double>(t_k) * epoch_per_inner;
    if (k > 0 && epochs + iteration_epochs > cfg.max_epochs) break;

    SbcdSchedule sched;
    sched.iterations = t_k;
    sched.eta = cfg.step_c / ((k + 1.0) * count);
    sched.theta = sched.eta;  // both steps share c/((k+1) N) here
    sched.batch_pos = 1;
    sched.batch_neg = batch;

    ProxProblem prob{w, mu, m, consts.rho};
    ProxResult sol_m;
    if (m_branch_trivial) {
      sol_m.v_bar = w;
      sol_m.lambda_bar = Vector::Constant(1, lam_m);
    } else {
      sol_m = sgd_solve_sorr(ds, prob, lam_m, sched, rng);
    }
    prob.l = n;
    ProxResult sol_n = sgd_solve_sorr(ds, prob, lam_n, sched, rng);

    lam_m = sol_m.lambda_bar(0);
    lam_n = sol_n.lambda_bar(0);
    const Vector diff = sol_m.v_bar - sol_n.v_bar;
    const double xi_est = diff.norm() / mu;
    w -= (gamma / mu) * diff;
    epochs += iteration_epochs;

    v_n_history.push_back(sol_n.v_bar);
    if (cfg.record_inner) {
      res.trace.w_path.push_back(w);
      res.trace.v_bar_m.push_back(sol_m.v_bar);
      res.trace.v_bar_n.push_back(sol_n.v_bar);
      res.trace.lambda_bar_m.push_back(sol_m.lambda_bar);
      res.trace.lambda_bar_n.push_back(sol_n.lambda_bar);
    }

    TraceRow row;
    row.k = k;
    row.epochs = epochs;
    row.normalized_loss = dc_objective_sorr_normalized(w, ds, m, n);
    row.train_pauc = std::numeric_limits<double>::quiet_NaN();
    row.xi_norm_est = xi_est;
    row.wall_ms = elapsed_ms(start);
    row.inner_iterations = t_k;
    row.eps_k = 1.0 / std::sqrt(k + 1.0);
    res.trace.rows.push_back(row);

    if (row.normalized_loss < res.best_loss) {
      res.best_loss = row.normalized_loss;
      res.best_k = k;
      res.w_best = w;
    }

    if (cfg.epsilon > 0.0) {
      below_eps_streak = xi_est < cfg.epsilon ? below_eps_streak + 1 : 0;
      if (below_eps_streak >= 3) break;
    }
    if (epochs >= cfg.max_epochs) break;
  }

  if (res.trace.rows.empty()) throw ValidationError("no outer iteration completed");

  std::uniform_int_distribution<std::size_t> pick(0, v_n_history.size() - 1);
  res.k_bar = static_cast<int>(pick(rng));
  res.v_n_kbar = v_n_history[static_cast<std::size_t>(res.k_bar)];

  if (cfg.certify_result) {
    const double mu_cert = certification_mu(mu, consts.rho);
    res.certificate = certify_sorr(res.w_best, ds, m, n, mu_cert);
    res.certificate.k = res.best_k;
  }
  return res;
}

}  // namespace paucopt
