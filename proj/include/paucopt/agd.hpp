// Approximate gradient descent on the smoothed DC objective
// F^mu = f^n_mu - f^m_mu, with warm-started dual blocks, the quadratic inner
// iteration schedule, and near-criticality certification.
#pragma once

#include "paucopt/oracle.hpp"
#include "paucopt/prox_solver.hpp"

#include <vector>

namespace paucopt {

struct AgdConfig {
  // <= 0 selects the data-driven default 1e3 / (N+ N-) (or 1e3 / N for the
  // per-sample task).
  double mu = 0.0;
  // Outer step; <= 0 selects 2e3 / (N+ N-) (2e3 / N per-sample).
  double gamma = 0.0;
  int outer_iterations = 100;  // K
  double t_growth = 50.0;      // C in T_k = C (k+1)^2
  double step_c = 1.0;         // c in eta_t = c/((k+1) N+ N-), theta_t = c/((k+1) N-)
  Index batch_pos = 100;       // I, clamped to N+
  Index batch_neg = 100;       // J, clamped to N-
  // Early stop once the inner-solution gradient estimate stays below epsilon
  // for 3 consecutive outer iterations; 0 disables.
  double epsilon = 0.0;
  double max_epochs = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  bool certify_result = true;   // oracle certificate at the returned iterate
  bool record_inner = false;    // keep per-k inner outputs (tests/diagnostics)
};

// Realizes the nearly-critical test: xi = (v_m - v_n)/mu lies in
// df^n(v_n) - df^m(v_m) by prox optimality, and the three norms are the
// quantities the definition bounds.
struct CriticalityCertificate {
  double xi_norm = 0.0;
  double dist_to_vm = 0.0;
  double dist_to_vn = 0.0;
  double mu = 0.0;  // smoothing parameter the certificate was computed at
  int k = -1;       // outer index of the certified iterate, when applicable
  bool high_confidence = false;  // both prox oracles converged
};

struct TraceRow {
  int k = 0;
  double epochs = 0.0;           // cumulative epoch-equivalents
  double normalized_loss = 0.0;  // at the iterate after this outer step
  double train_pauc = 0.0;       // NaN for the per-sample task
  double xi_norm_est = 0.0;      // ||v_bar_m - v_bar_n|| / mu from this step
  double wall_ms = 0.0;
  Index inner_iterations = 0;    // T_k
  double eps_k = 0.0;            // theoretical inner accuracy 1/sqrt(k+1)
};

struct RunTrace {
  std::vector<TraceRow> rows;
  // Populated when AgdConfig::record_inner is set.
  std::vector<Vector> w_path;      // w^(0), ..., one per completed iteration + final
  std::vector<Vector> v_bar_m, v_bar_n;
  std::vector<Vector> lambda_bar_m, lambda_bar_n;
};

struct AgdResult {
  Vector w_best;      // practical iterate: best training pAUC along the path
  int best_k = 0;
  double best_pauc = 0.0;
  Vector v_n_kbar;    // theoretical iterate v_bar_n^(k_bar)
  int k_bar = 0;
  bool theory_valid = false;  // mu rho < 1 and gamma <= 1/L_mu both held
  RunTrace trace;
  CriticalityCertificate certificate;
};

AgdResult agd_run(const BinaryDataset& ds, const PAucRange& r, const AgdConfig& cfg,
                  const Vector& w0);

// Same outer loop driven by the scalar-dual SGD inner solver. The practical
// iterate is the one with the lowest normalized ranked-range loss, and both
// step sizes share c/((k+1) N).
struct AgdSorrResult {
  Vector w_best;
  int best_k = 0;
  double best_loss = 0.0;
  Vector v_n_kbar;
  int k_bar = 0;
  bool theory_valid = false;
  RunTrace trace;
  CriticalityCertificate certificate;
};

AgdSorrResult agd_run_sorr(const RegressionDataset& ds, Index m, Index n, const AgdConfig& cfg,
                           const Vector& w0);

// Oracle-quality certificate at w: both prox points solved deterministically
// to `tol`. Requires mu * rho < 1.
CriticalityCertificate certify(const Vector& w, const BinaryDataset& ds, const PAucRange& r,
                               double mu, double tol = 1e-8, long max_iterations = 200000);
CriticalityCertificate certify_sorr(const Vector& w, const RegressionDataset& ds, Index m,
                                    Index n, double mu, double tol = 1e-8,
                                    long max_iterations = 200000);

}  // namespace paucopt
