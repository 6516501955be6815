#include "paucopt/agd.hpp"

#include "paucopt/metrics.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace paucopt;

namespace {

AgdConfig small_config() {
  AgdConfig cfg;
  cfg.outer_iterations = 6;
  cfg.t_growth = 10.0;
  cfg.step_c = 5.0;
  cfg.batch_pos = 8;
  cfg.batch_neg = 16;
  cfg.certify_result = false;
  cfg.record_inner = true;
  return cfg;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("outer update identity holds bit-exactly") {
  std::mt19937_64 rng(1);
  const BinaryDataset ds = testutil::random_dataset(12, 30, 3, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(3, 15, 30);
  AgdConfig cfg = small_config();
  cfg.seed = 5;
  const AgdResult res = agd_run(ds, r, cfg, Vector::Zero(3));

  const double mu = 1e3 / (12.0 * 30.0);
  const double gamma = 2e3 / (12.0 * 30.0);
  REQUIRE(res.trace.w_path.size() == res.trace.rows.size() + 1);
  for (std::size_t k = 0; k < res.trace.rows.size(); ++k) {
    const Vector want = res.trace.w_path[k] -
                        (gamma / mu) * (res.trace.v_bar_m[k] - res.trace.v_bar_n[k]);
    CHECK(res.trace.w_path[k + 1] == want);
  }
}

TEST_CASE("inner iteration schedule is C (k+1)^2 with the exact cubic total") {
  std::mt19937_64 rng(2);
  const BinaryDataset ds = testutil::random_dataset(6, 14, 2, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(2, 7, 14);
  AgdConfig cfg = small_config();
  cfg.outer_iterations = 7;
  cfg.t_growth = 13.0;
  const AgdResult res = agd_run(ds, r, cfg, Vector::Zero(2));

  REQUIRE(res.trace.rows.size() == 7);
  long total = 0;
  for (const TraceRow& row : res.trace.rows) {
    CHECK(row.inner_iterations == static_cast<Index>(13 * (row.k + 1) * (row.k + 1)));
    CHECK(row.eps_k == 1.0 / std::sqrt(row.k + 1.0));
    total += row.inner_iterations;
  }
  const long k_total = 7;
  CHECK(total == 13 * k_total * (k_total + 1) * (2 * k_total + 1) / 6);
}

TEST_CASE("m = 0 degenerates to prox-gradient on the top-n branch") {
  std::mt19937_64 rng(3);
  const BinaryDataset ds = testutil::random_dataset(10, 25, 2, rng, 2.5);
  const PAucRange r = PAucRange::from_indices(0, 12, 25);

  std::vector<std::vector<double>> curves;
  for (std::uint64_t seed = 0; seed < 7; ++seed) {
    AgdConfig cfg = small_config();
    cfg.outer_iterations = 8;
    cfg.seed = seed;
    const AgdResult res = agd_run(ds, r, cfg, Vector::Zero(2));
    // the m branch never moves off the anchor
    for (std::size_t k = 0; k < res.trace.v_bar_m.size(); ++k)
      CHECK(res.trace.v_bar_m[k] == res.trace.w_path[k]);
    std::vector<double> losses;
    losses.push_back(dc_objective_normalized(Vector::Zero(2), ds, r));
    for (const TraceRow& row : res.trace.rows) losses.push_back(row.normalized_loss);
    curves.push_back(losses);
  }

  // median loss curve over seeds is non-increasing
  for (std::size_t k = 1; k < curves.front().size(); ++k) {
    std::vector<double> prev, cur;
    for (const auto& c : curves) {
      prev.push_back(c[k - 1]);
      cur.push_back(c[k]);
    }
    CHECK(median_of(cur) <= median_of(prev) + 1e-9);
  }
}

TEST_CASE("identical pools pin the iterate in place") {
  BinaryDataset ds;
  ds.positives = Matrix::Ones(4, 3);
  ds.negatives = Matrix::Ones(6, 3);
  const PAucRange r = PAucRange::from_indices(1, 4, 6);
  AgdConfig cfg = small_config();
  cfg.batch_pos = 4;
  cfg.batch_neg = 6;
  cfg.mu = 0.01;     // rho = 0, any mu is theory-valid
  cfg.gamma = 0.02;
  Vector w0(3);
  w0 << 0.3, -0.2, 0.1;
  const AgdResult res = agd_run(ds, r, cfg, w0);
  for (const Vector& w : res.trace.w_path) CHECK(w == w0);
  CHECK(res.theory_valid);
}

TEST_CASE("separable synthetic: loss halves and pAUC clears 0.95 (single seed)") {
  SyntheticSpec spec;
  spec.n_pos = 50;
  spec.n_neg = 500;
  spec.dim = 2;
  spec.separation = 4.0;
  spec.noise = 1.0;
  spec.seed = 1;
  const BinaryDataset ds = generate_synthetic(spec);
  const PAucRange r = PAucRange::from_rates(0.1, 0.5, 500);

  AgdConfig cfg;
  cfg.outer_iterations = 100;
  cfg.t_growth = 50.0;
  cfg.step_c = 5.0;
  cfg.batch_pos = 100;
  cfg.batch_neg = 100;
  cfg.max_epochs = 2000.0;
  cfg.seed = 3;
  cfg.certify_result = false;

  const Vector w0 = Vector::Zero(2);
  const double initial = dc_objective_normalized(w0, ds, r);
  const AgdResult res = agd_run(ds, r, cfg, w0);
  CHECK(res.trace.rows.back().normalized_loss < 0.5 * initial);
  CHECK(res.best_pauc >= 0.95);
  CHECK(res.trace.rows.back().epochs <= cfg.max_epochs);
}

TEST_CASE("early stop fires after three consecutive small gradient estimates") {
  BinaryDataset ds;
  ds.positives = Matrix::Ones(3, 2);
  ds.negatives = Matrix::Ones(5, 2);  // zero gradients: xi estimate is exactly 0
  const PAucRange r = PAucRange::from_indices(1, 3, 5);
  AgdConfig cfg = small_config();
  cfg.outer_iterations = 50;
  cfg.mu = 0.01;
  cfg.epsilon = 1e-6;
  const AgdResult res = agd_run(ds, r, cfg, Vector::Zero(2));
  CHECK(res.trace.rows.size() == 3);
}

TEST_CASE("epoch budget caps the run") {
  std::mt19937_64 rng(4);
  const BinaryDataset ds = testutil::random_dataset(10, 20, 2, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(2, 10, 20);
  AgdConfig cfg = small_config();
  cfg.outer_iterations = 100;
  cfg.batch_pos = 10;
  cfg.batch_neg = 20;
  cfg.max_epochs = 50.0;
  const AgdResult res = agd_run(ds, r, cfg, Vector::Zero(2));
  CHECK(res.trace.rows.size() < 100);
  // pre-check semantics: a started iteration may finish, later ones are cut
  const double last = res.trace.rows.back().epochs;
  const Index next_t = static_cast<Index>(
      std::llround(cfg.t_growth * std::pow(res.trace.rows.size() + 1.0, 2.0)));
  CHECK(last + 2.0 * static_cast<double>(next_t) * (10.0 * 20.0) / (10.0 * 20.0) > 50.0);
}

TEST_CASE("same seed reruns bit-identically") {
  std::mt19937_64 rng(5);
  const BinaryDataset ds = testutil::random_dataset(8, 18, 3, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(2, 9, 18);
  AgdConfig cfg = small_config();
  cfg.seed = 17;
  const AgdResult a = agd_run(ds, r, cfg, Vector::Zero(3));
  const AgdResult b = agd_run(ds, r, cfg, Vector::Zero(3));
  CHECK(a.w_best == b.w_best);
  CHECK(a.k_bar == b.k_bar);
  CHECK(a.v_n_kbar == b.v_n_kbar);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t k = 0; k < a.trace.rows.size(); ++k) {
    CHECK(a.trace.rows[k].normalized_loss == b.trace.rows[k].normalized_loss);
    CHECK(a.trace.rows[k].train_pauc == b.trace.rows[k].train_pauc);
    CHECK(a.trace.rows[k].xi_norm_est == b.trace.rows[k].xi_norm_est);
    CHECK(a.trace.rows[k].epochs == b.trace.rows[k].epochs);
  }
}

TEST_CASE("warm-started duals stay within the inflated row loss envelope") {
  std::mt19937_64 rng(6);
  const BinaryDataset ds = testutil::random_dataset(6, 15, 2, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(2, 7, 15);
  AgdConfig cfg = small_config();
  cfg.outer_iterations = 8;
  cfg.batch_pos = 6;
  cfg.batch_neg = 15;
  cfg.seed = 9;
  const AgdResult res = agd_run(ds, r, cfg, Vector::Zero(2));

  const double nn = 15.0;
  for (std::size_t k = 0; k < res.trace.rows.size(); ++k) {
    // envelope over this iteration's anchor and inner solutions
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Vector* point :
         {&res.trace.w_path[k], &res.trace.v_bar_m[k], &res.trace.v_bar_n[k]}) {
      const Vector ps = positive_scores(*point, ds);
      const Vector ns = negative_scores(*point, ds);
      for (Index i = 0; i < ds.n_pos(); ++i)
        for (Index j = 0; j < ds.n_neg(); ++j) {
          const double s = logistic_loss(ps(i) - ns(j));
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
    }
    const double theta = cfg.step_c / ((res.trace.rows[k].k + 1.0) * nn);
    const double slack = theta * nn;  // one dual step
    for (const Vector* lam : {&res.trace.lambda_bar_m[k], &res.trace.lambda_bar_n[k]}) {
      CHECK(lam->minCoeff() >= lo - slack - 1e-12);
      CHECK(lam->maxCoeff() <= hi + slack + 1e-12);
    }
  }
}

TEST_CASE("certificates: identical prox points give a zero xi") {
  BinaryDataset ds;
  ds.positives = Matrix::Ones(3, 2);
  ds.negatives = Matrix::Ones(4, 2);
  const PAucRange r = PAucRange::from_indices(1, 3, 4);
  Vector w(2);
  w << 0.4, -0.1;
  const CriticalityCertificate cert = certify(w, ds, r, 0.05);
  CHECK(cert.xi_norm == 0.0);
  CHECK(cert.dist_to_vm == 0.0);
  CHECK(cert.dist_to_vn == 0.0);
  CHECK(cert.high_confidence);
}

TEST_CASE("certificates: distances respect the mu l B prox bound") {
  std::mt19937_64 rng(7);
  const BinaryDataset ds = testutil::random_dataset(5, 12, 2, rng, 1.0, 0.4);
  const SmoothnessConstants c = estimate_constants(ds);
  const double mu = 0.4 / c.rho;
  const PAucRange r = PAucRange::from_indices(3, 8, 12);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector w = testutil::random_vector(2, rng, 1.5);
    const CriticalityCertificate cert = certify(w, ds, r, mu);
    REQUIRE(cert.high_confidence);
    const double rows = static_cast<double>(ds.n_pos());
    CHECK(cert.dist_to_vm <= mu * rows * static_cast<double>(r.m) * c.B + 1e-6);
    CHECK(cert.dist_to_vn <= mu * rows * static_cast<double>(r.n) * c.B + 1e-6);
  }
}

TEST_CASE("smoothed objective sandwich: F at the prox point sits below F^mu") {
  std::mt19937_64 rng(8);
  const BinaryDataset ds = testutil::random_dataset(4, 10, 2, rng, 1.0, 0.4);
  const SmoothnessConstants c = estimate_constants(ds);
  const double mu = 0.4 / c.rho;
  const PAucRange r = PAucRange::from_indices(2, 6, 10);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector w = testutil::random_vector(2, rng, 1.2);
    const Vector vn = prox_point_exact(w, ds, r.n, mu, 1e-8).v;
    const double f_mu =
        moreau_value(w, ds, r.n, mu, 1e-8) - moreau_value(w, ds, r.m, mu, 1e-8);
    CHECK(dc_objective(vn, ds, r) <= f_mu + 1e-6);
  }
}

TEST_CASE("gradient-estimate trend: running minimum ends below 10% of its start") {
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticSpec spec;
    spec.n_pos = 20;
    spec.n_neg = 120;
    spec.dim = 2;
    spec.separation = 4.0;
    spec.noise = 1.0;
    spec.seed = 21;
    const BinaryDataset ds = generate_synthetic(spec);
    const PAucRange r = PAucRange::from_rates(0.1, 0.5, 120);

    AgdConfig cfg;
    cfg.outer_iterations = 12;
    cfg.t_growth = 30.0;
    cfg.step_c = 5.0;
    cfg.batch_pos = 20;
    cfg.batch_neg = 60;
    cfg.seed = seed;
    cfg.certify_result = false;
    const AgdResult res = agd_run(ds, r, cfg, Vector::Zero(2));

    double runmin = std::numeric_limits<double>::infinity();
    const double first = res.trace.rows.front().xi_norm_est;
    for (const TraceRow& row : res.trace.rows) runmin = std::min(runmin, row.xi_norm_est);
    ratios.push_back(runmin / first);
  }
  CHECK(median_of(ratios) < 0.10);
}

TEST_CASE("sorr outer loop: m = 0 keeps the objective equal to the top-n loss") {
  SyntheticRegressionSpec spec;
  spec.n = 120;
  spec.dim = 3;
  spec.noise = 1.0;
  spec.seed = 2;
  const RegressionDataset ds = generate_synthetic_logistic(spec);

  AgdConfig cfg;
  cfg.outer_iterations = 6;
  cfg.t_growth = 10.0;
  cfg.step_c = 2.0;
  cfg.batch_neg = 40;
  cfg.seed = 4;
  cfg.certify_result = false;
  cfg.record_inner = true;
  const AgdSorrResult res = agd_run_sorr(ds, 0, 36, cfg, Vector::Zero(3));

  for (std::size_t k = 0; k < res.trace.rows.size(); ++k) {
    const Vector& w = res.trace.w_path[k + 1];
    CHECK(dc_objective_sorr(w, ds, 0, 36) == f_l_sorr(w, ds, 36));
    CHECK(res.trace.v_bar_m[k] == res.trace.w_path[k]);
  }
  CHECK(res.trace.rows.back().normalized_loss <
        dc_objective_sorr_normalized(Vector::Zero(3), ds, 0, 36));
}
