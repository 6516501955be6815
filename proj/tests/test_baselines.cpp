#include "paucopt/baselines.hpp"

#include "paucopt/metrics.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace paucopt;

namespace {

DcaConfig small_config() {
  DcaConfig cfg;
  cfg.outer_iterations = 5;
  cfg.t_growth = 20.0;
  cfg.step_c = 5.0;
  cfg.batch_pos = 8;
  cfg.batch_neg = 12;
  return cfg;
}

}  // namespace

TEST_CASE("dca subgradient: degenerate ranks") {
  std::mt19937_64 rng(1);
  const BinaryDataset ds = testutil::random_dataset(3, 5, 3, rng);
  const Vector w = testutil::random_vector(3, rng);

  CHECK(dca_subgradient_fm(w, ds, 0).norm() == 0.0);

  Vector all_pairs = Vector::Zero(3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 5; ++j) all_pairs += pair_loss_grad(w, ds, {i, j});
  CHECK((dca_subgradient_fm(w, ds, 5) - all_pairs).norm() <= 1e-12 * (1.0 + all_pairs.norm()));
}

TEST_CASE("dca subgradient matches directional finite differences at generic points") {
  std::mt19937_64 rng(2);
  const BinaryDataset ds = testutil::random_dataset(2, 3, 3, rng);
  const Vector w = testutil::random_vector(3, rng);
  const Index m = 2;
  const Vector xi = dca_subgradient_fm(w, ds, m);

  const double h = 1e-6;
  for (int rep = 0; rep < 10; ++rep) {
    Vector u = testutil::random_vector(3, rng);
    u.normalize();
    const double up = f_l_pauc(w + h * u, ds, m);
    const double dn = f_l_pauc(w - h * u, ds, m);
    const double directional = (up - dn) / (2.0 * h);
    CHECK(directional == doctest::Approx(xi.dot(u)).epsilon(1e-4));
  }
}

TEST_CASE("weak-convexity minorant built from the subgradient holds") {
  std::mt19937_64 rng(3);
  const BinaryDataset ds = testutil::random_dataset(3, 6, 2, rng, 1.0, 0.5);
  const double rho = estimate_constants(ds).rho;
  const Index m = 2;

  for (int rep = 0; rep < 50; ++rep) {
    const Vector w = testutil::random_vector(2, rng);
    const Vector v = testutil::random_vector(2, rng);
    const Vector xi = dca_subgradient_fm(w, ds, m);
    const double lhs = f_l_pauc(v, ds, m);
    const double rhs = f_l_pauc(w, ds, m) + xi.dot(v - w) - 0.5 * rho * (v - w).squaredNorm();
    CHECK(lhs >= rhs - 1e-9);
  }
}

TEST_CASE("linearized surrogate touches the objective at the expansion point") {
  std::mt19937_64 rng(4);
  const BinaryDataset ds = testutil::random_dataset(3, 7, 2, rng);
  const PAucRange r = PAucRange::from_indices(2, 5, 7);
  const Vector wk = testutil::random_vector(2, rng);
  const Vector xi = dca_subgradient_fm(wk, ds, r.m);
  const auto surrogate = [&](const Vector& w) {
    return f_l_pauc(w, ds, r.n) - f_l_pauc(wk, ds, r.m) - xi.dot(w - wk);
  };
  CHECK(surrogate(wk) == dc_objective(wk, ds, r));
  // and it majorizes the true objective up to the weak-convexity quadratic
  const Vector probe = wk + testutil::random_vector(2, rng, 0.3);
  const double rho = estimate_constants(ds).rho;
  CHECK(dc_objective(probe, ds, r) <=
        surrogate(probe) + 0.5 * rho * (probe - wk).squaredNorm() + 1e-9);
}

TEST_CASE("prox variant with zero weight reproduces plain DCA bit-for-bit") {
  std::mt19937_64 rng(5);
  const BinaryDataset ds = testutil::random_dataset(8, 15, 2, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(2, 8, 15);
  DcaConfig cfg = small_config();
  cfg.seed = 11;
  cfg.l_prox = 0.0;

  const DcaResult plain = dca_run(ds, r, cfg, Vector::Zero(2));
  const DcaResult prox = prox_dca_run(ds, r, cfg, Vector::Zero(2));
  CHECK(plain.w_final == prox.w_final);
  REQUIRE(plain.trace.rows.size() == prox.trace.rows.size());
  for (std::size_t k = 0; k < plain.trace.rows.size(); ++k)
    CHECK(plain.trace.rows[k].normalized_loss == prox.trace.rows[k].normalized_loss);
}

TEST_CASE("a huge proximal weight freezes the outer iterate") {
  std::mt19937_64 rng(6);
  const BinaryDataset ds = testutil::random_dataset(6, 12, 2, rng, 2.0);
  const SmoothnessConstants c = estimate_constants(ds);
  const PAucRange r = PAucRange::from_indices(2, 6, 12);
  DcaConfig cfg = small_config();
  cfg.outer_iterations = 3;
  cfg.l_prox = 1e6;
  cfg.seed = 2;
  const Vector w0 = Vector::Zero(2);
  const DcaResult res = prox_dca_run(ds, r, cfg, w0);

  // per-step displacement bound from the quadratic's closed form:
  // every inner step moves at most (||xi|| + scaled batch gradient)/L
  const double pair_bound =
      static_cast<double>(ds.n_pos() * ds.n_neg()) * c.B;  // worst case scale
  const double step_bound = (dca_subgradient_fm(w0, ds, r.m).norm() + pair_bound) / cfg.l_prox;
  CHECK((res.w_final - w0).norm() <= 100.0 * step_bound);
}

TEST_CASE("m = 0 turns DCA into plain stochastic descent on the top-n dual") {
  std::mt19937_64 rng(7);
  const BinaryDataset ds = testutil::random_dataset(10, 20, 2, rng, 3.0);
  const PAucRange r = PAucRange::from_indices(0, 10, 20);
  std::vector<std::vector<double>> curves;
  for (std::uint64_t seed = 0; seed < 7; ++seed) {
    DcaConfig cfg = small_config();
    cfg.seed = seed;
    const DcaResult res = dca_run(ds, r, cfg, Vector::Zero(2));
    std::vector<double> losses;
    losses.push_back(dc_objective_normalized(Vector::Zero(2), ds, r));
    for (const TraceRow& row : res.trace.rows) losses.push_back(row.normalized_loss);
    curves.push_back(losses);
  }
  for (std::size_t k = 1; k < curves.front().size(); ++k) {
    std::vector<double> prev, cur;
    for (const auto& c : curves) {
      prev.push_back(c[k - 1]);
      cur.push_back(c[k]);
    }
    std::sort(prev.begin(), prev.end());
    std::sort(cur.begin(), cur.end());
    CHECK(cur[3] <= prev[3] + 1e-9);
  }
}

TEST_CASE("determinism under a fixed seed") {
  std::mt19937_64 rng(8);
  const BinaryDataset ds = testutil::random_dataset(6, 10, 2, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(1, 5, 10);
  DcaConfig cfg = small_config();
  cfg.seed = 123;
  const DcaResult a = dca_run(ds, r, cfg, Vector::Zero(2));
  const DcaResult b = dca_run(ds, r, cfg, Vector::Zero(2));
  CHECK(a.w_final == b.w_final);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t k = 0; k < a.trace.rows.size(); ++k) {
    CHECK(a.trace.rows[k].normalized_loss == b.trace.rows[k].normalized_loss);
    CHECK(a.trace.rows[k].epochs == b.trace.rows[k].epochs);
  }
}

TEST_CASE("epoch accounting: full passes plus batches over total pairs") {
  std::mt19937_64 rng(9);
  const BinaryDataset ds = testutil::random_dataset(10, 20, 2, rng, 2.0);
  const PAucRange r = PAucRange::from_indices(2, 10, 20);
  DcaConfig cfg = small_config();
  cfg.batch_pos = 5;
  cfg.batch_neg = 10;
  cfg.outer_iterations = 3;
  const DcaResult res = dca_run(ds, r, cfg, Vector::Zero(2));

  const double per_inner = (5.0 * 10.0) / (10.0 * 20.0);
  double want = 0.0;
  for (int k = 0; k < 3; ++k) {
    want += 1.0;  // deterministic subgradient pass
    want += per_inner * 20.0 * (k + 1.0) * (k + 1.0);
    CHECK(res.trace.rows[static_cast<std::size_t>(k)].epochs == doctest::Approx(want).epsilon(1e-12));
  }
}
