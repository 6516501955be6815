#include "paucopt/surrogate.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace paucopt;

namespace {

// Extended-precision evaluation of log(1 + exp(-z)).
long double logistic_loss_ref(long double z) {
  if (z >= 0.0L) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double rel_err(double got, long double want) {
  return static_cast<double>(std::abs(static_cast<long double>(got) - want) /
                             std::max(1e-300L, std::abs(want)));
}

Vector central_diff(const std::function<double(const Vector&)>& f, const Vector& w, double h) {
  Vector g(w.size());
  Vector e = w;
  for (Index i = 0; i < w.size(); ++i) {
    e(i) = w(i) + h;
    const double fp = f(e);
    e(i) = w(i) - h;
    const double fm = f(e);
    e(i) = w(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("logistic loss values and monotonicity") {
  CHECK(logistic_loss(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  double prev = logistic_loss(-60.0);
  for (double z = -59.0; z <= 60.0; z += 1.0) {
    const double cur = logistic_loss(z);
    CHECK(cur < prev);  // strictly decreasing
    CHECK(cur >= 0.0);
    prev = cur;
  }
  CHECK(logistic_loss(1000.0) == 0.0);  // underflows cleanly, no NaN
}

TEST_CASE("logistic loss at |z| = 50 matches extended precision to 1e-12") {
  for (double z : {-50.0, -37.5, 37.5, 50.0}) {
    CHECK(std::isfinite(logistic_loss(z)));
    CHECK(rel_err(logistic_loss(z), logistic_loss_ref(z)) < 1e-12);
  }
  CHECK(logistic_loss(-50.0) == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("logistic inverse round-trips") {
  for (double z : {-30.0, -2.0, 0.0, 3.0, 25.0}) {
    const double y = logistic_loss(z);
    CHECK(logistic_loss_invert(y) == doctest::Approx(z).epsilon(1e-9));
  }
  CHECK(std::isinf(logistic_loss_invert(0.0)));
  CHECK(std::isinf(logistic_loss_invert(-1.0)));
}

TEST_CASE("score is the inner product") {
  Vector w = Vector::Zero(3);
  Vector x(3);
  x << 3.0, -1.0, 2.0;
  CHECK(score(w, x) == 0.0);
  w << 1.0, 0.0, 0.0;
  CHECK(score(w, x) == 3.0);

  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector a = testutil::random_vector(6, rng);
    const Vector b = testutil::random_vector(6, rng);
    long double acc = 0.0L;  // independent accumulation: high precision, reversed order
    for (Index i = a.size() - 1; i >= 0; --i)
      acc += static_cast<long double>(a(i)) * static_cast<long double>(b(i));
    CHECK(score(a, b) == doctest::Approx(static_cast<double>(acc)).epsilon(1e-12));
  }
  Vector short_x(2);
  CHECK_THROWS_AS((void)score(w, short_x), ValidationError);
}

TEST_CASE("pair gradient: zero when the pair coincides, matches finite differences") {
  std::mt19937_64 rng(2);
  BinaryDataset ds = testutil::random_dataset(3, 4, 5, rng);
  ds.negatives.row(2) = ds.positives.row(1);
  const Vector w = testutil::random_vector(5, rng);
  CHECK(pair_loss_grad(w, ds, {1, 2}).norm() == 0.0);

  for (int rep = 0; rep < 100; ++rep) {
    const Vector wr = testutil::random_vector(5, rng);
    const Index i = static_cast<Index>(rng() % 3);
    const Index j = static_cast<Index>(rng() % 4);
    const Vector g = pair_loss_grad(wr, ds, {i, j});
    const Vector fd =
        central_diff([&](const Vector& v) { return pair_loss(v, ds, {i, j}); }, wr, 1e-5);
    CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("pair gradient norm bounded by the pair difference norm") {
  std::mt19937_64 rng(3);
  const BinaryDataset ds = testutil::random_dataset(2, 3, 4, rng);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector w = testutil::random_vector(4, rng, 3.0);
    const Index i = static_cast<Index>(rng() % 2);
    const Index j = static_cast<Index>(rng() % 3);
    const double diff = (ds.positives.row(i) - ds.negatives.row(j)).norm();
    CHECK(pair_loss_grad(w, ds, {i, j}).norm() <= diff);
  }
}

TEST_CASE("sorr sample loss: value, gradient, validation") {
  std::mt19937_64 rng(4);
  RegressionDataset ds;
  ds.features = Matrix::Random(6, 3);
  ds.targets.resize(6);
  for (Index j = 0; j < 6; ++j) ds.targets(j) = (j % 2 == 0) ? 1.0 : 0.0;

  const Vector w0 = Vector::Zero(3);
  for (Index j = 0; j < 6; ++j) {
    const auto [loss, grad] = sorr_sample_loss(w0, ds, j);
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const Vector want = (0.5 - ds.targets(j)) * ds.features.row(j).transpose();
    CHECK((grad - want).norm() <= 1e-15);
  }

  for (int rep = 0; rep < 50; ++rep) {
    const Vector w = testutil::random_vector(3, rng);
    const Index j = static_cast<Index>(rng() % 6);
    const auto [loss, grad] = sorr_sample_loss(w, ds, j);
    CHECK(loss >= 0.0);
    const Vector fd = central_diff(
        [&](const Vector& v) { return sorr_sample_loss_value(v, ds, j); }, w, 1e-5);
    CHECK((grad - fd).norm() <= 1e-6 * std::max(1.0, grad.norm()));
  }

  ds.targets(1) = 0.5;
  CHECK_THROWS_AS((void)sorr_sample_loss(w0, ds, 1), ValidationError);
}

TEST_CASE("constants: degenerate pools and a hand-worked 2x2 toy") {
  BinaryDataset flat;
  flat.positives = Matrix::Ones(2, 3);
  flat.negatives = Matrix::Ones(2, 3);
  const SmoothnessConstants zero = estimate_constants(flat);
  CHECK(zero.L == 0.0);
  CHECK(zero.B == 0.0);
  CHECK(zero.rho == 0.0);

  BinaryDataset toy;
  toy.positives.resize(2, 2);
  toy.positives << 1.0, 0.0, 0.0, 1.0;
  toy.negatives.resize(2, 2);
  toy.negatives << -1.0, 0.0, 0.0, -1.0;
  // pair difference norms^2: 4, 2, 2, 4 -> max 4
  const SmoothnessConstants c = estimate_constants(toy);
  CHECK(c.L == 1.0);
  CHECK(c.B == 2.0);
  CHECK(c.rho == 2.0 * 2.0 * 1.0);
}

TEST_CASE("constants: empirical bounds hold over random draws") {
  std::mt19937_64 rng(5);
  const BinaryDataset ds = testutil::random_dataset(4, 5, 3, rng);
  const SmoothnessConstants c = estimate_constants(ds);
  CHECK(c.rho == static_cast<double>(ds.n_pos() * ds.n_neg()) * c.L);

  for (int rep = 0; rep < 1000; ++rep) {
    const Vector w = testutil::random_vector(3, rng, 2.0);
    const Vector v = testutil::random_vector(3, rng, 2.0);
    const Index i = static_cast<Index>(rng() % 4);
    const Index j = static_cast<Index>(rng() % 5);
    const Vector gw = pair_loss_grad(w, ds, {i, j});
    CHECK(gw.norm() <= c.B + 1e-12);
    const double dist = (w - v).norm();
    if (dist > 1e-9) {
      const Vector gv = pair_loss_grad(v, ds, {i, j});
      CHECK((gw - gv).norm() <= c.L * dist * (1.0 + 1e-9));
    }
  }
}
