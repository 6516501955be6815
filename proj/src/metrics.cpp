#include "paucopt/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace paucopt {

namespace {

void check_nonempty(const Vector& pos, const Vector& neg) {
  if (pos.size() < 1 || neg.size() < 1) throw ValidationError("empty score pool");
}

std::vector<double> sorted_asc(const Vector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

// Indicator mass of `pos > s` (plus half the ties when requested).
double count_above(const std::vector<double>& pos_asc, double s, TieMode mode) {
  const auto lo = std::lower_bound(pos_asc.begin(), pos_asc.end(), s);
  const auto hi = std::upper_bound(lo, pos_asc.end(), s);
  double c = static_cast<double>(pos_asc.end() - hi);
  if (mode == TieMode::HalfCredit) c += 0.5 * static_cast<double>(hi - lo);
  return c;
}

}  // namespace

double full_auc(const Vector& scores_pos, const Vector& scores_neg, TieMode mode) {
  check_nonempty(scores_pos, scores_neg);
  const std::vector<double> neg = sorted_asc(scores_neg);
  double count = 0.0;
  for (Index i = 0; i < scores_pos.size(); ++i) {
    const double p = scores_pos(i);
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    count += static_cast<double>(lo - neg.begin());  // negatives strictly below
    if (mode == TieMode::HalfCredit) {
      const auto hi = std::upper_bound(lo, neg.end(), p);
      count += 0.5 * static_cast<double>(hi - lo);
    }
  }
  return count / (static_cast<double>(scores_pos.size()) * static_cast<double>(scores_neg.size()));
}

double pauc_count(const Vector& scores_pos, const Vector& scores_neg, const PAucRange& r,
                  TieMode mode) {
  check_nonempty(scores_pos, scores_neg);
  if (r.n > scores_neg.size() || r.m >= r.n) throw ValidationError("invalid pAUC window");

  // Rank negatives by descending score, ties lowest-original-index-first.
  std::vector<Index> order(static_cast<std::size_t>(scores_neg.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&scores_neg](Index a, Index b) {
    if (scores_neg(a) != scores_neg(b)) return scores_neg(a) > scores_neg(b);
    return a < b;
  });

  const std::vector<double> pos = sorted_asc(scores_pos);
  double count = 0.0;
  for (Index rank = r.m; rank < r.n; ++rank)
    count += count_above(pos, scores_neg(order[static_cast<std::size_t>(rank)]), mode);
  return count;
}

double pauc_range(const Vector& scores_pos, const Vector& scores_neg, const PAucRange& r,
                  TieMode mode) {
  const double denom =
      static_cast<double>(scores_pos.size()) * static_cast<double>(r.n - r.m);
  return pauc_count(scores_pos, scores_neg, r, mode) / denom;
}

double pauc(const Vector& scores_pos, const Vector& scores_neg, double alpha, double beta,
            TieMode mode) {
  check_nonempty(scores_pos, scores_neg);
  return pauc_range(scores_pos, scores_neg,
                    PAucRange::from_rates(alpha, beta, scores_neg.size()), mode);
}

RocCurve roc_curve(const Vector& scores_pos, const Vector& scores_neg) {
  check_nonempty(scores_pos, scores_neg);
  std::vector<double> pos(scores_pos.data(), scores_pos.data() + scores_pos.size());
  std::vector<double> neg(scores_neg.data(), scores_neg.data() + scores_neg.size());
  std::sort(pos.begin(), pos.end(), std::greater<double>());
  std::sort(neg.begin(), neg.end(), std::greater<double>());

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t ip = 0, in = 0;
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  while (ip < pos.size() || in < neg.size()) {
    double v;
    if (ip < pos.size() && in < neg.size()) v = std::max(pos[ip], neg[in]);
    else if (ip < pos.size()) v = pos[ip];
    else v = neg[in];
    while (ip < pos.size() && pos[ip] == v) ++ip;
    while (in < neg.size() && neg[in] == v) ++in;
    curve.points.push_back({static_cast<double>(in) / nn, static_cast<double>(ip) / np, v});
  }
  return curve;
}

double trapezoid_area(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return area;
}

}  // namespace paucopt
