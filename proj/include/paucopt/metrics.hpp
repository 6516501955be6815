// Empirical ROC, AUC and normalized partial AUC.
#pragma once

#include "paucopt/common.hpp"
#include "paucopt/ranked_range.hpp"

#include <vector>

namespace paucopt {

// Ties at equal scores score 0 under Strict (the indicator is a strict
// inequality); HalfCredit scores 1/2 per tied pair for comparison with
// common AUC implementations.
enum class TieMode { Strict, HalfCredit };

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

// Step curve from (0,0) to (1,1), one point per distinct score, both
// coordinates non-decreasing.
struct RocCurve {
  std::vector<RocPoint> points;
};

// Pairwise indicator count / (N+ N-), computed by rank counting in
// O((N+ + N-) log N-).
double full_auc(const Vector& scores_pos, const Vector& scores_neg,
                TieMode mode = TieMode::Strict);

// Average TPR over negatives ranked m+1..n (by descending score, ties at the
// boundary broken lowest-original-index-first), normalized by N+ (n - m).
double pauc(const Vector& scores_pos, const Vector& scores_neg, double alpha, double beta,
            TieMode mode = TieMode::Strict);
double pauc_range(const Vector& scores_pos, const Vector& scores_neg, const PAucRange& r,
                  TieMode mode = TieMode::Strict);

// Unnormalized indicator count over the window; monotone under window
// nesting, unlike the normalized value.
double pauc_count(const Vector& scores_pos, const Vector& scores_neg, const PAucRange& r,
                  TieMode mode = TieMode::Strict);

RocCurve roc_curve(const Vector& scores_pos, const Vector& scores_neg);

double trapezoid_area(const RocCurve& curve);

}  // namespace paucopt
