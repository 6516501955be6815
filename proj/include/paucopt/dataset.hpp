// Binary and regression datasets: LIBSVM I/O, synthetic generators, splits.
#pragma once

#include "paucopt/common.hpp"

#include <string>
#include <utility>

namespace paucopt {

// Positive/negative feature pools of a binary task. Rows are samples.
// Immutable after construction by convention; solvers share it by const ref.
struct BinaryDataset {
  Matrix positives;  // N+ x d
  Matrix negatives;  // N- x d
  std::string source;

  Index n_pos() const { return positives.rows(); }
  Index n_neg() const { return negatives.rows(); }
  Index dim() const { return positives.cols(); }
};

struct RegressionDataset {
  Matrix features;  // N x d
  Vector targets;   // N
  std::string source;

  Index n() const { return features.rows(); }
  Index dim() const { return features.cols(); }
};

struct SyntheticSpec {
  Index n_pos = 50;
  Index n_neg = 500;
  Index dim = 2;
  double separation = 4.0;  // class means sit at +/- separation/2 on axis 1
  double noise = 1.0;       // isotropic Gaussian scale, > 0
  std::uint64_t seed = 0;
};

// Synthetic logistic-regression task: x ~ N(0, I), y = 1(x . w* + noise > 0)
// for a fixed unit w*. Targets are {0,1}.
struct SyntheticRegressionSpec {
  Index n = 200;
  Index dim = 5;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

// Throws ValidationError unless both pools are nonempty with finite entries.
void validate(const BinaryDataset& ds);
void validate(const RegressionDataset& ds);

// LIBSVM text format: `label idx:val idx:val ...`, 1-based strictly ascending
// indices, dimension = max index across the file, missing entries zero.
// Rows whose label equals positive_label go to the positive pool, everything
// else to the negative pool.
BinaryDataset load_libsvm(const std::string& path, int positive_label);

// Canonical writer: positives (label +1) first, then negatives (label -1),
// zeros skipped, values in shortest-round-trip form. read(write(ds)) == ds.
void save_libsvm(const BinaryDataset& ds, const std::string& path);

BinaryDataset generate_synthetic(const SyntheticSpec& spec);
RegressionDataset generate_synthetic_logistic(const SyntheticRegressionSpec& spec);

// Stratified split: each pool is partitioned with round(train_fraction * N)
// rows in the train part. Both parts of both pools must stay nonempty.
std::pair<BinaryDataset, BinaryDataset> train_test_split(const BinaryDataset& ds,
                                                         double train_fraction,
                                                         std::uint64_t seed);

}  // namespace paucopt
