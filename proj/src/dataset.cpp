#include "paucopt/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace paucopt {

namespace {

void check_pool(const Matrix& pool, const char* name) {
  if (pool.rows() < 1) throw ValidationError(std::string("empty ") + name + " pool");
  if (!pool.allFinite()) throw ValidationError(std::string(name) + " pool has non-finite entries");
}

struct SparseRow {
  int label = 0;
  std::vector<std::pair<Index, double>> entries;
};

SparseRow parse_libsvm_line(const std::string& line, long lineno) {
  SparseRow row;
  std::istringstream ss(line);
  std::string tok;
  if (!(ss >> tok)) throw ParseError("missing label", lineno);
  try {
    std::size_t pos = 0;
    row.label = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    throw ParseError("non-numeric label '" + tok + "'", lineno);
  }
  Index prev_idx = 0;
  while (ss >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", lineno);
    Index idx = 0;
    double val = 0.0;
    try {
      std::size_t pos = 0;
      idx = static_cast<Index>(std::stoll(tok.substr(0, colon), &pos));
      if (pos != colon) throw std::invalid_argument(tok);
      val = std::stod(tok.substr(colon + 1), &pos);
      if (pos != tok.size() - colon - 1) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("non-numeric entry '" + tok + "'", lineno);
    }
    if (idx < 1) throw ParseError("index must be >= 1", lineno);
    if (idx <= prev_idx) throw ParseError("indices must be strictly ascending", lineno);
    if (!std::isfinite(val)) throw ParseError("non-finite value", lineno);
    prev_idx = idx;
    row.entries.emplace_back(idx, val);
  }
  return row;
}

Matrix densify(const std::vector<SparseRow>& rows, const std::vector<std::size_t>& which, Index d) {
  Matrix out = Matrix::Zero(static_cast<Index>(which.size()), d);
  for (std::size_t r = 0; r < which.size(); ++r) {
    for (const auto& [idx, val] : rows[which[r]].entries) {
      out(static_cast<Index>(r), idx - 1) = val;
    }
  }
  return out;
}

void write_libsvm_rows(std::ofstream& out, const Matrix& pool, const char* label) {
  char buf[64];
  for (Index r = 0; r < pool.rows(); ++r) {
    out << label;
    for (Index c = 0; c < pool.cols(); ++c) {
      const double v = pool(r, c);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ' ' << (c + 1) << ':' << buf;
    }
    out << '\n';
  }
}

std::vector<Index> shuffled_indices(Index n, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  return idx;
}

Matrix take_rows(const Matrix& src, const std::vector<Index>& rows, std::size_t begin, std::size_t end) {
  Matrix out(static_cast<Index>(end - begin), src.cols());
  for (std::size_t k = begin; k < end; ++k) out.row(static_cast<Index>(k - begin)) = src.row(rows[k]);
  return out;
}

}  // namespace

void validate(const BinaryDataset& ds) {
  check_pool(ds.positives, "positive");
  check_pool(ds.negatives, "negative");
  if (ds.positives.cols() != ds.negatives.cols())
    throw ValidationError("positive/negative feature dimensions differ");
}

void validate(const RegressionDataset& ds) {
  if (ds.features.rows() < 1) throw ValidationError("empty regression dataset");
  if (!ds.features.allFinite() || !ds.targets.allFinite())
    throw ValidationError("regression dataset has non-finite entries");
  if (ds.targets.size() != ds.features.rows())
    throw ValidationError("targets/features row counts differ");
}

BinaryDataset load_libsvm(const std::string& path, int positive_label) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");

  std::vector<SparseRow> rows;
  Index d = 0;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_libsvm_line(line, lineno));
    if (!rows.back().entries.empty()) d = std::max(d, rows.back().entries.back().first);
  }

  std::vector<std::size_t> pos_rows, neg_rows;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    (rows[r].label == positive_label ? pos_rows : neg_rows).push_back(r);
  }
  if (pos_rows.empty()) throw ValidationError("empty positive pool");
  if (neg_rows.empty()) throw ValidationError("empty negative pool");

  BinaryDataset ds;
  ds.positives = densify(rows, pos_rows, d);
  ds.negatives = densify(rows, neg_rows, d);
  ds.source = path;
  validate(ds);
  return ds;
}

void save_libsvm(const BinaryDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  write_libsvm_rows(out, ds.positives, "+1");
  write_libsvm_rows(out, ds.negatives, "-1");
}

BinaryDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_pos < 1 || spec.n_neg < 1 || spec.dim < 1)
    throw ValidationError("synthetic spec counts must be >= 1");
  if (!(spec.noise > 0.0)) throw ValidationError("synthetic noise scale must be > 0");

  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  BinaryDataset ds;
  ds.positives.resize(spec.n_pos, spec.dim);
  ds.negatives.resize(spec.n_neg, spec.dim);
  for (Index r = 0; r < spec.n_pos; ++r)
    for (Index c = 0; c < spec.dim; ++c)
      ds.positives(r, c) = (c == 0 ? spec.separation / 2.0 : 0.0) + spec.noise * gauss(rng);
  for (Index r = 0; r < spec.n_neg; ++r)
    for (Index c = 0; c < spec.dim; ++c)
      ds.negatives(r, c) = (c == 0 ? -spec.separation / 2.0 : 0.0) + spec.noise * gauss(rng);
  ds.source = "synthetic";
  return ds;
}

RegressionDataset generate_synthetic_logistic(const SyntheticRegressionSpec& spec) {
  if (spec.n < 1 || spec.dim < 1) throw ValidationError("synthetic spec counts must be >= 1");
  if (!(spec.noise > 0.0)) throw ValidationError("synthetic noise scale must be > 0");

  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector w_true(spec.dim);
  for (Index c = 0; c < spec.dim; ++c) w_true(c) = gauss(rng);
  w_true.normalize();

  RegressionDataset ds;
  ds.features.resize(spec.n, spec.dim);
  ds.targets.resize(spec.n);
  for (Index r = 0; r < spec.n; ++r) {
    for (Index c = 0; c < spec.dim; ++c) ds.features(r, c) = gauss(rng);
    const double margin = ds.features.row(r).dot(w_true) + spec.noise * gauss(rng);
    ds.targets(r) = margin > 0.0 ? 1.0 : 0.0;
  }
  ds.source = "synthetic_regression";
  return ds;
}

std::pair<BinaryDataset, BinaryDataset> train_test_split(const BinaryDataset& ds,
                                                         double train_fraction,
                                                         std::uint64_t seed) {
  validate(ds);
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must lie in (0,1)");

  const Index np = ds.n_pos(), nn = ds.n_neg();
  const Index tp = static_cast<Index>(std::llround(train_fraction * static_cast<double>(np)));
  const Index tn = static_cast<Index>(std::llround(train_fraction * static_cast<double>(nn)));
  if (tp < 1 || tp >= np || tn < 1 || tn >= nn)
    throw ValidationError("split fraction would empty a pool");

  Rng rng(seed);
  std::vector<Index> pidx = shuffled_indices(np, rng);
  std::vector<Index> nidx = shuffled_indices(nn, rng);
  std::sort(pidx.begin(), pidx.begin() + tp);
  std::sort(pidx.begin() + tp, pidx.end());
  std::sort(nidx.begin(), nidx.begin() + tn);
  std::sort(nidx.begin() + tn, nidx.end());

  BinaryDataset train, test;
  train.positives = take_rows(ds.positives, pidx, 0, static_cast<std::size_t>(tp));
  train.negatives = take_rows(ds.negatives, nidx, 0, static_cast<std::size_t>(tn));
  test.positives = take_rows(ds.positives, pidx, static_cast<std::size_t>(tp), pidx.size());
  test.negatives = take_rows(ds.negatives, nidx, static_cast<std::size_t>(tn), nidx.size());
  train.source = ds.source + "#train";
  test.source = ds.source + "#test";
  return {std::move(train), std::move(test)};
}

}  // namespace paucopt
