// Shared aliases, error types and RNG utilities.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace paucopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "paucopt-0.1.0";

// Invalid inputs detected at API boundaries (bad dimensions, empty pools, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Bad experiment configuration (unknown keys, missing sections, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A solver iterate left the finite/bounded region; carries the step index.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

using Rng = std::mt19937_64;

// Draws k distinct indices from [0, n). The pool persists across calls so a
// draw costs O(k), not O(n); the pool being left permuted does not bias later
// draws.
class SubsetSampler {
 public:
  explicit SubsetSampler(Index n) : pool_(static_cast<std::size_t>(n)) {
    for (Index i = 0; i < n; ++i) pool_[static_cast<std::size_t>(i)] = i;
  }

  void sample(Index k, Rng& rng, std::vector<Index>& out) {
    const Index n = static_cast<Index>(pool_.size());
    if (k < 0 || k > n) throw ValidationError("subset size out of range");
    out.resize(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, n - 1);
      std::swap(pool_[static_cast<std::size_t>(i)], pool_[static_cast<std::size_t>(pick(rng))]);
      out[static_cast<std::size_t>(i)] = pool_[static_cast<std::size_t>(i)];
    }
  }

 private:
  std::vector<Index> pool_;
};

}  // namespace paucopt
