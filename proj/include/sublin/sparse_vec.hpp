#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace sublin {

// Sparse vector keyed by coordinate. Ordered map keeps iteration deterministic.
using SparseVec = std::map<int, double>;

inline double sparse_dot(const SparseVec& a, const std::vector<double>& dense) {
  double s = 0.0;
  for (const auto& [i, v] : a) s += v * dense[static_cast<std::size_t>(i)];
  return s;
}

inline double sparse_norm1(const SparseVec& a) {
  double s = 0.0;
  for (const auto& [i, v] : a) s += std::abs(v);
  return s;
}

inline double sparse_norm_inf(const SparseVec& a) {
  double s = 0.0;
  for (const auto& [i, v] : a) s = std::max(s, std::abs(v));
  return s;
}

inline int sparse_nnz(const SparseVec& a) {
  int c = 0;
  for (const auto& [i, v] : a)
    if (v != 0.0) ++c;
  return c;
}

inline std::vector<double> sparse_to_dense(const SparseVec& a, int n) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (const auto& [i, v] : a) out[static_cast<std::size_t>(i)] = v;
  return out;
}

inline SparseVec dense_to_sparse(const std::vector<double>& a) {
  SparseVec out;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0.0) out[static_cast<int>(i)] = a[i];
  return out;
}

// Binary-counter pairwise summation. Produces the same result for a given
// sequence of add() calls regardless of how the caller partitions work,
// and keeps rounding error logarithmic in the number of terms.
class PairwiseAccumulator {
 public:
  void add(double x) {
    std::uint64_t idx = count_++;
    for (; idx & 1u; idx >>= 1) {
      x += levels_.back();
      levels_.pop_back();
    }
    levels_.push_back(x);
  }

  double total() const {
    double s = 0.0;
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) s += *it;
    return s;
  }

  std::uint64_t count() const { return count_; }

 private:
  std::vector<double> levels_;
  std::uint64_t count_ = 0;
};

}  // namespace sublin
