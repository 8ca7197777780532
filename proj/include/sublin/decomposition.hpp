#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sublin/sparse_system.hpp"
#include "sublin/sparse_vec.hpp"

namespace sublin {

inline constexpr std::uint64_t kDefaultSeed = 0x5EEDBA5Eu;
inline constexpr double kClassSlack = 1e-12;

struct DominanceClass {
  bool rdd = false;
  bool cdd = false;
  bool z = false;
  bool symmetric = false;

  bool sdd() const { return rdd && symmetric; }
  bool rcdd() const { return rdd && cdd; }
  bool rddz() const { return rdd && z; }
  bool cddz() const { return cdd && z; }
  bool rcddz() const { return rdd && cdd && z; }
};

// M = D - A^T with D diagonal. offdiag stores A^T. In the canonical split the
// diagonal of offdiag is empty; builders may force a different split (keeping
// D at a chosen value even when the matrix has diagonal structure of its own),
// in which case forced_split records that offdiag carries diagonal entries.
struct Decomposition {
  int n = 0;
  std::vector<double> diag;
  SparseMatrix offdiag;
  DominanceClass cls;
  bool forced_split = false;
  double d_max = 0.0;
  double d_min = 0.0;
  std::int64_t nnz_m = 0;
  int row_cost = 1;
  int col_cost = 1;
};

DominanceClass classify(const SparseMatrix& m, double slack = kClassSlack);

Decomposition decompose(const SparseMatrix& m, double slack = kClassSlack);

// Builds a decomposition directly from parts. Classification is computed from
// the parts: row/column sums of |offdiag| (including any diagonal entries it
// carries) against diag. For the canonical split this coincides with
// classify(reconstruct(...)).
Decomposition decomposition_from_parts(std::vector<double> diag, SparseMatrix offdiag,
                                       bool forced_split, double slack = kClassSlack);

SparseMatrix reconstruct(const Decomposition& dec);

enum class GapMode { general, p1, pinf };

struct VecStats {
  double nnz = 0.0;
  double dinv_inf = 0.0;
};

VecStats vec_stats(const Decomposition& dec, const std::vector<double>& v);
VecStats vec_stats(const Decomposition& dec, const SparseVec& v);

// L = max(1, ceil((1/gamma) * ln(C / (gamma * epsilon)))) where
// C = d_max * nnz(t) * ||D^-1 t||_inf * nnz(b) * ||D^-1 b||_inf.
// GapMode::p1 drops the nnz(t) factor, GapMode::pinf drops nnz(b).
int truncation_length(const Decomposition& dec, const VecStats& b_stats, const VecStats& t_stats,
                      double gamma, double epsilon, GapMode mode = GapMode::general);

// Applies the lazy operator B = (1/2)(I + D^-1 A^T).
std::vector<double> lazy_apply(const Decomposition& dec, const std::vector<double>& v);
SparseVec lazy_apply(const Decomposition& dec, const SparseVec& v);

struct SolverParams {
  double gamma = 0.0;
  double epsilon = 0.0;
  std::optional<int> L;
  std::optional<std::int64_t> n_s;
  double r_max = 0.0;
  std::optional<double> eta;
  // Upper bound on ||D^-1 b||_inf for the relative estimator when the caller
  // knows one; the exact value is computed from b otherwise.
  std::optional<double> dinv_b_inf_bound;
  std::uint64_t seed = kDefaultSeed;
  std::int64_t sample_cap = 1'000'000'000;
  int median_k = 1;
};

}  // namespace sublin
