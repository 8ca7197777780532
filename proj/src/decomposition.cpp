#include "sublin/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sublin/errors.hpp"

namespace sublin {

namespace {

bool matrix_symmetric(const SparseMatrix& m) {
  for (int i = 0; i < m.n(); ++i) {
    auto r = m.row(i);
    auto c = m.col(i);
    if (r.size() != c.size()) return false;
    for (int k = 0; k < r.size(); ++k) {
      if (r.idx_begin[k] != c.idx_begin[k]) return false;
      if (r.val_begin[k] != c.val_begin[k]) return false;
    }
  }
  return true;
}

bool dominant(const std::vector<double>& diag, const std::vector<double>& offsum, double slack) {
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0)) return false;
    if (offsum[i] > diag[i] * (1.0 + slack)) return false;
  }
  return true;
}

DominanceClass classify_parts(const std::vector<double>& diag, const SparseMatrix& offdiag,
                              double slack) {
  int n = offdiag.n();
  std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col_sum(static_cast<std::size_t>(n), 0.0);
  bool nonneg = true;
  for (int i = 0; i < n; ++i) {
    auto r = offdiag.row(i);
    for (int k = 0; k < r.size(); ++k) {
      double v = r.val_begin[k];
      row_sum[static_cast<std::size_t>(i)] += std::abs(v);
      col_sum[static_cast<std::size_t>(r.idx_begin[k])] += std::abs(v);
      if (v < 0.0) nonneg = false;
    }
  }
  DominanceClass cls;
  cls.rdd = dominant(diag, row_sum, slack);
  cls.cdd = dominant(diag, col_sum, slack);
  cls.z = nonneg;
  cls.symmetric = matrix_symmetric(offdiag);
  return cls;
}

}  // namespace

DominanceClass classify(const SparseMatrix& m, double slack) {
  int n = m.n();
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col_sum(static_cast<std::size_t>(n), 0.0);
  bool z = true;
  for (int i = 0; i < n; ++i) {
    auto r = m.row(i);
    for (int k = 0; k < r.size(); ++k) {
      int j = r.idx_begin[k];
      double v = r.val_begin[k];
      if (j == i) {
        diag[static_cast<std::size_t>(i)] = v;
        continue;
      }
      row_sum[static_cast<std::size_t>(i)] += std::abs(v);
      col_sum[static_cast<std::size_t>(j)] += std::abs(v);
      if (v > 0.0) z = false;
    }
  }
  DominanceClass cls;
  cls.rdd = dominant(diag, row_sum, slack);
  cls.cdd = dominant(diag, col_sum, slack);
  cls.z = z;
  cls.symmetric = matrix_symmetric(m);
  return cls;
}

Decomposition decomposition_from_parts(std::vector<double> diag, SparseMatrix offdiag,
                                       bool forced_split, double slack) {
  int n = offdiag.n();
  if (static_cast<int>(diag.size()) != n)
    throw SolverError(ErrorCode::DimensionMismatch, "diag length vs offdiag dimension");
  for (int i = 0; i < n; ++i) {
    if (!(diag[static_cast<std::size_t>(i)] > 0.0))
      throw SolverError(ErrorCode::NonPositiveDiagonal, "coordinate " + std::to_string(i));
  }
  Decomposition dec;
  dec.n = n;
  dec.cls = classify_parts(diag, offdiag, slack);
  dec.forced_split = forced_split;
  dec.d_max = 0.0;
  dec.d_min = std::numeric_limits<double>::infinity();
  for (double d : diag) {
    dec.d_max = std::max(dec.d_max, d);
    dec.d_min = std::min(dec.d_min, d);
  }
  if (n == 0) dec.d_min = 0.0;
  std::int64_t off_entries = 0;
  int max_row = 0, max_col = 0;
  for (int i = 0; i < n; ++i) {
    max_row = std::max(max_row, offdiag.row_nnz(i));
    max_col = std::max(max_col, offdiag.col_nnz(i));
  }
  dec.row_cost = 1 + max_row;
  dec.col_cost = 1 + max_col;
  // nnz of M = D - A^T: strict off-diagonal entries of A^T survive as stored;
  // diagonal entries count when D(i) - A^T(i,i) is nonzero.
  for (int i = 0; i < n; ++i) {
    auto r = offdiag.row(i);
    for (int k = 0; k < r.size(); ++k)
      if (r.idx_begin[k] != i) ++off_entries;
    if (diag[static_cast<std::size_t>(i)] - offdiag.diag(i) != 0.0) ++off_entries;
  }
  dec.nnz_m = off_entries;
  dec.diag = std::move(diag);
  dec.offdiag = std::move(offdiag);
  return dec;
}

Decomposition decompose(const SparseMatrix& m, double slack) {
  int n = m.n();
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  std::vector<Triplet> off;
  off.reserve(static_cast<std::size_t>(m.nnz()));
  for (int i = 0; i < n; ++i) {
    auto r = m.row(i);
    for (int k = 0; k < r.size(); ++k) {
      int j = r.idx_begin[k];
      double v = r.val_begin[k];
      if (j == i) {
        diag[static_cast<std::size_t>(i)] = v;
      } else if (v != 0.0) {
        off.push_back({i, j, -v});
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!(diag[static_cast<std::size_t>(i)] > 0.0))
      throw SolverError(ErrorCode::NonPositiveDiagonal, "coordinate " + std::to_string(i));
  }
  return decomposition_from_parts(std::move(diag), SparseMatrix::from_triplets(n, std::move(off)),
                                  false, slack);
}

SparseMatrix reconstruct(const Decomposition& dec) {
  std::vector<Triplet> t = dec.offdiag.to_triplets();
  for (auto& e : t) e.value = -e.value;
  for (int i = 0; i < dec.n; ++i) t.push_back({i, i, dec.diag[static_cast<std::size_t>(i)]});
  return SparseMatrix::from_triplets(dec.n, std::move(t));
}

VecStats vec_stats(const Decomposition& dec, const std::vector<double>& v) {
  VecStats s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    s.nnz += 1.0;
    s.dinv_inf = std::max(s.dinv_inf, std::abs(v[i]) / dec.diag[i]);
  }
  return s;
}

VecStats vec_stats(const Decomposition& dec, const SparseVec& v) {
  VecStats s;
  for (const auto& [i, x] : v) {
    if (x == 0.0) continue;
    s.nnz += 1.0;
    s.dinv_inf = std::max(s.dinv_inf, std::abs(x) / dec.diag[static_cast<std::size_t>(i)]);
  }
  return s;
}

int truncation_length(const Decomposition& dec, const VecStats& b_stats, const VecStats& t_stats,
                      double gamma, double epsilon, GapMode mode) {
  if (!(gamma > 0.0) || gamma > 1.0 || !std::isfinite(gamma))
    throw SolverError(ErrorCode::InvalidGamma, "gamma must lie in (0,1]");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw SolverError(ErrorCode::InvalidEpsilon, "epsilon must be positive");
  double c = dec.d_max * t_stats.dinv_inf * b_stats.dinv_inf;
  if (mode != GapMode::p1) c *= t_stats.nnz;
  if (mode != GapMode::pinf) c *= b_stats.nnz;
  if (!std::isfinite(c)) throw SolverError(ErrorCode::InvalidEpsilon, "non-finite stats");
  if (!(c > 0.0)) return 1;
  double arg = c / (gamma * epsilon);
  if (!(arg > 1.0)) return 1;
  double l = std::ceil(std::log(arg) / gamma);
  if (l >= static_cast<double>(std::numeric_limits<int>::max()))
    throw SolverError(ErrorCode::InvalidEpsilon, "truncation length overflow");
  return std::max(1, static_cast<int>(l));
}

std::vector<double> lazy_apply(const Decomposition& dec, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "lazy_apply: vector length");
  std::vector<double> w = dec.offdiag.multiply(v);
  for (int i = 0; i < dec.n; ++i) {
    auto k = static_cast<std::size_t>(i);
    w[k] = 0.5 * (v[k] + w[k] / dec.diag[k]);
  }
  return w;
}

SparseVec lazy_apply(const Decomposition& dec, const SparseVec& v) {
  SparseVec out;
  for (const auto& [j, x] : v) {
    if (j < 0 || j >= dec.n)
      throw SolverError(ErrorCode::DimensionMismatch, "lazy_apply: coordinate out of range");
    out[j] += 0.5 * x;
    auto c = dec.offdiag.col(j);
    for (int k = 0; k < c.size(); ++k) {
      int i = c.idx_begin[k];
      out[i] += 0.5 * c.val_begin[k] * x / dec.diag[static_cast<std::size_t>(i)];
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    if (it->second == 0.0)
      it = out.erase(it);
    else
      ++it;
  }
  return out;
}

}  // namespace sublin
