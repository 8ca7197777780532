#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sublin/decomposition.hpp"
#include "sublin/sparse_system.hpp"

namespace sublin {

inline constexpr int kDenseCap = 512;
inline constexpr double kRankTol = 1e-10;

Eigen::MatrixXd to_dense(const SparseMatrix& m);

// B = (1/2)(I + D^-1 A^T), the operator whose weighted powers sum to x*.
Eigen::MatrixXd dense_lazy_operator(const Decomposition& dec);
// Same with |A^T|: the comparison operator used by the entrywise audits.
Eigen::MatrixXd dense_abs_lazy_operator(const Decomposition& dec);

struct GapReport {
  double p = 2.0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
};

// Gap of the lazy operator restricted to range(I - A_p~) where
// A_p~ = D^{-1/q} A^T D^{-1/p}. Exact for p = 2 and for full-rank ranges;
// an interval (probe-certified upper, unrestricted-norm lower) otherwise.
GapReport p_norm_gap(const Decomposition& dec, double p, int dense_cap = kDenseCap);
GapReport p_norm_gap(const SparseMatrix& m, double p, int dense_cap = kDenseCap);

GapReport gap_max(const Decomposition& dec, int dense_cap = kDenseCap);
GapReport gap_max(const SparseMatrix& m, int dense_cap = kDenseCap);

// Half the smallest eigenvalue of D^-1/2 M D^-1/2 above the rank tolerance.
double spectral_gap_sdd(const SparseMatrix& m, int dense_cap = kDenseCap);

// Dense Neumann summation of x* = (1/2) sum_l B^l D^-1 b with a certified
// tail stop; SDD inputs are cross-checked against the pseudoinverse form.
std::vector<double> exact_solution(const Decomposition& dec, const std::vector<double>& b,
                                   double tol);

// Closed-form x* = D^-1/2 pinv(D^-1/2 M D^-1/2) D^-1/2 b for SDD systems.
std::vector<double> sdd_solution(const Decomposition& dec, const std::vector<double>& b);

// x*_L = (1/2) sum_{l=0}^{L-1} B^l D^-1 b by Horner accumulation.
std::vector<double> truncated_solution(const Decomposition& dec, const std::vector<double>& b,
                                       int L);

}  // namespace sublin
