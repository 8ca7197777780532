#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sublin/decomposition.hpp"
#include "sublin/sparse_vec.hpp"

namespace sublin {

struct PushState {
  int n = 0;
  int L = 0;
  double r_max = 0.0;
  std::vector<SparseVec> reserves;  // p^(l), l = 0 .. L-1
  std::vector<SparseVec> residues;  // r^(l), l = 0 .. L-1
  std::int64_t pushes = 0;
  // 1 + (off-diagonal column size) per push.
  std::int64_t work_units = 0;
  std::vector<std::int64_t> pushes_per_coord;
  // Invariant defects sampled every audit_every pushes when requested.
  std::vector<double> audit_defects;
};

// Level-synchronous push. Starting from r^(0) = D^-1 b, every coordinate v
// with |r^(l)(v)| > r_max (levels l = 0 .. L-2, ascending coordinate order)
// moves its residue into the reserve p^(l)(v) and forwards the lazy-kernel
// image into level l+1: half stays at v, and each off-diagonal column entry
// A^T(u, v) delivers A^T(u, v) / (2 d(u)) of it to u. r_max = 0 pushes
// everything and evaluates x*_L exactly. audit_every > 0 records the dense
// invariant defect every that many pushes (costly; meant for verification).
PushState push_run(const Decomposition& dec, const std::vector<double>& b, int L, double r_max,
                   int audit_every = 0);
PushState push_run(const Decomposition& dec, const SparseVec& b, int L, double r_max,
                   int audit_every = 0);

// (1/2) (sum_l p^(l) + r^(L-1)) as a dense vector: the push approximation of
// x*_L. Its residual defect obeys |x*_L - push_solution| entrywise bounded by
// (1/2) sum_{l<=L-2} sum_{k<=L-1-l} Bbar^k |r^(l)| with Bbar the unsigned
// lazy kernel.
std::vector<double> push_solution(const PushState& st);

// (1/2) t^T (sum_l p^(l) + r^(L-1)); differs from t^T x*_L by at most
// (1/2) ||t||_1 L^2 r_max on row-dominant systems.
double push_estimate(const PushState& st, const std::vector<double>& t);

// Max-norm defect of the conservation identity
//   x*_L = (1/2) sum_l [ p^(l) + (sum_{k=0}^{L-1-l} B^k) r^(l) ],
// which every intermediate push state satisfies up to roundoff.
double verify_invariant(const Decomposition& dec, const PushState& st,
                        const std::vector<double>& b);

// Largest entrywise violation of the residual-defect inequality above;
// nonpositive up to roundoff.
double verify_invariant_inequality(const Decomposition& dec, const PushState& st,
                                   const std::vector<double>& b);

// Work certificate: (1/r_max) sum_v (1 + colnnz(v)) e_v^T sum_{l<L} Bbar^l D^-1 |b|.
// Total push work never exceeds this value plus nnz(b); +infinity at r_max = 0.
double push_cost_certificate(const Decomposition& dec, const std::vector<double>& b, int L,
                             double r_max);

struct PushReport {
  int L = 0;
  double r_max = 0.0;
  std::int64_t pushes = 0;
  std::int64_t work_units = 0;
  // Deterministic guarantee |estimate - t^T x*| <= error_bound.
  double error_bound = 0.0;
  std::string warning;
};

// Deterministic estimate of t^T x* for two-sided (row and column) dominant
// systems: L from the truncation schedule at target eps * ||t||_1, threshold
// r_max = eps / L^2, then a full push run. The error bound holds always; the
// work bound behind it degrades when gamma is small, which is surfaced as a
// warning below 1e-2.
std::pair<double, PushReport> deterministic_solve_rcdd(const Decomposition& dec,
                                                       const std::vector<double>& b,
                                                       const std::vector<double>& t,
                                                       const SolverParams& params);

}  // namespace sublin
