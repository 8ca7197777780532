#include "sublin/dense_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "sublin/errors.hpp"
#include "sublin/philox.hpp"

namespace sublin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double induced_norm(const Eigen::MatrixXd& m, double p) {
  if (p == 1.0) return m.cwiseAbs().colwise().sum().maxCoeff();
  if (p == kInf) return m.cwiseAbs().rowwise().sum().maxCoeff();
  return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

double vector_norm(const Eigen::VectorXd& v, double p) {
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == kInf) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  return v.norm();
}

void check_p(double p) {
  if (p != 1.0 && p != 2.0 && p != kInf)
    throw SolverError(ErrorCode::ParseError, "p must be 1, 2, or inf");
}

}  // namespace

Eigen::MatrixXd to_dense(const SparseMatrix& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.n(), m.n());
  for (int i = 0; i < m.n(); ++i) {
    auto r = m.row(i);
    for (int k = 0; k < r.size(); ++k) out(i, r.idx_begin[k]) += r.val_begin[k];
  }
  return out;
}

Eigen::MatrixXd dense_lazy_operator(const Decomposition& dec) {
  int n = dec.n;
  Eigen::MatrixXd b = 0.5 * to_dense(dec.offdiag);
  for (int i = 0; i < n; ++i) b.row(i) /= dec.diag[static_cast<std::size_t>(i)];
  b.diagonal().array() += 0.5;
  return b;
}

Eigen::MatrixXd dense_abs_lazy_operator(const Decomposition& dec) {
  int n = dec.n;
  Eigen::MatrixXd b = 0.5 * to_dense(dec.offdiag).cwiseAbs();
  for (int i = 0; i < n; ++i) b.row(i) /= dec.diag[static_cast<std::size_t>(i)];
  b.diagonal().array() += 0.5;
  return b;
}

GapReport p_norm_gap(const Decomposition& dec, double p, int dense_cap) {
  check_p(p);
  int n = dec.n;
  if (n > dense_cap)
    throw SolverError(ErrorCode::TooLargeForDense,
                      "n = " + std::to_string(n) + " exceeds dense cap");
  Eigen::MatrixXd a = to_dense(dec.offdiag);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = dec.diag[static_cast<std::size_t>(i)];
  // A_p~ = D^{-1/q} A^T D^{-1/p} with 1/p + 1/q = 1.
  Eigen::MatrixXd ap = a;
  if (p == 1.0) {
    ap = a * d.cwiseInverse().asDiagonal();
  } else if (p == kInf) {
    ap = d.cwiseInverse().asDiagonal() * a;
  } else {
    Eigen::VectorXd ds = d.cwiseSqrt().cwiseInverse();
    ap = ds.asDiagonal() * a * ds.asDiagonal();
  }
  Eigen::MatrixXd bp = 0.5 * (Eigen::MatrixXd::Identity(n, n) + ap);
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n, n) - ap;

  GapReport rep;
  rep.p = p;
  if (n == 0) {
    rep.value = rep.lower = rep.upper = 1.0;
    rep.exact = true;
    return rep;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(k);
  qr.setThreshold(kRankTol);
  auto rank = static_cast<int>(qr.rank());
  if (rank == n) {
    double norm = induced_norm(bp, p);
    rep.value = rep.lower = rep.upper = 1.0 - norm;
    rep.exact = true;
    return rep;
  }
  if (rank == 0) {
    rep.value = rep.lower = rep.upper = 1.0;
    rep.exact = true;
    return rep;
  }
  Eigen::MatrixXd v = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
  if (p == 2.0) {
    double norm = Eigen::BDCSVD<Eigen::MatrixXd>(bp * v).singularValues()(0);
    rep.value = rep.lower = rep.upper = 1.0 - norm;
    rep.exact = true;
    return rep;
  }
  // Restricted 1/inf norms: certify an interval. Any unit vector inside the
  // range gives a lower bound on the restricted norm; the unrestricted norm
  // is an upper bound.
  double unrestricted = induced_norm(bp, p);
  double best_probe = 0.0;
  Eigen::MatrixXd proj = v * v.transpose();
  constexpr int kProbeTotal = 10000;
  Philox rng(0xA11CE5u, 0);
  for (int probe = 0; probe < kProbeTotal; ++probe) {
    Eigen::VectorXd x;
    if (probe < n) {
      x = proj.col(probe);
    } else {
      Eigen::VectorXd g(rank);
      for (int i = 0; i < rank; ++i) g(i) = rng.next_normal();
      x = v * g;
    }
    double nx = vector_norm(x, p);
    if (nx < 1e-300) continue;
    best_probe = std::max(best_probe, vector_norm(bp * x, p) / nx);
  }
  rep.lower = 1.0 - unrestricted;
  rep.upper = 1.0 - best_probe;
  rep.value = rep.lower;
  rep.exact = false;
  return rep;
}

GapReport p_norm_gap(const SparseMatrix& m, double p, int dense_cap) {
  return p_norm_gap(decompose(m), p, dense_cap);
}

GapReport gap_max(const Decomposition& dec, int dense_cap) {
  GapReport best;
  bool first = true;
  for (double p : {1.0, 2.0, kInf}) {
    GapReport rep = p_norm_gap(dec, p, dense_cap);
    if (first || rep.value > best.value || (rep.value == best.value && rep.exact && !best.exact)) {
      best = rep;
      first = false;
    }
  }
  return best;
}

GapReport gap_max(const SparseMatrix& m, int dense_cap) {
  return gap_max(decompose(m), dense_cap);
}

double spectral_gap_sdd(const SparseMatrix& m, int dense_cap) {
  if (m.n() > dense_cap)
    throw SolverError(ErrorCode::TooLargeForDense, "spectral_gap_sdd dense cap");
  DominanceClass cls = classify(m);
  if (!cls.sdd()) throw SolverError(ErrorCode::NotSDD, "spectral_gap_sdd requires SDD input");
  int n = m.n();
  Eigen::MatrixXd dense = to_dense(m);
  Eigen::VectorXd ds(n);
  for (int i = 0; i < n; ++i) ds(i) = 1.0 / std::sqrt(m.diag(i));
  Eigen::MatrixXd norm = ds.asDiagonal() * dense * ds.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(norm);
  double smallest = kInf;
  for (int i = 0; i < n; ++i) {
    double lambda = eig.eigenvalues()(i);
    if (lambda > kRankTol) smallest = std::min(smallest, lambda);
  }
  if (smallest == kInf)
    throw SolverError(ErrorCode::NoConvergenceWithinBudget, "no eigenvalue above rank tolerance");
  return 0.5 * smallest;
}

std::vector<double> truncated_solution(const Decomposition& dec, const std::vector<double>& b,
                                       int L) {
  if (static_cast<int>(b.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "truncated_solution: vector length");
  if (L < 1) throw SolverError(ErrorCode::IndexOutOfRange, "L must be >= 1");
  std::vector<double> u(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) u[i] = b[i] / dec.diag[i];
  // Horner: s = u + B(u + B(u + ...)), L terms in total.
  std::vector<double> s = u;
  for (int step = 0; step < L - 1; ++step) {
    s = lazy_apply(dec, s);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += u[i];
  }
  for (auto& x : s) x *= 0.5;
  return s;
}

std::vector<double> sdd_solution(const Decomposition& dec, const std::vector<double>& b) {
  if (!dec.cls.sdd()) throw SolverError(ErrorCode::NotSDD, "sdd_solution requires SDD input");
  if (static_cast<int>(b.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "sdd_solution: vector length");
  int n = dec.n;
  if (n > kDenseCap) throw SolverError(ErrorCode::TooLargeForDense, "sdd_solution dense cap");
  Eigen::MatrixXd m = to_dense(reconstruct(dec));
  Eigen::VectorXd ds(n);
  for (int i = 0; i < n; ++i) ds(i) = 1.0 / std::sqrt(dec.diag[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd norm = ds.asDiagonal() * m * ds.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(norm);
  Eigen::VectorXd rb(n);
  for (int i = 0; i < n; ++i) rb(i) = b[static_cast<std::size_t>(i)] * ds(i);
  Eigen::VectorXd coeff = eig.eigenvectors().transpose() * rb;
  for (int i = 0; i < n; ++i) {
    double lambda = eig.eigenvalues()(i);
    coeff(i) = lambda > kRankTol ? coeff(i) / lambda : 0.0;
  }
  Eigen::VectorXd x = ds.asDiagonal() * (eig.eigenvectors() * coeff);
  return std::vector<double>(x.data(), x.data() + n);
}

std::vector<double> exact_solution(const Decomposition& dec, const std::vector<double>& b,
                                   double tol) {
  if (!dec.cls.rdd && !dec.cls.cdd)
    throw SolverError(ErrorCode::NotDominant, "exact_solution requires RDD or CDD input");
  if (static_cast<int>(b.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "exact_solution: vector length");
  if (!(tol > 0.0)) throw SolverError(ErrorCode::InvalidEpsilon, "tol must be positive");
  int n = dec.n;
  std::vector<double> x(b.size(), 0.0);
  VecStats bs = vec_stats(dec, b);
  if (bs.nnz == 0.0) return x;

  double gamma = 0.0;
  if (n <= kDenseCap) {
    // The series converges only for b in range(M): test D^-1 b against
    // range(I - D^-1 A^T) = D^-1 range(M) before trusting any tail bound.
    Eigen::MatrixXd a = to_dense(dec.offdiag);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      a.row(i) /= dec.diag[static_cast<std::size_t>(i)];
      r(i) = b[static_cast<std::size_t>(i)] / dec.diag[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n, n) - a;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(k);
    qr.setThreshold(kRankTol);
    auto rank = static_cast<int>(qr.rank());
    if (rank < n) {
      Eigen::MatrixXd v = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
      double defect = (r - v * (v.transpose() * r)).cwiseAbs().maxCoeff();
      if (defect > 1e-8 * std::max(1.0, r.cwiseAbs().maxCoeff()))
        throw SolverError(ErrorCode::NoConvergenceWithinBudget,
                          "b lies outside the range of M (projection defect " +
                              std::to_string(defect) + ")");
    }
    // Certified lower bound on the gap: best of the three p-norm reports.
    for (double p : {1.0, 2.0, kInf}) gamma = std::max(gamma, p_norm_gap(dec, p).lower);
  }
  long long analytic_steps = -1;
  if (gamma > 1e-12) {
    double c = dec.d_max * (1.0 / dec.d_min) * bs.nnz * bs.dinv_inf;
    double arg = c / (gamma * tol);
    double steps = arg > 1.0 ? std::ceil(std::log(arg) / gamma) : 1.0;
    if (steps < 1e18) analytic_steps = static_cast<long long>(steps);
  }

  // term_l = B^l D^-1 b. RDD keeps the inf-norm of terms nonincreasing, CDD
  // the 1-norm; the empirical stop tracks the contracting norm.
  double track_p = dec.cls.rdd ? kInf : 1.0;
  std::vector<double> term(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) term[i] = b[i] / dec.diag[i];

  constexpr long long kCap = 1000000;
  constexpr int kWindow = 50;
  std::deque<double> ratios;
  auto norm_of = [&](const std::vector<double>& v) {
    double s = 0.0;
    if (track_p == kInf) {
      for (double y : v) s = std::max(s, std::abs(y));
    } else {
      for (double y : v) s += std::abs(y);
    }
    return s;
  };
  double prev_norm = norm_of(term);
  bool converged = false;
  for (long long step = 0; step < kCap; ++step) {
    for (std::size_t i = 0; i < b.size(); ++i) x[i] += 0.5 * term[i];
    if (analytic_steps >= 0 && step + 1 >= analytic_steps) {
      converged = true;
      break;
    }
    term = lazy_apply(dec, term);
    double cur_norm = norm_of(term);
    if (cur_norm == 0.0) {
      converged = true;
      break;
    }
    if (prev_norm > 0.0) {
      ratios.push_back(cur_norm / prev_norm);
      if (static_cast<int>(ratios.size()) > kWindow) ratios.pop_front();
    }
    prev_norm = cur_norm;
    if (static_cast<int>(ratios.size()) == kWindow) {
      double rho = *std::max_element(ratios.begin(), ratios.end());
      if (rho < 1.0 && 0.5 * cur_norm / (1.0 - rho) < tol) {
        converged = true;
        break;
      }
    }
  }
  if (!converged)
    throw SolverError(ErrorCode::NoConvergenceWithinBudget,
                      "Neumann series did not certify the tail within the step cap");

  if (dec.cls.sdd() && n <= kDenseCap) {
    std::vector<double> xp = sdd_solution(dec, b);
    double diff = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      diff = std::max(diff, std::abs(x[i] - xp[i]));
      scale = std::max(scale, std::abs(xp[i]));
    }
    if (diff > std::max(10.0 * tol, 1e-8) * scale)
      throw SolverError(ErrorCode::OracleInconsistent,
                        "Neumann and pseudoinverse paths disagree: " + std::to_string(diff));
  }
  return x;
}

}  // namespace sublin
