#include "sublin/push.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sublin/dense_oracle.hpp"
#include "sublin/errors.hpp"

namespace sublin {

namespace {

constexpr double kDropBelow = 1e-300;

void add_entry(SparseVec& vec, int i, double x) {
  double& slot = vec[i];
  slot += x;
  if (std::abs(slot) < kDropBelow) vec.erase(i);
}

std::vector<double> densify(const SparseVec& v, int n) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (auto [i, x] : v) out[static_cast<std::size_t>(i)] = x;
  return out;
}

// Unsigned lazy kernel Bbar = (1/2)(I + D^-1 |A^T|) applied densely.
std::vector<double> abs_lazy_apply(const Decomposition& dec, const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  for (int i = 0; i < dec.n; ++i) {
    double acc = 0.0;
    auto row = dec.offdiag.row(i);
    for (int k = 0; k < row.size(); ++k)
      acc += std::abs(row.val_begin[k]) * v[static_cast<std::size_t>(row.idx_begin[k])];
    auto ui = static_cast<std::size_t>(i);
    out[ui] = 0.5 * (v[ui] + acc / dec.diag[ui]);
  }
  return out;
}

PushState run_impl(const Decomposition& dec, const SparseVec& b0, const std::vector<double>* b,
                   int L, double r_max, int audit_every) {
  if (L < 1) throw SolverError(ErrorCode::IndexOutOfRange, "push needs L >= 1");
  if (r_max < 0.0 || !std::isfinite(r_max))
    throw SolverError(ErrorCode::InvalidEpsilon, "r_max must be finite and >= 0");

  PushState st;
  st.n = dec.n;
  st.L = L;
  st.r_max = r_max;
  st.reserves.assign(static_cast<std::size_t>(L), {});
  st.residues.assign(static_cast<std::size_t>(L), {});
  st.pushes_per_coord.assign(static_cast<std::size_t>(dec.n), 0);

  for (auto [i, x] : b0) {
    if (i < 0 || i >= dec.n)
      throw SolverError(ErrorCode::IndexOutOfRange, "b index " + std::to_string(i));
    if (x != 0.0) st.residues[0][i] = x / dec.diag[static_cast<std::size_t>(i)];
  }

  std::vector<std::pair<int, double>> level_work;
  for (int l = 0; l + 1 < L; ++l) {
    level_work.clear();
    for (auto [v, r] : st.residues[static_cast<std::size_t>(l)])
      if (std::abs(r) > r_max) level_work.emplace_back(v, r);
    auto& cur = st.residues[static_cast<std::size_t>(l)];
    auto& nxt = st.residues[static_cast<std::size_t>(l + 1)];
    auto& res = st.reserves[static_cast<std::size_t>(l)];
    for (auto [v, r] : level_work) {
      add_entry(res, v, r);
      cur.erase(v);
      add_entry(nxt, v, 0.5 * r);
      auto col = dec.offdiag.col(v);
      for (int k = 0; k < col.size(); ++k) {
        int u = col.idx_begin[k];
        add_entry(nxt, u, col.val_begin[k] / (2.0 * dec.diag[static_cast<std::size_t>(u)]) * r);
      }
      ++st.pushes;
      ++st.pushes_per_coord[static_cast<std::size_t>(v)];
      st.work_units += 1 + col.size();
      if (audit_every > 0 && st.pushes % audit_every == 0 && b != nullptr)
        st.audit_defects.push_back(verify_invariant(dec, st, *b));
    }
  }
  return st;
}

}  // namespace

PushState push_run(const Decomposition& dec, const std::vector<double>& b, int L, double r_max,
                   int audit_every) {
  if (static_cast<int>(b.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "b length vs system dimension");
  SparseVec sb;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] != 0.0) sb[static_cast<int>(i)] = b[i];
  return run_impl(dec, sb, &b, L, r_max, audit_every);
}

PushState push_run(const Decomposition& dec, const SparseVec& b, int L, double r_max,
                   int audit_every) {
  if (audit_every > 0) {
    auto dense = densify(b, dec.n);
    return run_impl(dec, b, &dense, L, r_max, audit_every);
  }
  return run_impl(dec, b, nullptr, L, r_max, audit_every);
}

std::vector<double> push_solution(const PushState& st) {
  std::vector<double> out(static_cast<std::size_t>(st.n), 0.0);
  for (const auto& p : st.reserves)
    for (auto [i, x] : p) out[static_cast<std::size_t>(i)] += x;
  for (auto [i, x] : st.residues[static_cast<std::size_t>(st.L - 1)])
    out[static_cast<std::size_t>(i)] += x;
  for (double& x : out) x *= 0.5;
  return out;
}

double push_estimate(const PushState& st, const std::vector<double>& t) {
  if (static_cast<int>(t.size()) != st.n)
    throw SolverError(ErrorCode::DimensionMismatch, "t length vs system dimension");
  double acc = 0.0;
  for (const auto& p : st.reserves)
    for (auto [i, x] : p) acc += t[static_cast<std::size_t>(i)] * x;
  for (auto [i, x] : st.residues[static_cast<std::size_t>(st.L - 1)])
    acc += t[static_cast<std::size_t>(i)] * x;
  return 0.5 * acc;
}

double verify_invariant(const Decomposition& dec, const PushState& st,
                        const std::vector<double>& b) {
  std::vector<double> acc(static_cast<std::size_t>(st.n), 0.0);
  for (int l = 0; l < st.L; ++l) {
    for (auto [i, x] : st.reserves[static_cast<std::size_t>(l)])
      acc[static_cast<std::size_t>(i)] += x;
    auto term = densify(st.residues[static_cast<std::size_t>(l)], st.n);
    auto power = term;
    for (int k = 1; k < st.L - l; ++k) {
      power = lazy_apply(dec, power);
      for (std::size_t i = 0; i < term.size(); ++i) term[i] += power[i];
    }
    for (std::size_t i = 0; i < term.size(); ++i) acc[i] += term[i];
  }
  auto x_l = truncated_solution(dec, b, st.L);
  double defect = 0.0;
  for (std::size_t i = 0; i < x_l.size(); ++i)
    defect = std::max(defect, std::abs(0.5 * acc[i] - x_l[i]));
  return defect;
}

double verify_invariant_inequality(const Decomposition& dec, const PushState& st,
                                   const std::vector<double>& b) {
  auto x_l = truncated_solution(dec, b, st.L);
  auto xhat = push_solution(st);
  std::vector<double> bound(static_cast<std::size_t>(st.n), 0.0);
  for (int l = 0; l + 1 < st.L; ++l) {
    auto term = densify(st.residues[static_cast<std::size_t>(l)], st.n);
    for (double& x : term) x = std::abs(x);
    auto power = term;
    for (int k = 1; k < st.L - l; ++k) {
      power = abs_lazy_apply(dec, power);
      for (std::size_t i = 0; i < term.size(); ++i) term[i] += power[i];
    }
    for (std::size_t i = 0; i < term.size(); ++i) bound[i] += 0.5 * term[i];
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bound.size(); ++i)
    worst = std::max(worst, std::abs(x_l[i] - xhat[i]) - bound[i]);
  return worst;
}

double push_cost_certificate(const Decomposition& dec, const std::vector<double>& b, int L,
                             double r_max) {
  if (static_cast<int>(b.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "b length vs system dimension");
  if (L < 1) throw SolverError(ErrorCode::IndexOutOfRange, "certificate needs L >= 1");
  if (r_max == 0.0) return std::numeric_limits<double>::infinity();
  std::vector<double> term(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) term[i] = std::abs(b[i]) / dec.diag[i];
  std::vector<double> mass = term;
  for (int l = 1; l < L; ++l) {
    term = abs_lazy_apply(dec, term);
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += term[i];
  }
  double total = 0.0;
  for (int v = 0; v < dec.n; ++v)
    total += (1.0 + dec.offdiag.col_nnz(v)) * mass[static_cast<std::size_t>(v)];
  return total / r_max;
}

std::pair<double, PushReport> deterministic_solve_rcdd(const Decomposition& dec,
                                                       const std::vector<double>& b,
                                                       const std::vector<double>& t,
                                                       const SolverParams& params) {
  if (static_cast<int>(b.size()) != dec.n || static_cast<int>(t.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "vector length vs system dimension");
  if (!dec.cls.rcdd())
    throw SolverError(ErrorCode::NotRCDD, "deterministic solve needs row and column dominance");
  if (!(params.epsilon > 0.0)) throw SolverError(ErrorCode::InvalidEpsilon, "epsilon");
  double t1 = 0.0;
  for (double x : t) t1 += std::abs(x);
  if (t1 == 0.0) throw SolverError(ErrorCode::ZeroT, "t must have a nonzero entry");

  VecStats bs = vec_stats(dec, b);
  VecStats ts = vec_stats(dec, t);
  int L = params.L ? *params.L
                   : truncation_length(dec, bs, ts, params.gamma, params.epsilon * t1,
                                       GapMode::general);
  double r_max = params.epsilon / (static_cast<double>(L) * L);

  PushReport rep;
  rep.L = L;
  rep.r_max = r_max;
  rep.error_bound = params.epsilon * t1;
  if (!params.L && params.gamma < 1e-2)
    rep.warning = "gap below 1e-2: push work is no longer bounded by a constant power of 1/eps";

  PushState st = push_run(dec, b, L, r_max);
  rep.pushes = st.pushes;
  rep.work_units = st.work_units;
  return {push_estimate(st, t), rep};
}

}  // namespace sublin
