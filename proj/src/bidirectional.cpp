#include "sublin/bidirectional.hpp"

#include <algorithm>
#include <cmath>

#include "sublin/errors.hpp"
#include "sublin/sparse_vec.hpp"
#include "sublin/walker.hpp"

namespace sublin {

namespace {

constexpr double kChebyshevFamily = 16.0;

double hoeffding_constant() { return 8.0 * std::log(8.0); }

std::int64_t ceil_to_count(double x, const char* what) {
  if (!std::isfinite(x)) throw SolverError(ErrorCode::InvalidEpsilon, std::string(what) + " not finite");
  double c = std::ceil(x);
  if (c > 1e15)
    throw SolverError(ErrorCode::BudgetExhausted,
                      std::string(what) + " = " + std::to_string(c) + " is infeasible");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
}

std::uint64_t substream(int replicate, std::int64_t sample) {
  return (static_cast<std::uint64_t>(replicate) << 40) + static_cast<std::uint64_t>(sample);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double norm1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

void check_nonneg(const std::vector<double>& v, const char* name) {
  for (double x : v)
    if (x < 0.0) throw SolverError(ErrorCode::NegativeInput, std::string(name) + " must be >= 0");
}

int single_support(const std::vector<double>& b) {
  int w = -1;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == 0.0) continue;
    if (w >= 0)
      throw SolverError(ErrorCode::HypothesisViolated,
                        "this regime needs b supported on a single coordinate");
    w = static_cast<int>(i);
  }
  if (w < 0)
    throw SolverError(ErrorCode::HypothesisViolated,
                      "this regime needs b supported on a single coordinate");
  return w;
}

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

}  // namespace

const char* bidi_regime_name(BidiRegime regime) {
  switch (regime) {
    case BidiRegime::hoeffding: return "hoeffding";
    case BidiRegime::variance: return "variance";
    case BidiRegime::average: return "average";
    case BidiRegime::relative_rcddz: return "relative_rcddz";
    case BidiRegime::relative_average: return "relative_average";
  }
  return "unknown";
}

BidiPlan bidirectional_plan(const Decomposition& dec, const std::vector<double>& b,
                            const std::vector<double>& t, const SolverParams& params,
                            BidiRegime regime) {
  if (static_cast<int>(b.size()) != dec.n || static_cast<int>(t.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "vector length vs system dimension");
  if (!(params.epsilon > 0.0)) throw SolverError(ErrorCode::InvalidEpsilon, "epsilon");
  bool relative = regime == BidiRegime::relative_rcddz || regime == BidiRegime::relative_average;
  if (relative) {
    if (!dec.cls.rddz())
      throw SolverError(ErrorCode::NotRDDZ, "relative regimes need an RDDZ system");
    check_nonneg(b, "b");
    check_nonneg(t, "t");
  } else if (!dec.cls.rdd) {
    throw SolverError(ErrorCode::NotRDD, "bidirectional estimation requires an RDD system");
  }
  double t1 = norm1(t);
  if (t1 == 0.0) throw SolverError(ErrorCode::ZeroT, "t must have a nonzero entry");

  VecStats bs = vec_stats(dec, b);
  VecStats ts = vec_stats(dec, t);
  double eps = params.epsilon;
  double f = dec.row_cost;

  BidiPlan plan;
  plan.regime = regime;

  double eta = 0.0;
  if (relative) {
    if (!params.eta)
      throw SolverError(ErrorCode::MissingEta,
                        "relative regimes need eta, a positive lower bound on t^T x*");
    eta = *params.eta;
    if (!(eta > 0.0)) throw SolverError(ErrorCode::MissingEta, "eta must be positive");
  }

  if (norm1(b) == 0.0) {
    plan.L = std::max(1, params.L.value_or(1));
    plan.r_max = 0.0;
    plan.n_s = 1;
    plan.rationale = "zero right-hand side";
    return plan;
  }

  if (params.L) {
    plan.L = *params.L;
    if (plan.L < 1) throw SolverError(ErrorCode::IndexOutOfRange, "L must be >= 1");
  } else if (bs.dinv_inf == 0.0) {
    plan.L = 1;
  } else if (relative) {
    plan.L = truncation_length(dec, bs, ts, params.gamma, eps * eta, GapMode::general);
  } else {
    plan.L = truncation_length(dec, bs, ts, params.gamma, eps * bs.dinv_inf, GapMode::general);
  }
  double L = plan.L;
  double b1 = norm1(b);
  double nnz_avg = static_cast<double>(dec.nnz_m) / std::max(1, dec.n);

  switch (regime) {
    case BidiRegime::hoeffding: {
      plan.r_max = std::cbrt(eps * eps * b1 / (f * t1 * t1 * L * L * L * L));
      plan.constant = hoeffding_constant();
      plan.n_s = ceil_to_count(
          plan.constant * t1 * t1 * L * L * L * L * plan.r_max * plan.r_max / (eps * eps), "n_s");
      plan.rationale = "push work f L^2/r_max balanced against bounded-sample count "
                       "8 ln 8 (||t||_1 L^2 r_max / eps)^2";
      break;
    }
    case BidiRegime::variance: {
      plan.r_max = eps * std::sqrt(b1) /
                   (std::sqrt(f) * t1 * std::sqrt(bs.dinv_inf) * L * std::sqrt(L));
      plan.constant = kChebyshevFamily;
      plan.n_s = ceil_to_count(
          plan.constant * t1 * t1 * bs.dinv_inf * L * L * L * plan.r_max / (eps * eps), "n_s");
      plan.rationale = "push work balanced against the second-moment schedule "
                       "16 ||t||_1^2 ||D^-1 b||_inf L^3 r_max / eps^2";
      break;
    }
    case BidiRegime::average: {
      int w = single_support(b);
      double dw = dec.diag[static_cast<std::size_t>(w)];
      plan.r_max = std::cbrt(nnz_avg * eps * eps / (f * t1 * t1 * L * L * L * L)) / dw;
      plan.constant = hoeffding_constant();
      plan.n_s = ceil_to_count(plan.constant * t1 * t1 * dw * dw * L * L * L * L * plan.r_max *
                                   plan.r_max / (eps * eps),
                               "n_s");
      plan.rationale = "single-coordinate b: push work priced at the mean column size nnz/n";
      break;
    }
    case BidiRegime::relative_rcddz: {
      plan.r_max = eps * std::sqrt(b1 * eta / (f * t1)) / L;
      plan.constant = kChebyshevFamily;
      plan.n_s =
          ceil_to_count(plan.constant * t1 * L * L * plan.r_max / (eps * eps * eta), "n_s");
      plan.rationale = "relative target: schedules scaled by the lower bound eta on t^T x*";
      break;
    }
    case BidiRegime::relative_average: {
      int w = single_support(b);
      double dw = dec.diag[static_cast<std::size_t>(w)];
      plan.r_max = eps * std::sqrt(nnz_avg * eta / (f * t1)) / (dw * L);
      plan.constant = kChebyshevFamily;
      plan.n_s = ceil_to_count(plan.constant * t1 * dw * L * L * plan.r_max / (eps * eps * eta),
                               "n_s");
      plan.rationale = "relative target with single-coordinate b, priced at nnz/n";
      break;
    }
  }
  if (!std::isfinite(plan.r_max) || plan.r_max < 0.0)
    throw SolverError(ErrorCode::InvalidEpsilon, "planned r_max is not finite");
  return plan;
}

double residue_prefix(const PushState& st, int level, int v) {
  if (level < 0 || level >= st.L)
    throw SolverError(ErrorCode::IndexOutOfRange, "level " + std::to_string(level));
  if (v < 0 || v >= st.n)
    throw SolverError(ErrorCode::IndexOutOfRange, "coordinate " + std::to_string(v));
  int cap = std::min(st.L - 1 - level, st.L - 2);
  double acc = 0.0;
  for (int l = 0; l <= cap; ++l) {
    const auto& r = st.residues[static_cast<std::size_t>(l)];
    auto it = r.find(v);
    if (it != r.end()) acc += it->second;
  }
  return acc;
}

std::pair<double, BidiReport> bidirectional_estimate_with_plan(const Decomposition& dec,
                                                               const std::vector<double>& b,
                                                               const std::vector<double>& t,
                                                               const SolverParams& params,
                                                               const BidiPlan& plan) {
  if (static_cast<int>(b.size()) != dec.n || static_cast<int>(t.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "vector length vs system dimension");
  SourceSampler src(t);

  BidiReport rep;
  rep.plan = plan;
  rep.seed = params.seed;

  PushState st = push_run(dec, b, plan.L, plan.r_max);
  rep.pushes = st.pushes;
  rep.work_units = st.work_units;
  double push_part = push_estimate(st, t);
  rep.push_part = push_part;

  double scale = 0.5 * src.total() * plan.L;
  double cap = 0.5 * src.total() * plan.L * (plan.L - 1.0) * plan.r_max * (1.0 + 1e-9);
  int k = std::max(1, params.median_k | 1);
  std::vector<double> estimates;
  std::int64_t absorbed = 0;
  for (int e = 0; e < k; ++e) {
    PairwiseAccumulator acc;
    for (std::int64_t j = 0; j < plan.n_s; ++j) {
      Philox rng(params.seed, substream(e, j));
      WalkDraw d = draw_walk(dec, src, plan.L, rng);
      rep.walk_steps += d.steps;
      double val = 0.0;
      if (d.sign == 0) {
        ++absorbed;
      } else {
        val = d.sign * scale * residue_prefix(st, d.length, d.terminal);
        if (std::abs(val) > cap)
          throw SolverError(ErrorCode::OracleInconsistent,
                            "sampled correction exceeds its residue bound");
      }
      acc.add(val);
    }
    estimates.push_back(push_part + acc.total() / static_cast<double>(plan.n_s));
  }
  rep.n_s = static_cast<std::int64_t>(k) * plan.n_s;
  rep.absorb_rate = static_cast<double>(absorbed) / static_cast<double>(rep.n_s);
  double est = median_of(std::move(estimates));
  rep.sample_part = est - push_part;
  return {est, rep};
}

std::pair<double, BidiReport> bidirectional_estimate(const Decomposition& dec,
                                                     const std::vector<double>& b,
                                                     const std::vector<double>& t,
                                                     const SolverParams& params,
                                                     BidiRegime regime) {
  BidiPlan plan = bidirectional_plan(dec, b, t, params, regime);
  return bidirectional_estimate_with_plan(dec, b, t, params, plan);
}

double bidirectional_variance_bound(const Decomposition& dec, const PushState& st,
                                    const std::vector<double>& b, const std::vector<double>& t,
                                    std::int64_t n_s) {
  if (static_cast<int>(b.size()) != dec.n || static_cast<int>(t.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "vector length vs system dimension");
  if (n_s < 1) throw SolverError(ErrorCode::IndexOutOfRange, "n_s must be >= 1");
  std::vector<double> term(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) term[i] = std::abs(b[i]) / dec.diag[i];
  std::vector<double> mass = term;
  for (int l = 1; l < st.L; ++l) {
    term = abs_lazy_apply(dec, term);
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += term[i];
  }
  double weighted = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) weighted += std::abs(t[i]) * mass[i];
  double t1 = norm1(t);
  return t1 * static_cast<double>(st.L) * st.L * st.r_max * weighted /
         (4.0 * static_cast<double>(n_s));
}

}  // namespace sublin
