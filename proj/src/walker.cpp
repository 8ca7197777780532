#include "sublin/walker.hpp"

#include <algorithm>
#include <cmath>

#include "sublin/errors.hpp"
#include "sublin/sparse_vec.hpp"

namespace sublin {

namespace {

void check_problem(const Decomposition& dec, const std::vector<double>& b,
                   const std::vector<double>& t) {
  if (static_cast<int>(b.size()) != dec.n || static_cast<int>(t.size()) != dec.n)
    throw SolverError(ErrorCode::DimensionMismatch, "vector length vs system dimension");
}

void check_nonneg(const std::vector<double>& v, const char* name) {
  for (double x : v)
    if (x < 0.0) throw SolverError(ErrorCode::NegativeInput, std::string(name) + " must be >= 0");
}

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

}  // namespace

StepResult step(const Decomposition& dec, int v, Philox& rng) {
  double u = rng.next_double();
  if (u < 0.5) return {StepResult::Kind::stay, v, 1};
  double d = dec.diag[static_cast<std::size_t>(v)];
  double c = (u - 0.5) * 2.0 * d;
  auto row = dec.offdiag.row(v);
  double cum = 0.0;
  for (int k = 0; k < row.size(); ++k) {
    double a = row.val_begin[k];
    cum += std::abs(a);
    if (c < cum) return {StepResult::Kind::move, row.idx_begin[k], a > 0.0 ? 1 : -1};
  }
  if (cum > d * (1.0 + 1e-12))
    throw SolverError(ErrorCode::NotRDD, "row mass exceeds diagonal at coordinate " +
                                             std::to_string(v));
  return {StepResult::Kind::absorb, -1, 0};
}

SourceSampler::SourceSampler(const std::vector<double>& t) {
  std::vector<double> weights;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == 0.0) continue;
    support_.push_back(static_cast<int>(i));
    signs_.push_back(t[i] > 0.0 ? 1 : -1);
    weights.push_back(std::abs(t[i]));
    total_ += std::abs(t[i]);
  }
  if (support_.empty()) throw SolverError(ErrorCode::ZeroT, "t must have a nonzero entry");
  table_ = AliasTable(weights);
}

SourceSampler::Pick SourceSampler::sample(Philox& rng) const {
  std::size_t k = table_.sample(rng);
  return {support_[k], signs_[k]};
}

WalkDraw draw_walk(const Decomposition& dec, const SourceSampler& src, int L, Philox& rng) {
  WalkDraw d;
  double u = rng.next_double();
  d.length = std::min(static_cast<int>(u * L), L - 1);
  auto pick = src.sample(rng);
  int v = pick.coord;
  int sigma = pick.sign;
  for (int k = 0; k < d.length; ++k) {
    StepResult s = step(dec, v, rng);
    ++d.steps;
    if (s.kind == StepResult::Kind::stay) continue;
    if (s.kind == StepResult::Kind::move) {
      v = s.to;
      sigma *= s.sign;
      continue;
    }
    sigma = 0;
    break;
  }
  d.terminal = sigma == 0 ? -1 : v;
  d.sign = sigma;
  return d;
}

WalkSample draw_sample(const Decomposition& dec, const SourceSampler& src,
                       const std::vector<double>& b, int L, Philox& rng) {
  WalkDraw d = draw_walk(dec, src, L, rng);
  WalkSample s;
  s.length = d.length;
  s.terminal = d.terminal;
  s.sign = d.sign;
  s.steps = d.steps;
  if (d.sign != 0) {
    auto v = static_cast<std::size_t>(d.terminal);
    s.value = d.sign * (0.5 * src.total() * L) * (b[v] / dec.diag[v]);
  }
  return s;
}

namespace {

struct SampleLoopResult {
  double estimate = 0.0;
  std::int64_t steps = 0;
  std::int64_t absorbed = 0;
};

SampleLoopResult run_mean_loop(const Decomposition& dec, const SourceSampler& src,
                               const std::vector<double>& b, int L, std::int64_t n_s,
                               std::uint64_t seed, int replicate, double sample_bound) {
  SampleLoopResult out;
  PairwiseAccumulator acc;
  for (std::int64_t j = 0; j < n_s; ++j) {
    Philox rng(seed, substream(replicate, j));
    WalkSample s = draw_sample(dec, src, b, L, rng);
    if (std::abs(s.value) > sample_bound)
      throw SolverError(ErrorCode::OracleInconsistent,
                        "sample value exceeds its a priori bound");
    acc.add(s.value);
    out.steps += s.steps;
    if (s.sign == 0) ++out.absorbed;
  }
  out.estimate = acc.total() / static_cast<double>(n_s);
  return out;
}

}  // namespace

std::pair<double, EstimateReport> estimate_abs(const Decomposition& dec,
                                               const std::vector<double>& b,
                                               const std::vector<double>& t,
                                               const SolverParams& params) {
  check_problem(dec, b, t);
  if (!dec.cls.rdd) throw SolverError(ErrorCode::NotRDD, "estimate_abs requires an RDD system");
  if (!(params.epsilon > 0.0)) throw SolverError(ErrorCode::InvalidEpsilon, "epsilon");
  SourceSampler src(t);
  VecStats bs = vec_stats(dec, b);
  VecStats ts = vec_stats(dec, t);

  EstimateReport rep;
  rep.epsilon = params.epsilon;
  rep.gamma = params.gamma;
  rep.method = "hoeffding";
  rep.target_kind = "abs_dinvb";
  rep.seed = params.seed;
  if (bs.dinv_inf == 0.0) {
    rep.method = "degenerate_zero_b";
    return {0.0, rep};
  }
  int L = params.L ? *params.L
                   : truncation_length(dec, bs, ts, params.gamma,
                                       params.epsilon * bs.dinv_inf, GapMode::general);
  double norm_t = src.total();
  const double c = 8.0 * std::log(8.0);
  std::int64_t n_s =
      params.n_s ? *params.n_s
                 : ceil_to_count(c * norm_t * norm_t * static_cast<double>(L) * L /
                                     (params.epsilon * params.epsilon),
                                 "n_s");
  double bound = 0.5 * norm_t * bs.dinv_inf * L * (1.0 + 1e-9);

  int k = std::max(1, params.median_k | 1);
  std::vector<double> estimates;
  std::int64_t absorbed = 0;
  for (int e = 0; e < k; ++e) {
    auto r = run_mean_loop(dec, src, b, L, n_s, params.seed, e, bound);
    estimates.push_back(r.estimate);
    rep.walk_steps += r.steps;
    absorbed += r.absorbed;
  }
  rep.n_s = static_cast<std::int64_t>(k) * n_s;
  rep.absorb_rate = static_cast<double>(absorbed) / static_cast<double>(rep.n_s);
  rep.L = L;
  rep.constant = c;
  return {median_of(std::move(estimates)), rep};
}

std::pair<double, EstimateReport> estimate_inf_relative(const Decomposition& dec,
                                                        const std::vector<double>& b,
                                                        const std::vector<double>& t,
                                                        const SolverParams& params) {
  check_problem(dec, b, t);
  if (!dec.cls.rddz())
    throw SolverError(ErrorCode::NotRDDZ, "estimate_inf_relative requires an RDDZ system");
  check_nonneg(b, "b");
  check_nonneg(t, "t");
  if (!(params.epsilon > 0.0)) throw SolverError(ErrorCode::InvalidEpsilon, "epsilon");
  SourceSampler src(t);
  VecStats bs = vec_stats(dec, b);
  VecStats ts = vec_stats(dec, t);

  EstimateReport rep;
  rep.epsilon = params.epsilon;
  rep.gamma = params.gamma;
  rep.method = "chebyshev";
  rep.target_kind = "inf_norm";
  rep.seed = params.seed;
  if (bs.dinv_inf == 0.0) {
    rep.method = "degenerate_zero_b";
    return {0.0, rep};
  }
  int L = params.L ? *params.L
                   : truncation_length(dec, bs, ts, params.gamma,
                                       0.5 * params.epsilon * bs.dinv_inf, GapMode::general);
  double norm_t = src.total();
  const double c = 16.0;
  std::int64_t n_s = params.n_s
                         ? *params.n_s
                         : ceil_to_count(c * norm_t * norm_t * static_cast<double>(L) /
                                             (params.epsilon * params.epsilon),
                                         "n_s");
  double bound = 0.5 * norm_t * bs.dinv_inf * L * (1.0 + 1e-9);

  int k = std::max(1, params.median_k | 1);
  std::vector<double> estimates;
  std::int64_t absorbed = 0;
  for (int e = 0; e < k; ++e) {
    auto r = run_mean_loop(dec, src, b, L, n_s, params.seed, e, bound);
    estimates.push_back(r.estimate);
    rep.walk_steps += r.steps;
    absorbed += r.absorbed;
  }
  rep.n_s = static_cast<std::int64_t>(k) * n_s;
  rep.absorb_rate = static_cast<double>(absorbed) / static_cast<double>(rep.n_s);
  rep.L = L;
  rep.constant = c;
  return {median_of(std::move(estimates)), rep};
}

std::pair<double, EstimateReport> estimate_relative(const Decomposition& dec,
                                                    const std::vector<double>& b,
                                                    const std::vector<double>& t,
                                                    const SolverParams& params) {
  check_problem(dec, b, t);
  if (!dec.cls.rddz())
    throw SolverError(ErrorCode::NotRDDZ, "estimate_relative requires an RDDZ system");
  check_nonneg(b, "b");
  check_nonneg(t, "t");
  if (!(params.epsilon > 0.0)) throw SolverError(ErrorCode::InvalidEpsilon, "epsilon");
  SourceSampler src(t);
  VecStats bs = vec_stats(dec, b);
  VecStats ts = vec_stats(dec, t);

  EstimateReport rep;
  rep.epsilon = params.epsilon;
  rep.gamma = params.gamma;
  rep.method = "stopping_rule";
  rep.target_kind = "relative";
  rep.seed = params.seed;
  if (bs.dinv_inf == 0.0) {
    rep.method = "degenerate_zero_b";
    return {0.0, rep};
  }

  double dinv = bs.dinv_inf;
  if (params.dinv_b_inf_bound) {
    if (*params.dinv_b_inf_bound < bs.dinv_inf * (1.0 - 1e-12))
      throw SolverError(ErrorCode::OracleInconsistent,
                        "supplied ||D^-1 b||_inf bound is below the exact value");
    dinv = *params.dinv_b_inf_bound;
    rep.dinv_b_bound_supplied = true;
  }

  int L = 0;
  if (params.L) {
    L = *params.L;
  } else {
    if (!params.eta)
      throw SolverError(ErrorCode::MissingEta,
                        "relative mode needs eta (a lower bound on t^T x*) or an explicit L");
    L = truncation_length(dec, bs, ts, params.gamma, params.epsilon * *params.eta,
                          GapMode::general);
  }
  double norm_t = src.total();
  double a = 0.5 * norm_t * dinv * L;

  // Stopping rule at (eps/2, delta = 1/4): draw until the rescaled sum
  // reaches Upsilon, then output Upsilon / N times the scale.
  double eps_half = 0.5 * params.epsilon;
  const double e_minus_2 = 0.718281828459045235;
  double upsilon = 1.0 + (1.0 + eps_half) * 4.0 * e_minus_2 * std::log(8.0) / (eps_half * eps_half);

  int k = std::max(1, params.median_k | 1);
  std::vector<double> estimates;
  std::int64_t total_n = 0, absorbed = 0;
  for (int e = 0; e < k; ++e) {
    double sum = 0.0;
    std::int64_t n = 0;
    while (sum < upsilon) {
      if (n >= params.sample_cap)
        throw SolverError(ErrorCode::BudgetExhausted,
                          "stopping rule exceeded the sample cap; t^T x* may be near zero");
      Philox rng(params.seed, substream(e, n));
      WalkSample s = draw_sample(dec, src, b, L, rng);
      ++n;
      rep.walk_steps += s.steps;
      if (s.sign == 0) ++absorbed;
      double scaled = s.value / a;
      if (scaled < -1e-15 || scaled > 1.0 + 1e-9)
        throw SolverError(ErrorCode::OracleInconsistent,
                          "rescaled sample outside [0,1]; check the supplied bound");
      sum += scaled;
    }
    estimates.push_back(upsilon / static_cast<double>(n) * a);
    total_n += n;
  }
  rep.n_s = total_n;
  rep.absorb_rate = total_n ? static_cast<double>(absorbed) / static_cast<double>(total_n) : 0.0;
  rep.L = L;
  rep.constant = upsilon;
  rep.scale = a;
  return {median_of(std::move(estimates)), rep};
}

TransposedProblem transpose_mode(const Decomposition& dec, const std::vector<double>& b,
                                 const std::vector<double>& t) {
  check_problem(dec, b, t);
  if (!dec.cls.cdd) throw SolverError(ErrorCode::NotCDD, "transpose_mode requires a CDD system");
  TransposedProblem out;
  out.dec = decomposition_from_parts(dec.diag, dec.offdiag.transposed(), dec.forced_split);
  out.b = t;
  out.t = b;
  return out;
}

}  // namespace sublin
