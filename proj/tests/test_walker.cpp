#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "sublin/decomposition.hpp"
#include "sublin/dense_oracle.hpp"
#include "sublin/errors.hpp"
#include "sublin/generators.hpp"
#include "sublin/philox.hpp"
#include "sublin/walker.hpp"

using namespace sublin;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

SparseMatrix dense2(double a, double b, double c, double d) {
  std::vector<Triplet> t;
  if (a != 0.0) t.push_back({0, 0, a});
  if (b != 0.0) t.push_back({0, 1, b});
  if (c != 0.0) t.push_back({1, 0, c});
  if (d != 0.0) t.push_back({1, 1, d});
  return SparseMatrix::from_triplets(2, std::move(t));
}

// Personalized-restart system on the 2-cycle: identity diagonal, each row
// carrying a single off-diagonal weight 0.8, so a step from either coordinate
// stays w.p. 1/2, moves w.p. 0.4, absorbs w.p. 0.1.
Decomposition ppr2cycle() { return decompose(dense2(1.0, -0.8, -0.8, 1.0)); }

std::vector<double> dense_of(const SparseVec& v, int n) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (auto [i, x] : v) out[static_cast<std::size_t>(i)] = x;
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const SolverError& e) {
    return e.code();
  }
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("step reproduces the lazy transition kernel") {
  auto dec = ppr2cycle();
  Philox rng(7, 0);
  const int trials = 100000;
  int stay = 0, move = 0, absorb = 0;
  for (int i = 0; i < trials; ++i) {
    StepResult s = step(dec, 0, rng);
    switch (s.kind) {
      case StepResult::Kind::stay:
        ++stay;
        break;
      case StepResult::Kind::move:
        ++move;
        CHECK(s.to == 1);
        CHECK(s.sign == 1);
        break;
      case StepResult::Kind::absorb:
        ++absorb;
        CHECK(s.to == -1);
        CHECK(s.sign == 0);
        break;
    }
  }
  auto within = [&](int count, double p) {
    double sigma = std::sqrt(p * (1.0 - p) * trials);
    return std::abs(count - p * trials) <= 3.0 * sigma;
  };
  CHECK(within(stay, 0.5));
  CHECK(within(move, 0.4));
  CHECK(within(absorb, 0.1));

  SUBCASE("pure diagonal splits stay/absorb evenly") {
    auto diag_only = decompose(dense2(2.0, 0.0, 0.0, 5.0));
    Philox r2(8, 0);
    int st = 0, ab = 0;
    for (int i = 0; i < trials; ++i) {
      StepResult s = step(diag_only, 1, r2);
      CHECK(s.kind != StepResult::Kind::move);
      (s.kind == StepResult::Kind::stay ? st : ab)++;
    }
    CHECK(within(st, 0.5));
    CHECK(within(ab, 0.5));
  }

  SUBCASE("positive M entry carries a negative walk sign") {
    // M(0,1) = +0.6 decomposes to an off-diagonal part entry of -0.6.
    auto signed_dec = decompose(dense2(1.0, 0.6, 0.0, 1.0));
    Philox r3(9, 0);
    int moves = 0;
    for (int i = 0; i < trials; ++i) {
      StepResult s = step(signed_dec, 0, r3);
      if (s.kind != StepResult::Kind::move) continue;
      ++moves;
      CHECK(s.to == 1);
      CHECK(s.sign == -1);
    }
    double p = 0.3;
    CHECK(std::abs(moves - p * trials) <= 3.0 * std::sqrt(p * (1.0 - p) * trials));
  }
}

TEST_CASE("source sampler follows |t| and keeps signs") {
  std::vector<double> t = {2.0, 0.0, -1.0, 1.0};
  SourceSampler src(t);
  CHECK(src.total() == doctest::Approx(4.0));
  CHECK(src.support_size() == 3);

  Philox rng(21, 0);
  const int trials = 80000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < trials; ++i) {
    auto pick = src.sample(rng);
    ++counts[static_cast<std::size_t>(pick.coord)];
    CHECK(pick.sign == (t[static_cast<std::size_t>(pick.coord)] > 0.0 ? 1 : -1));
  }
  CHECK(counts[1] == 0);
  std::vector<double> probs = {0.5, 0.0, 0.25, 0.25};
  for (int i : {0, 2, 3}) {
    double p = probs[static_cast<std::size_t>(i)];
    double sigma = std::sqrt(p * (1.0 - p) * trials);
    CHECK(std::abs(counts[static_cast<std::size_t>(i)] - p * trials) <= 3.0 * sigma);
  }

  CHECK(code_of([] { SourceSampler z(std::vector<double>(3, 0.0)); }) == ErrorCode::ZeroT);
}

TEST_CASE("walk draws pick a uniform level and consume a fixed uniform budget") {
  auto dec = ppr2cycle();
  SourceSampler src(std::vector<double>{1.0, 0.0});
  const int L = 4;
  const int trials = 40000;
  std::vector<int> level_counts(L, 0);
  Philox rng(31, 0);
  for (int i = 0; i < trials; ++i) {
    WalkDraw d = draw_walk(dec, src, L, rng);
    REQUIRE(d.length >= 0);
    REQUIRE(d.length < L);
    ++level_counts[static_cast<std::size_t>(d.length)];
    CHECK((d.sign == 0) == (d.terminal == -1));
    CHECK(d.steps <= d.length);
  }
  double p = 1.0 / L;
  double sigma = std::sqrt(p * (1.0 - p) * trials);
  for (int c : level_counts) CHECK(std::abs(c - p * trials) <= 3.0 * sigma);

  SUBCASE("deterministic under a fixed stream") {
    for (int j = 0; j < 50; ++j) {
      Philox a(55, static_cast<std::uint64_t>(j));
      Philox b(55, static_cast<std::uint64_t>(j));
      WalkDraw da = draw_walk(dec, src, 6, a);
      WalkDraw db = draw_walk(dec, src, 6, b);
      CHECK(da.length == db.length);
      CHECK(da.terminal == db.terminal);
      CHECK(da.sign == db.sign);
      CHECK(da.steps == db.steps);
    }
  }

  SUBCASE("consumes one uniform for the level, one for the source, one per step") {
    for (int j = 0; j < 50; ++j) {
      Philox a(77, static_cast<std::uint64_t>(j));
      WalkDraw d = draw_walk(dec, src, 6, a);
      Philox b(77, static_cast<std::uint64_t>(j));
      for (int k = 0; k < 2 + d.steps; ++k) b.next_double();
      CHECK(a.next_double() == b.next_double());
    }
  }
}

TEST_CASE("walk samples are unbiased for the truncated functional") {
  SystemGenOptions opt;
  opt.n = 16;
  auto m = random_system(SystemKind::rdd, opt, 42);
  auto dec = decompose(m);
  auto b = random_dense_vector(opt.n, 5);
  auto t = dense_of(random_sparse_vector(opt.n, 4, 6), opt.n);
  const int L = 8;

  double ref = dot(t, truncated_solution(dec, b, L));
  SourceSampler src(t);
  VecStats bs = vec_stats(dec, b);
  double bound = 0.5 * src.total() * bs.dinv_inf * L * (1.0 + 1e-9);

  const std::int64_t n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    Philox rng(11, static_cast<std::uint64_t>(j));
    WalkSample s = draw_sample(dec, src, b, L, rng);
    CHECK(std::abs(s.value) <= bound);
    sum += s.value;
    sumsq += s.value * s.value;
  }
  double mean = sum / static_cast<double>(n);
  double var = sumsq / static_cast<double>(n) - mean * mean;
  double stderr_ = std::sqrt(var / static_cast<double>(n));
  CHECK(std::abs(mean - ref) <= 4.0 * stderr_);
}

TEST_CASE("estimate_abs meets its additive target and pins its schedule") {
  // Singular Laplacian of a single edge; b = t picks out the solution gap,
  // t^T x* = 1, and the 2-norm gap is exactly 1.
  auto dec = decompose(dense2(1.0, -1.0, -1.0, 1.0));
  std::vector<double> b = {1.0, -1.0};
  std::vector<double> t = b;

  SolverParams params;
  params.gamma = 1.0;
  params.epsilon = 0.25;

  int hits = 0;
  double first = 0.0, repeat = 0.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    params.seed = s;
    auto [est, rep] = estimate_abs(dec, b, t, params);
    CHECK(rep.method == "hoeffding");
    CHECK(rep.target_kind == "abs_dinvb");
    CHECK(rep.L == 3);
    std::int64_t want =
        static_cast<std::int64_t>(std::ceil(8.0 * std::log(8.0) * 4.0 * 9.0 / (0.25 * 0.25)));
    CHECK(rep.n_s == want);
    if (std::abs(est - 1.0) <= 0.25) ++hits;
    if (s == 1) first = est;
    if (s == 2) repeat = est;
  }
  CHECK(hits >= 18);
  CHECK(first != repeat);

  SUBCASE("bitwise reproducible under the same seed") {
    params.seed = 1;
    auto [a1, r1] = estimate_abs(dec, b, t, params);
    auto [a2, r2] = estimate_abs(dec, b, t, params);
    CHECK(a1 == a2);
    CHECK(r1.walk_steps == r2.walk_steps);
    CHECK(a1 == first);
  }

  SUBCASE("median amplification multiplies the budget and stays on target") {
    params.seed = 3;
    params.median_k = 3;
    auto [est, rep] = estimate_abs(dec, b, t, params);
    std::int64_t base =
        static_cast<std::int64_t>(std::ceil(8.0 * std::log(8.0) * 4.0 * 9.0 / (0.25 * 0.25)));
    CHECK(rep.n_s == 3 * base);
    CHECK(std::abs(est - 1.0) <= 0.25);
  }
}

TEST_CASE("estimate_abs rejects bad inputs and degenerates cleanly") {
  auto dec = ppr2cycle();
  std::vector<double> b = {1.0, 0.5};
  std::vector<double> t = {1.0, 0.0};
  SolverParams params;
  params.gamma = 0.1;
  params.epsilon = 0.5;

  SUBCASE("zero right-hand side short-circuits") {
    auto [est, rep] = estimate_abs(dec, std::vector<double>{0.0, 0.0}, t, params);
    CHECK(est == 0.0);
    CHECK(rep.method == "degenerate_zero_b");
    CHECK(rep.n_s == 0);
  }
  SUBCASE("invalid epsilon") {
    params.epsilon = 0.0;
    CHECK(code_of([&] { estimate_abs(dec, b, t, params); }) == ErrorCode::InvalidEpsilon);
  }
  SUBCASE("zero t") {
    CHECK(code_of([&] { estimate_abs(dec, b, std::vector<double>{0.0, 0.0}, params); }) ==
          ErrorCode::ZeroT);
  }
  SUBCASE("row dominance is required") {
    auto cdd_only = decompose(dense2(1.0, -2.0, 0.0, 3.0));
    CHECK_FALSE(cdd_only.cls.rdd);
    CHECK(cdd_only.cls.cdd);
    CHECK(code_of([&] { estimate_abs(cdd_only, b, t, params); }) == ErrorCode::NotRDD);
  }
  SUBCASE("dimension mismatch") {
    CHECK(code_of([&] { estimate_abs(dec, std::vector<double>{1.0}, t, params); }) ==
          ErrorCode::DimensionMismatch);
  }
  SUBCASE("infeasible sample counts are refused") {
    params.epsilon = 1e-12;
    CHECK(code_of([&] { estimate_abs(dec, b, t, params); }) == ErrorCode::BudgetExhausted);
  }
}

TEST_CASE("estimate_inf_relative tracks eps * ||x*||_inf on nonnegative data") {
  int hits = 0;
  for (int i = 0; i < 10; ++i) {
    SystemGenOptions opt;
    opt.n = 24;
    opt.z_class = true;
    opt.margin_low = 0.15;
    auto m = random_system(SystemKind::rdd, opt, 100 + static_cast<std::uint64_t>(i));
    auto dec = decompose(m);
    REQUIRE(dec.cls.rddz());
    auto b = random_dense_vector(opt.n, 200 + static_cast<std::uint64_t>(i), true);
    auto t = dense_of(random_sparse_vector(opt.n, 3, 300 + static_cast<std::uint64_t>(i), true),
                      opt.n);

    SolverParams params;
    params.gamma = gap_max(dec).value;
    params.epsilon = 0.5;
    params.seed = 900 + static_cast<std::uint64_t>(i);
    auto [est, rep] = estimate_inf_relative(dec, b, t, params);
    CHECK(rep.method == "chebyshev");
    CHECK(rep.constant == 16.0);

    auto x = exact_solution(dec, b, 1e-12);
    double target = dot(t, x);
    double xinf = 0.0;
    for (double v : x) xinf = std::max(xinf, std::abs(v));
    if (std::abs(est - target) <= params.epsilon * xinf) ++hits;
  }
  CHECK(hits >= 8);

  SUBCASE("negative data is rejected") {
    auto dec = ppr2cycle();
    SolverParams params;
    params.gamma = 0.1;
    params.epsilon = 0.5;
    CHECK(code_of([&] {
            estimate_inf_relative(dec, std::vector<double>{1.0, -0.1},
                                  std::vector<double>{1.0, 0.0}, params);
          }) == ErrorCode::NegativeInput);
    CHECK(code_of([&] {
            estimate_inf_relative(dec, std::vector<double>{1.0, 0.1},
                                  std::vector<double>{-1.0, 0.0}, params);
          }) == ErrorCode::NegativeInput);
  }
  SUBCASE("sign structure is required") {
    auto signed_dec = decompose(dense2(1.0, 0.6, 0.0, 1.0));
    CHECK_FALSE(signed_dec.cls.z);
    SolverParams params;
    params.epsilon = 0.5;
    params.gamma = 0.2;
    CHECK(code_of([&] {
            estimate_inf_relative(signed_dec, std::vector<double>{1.0, 1.0},
                                  std::vector<double>{1.0, 0.0}, params);
          }) == ErrorCode::NotRDDZ);
  }
}

TEST_CASE("estimate_relative stopping rule: schedule, guarantee, and guards") {
  // Diagonal system with b proportional to the diagonal: every sample rescales
  // to exactly 1, so the stopping rule runs its minimal schedule.
  auto dec = decompose(SparseMatrix::from_triplets(2, {{0, 0, 2.0}, {1, 1, 4.0}}));
  std::vector<double> b = {2.0, 4.0};
  std::vector<double> t = {1.0, 2.0};

  SolverParams params;
  params.epsilon = 0.5;
  params.L = 1;
  params.seed = 13;

  auto [est, rep] = estimate_relative(dec, b, t, params);
  double eps_half = 0.25;
  double upsilon =
      1.0 + (1.0 + eps_half) * 4.0 * (std::exp(1.0) - 2.0) * std::log(8.0) / (eps_half * eps_half);
  auto want_n = static_cast<std::int64_t>(std::ceil(upsilon));
  CHECK(rep.n_s == want_n);
  CHECK(rep.constant == doctest::Approx(upsilon).epsilon(1e-12));
  CHECK(rep.scale == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(rep.target_kind == "relative");
  // Truncated functional at L = 1 is (1/2) t^T D^-1 b = 1.5.
  CHECK(std::abs(est - 1.5) <= eps_half * 1.5);
  CHECK(est == doctest::Approx(upsilon / static_cast<double>(want_n) * 1.5).epsilon(1e-12));

  SUBCASE("eta drives the truncation depth when L is not pinned") {
    SolverParams p2;
    p2.epsilon = 0.5;
    p2.gamma = 0.5;
    p2.eta = 1.0;
    int hits = 0;
    double target = dot(t, exact_solution(dec, b, 1e-12));
    for (std::uint64_t s = 0; s < 10; ++s) {
      p2.seed = 40 + s;
      auto [e2, r2] = estimate_relative(dec, b, t, p2);
      CHECK(r2.L >= 1);
      if (std::abs(e2 - target) <= p2.epsilon * target) ++hits;
    }
    CHECK(hits >= 8);
  }
  SUBCASE("missing eta and missing L is an error") {
    SolverParams p3;
    p3.epsilon = 0.5;
    p3.gamma = 0.5;
    CHECK(code_of([&] { estimate_relative(dec, b, t, p3); }) == ErrorCode::MissingEta);
  }
  SUBCASE("a supplied ||D^-1 b||_inf bound is honored and audited") {
    SolverParams p4 = params;
    p4.dinv_b_inf_bound = 2.0;
    auto [e4, r4] = estimate_relative(dec, b, t, p4);
    CHECK(r4.dinv_b_bound_supplied);
    CHECK(r4.scale == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(std::abs(e4 - 1.5) <= eps_half * 1.5);

    SolverParams p5 = params;
    p5.dinv_b_inf_bound = 0.5;
    CHECK(code_of([&] { estimate_relative(dec, b, t, p5); }) == ErrorCode::OracleInconsistent);
  }
  SUBCASE("sample cap aborts the stopping rule") {
    SolverParams p6 = params;
    p6.sample_cap = 5;
    CHECK(code_of([&] { estimate_relative(dec, b, t, p6); }) == ErrorCode::BudgetExhausted);
  }
  SUBCASE("bitwise reproducible under the same seed") {
    auto [again, r_again] = estimate_relative(dec, b, t, params);
    CHECK(again == est);
    CHECK(r_again.n_s == rep.n_s);
  }
}

TEST_CASE("transpose mode targets the same functional through the adjoint system") {
  SystemGenOptions opt;
  opt.n = 24;
  opt.z_class = true;
  auto m = random_system(SystemKind::cdd, opt, 77);
  auto dec = decompose(m);
  REQUIRE(dec.cls.cdd);
  auto b = dense_of(random_sparse_vector(opt.n, 3, 88, true), opt.n);
  auto t = random_dense_vector(opt.n, 99, true);

  auto tp = transpose_mode(dec, b, t);
  CHECK(tp.dec.cls.rdd);
  CHECK(tp.b == t);
  CHECK(tp.t == b);

  SUBCASE("level-by-level functional identity") {
    std::vector<double> w(b.size()), wt(t.size());
    for (std::size_t i = 0; i < b.size(); ++i) w[i] = b[i] / dec.diag[i];
    for (std::size_t i = 0; i < t.size(); ++i) wt[i] = t[i] / tp.dec.diag[i];
    for (int level = 0; level < 6; ++level) {
      double lhs = dot(t, w);
      double rhs = dot(b, wt);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      w = lazy_apply(dec, w);
      wt = lazy_apply(tp.dec, wt);
    }
  }

  SUBCASE("round trip on a two-sided system restores it") {
    SystemGenOptions ropt;
    ropt.n = 12;
    auto rcdd = decompose(random_system(SystemKind::rcdd, ropt, 31));
    REQUIRE(rcdd.cls.rcdd());
    std::vector<double> rb = random_dense_vector(ropt.n, 32);
    std::vector<double> rt = random_dense_vector(ropt.n, 33);
    auto once = transpose_mode(rcdd, rb, rt);
    auto back = transpose_mode(once.dec, once.b, once.t);
    CHECK(back.b == rb);
    CHECK(back.t == rt);
    auto orig = reconstruct(rcdd).to_triplets();
    auto twice = reconstruct(back.dec).to_triplets();
    REQUIRE(orig.size() == twice.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
      CHECK(orig[i].row == twice[i].row);
      CHECK(orig[i].col == twice[i].col);
      CHECK(orig[i].value == twice[i].value);
    }
  }

  SUBCASE("sampling through the adjoint hits the original truncated functional") {
    const int L = 12;
    double target = dot(t, truncated_solution(dec, b, L));
    VecStats ts = vec_stats(dec, t);
    SolverParams params;
    params.epsilon = 0.3;
    params.L = L;
    int hits = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      params.seed = 700 + s;
      auto [est, rep] = estimate_abs(tp.dec, tp.b, tp.t, params);
      CHECK(rep.L == L);
      if (std::abs(est - target) <= params.epsilon * ts.dinv_inf) ++hits;
    }
    CHECK(hits >= 8);
  }

  SUBCASE("column dominance is required") {
    auto rdd_only = decompose(dense2(1.0, 0.0, -2.0, 3.0));
    CHECK_FALSE(rdd_only.cls.cdd);
    std::vector<double> two = {1.0, 1.0};
    CHECK(code_of([&] { transpose_mode(rdd_only, two, two); }) == ErrorCode::NotCDD);
  }
}
