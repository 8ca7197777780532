#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sublin/decomposition.hpp"
#include "sublin/dense_oracle.hpp"
#include "sublin/errors.hpp"
#include "sublin/generators.hpp"

using namespace sublin;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SparseMatrix dense2(double a, double b, double c, double d) {
  std::vector<Triplet> t;
  if (a != 0.0) t.push_back({0, 0, a});
  if (b != 0.0) t.push_back({0, 1, b});
  if (c != 0.0) t.push_back({1, 0, c});
  if (d != 0.0) t.push_back({1, 1, d});
  return SparseMatrix::from_triplets(2, std::move(t));
}

SparseMatrix complete_graph_laplacian(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, static_cast<double>(n - 1)});
    for (int j = 0; j < n; ++j)
      if (j != i) t.push_back({i, j, -1.0});
  }
  return SparseMatrix::from_triplets(n, std::move(t));
}

}  // namespace

TEST_CASE("exact solution on the identity") {
  auto dec = decompose(dense2(1.0, 0.0, 0.0, 1.0));
  auto x = exact_solution(dec, {3.0, -1.0}, 1e-12);
  CHECK(x[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(x[1] == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("exact solution on the single-edge laplacian") {
  auto dec = decompose(dense2(1.0, -1.0, -1.0, 1.0));
  auto x = exact_solution(dec, {1.0, -1.0}, 1e-10);
  CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(x[0] - x[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exact solution on the 2-cycle PPR system") {
  auto dec = decompose(dense2(1.0, -0.8, -0.8, 1.0));
  auto x = exact_solution(dec, {0.2, 0.0}, 1e-11);
  CHECK(x[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(4.0 / 9.0).epsilon(1e-9));
}

TEST_CASE("exact solution rejects non-dominant systems and detects bad b") {
  auto bad = decompose(dense2(1.0, -2.0, -2.0, 1.0));
  CHECK_THROWS_AS(exact_solution(bad, {1.0, 0.0}, 1e-8), SolverError);
  // b outside range(M) for the singular laplacian.
  auto lap = decompose(dense2(1.0, -1.0, -1.0, 1.0));
  try {
    exact_solution(lap, {1.0, 1.0}, 1e-8);
    FAIL("expected NoConvergenceWithinBudget");
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::NoConvergenceWithinBudget);
  }
}

TEST_CASE("sdd pseudoinverse path matches neumann on random systems") {
  for (int trial = 0; trial < 20; ++trial) {
    SystemGenOptions opt;
    opt.n = 4 + trial % 29;
    auto dec = decompose(random_system(SystemKind::sdd, opt, 4000 + trial));
    auto y = random_dense_vector(opt.n, trial);
    auto b = reconstruct(dec).multiply(y);
    auto xn = exact_solution(dec, b, 1e-10);
    auto xp = sdd_solution(dec, b);
    for (std::size_t i = 0; i < xn.size(); ++i)
      CHECK(xn[i] == doctest::Approx(xp[i]).epsilon(1e-8));
  }
}

TEST_CASE("residual of the exact solution is small") {
  for (int trial = 0; trial < 30; ++trial) {
    SystemGenOptions opt;
    opt.n = 3 + trial;
    auto kind = static_cast<SystemKind>(trial % 4);
    auto m = random_system(kind, opt, 600 + trial);
    auto dec = decompose(m);
    auto y = random_dense_vector(opt.n, 2 * trial);
    auto b = m.multiply(y);
    auto x = exact_solution(dec, b, 1e-10);
    auto mx = m.multiply(x);
    for (std::size_t i = 0; i < b.size(); ++i)
      CHECK(std::abs(mx[i] - b[i]) <= 1e-8 * dec.d_max);
  }
}

TEST_CASE("truncated solution closed forms") {
  auto dec = decompose(dense2(2.0, 0.0, 0.0, 2.0));
  auto one_term = truncated_solution(dec, {2.0, 0.0}, 1);
  CHECK(one_term[0] == 0.5);
  CHECK(one_term[1] == 0.0);
  auto cascade = truncated_solution(dec, {2.0, 0.0}, 3);
  CHECK(cascade[0] == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(cascade[1] == 0.0);
  CHECK_THROWS_AS(truncated_solution(dec, {1.0, 0.0}, 0), SolverError);
}

TEST_CASE("truncated solution converges to the exact solution") {
  SystemGenOptions opt;
  opt.n = 16;
  auto m = random_system(SystemKind::rdd, opt, 99);
  auto dec = decompose(m);
  auto y = random_dense_vector(opt.n, 7);
  auto b = m.multiply(y);
  auto exact = exact_solution(dec, b, 1e-12);
  double prev = kInf;
  for (int L : {4, 16, 64, 256}) {
    auto xl = truncated_solution(dec, b, L);
    double err = 0.0;
    for (std::size_t i = 0; i < xl.size(); ++i) err = std::max(err, std::abs(xl[i] - exact[i]));
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("truncation length bounds the scalar truncation error") {
  for (int trial = 0; trial < 25; ++trial) {
    SystemGenOptions opt;
    opt.n = 8 + trial % 17;
    auto kind = trial % 2 == 0 ? SystemKind::rdd : SystemKind::rcdd;
    auto m = random_system(kind, opt, 7100 + trial);
    auto dec = decompose(m);
    auto y = random_dense_vector(opt.n, 3 * trial + 1);
    auto b = m.multiply(y);
    auto t = sparse_to_dense(random_sparse_vector(opt.n, 3, 81 + trial), opt.n);
    double gamma = gap_max(dec).value;
    REQUIRE(gamma > 0.0);
    double eps = 1e-3 + 0.05 * (trial % 5);
    int L = truncation_length(dec, vec_stats(dec, b), vec_stats(dec, t), gamma, eps);
    auto xl = truncated_solution(dec, b, L);
    auto xs = exact_solution(dec, b, eps * 1e-6);
    double tl = 0.0, ts = 0.0;
    for (std::size_t i = 0; i < xl.size(); ++i) {
      tl += t[i] * xl[i];
      ts += t[i] * xs[i];
    }
    CHECK(std::abs(tl - ts) <= eps / 2.0 + 1e-12);
  }
}

TEST_CASE("p-norm gaps of the identity are one half") {
  auto m = dense2(1.0, 0.0, 0.0, 1.0);
  for (double p : {1.0, 2.0, kInf}) {
    auto rep = p_norm_gap(m, p);
    CHECK(rep.exact);
    CHECK(rep.value == doctest::Approx(0.5).epsilon(1e-14));
  }
  auto mx = gap_max(m);
  CHECK(mx.value == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("gap of the 2-cycle PPR system in the 1-norm is alpha over two") {
  auto rep = p_norm_gap(dense2(1.0, -0.8, -0.8, 1.0), 1.0);
  CHECK(rep.exact);
  CHECK(rep.value == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("single-edge laplacian has restricted 2-norm gap one") {
  auto rep = p_norm_gap(dense2(1.0, -1.0, -1.0, 1.0), 2.0);
  CHECK(rep.exact);
  CHECK(rep.value == doctest::Approx(1.0).epsilon(1e-12));
  // Restricted 1 and inf gaps come back as intervals there.
  auto rep1 = p_norm_gap(dense2(1.0, -1.0, -1.0, 1.0), 1.0);
  CHECK(!rep1.exact);
  CHECK(rep1.lower <= rep1.upper);
}

TEST_CASE("spectral gap closed forms") {
  CHECK(spectral_gap_sdd(dense2(1.0, -1.0, -1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_gap_sdd(dense2(1.0, 0.0, 0.0, 1.0)) == doctest::Approx(0.5).epsilon(1e-12));
  for (int n : {3, 5, 8}) {
    double gamma = spectral_gap_sdd(complete_graph_laplacian(n));
    CHECK(gamma == doctest::Approx(n / (2.0 * (n - 1))).epsilon(1e-10));
  }
  CHECK_THROWS_AS(spectral_gap_sdd(dense2(1.0, -0.5, 0.0, 1.0)), SolverError);
}

TEST_CASE("gap_max matches the spectral gap on SDD systems") {
  for (int trial = 0; trial < 25; ++trial) {
    SystemGenOptions opt;
    opt.n = 3 + trial;
    auto m = random_system(SystemKind::sdd, opt, 2500 + trial);
    auto rep = gap_max(m);
    CHECK(rep.value == doctest::Approx(spectral_gap_sdd(m)).epsilon(1e-8));
  }
}

TEST_CASE("gap reports are well-ordered and positive on RCDD systems") {
  for (int trial = 0; trial < 30; ++trial) {
    SystemGenOptions opt;
    opt.n = 2 + trial;
    auto m = random_system(SystemKind::rcdd, opt, 3300 + trial);
    for (double p : {1.0, 2.0, kInf}) {
      auto rep = p_norm_gap(m, p);
      CHECK(rep.lower <= rep.upper + 1e-15);
      if (rep.exact) CHECK(rep.value == rep.lower);
    }
    auto mx = gap_max(m);
    CHECK(mx.value > 0.0);
    CHECK(mx.value <= 1.0 + 1e-15);
  }
}

TEST_CASE("dense cap is enforced") {
  SystemGenOptions opt;
  opt.n = 600;
  opt.avg_row_nnz = 2.0;
  auto m = random_system(SystemKind::rdd, opt, 1);
  CHECK_THROWS_AS(p_norm_gap(m, 2.0), SolverError);
  CHECK_THROWS_AS(spectral_gap_sdd(m), SolverError);
}
