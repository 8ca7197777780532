#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "sublin/alias_table.hpp"
#include "sublin/errors.hpp"
#include "sublin/philox.hpp"
#include "sublin/sparse_vec.hpp"

using namespace sublin;

TEST_CASE("philox 4x32-10 known-answer blocks") {
  // Reference vectors for the 10-round 4x32 configuration.
  auto zeros = Philox::block(0, 0, 0);
  CHECK(zeros[0] == 0x6627e8d5u);
  CHECK(zeros[1] == 0xe169c58du);
  CHECK(zeros[2] == 0xbc57ac4cu);
  CHECK(zeros[3] == 0x9b00dbd8u);

  auto ones = Philox::block(0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull);
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  auto pi = Philox::block(0x299f31d0a4093822ull, 0x0370734413198a2eull, 0x85a308d3243f6a88ull);
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("philox streams are deterministic and independent") {
  Philox a(42, 7);
  Philox b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Philox c(42, 8);
  Philox d(43, 7);
  Philox base(42, 7);
  bool differs_substream = false, differs_seed = false;
  for (int i = 0; i < 16; ++i) {
    std::uint64_t x = base.next_u64();
    if (x != c.next_u64()) differs_substream = true;
    if (x != d.next_u64()) differs_seed = true;
  }
  CHECK(differs_substream);
  CHECK(differs_seed);
}

TEST_CASE("philox doubles are uniform enough and in range") {
  Philox rng(123, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Mean of U[0,1): stderr = 1/sqrt(12 n) ~ 0.0009; allow 5 sigma.
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("philox normals have the right first two moments") {
  Philox rng(9, 0);
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double g = rng.next_normal();
    sum += g;
    sumsq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sumsq / n - 1.0) < 0.03);
}

TEST_CASE("alias table matches its target distribution") {
  std::vector<double> weights = {1.0, 2.0, 3.0};
  AliasTable table(weights);
  Philox rng(2024, 0);
  std::vector<int> counts(3, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) counts[table.sample(rng)]++;
  for (int k = 0; k < 3; ++k) {
    double p = weights[k] / 6.0;
    double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(counts[k] - n * p) < 4.0 * sigma);
  }
}

TEST_CASE("alias table sampling is reproducible") {
  std::vector<double> weights = {0.3, 0.0, 5.0, 1.2, 0.01};
  AliasTable table(weights);
  Philox a(7, 3), b(7, 3);
  for (int i = 0; i < 200; ++i) CHECK(table.sample(a) == table.sample(b));
  // Zero-weight entries are never drawn.
  Philox c(11, 0);
  for (int i = 0; i < 5000; ++i) CHECK(table.sample(c) != 1);
}

TEST_CASE("alias table rejects bad weights") {
  CHECK_THROWS_AS(AliasTable(std::vector<double>{1.0, -0.5}), SolverError);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{0.0, 0.0}), SolverError);
}

TEST_CASE("pairwise accumulator sums exactly on integers") {
  PairwiseAccumulator acc;
  const int n = 1000;
  for (int i = 1; i <= n; ++i) acc.add(i);
  CHECK(acc.total() == n * (n + 1) / 2.0);
  CHECK(acc.count() == static_cast<std::uint64_t>(n));
}

TEST_CASE("pairwise accumulator tracks a long-double reference") {
  PairwiseAccumulator acc;
  long double ref = 0.0L;
  Philox rng(55, 0);
  for (int i = 0; i < 20000; ++i) {
    double x = rng.next_double() - 0.3;
    acc.add(x);
    ref += x;
  }
  CHECK(acc.total() == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
}
