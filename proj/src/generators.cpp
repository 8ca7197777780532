#include "sublin/generators.hpp"

#include <algorithm>
#include <set>

#include "sublin/errors.hpp"
#include "sublin/philox.hpp"

namespace sublin {

namespace {

double entry_magnitude(Philox& rng) { return 0.1 + 0.9 * rng.next_double(); }

std::vector<int> distinct_columns(Philox& rng, int n, int exclude, int count) {
  std::set<int> cols;
  count = std::min(count, n - 1);
  while (static_cast<int>(cols.size()) < count) {
    int j = static_cast<int>(rng.next_double() * n);
    if (j >= n) j = n - 1;
    if (j != exclude) cols.insert(j);
  }
  return {cols.begin(), cols.end()};
}

}  // namespace

SparseMatrix random_system(SystemKind kind, const SystemGenOptions& opt, std::uint64_t seed) {
  if (opt.n < 1) throw SolverError(ErrorCode::DimensionMismatch, "random_system needs n >= 1");
  Philox rng(seed, 0);
  int n = opt.n;
  std::vector<Triplet> off;
  auto draw_count = [&]() {
    double a = opt.avg_row_nnz;
    int base = static_cast<int>(a);
    return base + (rng.next_double() < a - base ? 1 : 0);
  };
  auto draw_value = [&]() {
    double v = entry_magnitude(rng);
    if (!opt.z_class && rng.next_double() < 0.5) v = -v;
    return v;
  };
  if (kind == SystemKind::sdd) {
    for (int i = 0; i < n; ++i) {
      for (int j : distinct_columns(rng, n, i, draw_count())) {
        if (j < i) continue;  // upper triangle only, mirrored below
        double v = draw_value();
        off.push_back({i, j, v});
        off.push_back({j, i, v});
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j : distinct_columns(rng, n, i, draw_count())) off.push_back({i, j, draw_value()});
    }
  }
  // off holds A^T entries; merge duplicates before computing dominated sums.
  SparseMatrix at = SparseMatrix::from_triplets(n, std::move(off));
  std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col_sum(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    auto r = at.row(i);
    for (int k = 0; k < r.size(); ++k) {
      row_sum[static_cast<std::size_t>(i)] += std::abs(r.val_begin[k]);
      col_sum[static_cast<std::size_t>(r.idx_begin[k])] += std::abs(r.val_begin[k]);
    }
  }
  std::vector<Triplet> m = at.to_triplets();
  for (auto& e : m) e.value = -e.value;
  for (int i = 0; i < n; ++i) {
    auto k = static_cast<std::size_t>(i);
    double dominated = 0.0;
    switch (kind) {
      case SystemKind::rdd:
      case SystemKind::sdd: dominated = row_sum[k]; break;
      case SystemKind::cdd: dominated = col_sum[k]; break;
      case SystemKind::rcdd: dominated = std::max(row_sum[k], col_sum[k]); break;
    }
    double margin = opt.margin_low + (opt.margin_high - opt.margin_low) * rng.next_double();
    double d = dominated * (1.0 + margin);
    if (!(d > 0.0)) d = 0.5 + rng.next_double();
    m.push_back({i, i, d});
  }
  return SparseMatrix::from_triplets(n, std::move(m));
}

std::vector<double> random_dense_vector(int n, std::uint64_t seed, bool nonneg) {
  Philox rng(seed, 1);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) {
    x = rng.next_double();
    if (!nonneg) x = 2.0 * x - 1.0;
  }
  return v;
}

SparseVec random_sparse_vector(int n, int nnz, std::uint64_t seed, bool nonneg) {
  Philox rng(seed, 2);
  SparseVec v;
  nnz = std::min(nnz, n);
  std::set<int> picked;
  while (static_cast<int>(picked.size()) < nnz) {
    int j = static_cast<int>(rng.next_double() * n);
    if (j >= n) j = n - 1;
    picked.insert(j);
  }
  for (int j : picked) {
    double x = entry_magnitude(rng);
    if (!nonneg && rng.next_double() < 0.5) x = -x;
    v[j] = x;
  }
  return v;
}

namespace {

int draw_below(Philox& rng, int bound) {
  int j = static_cast<int>(rng.next_double() * bound);
  return std::min(j, bound - 1);
}

std::vector<int> shuffled_identity(Philox& rng, int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(draw_below(rng, i + 1))]);
  }
  return order;
}

}  // namespace

Graph random_digraph(const GraphGenOptions& opt, std::uint64_t seed) {
  if (opt.n < 2) throw SolverError(ErrorCode::DimensionMismatch, "random_digraph needs n >= 2");
  Philox rng(seed, 3);
  const int n = opt.n;
  std::set<std::pair<int, int>> used;
  std::vector<Triplet> arcs;
  auto add_arc = [&](int u, int v) {
    if (u == v || !used.insert({u, v}).second) return;
    arcs.push_back({u, v, opt.weighted ? entry_magnitude(rng) : 1.0});
  };
  for (int u = 0; u < n; ++u) {
    int v = draw_below(rng, n - 1);
    if (v >= u) ++v;
    add_arc(u, v);
  }
  const double extra = std::max(0.0, opt.avg_out_degree - 1.0) * n;
  for (int i = 0; i < static_cast<int>(extra); ++i) {
    add_arc(draw_below(rng, n), draw_below(rng, n));
  }
  return Graph::from_arcs(n, std::move(arcs));
}

Graph random_eulerian(const GraphGenOptions& opt, std::uint64_t seed) {
  if (opt.n < 2) throw SolverError(ErrorCode::DimensionMismatch, "random_eulerian needs n >= 2");
  Philox rng(seed, 4);
  const int n = opt.n;
  std::set<std::pair<int, int>> used;
  std::vector<Triplet> arcs;
  const int cycles = std::max(1, opt.cycles);
  for (int c = 0; c < cycles; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      const std::vector<int> order = shuffled_identity(rng, n);
      std::vector<std::pair<int, int>> cycle(static_cast<std::size_t>(n));
      bool fresh = true;
      for (int i = 0; i < n; ++i) {
        const int u = order[static_cast<std::size_t>(i)];
        const int v = order[static_cast<std::size_t>((i + 1) % n)];
        if (used.count({u, v})) {
          fresh = false;
          break;
        }
        cycle[static_cast<std::size_t>(i)] = {u, v};
      }
      if (!fresh) continue;
      for (const auto& [u, v] : cycle) {
        used.insert({u, v});
        arcs.push_back({u, v, 1.0});
      }
      placed = true;
    }
    if (!placed) {
      throw SolverError(ErrorCode::NoConvergenceWithinBudget,
                        "could not place " + std::to_string(cycles) + " arc-disjoint cycles on " +
                            std::to_string(n) + " vertices");
    }
  }
  return Graph::from_arcs(n, std::move(arcs));
}

Graph random_permutation_digraph(int n, std::uint64_t seed) {
  if (n < 1) throw SolverError(ErrorCode::DimensionMismatch, "needs n >= 1");
  Philox rng(seed, 5);
  const std::vector<int> image = shuffled_identity(rng, n);
  std::vector<Triplet> arcs;
  arcs.reserve(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) arcs.push_back({u, image[static_cast<std::size_t>(u)], 1.0});
  return Graph::from_arcs(n, std::move(arcs));
}

Graph random_connected_undirected(const GraphGenOptions& opt, std::uint64_t seed) {
  if (opt.n < 2) {
    throw SolverError(ErrorCode::DimensionMismatch, "random_connected_undirected needs n >= 2");
  }
  Philox rng(seed, 6);
  const int n = opt.n;
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.insert({draw_below(rng, i), i});
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.next_double() < opt.edge_prob) edges.insert({u, v});
    }
  }
  std::vector<Triplet> arcs;
  arcs.reserve(2 * edges.size());
  for (const auto& [u, v] : edges) {
    const double w = opt.weighted ? entry_magnitude(rng) : 1.0;
    arcs.push_back({u, v, w});
    arcs.push_back({v, u, w});
  }
  return Graph::from_arcs(n, std::move(arcs));
}

}  // namespace sublin
