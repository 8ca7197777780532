#pragma once

#include <cstdint>
#include <vector>

#include "sublin/graph.hpp"
#include "sublin/sparse_system.hpp"
#include "sublin/sparse_vec.hpp"

namespace sublin {

enum class SystemKind { rdd, cdd, rcdd, sdd };

struct SystemGenOptions {
  int n = 32;
  double avg_row_nnz = 4.0;
  bool z_class = false;
  // Strict dominance headroom: diagonal inflated by a factor in
  // [1 + margin_low, 1 + margin_high] over the dominated sum.
  double margin_low = 0.05;
  double margin_high = 0.5;
};

// Random strictly diagonally dominant system of the requested kind. The
// returned matrix always classifies at least as the requested kind.
SparseMatrix random_system(SystemKind kind, const SystemGenOptions& opt, std::uint64_t seed);

std::vector<double> random_dense_vector(int n, std::uint64_t seed, bool nonneg = false);
SparseVec random_sparse_vector(int n, int nnz, std::uint64_t seed, bool nonneg = false);

struct GraphGenOptions {
  int n = 32;
  // Target mean out-degree for random_digraph (one arc per vertex guaranteed).
  double avg_out_degree = 3.0;
  // Hamiltonian cycles superposed by random_eulerian.
  int cycles = 2;
  // Edge probability for random_connected_undirected before augmentation.
  double edge_prob = 0.2;
  // Draw weights in [0.1, 1) instead of unit weights.
  bool weighted = false;
};

// Random digraph without self-loops where every vertex keeps at least one
// out-arc, so walk systems built on it are well defined.
Graph random_digraph(const GraphGenOptions& opt, std::uint64_t seed);

// Superposition of distinct-arc hamiltonian cycles: every vertex gains one
// unit of in- and out-degree per cycle, so the result is eulerian, strongly
// connected, and unweighted.
Graph random_eulerian(const GraphGenOptions& opt, std::uint64_t seed);

// Uniform random permutation digraph: out- and in-degree exactly 1 everywhere.
Graph random_permutation_digraph(int n, std::uint64_t seed);

// Random spanning tree plus independent extra edges, mirrored both ways.
Graph random_connected_undirected(const GraphGenOptions& opt, std::uint64_t seed);

}  // namespace sublin
