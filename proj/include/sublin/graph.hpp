#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sublin/decomposition.hpp"
#include "sublin/dense_oracle.hpp"
#include "sublin/push.hpp"
#include "sublin/sparse_system.hpp"
#include "sublin/walker.hpp"

namespace sublin {

// Weighted digraph stored as its arc matrix: A(u, v) is the weight of u -> v.
// Row u holds the out-arcs of u, column v the in-arcs of v.
class Graph {
 public:
  Graph() = default;
  static Graph from_arcs(int n, std::vector<Triplet> arcs);

  int n() const { return adj_.n(); }
  const SparseMatrix& arcs() const { return adj_; }
  SparseMatrix::RowRange out(int u) const { return adj_.row(u); }
  SparseMatrix::RowRange in(int v) const { return adj_.col(v); }

  double out_degree(int v) const { return dplus_[static_cast<std::size_t>(v)]; }
  double in_degree(int v) const { return dminus_[static_cast<std::size_t>(v)]; }
  const std::vector<double>& out_degrees() const { return dplus_; }
  const std::vector<double>& in_degrees() const { return dminus_; }

  std::int64_t arc_count() const { return adj_.nnz(); }
  bool unweighted() const { return unweighted_; }
  // Every vertex has matching in- and out-mass: |dout(v) - din(v)| <= tol.
  bool eulerian(double tol = 1e-12) const;
  // A is exactly symmetric: every arc has an equal-weight reverse arc.
  bool undirected() const;

  double min_out_degree() const;
  double max_out_degree() const;
  double min_in_degree() const;
  double max_in_degree() const;
  // Total weight sum ||A||_{1,1} and Frobenius norm.
  double weight_sum() const;
  double frobenius() const;
  // Largest weight and Euclidean norm of the in-arc column of v.
  double col_inf_norm(int v) const;
  double col_two_norm(int v) const;

  Graph transposed() const;

 private:
  SparseMatrix adj_;
  std::vector<double> dplus_, dminus_;
  bool unweighted_ = true;
};

// Edge list: one "u v [w]" arc per line, 0-based, w = 1 when omitted.
// Directives: "# n N" pins the vertex count, "# undirected" mirrors every
// following arc. Other "#" lines are comments.
Graph load_edge_list(std::istream& in, const std::string& name);
Graph load_edge_list_file(const std::string& path);

enum class PprForm {
  identity,  // unit diagonal, the restart system solved in place
  degree,    // out-degree diagonal, solution rescaled by D
};

struct PprSystem {
  Decomposition dec;
  std::vector<double> b;
  double alpha = 0.0;
  // pi(v) = x_to_pi(v) * x*(v) for source systems; identity scale otherwise.
  std::vector<double> x_to_pi;
};

// Restart systems whose solution carries the personalized mass of the source:
// identity form (I - (1-a) A^T D^-1) x = a s with pi = x, or degree form
// (D - (1-a) A^T) x = a s with pi = D x. Requires positive out-degrees.
PprSystem build_ppr_system(const Graph& g, const std::vector<double>& source, double alpha,
                           PprForm form);
PprSystem build_ppr_system(const Graph& g, int source, double alpha, PprForm form);

// Adjoint systems whose solution lists every vertex's contribution to the
// target: identity form (I - (1-a) D^-1 A) x = a e_t, or degree form
// (D - (1-a) A) x = a D e_t.
PprSystem build_contribution_system(const Graph& g, int target, double alpha, PprForm form);

// Rescaled restart system for unweighted graphs with bounded in-degree:
// diagonal X(v) = (1-a) max(din(v), 1), off-diagonal part
// (1-a) A(v, u) X(v) / dout(v), b = (a/n) 1, pi = X x*. Row-dominant whenever
// (1-a) max(Din, 1) <= 1.
PprSystem build_bounded_indegree_system(const Graph& g, double alpha);

// Graph-native local push for the source mass: r^(0) = a e_s, a vertex pushes
// when r(v) / dout(v) > r_max, forwarding (1-a) A(v, u) r / (2 dout(v))
// along each out-arc. Equivalent to push_run on the degree-form restart
// system with p, r scaled by dout.
PushState forward_push(const Graph& g, int s, double alpha, int L, double r_max);

// Adjoint variant: r^(0) = a e_t, threshold r(v) > r_max, forwarding
// (1-a) A(u, v) r / (2 dout(u)) along each in-arc. Matches push_run on either
// contribution system state for state.
PushState backward_push(const Graph& g, int t, double alpha, int L, double r_max);

enum class PagerankMode {
  eulerian_relative,  // relative error when dout >= (1-a) din everywhere
  bounded_indegree,   // relative error on unweighted graphs, (1-a) max(Din,1) <= 1
  generic_ppr,        // additive a*eps via the contribution system
};

struct PagerankReport {
  PagerankMode mode = PagerankMode::generic_ppr;
  double alpha = 0.0;
  int target = -1;
  double eta = 0.0;    // lower bound fed to the relative estimator
  double scale = 1.0;  // factor mapping the sampled functional to pi(target)
  bool closed_form = false;
  EstimateReport inner;
};

// Global PageRank mass of one vertex under uniform restart.
std::pair<double, PagerankReport> pagerank_estimate(const Graph& g, int target, double alpha,
                                                    PagerankMode mode, const SolverParams& params);

// Certified lower bounds on the uniform-restart mass of one vertex, as
// (name, value) pairs: "uniform" a/n, "ratio_maxdeg" a(1-a) din(t) / (n Dout),
// "ratio_weight" a(1-a) din(t)^2 / (n |col|_inf ||A||_11), "ratio_frob"
// a(1-a) din(t)^2 / (n sqrt(n) |col|_2 ||A||_F); on eulerian graphs also
// "eulerian_degree" d(t) / (n Dmax) and, when additionally unweighted,
// "eulerian_unweighted" sqrt(1-a) d(t) / (n sqrt(m)).
std::vector<std::pair<std::string, double>> pagerank_lower_bounds(const Graph& g, int target,
                                                                  double alpha);

double best_pagerank_lower_bound(const Graph& g, int target, double alpha);

// d(t) / (n dmin); requires an eulerian graph.
double pagerank_upper_bound_eulerian(const Graph& g, int target);

// Dense uniform-restart PageRank vector (small graphs).
std::vector<double> pagerank_dense(const Graph& g, double alpha, int dense_cap = kDenseCap);
// Dense personalized vector for a single source.
std::vector<double> ppr_dense(const Graph& g, int source, double alpha,
                              int dense_cap = kDenseCap);

// Eulerian reciprocity defect: max over (u, v) of
// | pi_G(u, v) / d(v) - pi_{G^T}(v, u) / d(u) | via two dense solves.
double ppr_symmetry_defect(const Graph& g, double alpha, int dense_cap = kDenseCap);

// Weighted Laplacian D - A of an undirected graph, self-loops dropped.
SparseMatrix laplacian(const Graph& g);

enum class ResistanceMethod { dense, walk, push, bidi_hoeffding, bidi_variance, automatic };

const char* resistance_method_name(ResistanceMethod m);

struct ResistanceParams {
  double epsilon = 0.1;
  bool relative = false;
  std::optional<double> gamma;
  std::optional<int> L;
  ResistanceMethod method = ResistanceMethod::automatic;
  std::uint64_t seed = kDefaultSeed;
};

struct ResistanceReport {
  ResistanceMethod method = ResistanceMethod::automatic;
  int L = 0;
  double gamma = 0.0;
  double epsilon_abs = 0.0;
  // Cost models behind the automatic choice: L^3 / (eps^2 min_d^2) for walk,
  // L^3 / eps for push, L^(7/3) / eps^(2/3) and L^(5/2) / (eps sqrt(min_d))
  // for the two combined plans.
  double predicted_walk = 0.0;
  double predicted_push = 0.0;
  double predicted_bidi_hoeffding = 0.0;
  double predicted_bidi_variance = 0.0;
  std::int64_t walk_steps = 0;
  std::int64_t push_work = 0;
  std::int64_t n_s = 0;
  std::uint64_t seed = 0;
  std::string warning;
};

// Effective resistance between s and t on a connected undirected graph,
// estimated through the Laplacian system with b = t = e_s - e_t.
std::pair<double, ResistanceReport> effective_resistance(const Graph& g, int s, int t,
                                                         const ResistanceParams& params);

}  // namespace sublin
