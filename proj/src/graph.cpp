#include "sublin/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "sublin/bidirectional.hpp"
#include "sublin/errors.hpp"
#include "sublin/sparse_vec.hpp"

namespace sublin {

namespace {

constexpr double kDropBelow = 1e-300;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0)) {
    throw SolverError(ErrorCode::InvalidGamma,
                      "alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
}

void check_vertex(const Graph& g, int v, const char* what) {
  if (v < 0 || v >= g.n()) {
    throw SolverError(ErrorCode::IndexOutOfRange, std::string(what) + " vertex " +
                                                      std::to_string(v) + " outside [0, " +
                                                      std::to_string(g.n()) + ")");
  }
}

void require_positive_out_degrees(const Graph& g) {
  for (int v = 0; v < g.n(); ++v) {
    if (!(g.out_degree(v) > 0.0)) {
      throw SolverError(ErrorCode::ZeroOutDegree,
                        "vertex " + std::to_string(v) + " has no out-arc");
    }
  }
}

void map_add(SparseVec& vec, int i, double delta) {
  double& slot = vec[i];
  slot += delta;
  if (std::abs(slot) < kDropBelow) vec.erase(i);
}

std::vector<double> unit_vector(int n, int i) {
  std::vector<double> e(n, 0.0);
  e[i] = 1.0;
  return e;
}

// Dense restart operator I - (1-a) A^T D^-1 whose inverse scaled by a maps a
// source distribution to its personalized mass vector.
Eigen::MatrixXd restart_matrix(const Graph& g, double alpha) {
  const int n = g.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (const Triplet& a : g.arcs().to_triplets()) {
    m(a.col, a.row) -= (1.0 - alpha) * a.value / g.out_degree(a.row);
  }
  return m;
}

}  // namespace

Graph Graph::from_arcs(int n, std::vector<Triplet> arcs) {
  if (n <= 0) {
    throw SolverError(ErrorCode::DimensionMismatch, "graph needs at least one vertex");
  }
  std::vector<Triplet> kept;
  kept.reserve(arcs.size());
  for (const Triplet& a : arcs) {
    if (a.row < 0 || a.row >= n || a.col < 0 || a.col >= n) {
      throw SolverError(ErrorCode::IndexOutOfRange,
                        "arc (" + std::to_string(a.row) + ", " + std::to_string(a.col) +
                            ") outside a " + std::to_string(n) + "-vertex graph");
    }
    if (!(a.value >= 0.0) || !std::isfinite(a.value)) {
      throw SolverError(ErrorCode::NegativeInput,
                        "arc (" + std::to_string(a.row) + ", " + std::to_string(a.col) +
                            ") must carry a finite nonnegative weight");
    }
    if (a.value != 0.0) kept.push_back(a);
  }
  Graph g;
  g.adj_ = SparseMatrix::from_triplets(n, std::move(kept));
  g.dplus_.assign(n, 0.0);
  g.dminus_.assign(n, 0.0);
  g.unweighted_ = true;
  for (const Triplet& a : g.adj_.to_triplets()) {
    g.dplus_[a.row] += a.value;
    g.dminus_[a.col] += a.value;
    if (a.value != 1.0) g.unweighted_ = false;
  }
  return g;
}

bool Graph::eulerian(double tol) const {
  for (int v = 0; v < n(); ++v) {
    if (std::abs(dplus_[v] - dminus_[v]) > tol) return false;
  }
  return true;
}

bool Graph::undirected() const {
  const std::vector<Triplet> fwd = adj_.to_triplets();
  const std::vector<Triplet> rev = adj_.transposed().to_triplets();
  if (fwd.size() != rev.size()) return false;
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    if (fwd[i].row != rev[i].row || fwd[i].col != rev[i].col ||
        fwd[i].value != rev[i].value) {
      return false;
    }
  }
  return true;
}

double Graph::min_out_degree() const {
  return dplus_.empty() ? 0.0 : *std::min_element(dplus_.begin(), dplus_.end());
}

double Graph::max_out_degree() const {
  return dplus_.empty() ? 0.0 : *std::max_element(dplus_.begin(), dplus_.end());
}

double Graph::min_in_degree() const {
  return dminus_.empty() ? 0.0 : *std::min_element(dminus_.begin(), dminus_.end());
}

double Graph::max_in_degree() const {
  return dminus_.empty() ? 0.0 : *std::max_element(dminus_.begin(), dminus_.end());
}

double Graph::weight_sum() const {
  double total = 0.0;
  for (double d : dplus_) total += d;
  return total;
}

double Graph::frobenius() const {
  double sq = 0.0;
  for (const Triplet& a : adj_.to_triplets()) sq += a.value * a.value;
  return std::sqrt(sq);
}

double Graph::col_inf_norm(int v) const {
  auto col = adj_.col(v);
  double best = 0.0;
  for (int k = 0; k < col.size(); ++k) best = std::max(best, std::abs(col.val_begin[k]));
  return best;
}

double Graph::col_two_norm(int v) const {
  auto col = adj_.col(v);
  double sq = 0.0;
  for (int k = 0; k < col.size(); ++k) sq += col.val_begin[k] * col.val_begin[k];
  return std::sqrt(sq);
}

Graph Graph::transposed() const {
  Graph t;
  t.adj_ = adj_.transposed();
  t.dplus_ = dminus_;
  t.dminus_ = dplus_;
  t.unweighted_ = unweighted_;
  return t;
}

namespace {

int parse_index(const std::string& tok, const std::string& where) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw SolverError(ErrorCode::ParseError, where + ": expected an integer, got '" + tok + "'");
  }
  return value;
}

double parse_weight(const std::string& tok, const std::string& where) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw SolverError(ErrorCode::ParseError, where + ": expected a weight, got '" + tok + "'");
  }
  return value;
}

}  // namespace

Graph load_edge_list(std::istream& in, const std::string& name) {
  std::vector<Triplet> arcs;
  bool mirror = false;
  int pinned_n = -1;
  int max_index = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    std::istringstream tokens(line);
    std::vector<std::string> toks;
    std::string tok;
    while (tokens >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks[0][0] == '#') {
      std::string directive = toks[0].substr(1);
      std::size_t next = 1;
      if (directive.empty() && toks.size() > 1) directive = toks[next++];
      if (directive == "undirected") {
        mirror = true;
      } else if (directive == "n") {
        if (next >= toks.size()) {
          throw SolverError(ErrorCode::ParseError, where + ": expected a count after '# n'");
        }
        pinned_n = parse_index(toks[next], where);
        if (pinned_n <= 0) {
          throw SolverError(ErrorCode::ParseError, where + ": vertex count must be positive");
        }
      }
      continue;
    }
    if (toks.size() < 2 || toks.size() > 3) {
      throw SolverError(ErrorCode::ParseError, where + ": expected 'u v [w]'");
    }
    const int u = parse_index(toks[0], where);
    const int v = parse_index(toks[1], where);
    if (u < 0 || v < 0) {
      throw SolverError(ErrorCode::ParseError, where + ": vertex indices must be nonnegative");
    }
    double w = toks.size() == 3 ? parse_weight(toks[2], where) : 1.0;
    if (!std::isfinite(w)) {
      throw SolverError(ErrorCode::ParseError, where + ": weight must be finite");
    }
    if (w < 0.0) {
      throw SolverError(ErrorCode::NegativeInput, where + ": negative arc weight");
    }
    arcs.push_back({u, v, w});
    max_index = std::max({max_index, u, v});
  }
  const int n = pinned_n > 0 ? pinned_n : max_index + 1;
  if (n <= 0) {
    throw SolverError(ErrorCode::ParseError, name + ": no vertices");
  }
  if (max_index >= n) {
    throw SolverError(ErrorCode::ParseError, name + ": vertex " + std::to_string(max_index) +
                                                 " exceeds the pinned count " + std::to_string(n));
  }
  if (mirror) {
    const std::size_t listed = arcs.size();
    for (std::size_t i = 0; i < listed; ++i) {
      if (arcs[i].row != arcs[i].col) arcs.push_back({arcs[i].col, arcs[i].row, arcs[i].value});
    }
  }
  return Graph::from_arcs(n, std::move(arcs));
}

Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SolverError(ErrorCode::ParseError, "cannot open '" + path + "'");
  }
  return load_edge_list(in, path);
}

PprSystem build_ppr_system(const Graph& g, const std::vector<double>& source, double alpha,
                           PprForm form) {
  check_alpha(alpha);
  const int n = g.n();
  if (static_cast<int>(source.size()) != n) {
    throw SolverError(ErrorCode::DimensionMismatch,
                      "source has " + std::to_string(source.size()) + " entries for " +
                          std::to_string(n) + " vertices");
  }
  for (double s : source) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw SolverError(ErrorCode::NegativeInput, "restart distribution must be nonnegative");
    }
  }
  require_positive_out_degrees(g);
  std::vector<Triplet> off;
  off.reserve(static_cast<std::size_t>(g.arc_count()));
  for (int v = 0; v < n; ++v) {
    auto row = g.out(v);
    const double dv = g.out_degree(v);
    for (int k = 0; k < row.size(); ++k) {
      const int u = row.idx_begin[k];
      const double w = row.val_begin[k];
      const double val =
          form == PprForm::identity ? (1.0 - alpha) * w / dv : (1.0 - alpha) * w;
      if (val != 0.0) off.push_back({u, v, val});
    }
  }
  PprSystem sys;
  sys.alpha = alpha;
  std::vector<double> diag =
      form == PprForm::identity ? std::vector<double>(n, 1.0) : g.out_degrees();
  sys.x_to_pi = form == PprForm::identity ? std::vector<double>(n, 1.0) : g.out_degrees();
  sys.dec = decomposition_from_parts(std::move(diag), SparseMatrix::from_triplets(n, std::move(off)),
                                     true);
  sys.b.resize(n);
  for (int v = 0; v < n; ++v) sys.b[v] = alpha * source[v];
  return sys;
}

PprSystem build_ppr_system(const Graph& g, int source, double alpha, PprForm form) {
  check_vertex(g, source, "source");
  return build_ppr_system(g, unit_vector(g.n(), source), alpha, form);
}

PprSystem build_contribution_system(const Graph& g, int target, double alpha, PprForm form) {
  check_alpha(alpha);
  check_vertex(g, target, "target");
  if (form == PprForm::degree) require_positive_out_degrees(g);
  const int n = g.n();
  std::vector<Triplet> off;
  off.reserve(static_cast<std::size_t>(g.arc_count()));
  for (int u = 0; u < n; ++u) {
    auto row = g.out(u);
    const double du = g.out_degree(u);
    for (int k = 0; k < row.size(); ++k) {
      const int v = row.idx_begin[k];
      const double w = row.val_begin[k];
      const double val =
          form == PprForm::identity ? (1.0 - alpha) * w / du : (1.0 - alpha) * w;
      if (val != 0.0) off.push_back({u, v, val});
    }
  }
  PprSystem sys;
  sys.alpha = alpha;
  std::vector<double> diag =
      form == PprForm::identity ? std::vector<double>(n, 1.0) : g.out_degrees();
  sys.x_to_pi.assign(n, 1.0);
  sys.dec = decomposition_from_parts(std::move(diag), SparseMatrix::from_triplets(n, std::move(off)),
                                     true);
  sys.b.assign(n, 0.0);
  sys.b[target] = form == PprForm::identity ? alpha : alpha * g.out_degree(target);
  return sys;
}

PprSystem build_bounded_indegree_system(const Graph& g, double alpha) {
  check_alpha(alpha);
  if (alpha >= 1.0) {
    throw SolverError(ErrorCode::InvalidGamma,
                      "alpha must lie in (0, 1) for the rescaled restart system");
  }
  const int n = g.n();
  std::vector<double> x(n);
  for (int v = 0; v < n; ++v) x[v] = (1.0 - alpha) * std::max(g.in_degree(v), 1.0);
  std::vector<Triplet> off;
  off.reserve(static_cast<std::size_t>(g.arc_count()));
  for (int v = 0; v < n; ++v) {
    auto row = g.out(v);
    const double dv = g.out_degree(v);
    for (int k = 0; k < row.size(); ++k) {
      const int u = row.idx_begin[k];
      const double w = row.val_begin[k];
      const double val = (1.0 - alpha) * w * x[v] / dv;
      if (val != 0.0) off.push_back({u, v, val});
    }
  }
  PprSystem sys;
  sys.alpha = alpha;
  sys.x_to_pi = x;
  sys.dec = decomposition_from_parts(std::move(x), SparseMatrix::from_triplets(n, std::move(off)),
                                     true);
  sys.b.assign(n, alpha / n);
  return sys;
}

namespace {

void check_push_args(const Graph& g, int start, const char* what, int L, double r_max) {
  check_vertex(g, start, what);
  if (L < 1) {
    throw SolverError(ErrorCode::IndexOutOfRange, "L must be at least 1, got " + std::to_string(L));
  }
  if (!(r_max >= 0.0) || !std::isfinite(r_max)) {
    throw SolverError(ErrorCode::InvalidEpsilon, "r_max must be finite and nonnegative");
  }
  require_positive_out_degrees(g);
}

}  // namespace

PushState forward_push(const Graph& g, int s, double alpha, int L, double r_max) {
  check_alpha(alpha);
  check_push_args(g, s, "source", L, r_max);
  PushState st;
  st.n = g.n();
  st.L = L;
  st.r_max = r_max;
  st.reserves.assign(L, {});
  st.residues.assign(L, {});
  st.pushes_per_coord.assign(g.n(), 0);
  st.residues[0][s] = alpha;
  for (int level = 0; level + 1 < L; ++level) {
    SparseVec& cur = st.residues[level];
    std::vector<int> todo;
    for (const auto& [v, r] : cur) {
      if (r / g.out_degree(v) > r_max) todo.push_back(v);
    }
    for (int v : todo) {
      const double r = cur.at(v);
      cur.erase(v);
      map_add(st.reserves[level], v, r);
      map_add(st.residues[level + 1], v, 0.5 * r);
      auto row = g.out(v);
      const double dv = g.out_degree(v);
      for (int k = 0; k < row.size(); ++k) {
        map_add(st.residues[level + 1], row.idx_begin[k],
                0.5 * (1.0 - alpha) * (row.val_begin[k] / dv) * r);
      }
      ++st.pushes;
      ++st.pushes_per_coord[v];
      st.work_units += 1 + row.size();
    }
  }
  return st;
}

PushState backward_push(const Graph& g, int t, double alpha, int L, double r_max) {
  check_alpha(alpha);
  check_push_args(g, t, "target", L, r_max);
  PushState st;
  st.n = g.n();
  st.L = L;
  st.r_max = r_max;
  st.reserves.assign(L, {});
  st.residues.assign(L, {});
  st.pushes_per_coord.assign(g.n(), 0);
  st.residues[0][t] = alpha;
  for (int level = 0; level + 1 < L; ++level) {
    SparseVec& cur = st.residues[level];
    std::vector<int> todo;
    for (const auto& [v, r] : cur) {
      if (r > r_max) todo.push_back(v);
    }
    for (int v : todo) {
      const double r = cur.at(v);
      cur.erase(v);
      map_add(st.reserves[level], v, r);
      map_add(st.residues[level + 1], v, 0.5 * r);
      auto col = g.in(v);
      for (int k = 0; k < col.size(); ++k) {
        const int u = col.idx_begin[k];
        map_add(st.residues[level + 1], u,
                0.5 * (1.0 - alpha) * (col.val_begin[k] / g.out_degree(u)) * r);
      }
      ++st.pushes;
      ++st.pushes_per_coord[v];
      st.work_units += 1 + col.size();
    }
  }
  return st;
}

std::pair<double, PagerankReport> pagerank_estimate(const Graph& g, int target, double alpha,
                                                    PagerankMode mode,
                                                    const SolverParams& params) {
  check_alpha(alpha);
  check_vertex(g, target, "target");
  const int n = g.n();
  PagerankReport rep;
  rep.mode = mode;
  rep.alpha = alpha;
  rep.target = target;

  if (mode == PagerankMode::eulerian_relative) {
    for (int v = 0; v < n; ++v) {
      const double shortfall = (1.0 - alpha) * g.in_degree(v) - g.out_degree(v);
      if (shortfall > 1e-12 * std::max(1.0, g.in_degree(v))) {
        throw SolverError(ErrorCode::HypothesisViolated,
                          "vertex " + std::to_string(v) + " has dout < (1 - alpha) din");
      }
    }
    PprSystem sys = build_ppr_system(g, std::vector<double>(n, 1.0 / n), alpha, PprForm::degree);
    SolverParams p = params;
    if (!(p.gamma > 0.0)) p.gamma = alpha / 2.0;
    if (!p.eta && !p.L) {
      p.eta = best_pagerank_lower_bound(g, target, alpha) / g.out_degree(target);
    }
    auto [est, inner] = estimate_relative(sys.dec, sys.b, unit_vector(n, target), p);
    rep.eta = p.eta.value_or(0.0);
    rep.scale = sys.x_to_pi[target];
    rep.inner = inner;
    return {est * rep.scale, rep};
  }

  if (mode == PagerankMode::bounded_indegree) {
    if (!g.unweighted()) {
      throw SolverError(ErrorCode::HypothesisViolated,
                        "the bounded in-degree mode needs an unweighted graph");
    }
    const double din_cap = (1.0 - alpha) * std::max(g.max_in_degree(), 1.0);
    if (din_cap > 1.0 + 1e-12) {
      throw SolverError(ErrorCode::HypothesisViolated,
                        "(1 - alpha) * max(Din, 1) = " + std::to_string(din_cap) + " exceeds 1");
    }
    if (g.in_degree(target) == 0.0 || alpha == 1.0) {
      // No in-arcs (or no walk at all) leaves only the restart mass at the
      // target, so pi(target) = alpha / n exactly.
      rep.closed_form = true;
      rep.inner.method = "closed_form";
      return {alpha / n, rep};
    }
    PprSystem sys = build_bounded_indegree_system(g, alpha);
    SolverParams p = params;
    if (!(p.gamma > 0.0)) p.gamma = alpha / 2.0;
    if (!p.eta && !p.L) p.eta = (alpha / n) / sys.x_to_pi[target];
    auto [est, inner] = estimate_relative(sys.dec, sys.b, unit_vector(n, target), p);
    rep.eta = p.eta.value_or(0.0);
    rep.scale = sys.x_to_pi[target];
    rep.inner = inner;
    return {est * rep.scale, rep};
  }

  PprSystem sys = build_contribution_system(g, target, alpha, PprForm::identity);
  SolverParams p = params;
  if (!(p.gamma > 0.0)) p.gamma = alpha / 2.0;
  auto [est, inner] = estimate_abs(sys.dec, sys.b, std::vector<double>(n, 1.0 / n), p);
  rep.inner = inner;
  return {est, rep};
}

std::vector<std::pair<std::string, double>> pagerank_lower_bounds(const Graph& g, int target,
                                                                  double alpha) {
  check_alpha(alpha);
  check_vertex(g, target, "target");
  const double n = g.n();
  std::vector<std::pair<std::string, double>> bounds;
  bounds.emplace_back("uniform", alpha / n);
  const double din = g.in_degree(target);
  if (din > 0.0) {
    bounds.emplace_back("ratio_maxdeg",
                        alpha * (1.0 - alpha) * din / (n * g.max_out_degree()));
    bounds.emplace_back("ratio_weight", alpha * (1.0 - alpha) * din * din /
                                            (n * g.col_inf_norm(target) * g.weight_sum()));
    bounds.emplace_back("ratio_frob", alpha * (1.0 - alpha) * din * din /
                                          (n * std::sqrt(n) * g.col_two_norm(target) *
                                           g.frobenius()));
  } else {
    bounds.emplace_back("ratio_maxdeg", 0.0);
    bounds.emplace_back("ratio_weight", 0.0);
    bounds.emplace_back("ratio_frob", 0.0);
  }
  if (g.eulerian()) {
    const double d = g.out_degree(target);
    const double d_max = g.max_out_degree();
    bounds.emplace_back("eulerian_degree", d_max > 0.0 ? d / (n * d_max) : 0.0);
    if (g.unweighted()) {
      const double m = static_cast<double>(g.arc_count());
      bounds.emplace_back("eulerian_unweighted",
                          m > 0.0 ? std::sqrt(1.0 - alpha) * d / (n * std::sqrt(m)) : 0.0);
    }
  }
  return bounds;
}

double best_pagerank_lower_bound(const Graph& g, int target, double alpha) {
  double best = 0.0;
  for (const auto& [name, value] : pagerank_lower_bounds(g, target, alpha)) {
    best = std::max(best, value);
  }
  return best;
}

double pagerank_upper_bound_eulerian(const Graph& g, int target) {
  check_vertex(g, target, "target");
  if (!g.eulerian()) {
    throw SolverError(ErrorCode::NotEulerian, "the degree upper bound needs an eulerian graph");
  }
  const double d_min = g.min_out_degree();
  if (!(d_min > 0.0)) {
    throw SolverError(ErrorCode::ZeroOutDegree, "the degree upper bound needs positive degrees");
  }
  return g.out_degree(target) / (g.n() * d_min);
}

namespace {

Eigen::VectorXd dense_restart_solve(const Graph& g, double alpha, const Eigen::VectorXd& rhs,
                                    int dense_cap) {
  check_alpha(alpha);
  if (g.n() > dense_cap) {
    throw SolverError(ErrorCode::TooLargeForDense,
                      "n = " + std::to_string(g.n()) + " exceeds the dense cap " +
                          std::to_string(dense_cap));
  }
  require_positive_out_degrees(g);
  return restart_matrix(g, alpha).partialPivLu().solve(rhs);
}

}  // namespace

std::vector<double> pagerank_dense(const Graph& g, double alpha, int dense_cap) {
  const int n = g.n();
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, alpha / n);
  Eigen::VectorXd x = dense_restart_solve(g, alpha, rhs, dense_cap);
  return std::vector<double>(x.data(), x.data() + n);
}

std::vector<double> ppr_dense(const Graph& g, int source, double alpha, int dense_cap) {
  check_vertex(g, source, "source");
  const int n = g.n();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(source) = alpha;
  Eigen::VectorXd x = dense_restart_solve(g, alpha, rhs, dense_cap);
  return std::vector<double>(x.data(), x.data() + n);
}

double ppr_symmetry_defect(const Graph& g, double alpha, int dense_cap) {
  check_alpha(alpha);
  if (!g.eulerian()) {
    throw SolverError(ErrorCode::NotEulerian, "reciprocity needs an eulerian graph");
  }
  if (g.n() > dense_cap) {
    throw SolverError(ErrorCode::TooLargeForDense,
                      "n = " + std::to_string(g.n()) + " exceeds the dense cap " +
                          std::to_string(dense_cap));
  }
  require_positive_out_degrees(g);
  const int n = g.n();
  const Eigen::MatrixXd fwd = alpha * restart_matrix(g, alpha).inverse();
  const Eigen::MatrixXd rev = alpha * restart_matrix(g.transposed(), alpha).inverse();
  double defect = 0.0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      defect = std::max(defect, std::abs(fwd(v, u) / g.out_degree(v) -
                                         rev(u, v) / g.out_degree(u)));
    }
  }
  return defect;
}

SparseMatrix laplacian(const Graph& g) {
  if (!g.undirected()) {
    throw SolverError(ErrorCode::NotUndirected, "the laplacian needs an undirected graph");
  }
  const int n = g.n();
  std::vector<double> degree(n, 0.0);
  std::vector<Triplet> trips;
  for (const Triplet& a : g.arcs().to_triplets()) {
    if (a.row == a.col) continue;
    trips.push_back({a.row, a.col, -a.value});
    degree[a.row] += a.value;
  }
  for (int v = 0; v < n; ++v) {
    if (degree[v] != 0.0) trips.push_back({v, v, degree[v]});
  }
  return SparseMatrix::from_triplets(n, std::move(trips));
}

const char* resistance_method_name(ResistanceMethod m) {
  switch (m) {
    case ResistanceMethod::dense: return "dense";
    case ResistanceMethod::walk: return "walk";
    case ResistanceMethod::push: return "push";
    case ResistanceMethod::bidi_hoeffding: return "bidi_hoeffding";
    case ResistanceMethod::bidi_variance: return "bidi_variance";
    case ResistanceMethod::automatic: return "auto";
  }
  return "unknown";
}

std::pair<double, ResistanceReport> effective_resistance(const Graph& g, int s, int t,
                                                         const ResistanceParams& params) {
  check_vertex(g, s, "s");
  check_vertex(g, t, "t");
  if (s == t) {
    throw SolverError(ErrorCode::SameEndpoints, "endpoints must differ, got " + std::to_string(s));
  }
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw SolverError(ErrorCode::InvalidEpsilon,
                      "epsilon must be positive, got " + std::to_string(params.epsilon));
  }
  const int n = g.n();
  {
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {s};
    seen[s] = 1;
    int reached = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      auto row = g.out(v);
      for (int k = 0; k < row.size(); ++k) {
        const int u = row.idx_begin[k];
        if (!seen[u]) {
          seen[u] = 1;
          ++reached;
          stack.push_back(u);
        }
      }
    }
    if (reached < n) {
      throw SolverError(ErrorCode::Disconnected, "reached " + std::to_string(reached) + " of " +
                                                     std::to_string(n) + " vertices from s");
    }
  }
  const SparseMatrix lap = laplacian(g);
  const Decomposition dec = decompose(lap);
  const double ds = dec.diag[s];
  const double dt = dec.diag[t];
  const double min_d = std::min(ds, dt);
  // A unit of current entering at s and leaving at t sees at least half the
  // inverse of the smaller endpoint degree, so a relative target eps scales
  // to the absolute one below.
  const double eps_abs = params.relative ? params.epsilon / (2.0 * min_d) : params.epsilon;

  ResistanceReport rep;
  rep.seed = params.seed;
  rep.epsilon_abs = eps_abs;

  double gamma = 0.0;
  if (params.gamma) {
    gamma = *params.gamma;
    if (!(gamma > 0.0) || gamma > 1.0) {
      throw SolverError(ErrorCode::InvalidGamma,
                        "gamma must lie in (0, 1], got " + std::to_string(gamma));
    }
    if (n <= kDenseCap) {
      const double oracle_gap = spectral_gap_sdd(lap);
      if (gamma > oracle_gap + 1e-12) {
        rep.warning = "supplied gamma " + std::to_string(gamma) +
                      " exceeds the oracle spectral gap " + std::to_string(oracle_gap);
      }
    }
  } else {
    if (n > kDenseCap) {
      throw SolverError(ErrorCode::InvalidGamma,
                        "supply gamma: n = " + std::to_string(n) +
                            " exceeds the dense oracle cap");
    }
    gamma = spectral_gap_sdd(lap);
  }
  rep.gamma = gamma;

  int L = 1;
  if (params.L) {
    L = *params.L;
    if (L < 1) {
      throw SolverError(ErrorCode::IndexOutOfRange, "L must be at least 1, got " + std::to_string(L));
    }
  } else {
    // Truncating at L leaves a tail of at most
    // (1 / (2 gamma)) exp(-gamma L) (1 / d(s) + 1 / d(t)), kept below eps / 2.
    const double arg = (1.0 / (gamma * eps_abs)) * (1.0 / ds + 1.0 / dt);
    double raw = 1.0;
    if (arg > 1.0) raw = std::ceil(std::log(arg) / gamma);
    if (raw > 2e7) {
      throw SolverError(ErrorCode::BudgetExhausted,
                        "truncation depth " + std::to_string(raw) + " is impractical");
    }
    L = std::max(1, static_cast<int>(raw));
  }
  rep.L = L;

  const double dl = static_cast<double>(L);
  rep.predicted_walk = std::pow(dl, 3.0) / (eps_abs * eps_abs * min_d * min_d);
  rep.predicted_push = std::pow(dl, 3.0) / eps_abs;
  rep.predicted_bidi_hoeffding = std::pow(dl, 7.0 / 3.0) / std::pow(eps_abs, 2.0 / 3.0);
  rep.predicted_bidi_variance = std::pow(dl, 2.5) / (eps_abs * std::sqrt(min_d));

  ResistanceMethod method = params.method;
  if (method == ResistanceMethod::automatic) {
    method = ResistanceMethod::walk;
    double best = rep.predicted_walk;
    if (rep.predicted_push < best) {
      method = ResistanceMethod::push;
      best = rep.predicted_push;
    }
    if (rep.predicted_bidi_hoeffding < best) {
      method = ResistanceMethod::bidi_hoeffding;
      best = rep.predicted_bidi_hoeffding;
    }
    if (rep.predicted_bidi_variance < best) {
      method = ResistanceMethod::bidi_variance;
      best = rep.predicted_bidi_variance;
    }
  }
  rep.method = method;

  std::vector<double> b(n, 0.0);
  b[s] = 1.0;
  b[t] = -1.0;

  double estimate = 0.0;
  switch (method) {
    case ResistanceMethod::dense: {
      if (n > kDenseCap) {
        throw SolverError(ErrorCode::TooLargeForDense,
                          "n = " + std::to_string(n) + " exceeds the dense cap");
      }
      const std::vector<double> x = sdd_solution(dec, b);
      estimate = x[s] - x[t];
      break;
    }
    case ResistanceMethod::walk: {
      SolverParams wp;
      wp.gamma = gamma;
      wp.epsilon = eps_abs * min_d;
      wp.L = L;
      wp.seed = params.seed;
      auto [est, inner] = estimate_abs(dec, b, b, wp);
      estimate = est;
      rep.walk_steps = inner.walk_steps;
      rep.n_s = inner.n_s;
      break;
    }
    case ResistanceMethod::push: {
      const double r_max = eps_abs / (2.0 * dl * dl);
      const PushState st = push_run(dec, b, L, r_max);
      estimate = push_estimate(st, b);
      rep.push_work = st.work_units;
      break;
    }
    case ResistanceMethod::bidi_hoeffding:
    case ResistanceMethod::bidi_variance: {
      SolverParams bp;
      bp.gamma = gamma;
      bp.epsilon = eps_abs;
      bp.L = L;
      bp.seed = params.seed;
      const BidiRegime regime = method == ResistanceMethod::bidi_hoeffding
                                    ? BidiRegime::hoeffding
                                    : BidiRegime::variance;
      auto [est, inner] = bidirectional_estimate(dec, b, b, bp, regime);
      estimate = est;
      rep.walk_steps = inner.walk_steps;
      rep.push_work = inner.work_units;
      rep.n_s = inner.n_s;
      break;
    }
    case ResistanceMethod::automatic:
      break;
  }
  return {estimate, rep};
}

}  // namespace sublin
