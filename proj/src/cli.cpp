#include "sublin/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sublin/bidirectional.hpp"
#include "sublin/decomposition.hpp"
#include "sublin/dense_oracle.hpp"
#include "sublin/errors.hpp"
#include "sublin/graph.hpp"
#include "sublin/push.hpp"
#include "sublin/sparse_system.hpp"
#include "sublin/walker.hpp"

namespace sublin {

namespace {

using ordered_json = nlohmann::ordered_json;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

struct TrialStats {
  int count = 0;
  int successes = 0;
  double oracle = 0.0;
  double tolerance = 0.0;
};

// One row of the canonical report schema, shared by solve, pagerank, and
// effres so the JSON field ordering never depends on the subcommand.
struct RunReport {
  std::string subcommand;
  std::string method;
  double estimate = 0.0;
  double error_target = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  std::optional<double> alpha;
  int L = 0;
  double r_max = 0.0;
  std::optional<double> eta;
  std::string target_kind;
  std::optional<bool> relative;
  int threads = 1;
  std::string warning;
  std::int64_t walk_steps = 0;
  std::int64_t push_work = 0;
  std::int64_t n_s = 0;
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;
  std::optional<TrialStats> trials;
};

ordered_json report_to_json(const RunReport& r) {
  ordered_json params;
  params["subcommand"] = r.subcommand;
  params["method"] = r.method;
  params["gamma"] = r.gamma;
  params["epsilon"] = r.epsilon;
  if (r.alpha) params["alpha"] = *r.alpha;
  params["L"] = r.L;
  params["r_max"] = r.r_max;
  if (r.eta) params["eta"] = *r.eta;
  if (!r.target_kind.empty()) params["target_kind"] = r.target_kind;
  if (r.relative) params["relative"] = *r.relative;
  params["threads"] = r.threads;
  if (!r.warning.empty()) params["warning"] = r.warning;

  ordered_json cost;
  cost["walk_steps"] = r.walk_steps;
  cost["push_work"] = r.push_work;
  cost["n_s"] = r.n_s;

  ordered_json doc;
  doc["estimate"] = r.estimate;
  doc["error_target"] = r.error_target;
  doc["params"] = params;
  doc["cost"] = cost;
  doc["seed"] = r.seed;
  doc["elapsed_ms"] = r.elapsed_ms;
  if (r.trials) {
    ordered_json t;
    t["count"] = r.trials->count;
    t["successes"] = r.trials->successes;
    t["success_rate"] =
        r.trials->count > 0 ? static_cast<double>(r.trials->successes) / r.trials->count : 0.0;
    t["oracle"] = r.trials->oracle;
    t["tolerance"] = r.trials->tolerance;
    doc["trials"] = t;
  }
  return doc;
}

// Fixed CSV layout shared by the estimating subcommands.
constexpr const char* kCsvHeader =
    "subcommand,method,estimate,error_target,gamma,epsilon,alpha,L,r_max,n_s,walk_steps,"
    "push_work,seed,elapsed_ms";

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_report(const RunReport& r, const std::string& format, std::ostream& out) {
  if (format == "json") {
    out << report_to_json(r).dump(2) << "\n";
    return;
  }
  if (format == "csv") {
    out << kCsvHeader << "\n";
    out << r.subcommand << ',' << r.method << ',' << csv_num(r.estimate) << ','
        << csv_num(r.error_target) << ',' << csv_num(r.gamma) << ',' << csv_num(r.epsilon) << ','
        << (r.alpha ? csv_num(*r.alpha) : "") << ',' << r.L << ',' << csv_num(r.r_max) << ','
        << r.n_s << ',' << r.walk_steps << ',' << r.push_work << ',' << r.seed << ','
        << csv_num(r.elapsed_ms) << "\n";
    return;
  }
  out << "subcommand = " << r.subcommand << "\n";
  out << "method = " << r.method << "\n";
  out << "estimate = " << csv_num(r.estimate) << "\n";
  out << "error_target = " << csv_num(r.error_target) << "\n";
  out << "gamma = " << csv_num(r.gamma) << "\n";
  out << "epsilon = " << csv_num(r.epsilon) << "\n";
  if (r.alpha) out << "alpha = " << csv_num(*r.alpha) << "\n";
  out << "L = " << r.L << "\n";
  out << "r_max = " << csv_num(r.r_max) << "\n";
  if (!r.warning.empty()) out << "warning = " << r.warning << "\n";
  out << "n_s = " << r.n_s << "\n";
  out << "walk_steps = " << r.walk_steps << "\n";
  out << "push_work = " << r.push_work << "\n";
  out << "seed = " << r.seed << "\n";
  out << "elapsed_ms = " << csv_num(r.elapsed_ms) << "\n";
  if (r.trials) {
    out << "trials = " << r.trials->successes << "/" << r.trials->count
        << " within " << csv_num(r.trials->tolerance) << " of " << csv_num(r.trials->oracle)
        << "\n";
  }
}

struct CommonOpts {
  std::string output = "json";
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  int trials = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--output", c.output, "report format")
      ->check(CLI::IsMember({"json", "csv", "plain"}));
  cmd->add_option("--seed", c.seed, "random seed (env SUBLIN_SEED overrides)");
  cmd->add_option("--threads", c.threads, "worker cap (estimators run single-threaded)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trials", c.trials, "repeat runs and report the success rate vs the oracle")
      ->check(CLI::NonNegativeNumber);
}

void apply_seed_env(CommonOpts& c) {
  const char* env = std::getenv("SUBLIN_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    throw SolverError(ErrorCode::ParseError, std::string("SUBLIN_SEED is not a number: ") + env);
  }
  c.seed = static_cast<std::uint64_t>(v);
}

// ---------------------------------------------------------------------------
// solve

struct SolveOpts {
  std::string matrix, b_path, t_path;
  std::string method = "walk";
  double gamma = 0.0;
  double epsilon = 0.1;
  std::optional<int> L;
  std::optional<double> r_max;
  std::optional<double> eta;
  int median_k = 1;
  std::int64_t sample_cap = 1'000'000'000;
  CommonOpts common;
};

SolverParams solve_params(const SolveOpts& o, std::uint64_t seed) {
  SolverParams p;
  p.gamma = o.gamma;
  p.epsilon = o.epsilon;
  p.L = o.L;
  if (o.r_max) p.r_max = *o.r_max;
  p.eta = o.eta;
  p.median_k = o.median_k;
  p.sample_cap = o.sample_cap;
  p.seed = seed;
  return p;
}

struct SolveOutcome {
  double estimate = 0.0;
  double error_target = 0.0;
  int L = 0;
  double r_max = 0.0;
  double gamma = 0.0;
  std::string target_kind;
  std::string warning;
  std::int64_t walk_steps = 0;
  std::int64_t push_work = 0;
  std::int64_t n_s = 0;
};

SolveOutcome run_solve_once(const Decomposition& dec, const std::vector<double>& b,
                            const std::vector<double>& t, const SolveOpts& o,
                            std::uint64_t seed) {
  SolverParams p = solve_params(o, seed);
  SolveOutcome res;
  if (o.method == "walk") {
    auto [est, rep] = estimate_abs(dec, b, t, p);
    res = {est,
           p.epsilon * vec_stats(dec, b).dinv_inf,
           rep.L,
           0.0,
           rep.gamma,
           rep.target_kind,
           "",
           rep.walk_steps,
           0,
           rep.n_s};
  } else if (o.method == "walk_inf") {
    auto [est, rep] = estimate_inf_relative(dec, b, t, p);
    res = {est, p.epsilon, rep.L, 0.0, rep.gamma, rep.target_kind, "", rep.walk_steps, 0, rep.n_s};
  } else if (o.method == "walk_rel") {
    auto [est, rep] = estimate_relative(dec, b, t, p);
    res = {est, p.epsilon, rep.L, 0.0, rep.gamma, rep.target_kind, "", rep.walk_steps, 0, rep.n_s};
  } else if (o.method == "push") {
    auto [est, rep] = deterministic_solve_rcdd(dec, b, t, p);
    res = {est,          rep.error_bound, rep.L, rep.r_max, p.gamma,
           "abs_tnorm1", rep.warning,     0,     rep.work_units, 0};
  } else {
    const BidiRegime regime =
        o.method == "bidi_hoeffding" ? BidiRegime::hoeffding : BidiRegime::variance;
    auto [est, rep] = bidirectional_estimate(dec, b, t, p, regime);
    res = {est,   p.epsilon,      rep.plan.L,     rep.plan.r_max, p.gamma, "abs", "",
           rep.walk_steps, rep.work_units, rep.n_s};
  }
  return res;
}

RunReport run_solve(const SolveOpts& orig) {
  const auto start = std::chrono::steady_clock::now();
  const SparseMatrix m = read_matrix_market_file(orig.matrix);
  const Decomposition dec = decompose(m);
  const std::vector<double> b = read_vector_file(orig.b_path, dec.n);
  const std::vector<double> t = read_vector_file(orig.t_path, dec.n);

  // Without a gap bound or a pinned truncation length no schedule exists, so
  // fall back to the dense gap oracle where it is feasible.
  SolveOpts o = orig;
  std::string gamma_note;
  if (o.gamma <= 0.0 && !o.L) {
    if (dec.n > kDenseCap) {
      throw SolverError(ErrorCode::InvalidGamma,
                        "supply --gamma or --L: the dense gap oracle needs n <= " +
                            std::to_string(kDenseCap));
    }
    o.gamma = gap_max(dec).value;
    gamma_note = "gamma computed by the dense oracle";
  }

  const SolveOutcome first = run_solve_once(dec, b, t, o, o.common.seed);
  RunReport r;
  r.subcommand = "solve";
  r.method = o.method;
  r.estimate = first.estimate;
  r.error_target = first.error_target;
  r.gamma = first.gamma;
  r.epsilon = o.epsilon;
  r.L = first.L;
  r.r_max = first.r_max;
  r.eta = o.eta;
  r.target_kind = first.target_kind;
  r.threads = o.common.threads;
  r.warning = first.warning;
  if (!gamma_note.empty()) {
    r.warning = r.warning.empty() ? gamma_note : r.warning + "; " + gamma_note;
  }
  r.walk_steps = first.walk_steps;
  r.push_work = first.push_work;
  r.n_s = first.n_s;
  r.seed = o.common.seed;

  if (o.common.trials > 0) {
    if (dec.n > kDenseCap) {
      throw SolverError(ErrorCode::TooLargeForDense,
                        "--trials needs the dense oracle (n <= " + std::to_string(kDenseCap) +
                            ")");
    }
    const std::vector<double> x = exact_solution(dec, b, 1e-12);
    const double oracle = dot(t, x);
    double tol = 0.0;
    if (o.method == "walk") {
      tol = o.epsilon * vec_stats(dec, b).dinv_inf;
    } else if (o.method == "walk_inf") {
      double xinf = 0.0;
      for (double v : x) xinf = std::max(xinf, std::abs(v));
      tol = o.epsilon * xinf;
    } else if (o.method == "walk_rel") {
      tol = o.epsilon * std::abs(oracle);
    } else if (o.method == "push") {
      tol = first.error_target;
    } else {
      tol = o.epsilon * vec_stats(dec, b).dinv_inf;
    }
    TrialStats stats;
    stats.count = o.common.trials;
    stats.oracle = oracle;
    stats.tolerance = tol;
    for (int i = 0; i < o.common.trials; ++i) {
      const SolveOutcome trial = run_solve_once(dec, b, t, o, o.common.seed + i);
      if (std::abs(trial.estimate - oracle) <= tol) ++stats.successes;
    }
    r.trials = stats;
  }
  r.elapsed_ms = elapsed_ms_since(start);
  return r;
}

// ---------------------------------------------------------------------------
// pagerank

struct PagerankOpts {
  std::string graph;
  int target = 0;
  double alpha = 0.2;
  std::string mode = "generic";
  double gamma = 0.0;
  double epsilon = 0.1;
  std::optional<int> L;
  std::optional<double> eta;
  CommonOpts common;
};

RunReport run_pagerank(const PagerankOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const Graph g = load_edge_list_file(o.graph);
  PagerankMode mode = PagerankMode::generic_ppr;
  if (o.mode == "eulerian") mode = PagerankMode::eulerian_relative;
  if (o.mode == "bounded") mode = PagerankMode::bounded_indegree;

  auto run_once = [&](std::uint64_t seed) {
    SolverParams p;
    p.gamma = o.gamma;
    p.epsilon = o.epsilon;
    p.L = o.L;
    p.eta = o.eta;
    p.seed = seed;
    return pagerank_estimate(g, o.target, o.alpha, mode, p);
  };

  auto [est, rep] = run_once(o.common.seed);
  RunReport r;
  r.subcommand = "pagerank";
  r.method = o.mode;
  r.estimate = est;
  r.error_target = mode == PagerankMode::generic_ppr ? o.epsilon * o.alpha : o.epsilon;
  r.gamma = rep.inner.gamma;
  r.epsilon = o.epsilon;
  r.alpha = o.alpha;
  r.L = rep.inner.L;
  if (rep.eta > 0.0) r.eta = rep.eta;
  r.target_kind = rep.closed_form ? "closed_form" : rep.inner.target_kind;
  r.threads = o.common.threads;
  r.walk_steps = rep.inner.walk_steps;
  r.n_s = rep.inner.n_s;
  r.seed = o.common.seed;

  if (o.common.trials > 0) {
    const std::vector<double> pi = pagerank_dense(g, o.alpha);
    const double oracle = pi[o.target];
    const double tol =
        mode == PagerankMode::generic_ppr ? o.epsilon * o.alpha : o.epsilon * oracle;
    TrialStats stats;
    stats.count = o.common.trials;
    stats.oracle = oracle;
    stats.tolerance = tol;
    for (int i = 0; i < o.common.trials; ++i) {
      auto [trial_est, trial_rep] = run_once(o.common.seed + i);
      (void)trial_rep;
      if (std::abs(trial_est - oracle) <= tol) ++stats.successes;
    }
    r.trials = stats;
  }
  r.elapsed_ms = elapsed_ms_since(start);
  return r;
}

// ---------------------------------------------------------------------------
// effres

struct EffresOpts {
  std::string graph;
  int s = 0;
  int t = 0;
  std::string method = "auto";
  double epsilon = 0.1;
  bool relative = false;
  std::optional<double> gamma;
  std::optional<int> L;
  CommonOpts common;
};

RunReport run_effres(const EffresOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const Graph g = load_edge_list_file(o.graph);
  auto run_once = [&](std::uint64_t seed) {
    ResistanceParams rp;
    rp.epsilon = o.epsilon;
    rp.relative = o.relative;
    rp.gamma = o.gamma;
    rp.L = o.L;
    rp.seed = seed;
    if (o.method == "dense") rp.method = ResistanceMethod::dense;
    if (o.method == "walk") rp.method = ResistanceMethod::walk;
    if (o.method == "push") rp.method = ResistanceMethod::push;
    if (o.method == "bidi_hoeffding") rp.method = ResistanceMethod::bidi_hoeffding;
    if (o.method == "bidi_variance") rp.method = ResistanceMethod::bidi_variance;
    return effective_resistance(g, o.s, o.t, rp);
  };

  auto [est, rep] = run_once(o.common.seed);
  RunReport r;
  r.subcommand = "effres";
  r.method = resistance_method_name(rep.method);
  r.estimate = est;
  r.error_target = rep.epsilon_abs;
  r.gamma = rep.gamma;
  r.epsilon = o.epsilon;
  r.L = rep.L;
  r.relative = o.relative;
  r.threads = o.common.threads;
  r.warning = rep.warning;
  r.walk_steps = rep.walk_steps;
  r.push_work = rep.push_work;
  r.n_s = rep.n_s;
  r.seed = o.common.seed;

  if (o.common.trials > 0) {
    ResistanceParams dense;
    dense.method = ResistanceMethod::dense;
    dense.epsilon = o.epsilon;
    const double oracle = effective_resistance(g, o.s, o.t, dense).first;
    TrialStats stats;
    stats.count = o.common.trials;
    stats.oracle = oracle;
    stats.tolerance = rep.epsilon_abs;
    for (int i = 0; i < o.common.trials; ++i) {
      auto [trial_est, trial_rep] = run_once(o.common.seed + i);
      (void)trial_rep;
      if (std::abs(trial_est - oracle) <= stats.tolerance) ++stats.successes;
    }
    r.trials = stats;
  }
  r.elapsed_ms = elapsed_ms_since(start);
  return r;
}

// ---------------------------------------------------------------------------
// gap

ordered_json gap_to_json(const GapReport& rep) {
  ordered_json j;
  j["value"] = rep.value;
  j["lower"] = rep.lower;
  j["upper"] = rep.upper;
  j["exact"] = rep.exact;
  return j;
}

int run_gap(const std::string& matrix, const std::string& output, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const SparseMatrix m = read_matrix_market_file(matrix);
  const Decomposition dec = decompose(m);
  const GapReport g1 = p_norm_gap(dec, 1.0);
  const GapReport g2 = p_norm_gap(dec, 2.0);
  const GapReport gi = p_norm_gap(dec, std::numeric_limits<double>::infinity());
  const GapReport gm = gap_max(dec);

  if (output == "csv") {
    out << "p,value,lower,upper,exact\n";
    auto row = [&](const std::string& name, const GapReport& rep) {
      out << name << ',' << csv_num(rep.value) << ',' << csv_num(rep.lower) << ','
          << csv_num(rep.upper) << ',' << (rep.exact ? 1 : 0) << "\n";
    };
    row("1", g1);
    row("2", g2);
    row("inf", gi);
    row("max", gm);
    return 0;
  }
  if (output == "plain") {
    auto row = [&](const std::string& name, const GapReport& rep) {
      out << "gamma_" << name << " = " << csv_num(rep.value) << " in [" << csv_num(rep.lower)
          << ", " << csv_num(rep.upper) << "]" << (rep.exact ? " exact" : "") << "\n";
    };
    row("1", g1);
    row("2", g2);
    row("inf", gi);
    row("max", gm);
    return 0;
  }
  ordered_json params;
  params["subcommand"] = "gap";
  params["matrix"] = matrix;
  params["n"] = dec.n;
  ordered_json cls;
  cls["rdd"] = dec.cls.rdd;
  cls["cdd"] = dec.cls.cdd;
  cls["z"] = dec.cls.z;
  cls["symmetric"] = dec.cls.symmetric;
  params["class"] = cls;
  ordered_json doc;
  doc["params"] = params;
  ordered_json gaps;
  gaps["p1"] = gap_to_json(g1);
  gaps["p2"] = gap_to_json(g2);
  gaps["pinf"] = gap_to_json(gi);
  gaps["max"] = gap_to_json(gm);
  doc["gaps"] = gaps;
  doc["elapsed_ms"] = elapsed_ms_since(start);
  out << doc.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// audit

struct AuditCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return csv_num(v); }

void run_audit_checks(const std::string& dir, std::vector<AuditCheck>& checks) {
  auto path = [&](const std::string& name) { return dir + "/" + name; };
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
  };

  // Restart-system fixture: gap in the 1-norm must sit at alpha / 2 = 0.1.
  const SparseMatrix ppr = read_matrix_market_file(path("ppr2cycle.mtx"));
  const Decomposition ppr_dec = decompose(ppr);
  {
    const GapReport g1 = p_norm_gap(ppr_dec, 1.0);
    const double err = std::abs(g1.value - 0.1);
    add("restart_gap_alpha_half", g1.exact && err <= 1e-12,
        "gamma_1 = " + fmt(g1.value) + ", |gamma_1 - 0.1| = " + fmt(err));
  }

  // Gap interval ordering on every fixture matrix.
  {
    bool ok = true;
    std::string detail;
    for (const char* name : {"ppr2cycle.mtx", "identity2.mtx", "single_edge.mtx"}) {
      const Decomposition dec = decompose(read_matrix_market_file(path(name)));
      for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
        const GapReport rep = p_norm_gap(dec, p);
        const bool sandwich = rep.lower <= rep.value + 1e-15 && rep.value <= rep.upper + 1e-15;
        if (!sandwich) {
          ok = false;
          detail = std::string(name) + " p = " + fmt(p) + ": " + fmt(rep.lower) + " / " + fmt(rep.value) +
                   " / " + fmt(rep.upper);
        }
      }
    }
    add("gap_interval_order", ok, ok ? "lower <= value <= upper on all fixtures" : detail);
  }

  // Identity solve: the sampled functional echoes t^T b.
  {
    const Decomposition dec = decompose(read_matrix_market_file(path("identity2.mtx")));
    const std::vector<double> b = read_vector_file(path("b2.txt"), dec.n);
    const std::vector<double> t = read_vector_file(path("t2.txt"), dec.n);
    SolverParams p;
    p.gamma = 0.5;
    p.epsilon = 0.25;
    auto [est, rep] = estimate_abs(dec, b, t, p);
    (void)rep;
    const double tol = 0.25 * vec_stats(dec, b).dinv_inf;
    const double err = std::abs(est - dot(t, b));
    add("identity_solve_echo", err <= tol,
        "|estimate - t^T b| = " + fmt(err) + " vs " + fmt(tol));
  }

  // Push conservation invariant along a thresholded run.
  {
    std::vector<double> b(ppr_dec.n, 0.0);
    b[0] = 1.0;
    const PushState st = push_run(ppr_dec, b, 6, 1e-3, 1);
    double worst = 0.0;
    for (double d : st.audit_defects) worst = std::max(worst, d);
    add("push_invariant_defect", worst <= 1e-10, "max defect " + fmt(worst));
  }

  // Singular SDD closed form against Neumann summation.
  {
    const Decomposition dec = decompose(read_matrix_market_file(path("single_edge.mtx")));
    const std::vector<double> b = {1.0, -1.0};
    const std::vector<double> x_sdd = sdd_solution(dec, b);
    const std::vector<double> x_sum = exact_solution(dec, b, 1e-12);
    const double r_sdd = dot(b, x_sdd);
    const double r_sum = dot(b, x_sum);
    const bool ok = std::abs(r_sdd - 1.0) <= 1e-10 && std::abs(r_sum - 1.0) <= 1e-10;
    add("sdd_closed_form", ok,
        "b^T x = " + fmt(r_sdd) + " (pseudoinverse), " + fmt(r_sum) + " (series)");
  }

  // Truncation tail bound.
  {
    const std::vector<double> b = {1.0, 0.0};
    const std::vector<double> t = {1.0, 1.0};
    const GapReport g1 = p_norm_gap(ppr_dec, 1.0);
    const int L =
        truncation_length(ppr_dec, vec_stats(ppr_dec, b), vec_stats(ppr_dec, t), g1.value, 0.01,
                          GapMode::general);
    const double full = dot(t, exact_solution(ppr_dec, b, 1e-13));
    const double cut = dot(t, truncated_solution(ppr_dec, b, L));
    const double err = std::abs(full - cut);
    add("truncation_tail", err <= 0.005,
        "L = " + std::to_string(L) + ", |t^T x*_L - t^T x*| = " + fmt(err));
  }

  // PageRank sandwich bounds on the graph fixtures.
  {
    bool ok = true;
    std::string detail = "lower <= pi <= upper held everywhere";
    for (const char* name : {"cycle2.txt", "k4.txt", "eulerian8.txt", "digraph6.txt"}) {
      const Graph g = load_edge_list_file(path(name));
      for (double alpha : {0.2, 0.5}) {
        const std::vector<double> pi = pagerank_dense(g, alpha);
        for (int v = 0; v < g.n(); ++v) {
          for (const auto& [bname, value] : pagerank_lower_bounds(g, v, alpha)) {
            if (value > pi[v] + 1e-12) {
              ok = false;
              detail = std::string(name) + " " + bname + "(" + std::to_string(v) + ") = " + fmt(value) +
                       " > pi = " + fmt(pi[v]);
            }
          }
          if (g.eulerian() && pagerank_upper_bound_eulerian(g, v) < pi[v] - 1e-12) {
            ok = false;
            detail = std::string(name) + " upper(" + std::to_string(v) + ") < pi";
          }
        }
      }
    }
    add("pagerank_sandwich", ok, detail);
  }

  // Graph-native pushes against the unified primitive.
  {
    double worst = 0.0;
    for (const char* name : {"digraph6.txt", "eulerian8.txt", "k4.txt"}) {
      const Graph g = load_edge_list_file(path(name));
      for (double r_max : {0.0, 0.01}) {
        const PushState fwd = forward_push(g, 0, 0.2, 4, r_max);
        const PprSystem sys = build_ppr_system(g, 0, 0.2, PprForm::degree);
        const PushState uni = push_run(sys.dec, sys.b, 4, r_max);
        for (int l = 0; l < 4; ++l) {
          for (const auto& [v, val] : fwd.reserves[l]) {
            auto it = uni.reserves[l].find(v);
            const double other = it == uni.reserves[l].end() ? 0.0 : it->second;
            worst = std::max(worst, std::abs(val - g.out_degree(v) * other));
          }
          for (const auto& [v, val] : fwd.residues[l]) {
            auto it = uni.residues[l].find(v);
            const double other = it == uni.residues[l].end() ? 0.0 : it->second;
            worst = std::max(worst, std::abs(val - g.out_degree(v) * other));
          }
        }
      }
    }
    add("forward_push_equivalence", worst <= 1e-12, "max state gap " + fmt(worst));
  }
  {
    double worst = 0.0;
    for (const char* name : {"digraph6.txt", "eulerian8.txt", "k4.txt"}) {
      const Graph g = load_edge_list_file(path(name));
      for (double r_max : {0.0, 0.01}) {
        const PushState bwd = backward_push(g, 0, 0.2, 4, r_max);
        const PprSystem sys = build_contribution_system(g, 0, 0.2, PprForm::identity);
        const PushState uni = push_run(sys.dec, sys.b, 4, r_max);
        for (int l = 0; l < 4; ++l) {
          for (const auto& [v, val] : bwd.reserves[l]) {
            auto it = uni.reserves[l].find(v);
            const double other = it == uni.reserves[l].end() ? 0.0 : it->second;
            worst = std::max(worst, std::abs(val - other));
          }
          for (const auto& [v, val] : bwd.residues[l]) {
            auto it = uni.residues[l].find(v);
            const double other = it == uni.residues[l].end() ? 0.0 : it->second;
            worst = std::max(worst, std::abs(val - other));
          }
        }
      }
    }
    add("backward_push_equivalence", worst <= 1e-12, "max state gap " + fmt(worst));
  }
  {
    const Graph g = load_edge_list_file(path("eulerian4v.txt"));
    const int s = 0;
    const double ds = g.out_degree(s);
    const PushState fwd = forward_push(g, s, 0.3, 4, 0.01);
    const PushState bwd = backward_push(g.transposed(), s, 0.3, 4, 0.01 * ds);
    double worst = 0.0;
    for (int l = 0; l < 4; ++l) {
      for (const auto& [v, val] : fwd.reserves[l]) {
        auto it = bwd.reserves[l].find(v);
        const double other = it == bwd.reserves[l].end() ? 0.0 : it->second;
        worst = std::max(worst, std::abs(val - g.out_degree(v) / ds * other));
      }
      for (const auto& [v, val] : fwd.residues[l]) {
        auto it = bwd.residues[l].find(v);
        const double other = it == bwd.residues[l].end() ? 0.0 : it->second;
        worst = std::max(worst, std::abs(val - g.out_degree(v) / ds * other));
      }
    }
    add("push_transpose_duality", worst <= 1e-12 && fwd.pushes == bwd.pushes,
        "max scaled gap " + fmt(worst));
  }

  // Resistance of the path fixture with the deterministic method.
  {
    const Graph g = load_edge_list_file(path("path4.txt"));
    ResistanceParams rp;
    rp.method = ResistanceMethod::push;
    rp.epsilon = 0.1;
    auto [est, rep] = effective_resistance(g, 0, 3, rp);
    (void)rep;
    const double err = std::abs(est - 3.0);
    add("effres_path4_push", err <= 0.2, "estimate " + fmt(est) + ", |err| = " + fmt(err));
  }

  // Eulerian reciprocity of personalized mass.
  {
    const Graph eul = load_edge_list_file(path("eulerian8.txt"));
    const Graph und = load_edge_list_file(path("k4.txt"));
    const double d_eul = ppr_symmetry_defect(eul, 0.25);
    const double d_und = ppr_symmetry_defect(und, 0.25);
    add("ppr_reciprocity", d_eul <= 1e-10 && d_und <= 1e-12,
        "defect " + fmt(d_eul) + " (eulerian), " + fmt(d_und) + " (undirected)");
  }
}

int run_audit(const std::string& dir, const std::string& output, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<AuditCheck> checks;
  run_audit_checks(dir, checks);
  int failed = 0;
  for (const AuditCheck& c : checks) {
    if (!c.pass) ++failed;
  }
  if (output == "csv") {
    out << "name,pass,detail\n";
    for (const AuditCheck& c : checks) {
      std::string detail = c.detail;
      std::replace(detail.begin(), detail.end(), ',', ';');
      out << c.name << ',' << (c.pass ? 1 : 0) << ',' << detail << "\n";
    }
  } else if (output == "plain") {
    for (const AuditCheck& c : checks) {
      out << (c.pass ? "ok" : "FAIL") << " - " << c.name << ": " << c.detail << "\n";
    }
    out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  } else {
    ordered_json doc;
    ordered_json params;
    params["subcommand"] = "audit";
    params["fixtures"] = dir;
    doc["params"] = params;
    ordered_json arr = ordered_json::array();
    for (const AuditCheck& c : checks) {
      ordered_json j;
      j["name"] = c.name;
      j["pass"] = c.pass;
      j["detail"] = c.detail;
      arr.push_back(j);
    }
    doc["checks"] = arr;
    doc["passed"] = static_cast<int>(checks.size()) - failed;
    doc["failed"] = failed;
    doc["elapsed_ms"] = elapsed_ms_since(start);
    out << doc.dump(2) << "\n";
  }
  return failed > 0 ? 1 : 0;
}

}  // namespace

int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"sublinear estimators for diagonally dominant systems"};
  app.require_subcommand(1);

  SolveOpts solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "estimate t^T x* for M x = b");
  solve_cmd->add_option("--matrix", solve.matrix, "Matrix Market file for M")->required();
  solve_cmd->add_option("--b", solve.b_path, "right-hand side vector file")->required();
  solve_cmd->add_option("--t", solve.t_path, "functional vector file")->required();
  solve_cmd->add_option("--method", solve.method, "estimator")
      ->check(CLI::IsMember({"walk", "walk_inf", "walk_rel", "push", "bidi_hoeffding",
                             "bidi_variance"}));
  solve_cmd->add_option("--gamma", solve.gamma, "norm gap lower bound");
  solve_cmd->add_option("--epsilon", solve.epsilon, "error target");
  solve_cmd->add_option("--L", solve.L, "truncation override");
  solve_cmd->add_option("--r-max,--r_max", solve.r_max, "push threshold override");
  solve_cmd->add_option("--eta", solve.eta, "lower bound on t^T x* (relative estimator)");
  solve_cmd->add_option("--median-k", solve.median_k, "median-of-k repetitions");
  solve_cmd->add_option("--sample-cap", solve.sample_cap, "sample budget");
  add_common(solve_cmd, solve.common);

  PagerankOpts pagerank;
  CLI::App* pr_cmd = app.add_subcommand("pagerank", "estimate one vertex's PageRank mass");
  pr_cmd->add_option("--graph", pagerank.graph, "edge list file")->required();
  pr_cmd->add_option("--target", pagerank.target, "vertex whose mass is estimated")->required();
  pr_cmd->add_option("--alpha", pagerank.alpha, "restart probability");
  pr_cmd->add_option("--mode", pagerank.mode, "estimation regime")
      ->check(CLI::IsMember({"eulerian", "bounded", "generic"}));
  pr_cmd->add_option("--gamma", pagerank.gamma, "gap override (defaults to alpha/2)");
  pr_cmd->add_option("--epsilon", pagerank.epsilon, "error target");
  pr_cmd->add_option("--L", pagerank.L, "truncation override");
  pr_cmd->add_option("--eta", pagerank.eta, "solution lower bound override");
  add_common(pr_cmd, pagerank.common);

  EffresOpts effres;
  CLI::App* er_cmd = app.add_subcommand("effres", "effective resistance between two vertices");
  er_cmd->add_option("--graph", effres.graph, "edge list file (undirected)")->required();
  er_cmd->add_option("--s", effres.s, "first endpoint")->required();
  er_cmd->add_option("--t", effres.t, "second endpoint")->required();
  er_cmd->add_option("--method", effres.method, "estimator")
      ->check(CLI::IsMember({"auto", "dense", "walk", "push", "bidi_hoeffding",
                             "bidi_variance"}));
  er_cmd->add_option("--epsilon", effres.epsilon, "error target");
  er_cmd->add_flag("--relative", effres.relative, "treat epsilon as a relative target");
  er_cmd->add_option("--gamma", effres.gamma, "spectral gap override");
  er_cmd->add_option("--L", effres.L, "truncation override");
  add_common(er_cmd, effres.common);

  std::string gap_matrix;
  std::string gap_output = "json";
  CLI::App* gap_cmd = app.add_subcommand("gap", "p-norm gap report for a system matrix");
  gap_cmd->add_option("--matrix", gap_matrix, "Matrix Market file")->required();
  gap_cmd->add_option("--output", gap_output, "report format")
      ->check(CLI::IsMember({"json", "csv", "plain"}));

  std::string audit_dir = "tests/fixtures";
  std::string audit_output = "json";
  CLI::App* audit_cmd = app.add_subcommand("audit", "oracle cross-checks on the fixture corpus");
  audit_cmd->add_option("--fixtures", audit_dir, "fixture directory");
  audit_cmd->add_option("--output", audit_output, "report format")
      ->check(CLI::IsMember({"json", "csv", "plain"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (solve_cmd->parsed()) {
      apply_seed_env(solve.common);
      emit_report(run_solve(solve), solve.common.output, out);
      return 0;
    }
    if (pr_cmd->parsed()) {
      apply_seed_env(pagerank.common);
      emit_report(run_pagerank(pagerank), pagerank.common.output, out);
      return 0;
    }
    if (er_cmd->parsed()) {
      apply_seed_env(effres.common);
      emit_report(run_effres(effres), effres.common.output, out);
      return 0;
    }
    if (gap_cmd->parsed()) {
      return run_gap(gap_matrix, gap_output, out);
    }
    return run_audit(audit_dir, audit_output, out);
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace sublin
