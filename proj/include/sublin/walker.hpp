#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sublin/alias_table.hpp"
#include "sublin/decomposition.hpp"
#include "sublin/philox.hpp"

namespace sublin {

struct StepResult {
  enum class Kind { stay, move, absorb };
  Kind kind = Kind::stay;
  int to = -1;
  int sign = 0;
};

// One lazy-walk transition from v: stay with probability 1/2, move to u with
// probability |A(u,v)| / (2 d(v)) carrying sgn(A(u,v)), absorb otherwise.
StepResult step(const Decomposition& dec, int v, Philox& rng);

struct WalkDraw {
  int length = 0;
  int terminal = -1;  // -1 once absorbed
  int sign = 0;       // 0 once absorbed
  std::int64_t steps = 0;
};

struct WalkSample {
  int length = 0;
  int terminal = -1;
  int sign = 0;
  double value = 0.0;
  std::int64_t steps = 0;
};

// Draws source coordinates with probability proportional to |t|.
class SourceSampler {
 public:
  explicit SourceSampler(const std::vector<double>& t);

  struct Pick {
    int coord;
    int sign;
  };
  Pick sample(Philox& rng) const;

  double total() const { return total_; }  // ||t||_1
  int support_size() const { return static_cast<int>(support_.size()); }

 private:
  std::vector<int> support_;
  std::vector<int> signs_;
  AliasTable table_;
  double total_ = 0.0;
};

// Shared randomness contract: a walk draw consumes one uniform for the level,
// one for the source pick, then one per executed step, so independent
// consumers of the same stream see identical trajectories.
WalkDraw draw_walk(const Decomposition& dec, const SourceSampler& src, int L, Philox& rng);

WalkSample draw_sample(const Decomposition& dec, const SourceSampler& src,
                       const std::vector<double>& b, int L, Philox& rng);

struct EstimateReport {
  std::int64_t n_s = 0;
  std::int64_t walk_steps = 0;
  double absorb_rate = 0.0;
  int L = 0;
  double epsilon = 0.0;
  double gamma = 0.0;
  // Concentration constant behind n_s (or the stopping-rule threshold).
  double constant = 0.0;
  std::string method;
  // What the error target is measured against: "abs_dinvb" means
  // eps * ||D^-1 b||_inf, "inf_norm" eps * ||x*||_inf, "relative" eps * t^T x*.
  std::string target_kind;
  double scale = 0.0;
  bool dinv_b_bound_supplied = false;
  std::uint64_t seed = 0;
};

// |estimate - t^T x*| <= eps * ||D^-1 b||_inf with probability >= 3/4.
std::pair<double, EstimateReport> estimate_abs(const Decomposition& dec,
                                               const std::vector<double>& b,
                                               const std::vector<double>& t,
                                               const SolverParams& params);

// RDDZ, b,t >= 0: |estimate - t^T x*| <= eps * ||x*||_inf with prob >= 3/4.
std::pair<double, EstimateReport> estimate_inf_relative(const Decomposition& dec,
                                                        const std::vector<double>& b,
                                                        const std::vector<double>& t,
                                                        const SolverParams& params);

// RDDZ, b,t >= 0, t^T x* > 0: relative error eps with prob >= 3/4 via the
// sequential stopping rule on samples rescaled into [0,1].
std::pair<double, EstimateReport> estimate_relative(const Decomposition& dec,
                                                    const std::vector<double>& b,
                                                    const std::vector<double>& t,
                                                    const SolverParams& params);

struct TransposedProblem {
  Decomposition dec;
  std::vector<double> b;
  std::vector<double> t;
};

// CDD systems: swap the roles of b and t and transpose the off-diagonal part;
// every RDD estimator applied to the image targets the same t^T x*_L.
TransposedProblem transpose_mode(const Decomposition& dec, const std::vector<double>& b,
                                 const std::vector<double>& t);

}  // namespace sublin
