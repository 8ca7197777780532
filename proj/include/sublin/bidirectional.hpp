#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sublin/decomposition.hpp"
#include "sublin/push.hpp"

namespace sublin {

// Parameter regimes for the push + walk combination. The first three target
// an additive error eps * ||D^-1 b||_inf; the relative ones target
// eps * t^T x* and need a positive lower bound eta on that value.
enum class BidiRegime {
  hoeffding,         // bounded samples, signed systems
  variance,          // second-moment schedule, signed systems
  average,           // single-coordinate b, cost tuned to the mean column size
  relative_rcddz,    // nonnegative data on rddz systems
  relative_average,  // relative target with single-coordinate b
};

const char* bidi_regime_name(BidiRegime regime);

struct BidiPlan {
  BidiRegime regime = BidiRegime::hoeffding;
  int L = 0;
  double r_max = 0.0;
  std::int64_t n_s = 0;
  // Concentration constant behind n_s (8 ln 8 or 16).
  double constant = 0.0;
  std::string rationale;
};

// Chooses L (truncation schedule), the push threshold, and the sample count
// for the requested regime.
BidiPlan bidirectional_plan(const Decomposition& dec, const std::vector<double>& b,
                            const std::vector<double>& t, const SolverParams& params,
                            BidiRegime regime);

// Sum of the surviving residues at v over levels 0 .. min(L-1-level, L-2):
// the correction a level-`level` walk ending at v must pick up.
double residue_prefix(const PushState& st, int level, int v);

struct BidiReport {
  BidiPlan plan;
  double push_part = 0.0;
  double sample_part = 0.0;
  std::int64_t pushes = 0;
  std::int64_t work_units = 0;
  std::int64_t n_s = 0;
  std::int64_t walk_steps = 0;
  double absorb_rate = 0.0;
  std::uint64_t seed = 0;
};

// Push at the planned threshold, then correct the dropped residue mass with
// walk samples drawn exactly like the pure sampler (same stream layout):
//   estimate = (1/2) t^T (sum_l p^(l) + r^(L-1))
//            + mean_i sigma_i (1/2) ||t||_1 L * residue_prefix(l_i, v_i).
// The sampled correction is an unbiased estimate of the gap to t^T x*_L.
std::pair<double, BidiReport> bidirectional_estimate(const Decomposition& dec,
                                                     const std::vector<double>& b,
                                                     const std::vector<double>& t,
                                                     const SolverParams& params,
                                                     BidiRegime regime);

// Same run under a caller-supplied plan (pinned L / r_max / n_s).
std::pair<double, BidiReport> bidirectional_estimate_with_plan(const Decomposition& dec,
                                                               const std::vector<double>& b,
                                                               const std::vector<double>& t,
                                                               const SolverParams& params,
                                                               const BidiPlan& plan);

// Bound on the variance of the combined estimator:
//   Var <= (||t||_1 L^2 r_max / (4 n_s)) |t|^T sum_{l<L} Bbar^l D^-1 |b|.
double bidirectional_variance_bound(const Decomposition& dec, const PushState& st,
                                    const std::vector<double>& b, const std::vector<double>& t,
                                    std::int64_t n_s);

}  // namespace sublin
