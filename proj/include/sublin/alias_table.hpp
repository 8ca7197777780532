#pragma once

#include <cstddef>
#include <vector>

#include "sublin/errors.hpp"
#include "sublin/philox.hpp"

namespace sublin {

// Vose alias method: O(n) construction, O(1) sampling from a fixed discrete
// distribution. Weights must be nonnegative with a positive sum.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw SolverError(ErrorCode::NegativeInput, "alias table weight");
      total += w;
    }
    if (!(total > 0.0)) throw SolverError(ErrorCode::ZeroT, "alias table needs positive mass");
    std::size_t n = weights.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
    std::vector<std::size_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      std::size_t s = small.back();
      small.pop_back();
      std::size_t l = large.back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (std::size_t s : large) prob_[s] = 1.0;
    for (std::size_t s : small) prob_[s] = 1.0;
  }

  std::size_t size() const { return prob_.size(); }

  // Draws one index using exactly one uniform double from rng.
  std::size_t sample(Philox& rng) const {
    double u = rng.next_double() * static_cast<double>(prob_.size());
    auto i = static_cast<std::size_t>(u);
    if (i >= prob_.size()) i = prob_.size() - 1;
    double frac = u - static_cast<double>(i);
    return frac < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace sublin
