#ifndef GAR_BUDGET_HPP
#define GAR_BUDGET_HPP

#include <cstddef>
#include <deque>
#include <string>

#include "gar/common.hpp"

namespace gar {

/// Sliding ledger of realized emissions over the last W requests. The
/// running sum is maintained incrementally and recomputed exactly every W
/// pushes to bound floating-point drift.
class CarbonLedger {
 public:
  CarbonLedger(std::size_t window_W, double budget_B_g);

  /// Appends realized carbon (grams); evicts the oldest entry once the
  /// window is full. Negative values are rejected.
  void push(double carbon_g);

  /// Window sum S_t.
  double sum() const { return running_sum_; }

  /// S / min(count_seen, W). Throws DataError on an empty ledger.
  double window_average() const;

  std::size_t window_W() const { return window_W_; }
  double budget_B_g() const { return budget_B_g_; }
  long count_seen() const { return count_seen_; }

  /// min(count_seen, W): the prefix rule's effective window length.
  std::size_t effective_window() const;

  /// JSON state dump for --dump-state / audit output.
  std::string dump_state() const;

 private:
  std::size_t window_W_;
  double budget_B_g_;
  std::deque<double> ring_;
  double running_sum_ = 0.0;
  long count_seen_ = 0;
  std::size_t pushes_since_recompute_ = 0;
};

/// Shadow price of the carbon budget.
struct DualState {
  double lambda = 0.0;
  double eta = 0.05;
};

/// lambda <- max(0, lambda + eta * (S - B*W_eff) / (B*W_eff)).
///
/// W_eff = min(count_seen, W) keeps the multiplier consistent with the
/// prefix-averaged window constraint; strict_bw uses the full W
/// unconditionally instead.
void dual_update(DualState& dual, const CarbonLedger& ledger, bool strict_bw = false);

}  // namespace gar

#endif  // GAR_BUDGET_HPP
