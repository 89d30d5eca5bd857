#include "gar/budget.hpp"

#include <algorithm>

#include <json.hpp>

namespace gar {

CarbonLedger::CarbonLedger(std::size_t window_W, double budget_B_g)
    : window_W_(window_W), budget_B_g_(budget_B_g) {
  if (window_W_ < 1) {
    throw DataError("CarbonLedger: window_W must be >= 1");
  }
}

void CarbonLedger::push(double carbon_g) {
  if (carbon_g < 0.0) {
    throw DataError("CarbonLedger: negative realized carbon");
  }
  ring_.push_back(carbon_g);
  running_sum_ += carbon_g;
  ++count_seen_;
  if (ring_.size() > window_W_) {
    running_sum_ -= ring_.front();
    ring_.pop_front();
  }
  if (++pushes_since_recompute_ >= window_W_) {
    pushes_since_recompute_ = 0;
    double exact = 0.0;
    for (double c : ring_) exact += c;
    running_sum_ = exact;
  }
}

double CarbonLedger::window_average() const {
  if (count_seen_ == 0) {
    throw DataError("CarbonLedger: window_average on empty ledger");
  }
  return running_sum_ / static_cast<double>(effective_window());
}

std::size_t CarbonLedger::effective_window() const {
  return std::min<std::size_t>(static_cast<std::size_t>(count_seen_), window_W_);
}

std::string CarbonLedger::dump_state() const {
  nlohmann::json obj{{"window_W", window_W_},
                     {"budget_B_g", budget_B_g_},
                     {"running_sum_S", running_sum_},
                     {"count_seen", count_seen_},
                     {"ring", std::vector<double>(ring_.begin(), ring_.end())}};
  return obj.dump();
}

void dual_update(DualState& dual, const CarbonLedger& ledger, bool strict_bw) {
  if (ledger.count_seen() == 0) {
    throw DataError("dual_update: ledger has no observations");
  }
  const double b = ledger.budget_B_g();
  if (!(b > 0.0)) {
    throw DataError("dual_update: budget must be > 0");
  }
  const double w_eff =
      strict_bw ? static_cast<double>(ledger.window_W()) : static_cast<double>(ledger.effective_window());
  const double bw = b * w_eff;
  dual.lambda = std::max(0.0, dual.lambda + dual.eta * (ledger.sum() - bw) / bw);
}

}  // namespace gar
