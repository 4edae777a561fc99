// Minimal tour: run the one-winner deals auction with a square welfare, then
// scan one bidder for profitable misreports.

#include <cstdio>
#include <vector>

#include "scoremech/ic_lab.hpp"

int main() {
  const auto g = scoremech::square_g();
  std::vector<scoremech::SingleSlotBid> bids = {{4.0, 0.3}, {3.5, 0.9}, {1.0, 0.5}};

  const auto result = scoremech::run_auction(bids, g);
  std::printf("winner: bidder %d\n", result.winner);
  for (std::size_t i = 0; i < bids.size(); ++i) {
    std::printf("  bidder %zu adjusted value: %.4f\n", i, result.adjusted_values[i]);
  }
  std::printf("pays %.4f on purchase, %.4f otherwise\n", result.payment_if_purchase,
              result.payment_if_no_purchase);

  const auto reports = scoremech::check_ic_single_slot(bids, g, 101);
  for (const auto& r : reports) {
    std::printf("bidder %d: truthful %.6f, best deviation %.6f -> %s\n", r.bidder,
                r.truthful_utility, r.best_deviation_utility, r.verdict.c_str());
  }
  return 0;
}
