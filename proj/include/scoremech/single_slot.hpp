#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scoremech/convex.hpp"
#include "scoremech/rng.hpp"
#include "scoremech/scoring.hpp"
#include "scoremech/welfare.hpp"

namespace scoremech {

// A merchant's type: total expected value for being displayed (not a value
// per purchase) and the probability the displayed deal is purchased.
struct SingleSlotBid {
  double value = 0.0;
  double quality = 0.0;
};

struct SingleSlotResult {
  int winner = -1;
  double payment_if_purchase = 0.0;
  double payment_if_no_purchase = 0.0;
  std::vector<double> adjusted_values;
  // Adjusted value the payment is anchored to: the best losing bid, or 0
  // when there is only one bidder.
  double second_adjusted = 0.0;
};

inline void validate_bids(std::span<const SingleSlotBid> bids) {
  if (bids.empty()) throw ValidationError("bids", "empty bid list");
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const std::string field = "bids[" + std::to_string(i) + "]";
    if (!std::isfinite(bids[i].value)) throw ValidationError(field + ".value", "must be finite");
    checked_probability(bids[i].quality, field + ".quality");
  }
}

// Single-winner auction: ranks bids by adjusted value v + g(p), awards the
// slot to the highest (ties to the lowest index), and charges the winner
// second_adjusted - S_g(p_winner, w) in each purchase state w. Losers pay
// nothing. Expected payment under the winner's own report is therefore
// second_adjusted - g(p_winner).
inline SingleSlotResult run_auction(std::span<const SingleSlotBid> bids, const ConvexFn& g) {
  validate_bids(bids);
  SingleSlotResult res;
  res.adjusted_values.resize(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    res.adjusted_values[i] =
        bids[i].value + g.eval(checked_probability(bids[i].quality, "quality"));
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(bids.size()); ++i) {
    if (res.adjusted_values[i] > res.adjusted_values[best]) best = i;
  }
  res.winner = best;
  if (bids.size() == 1) {
    res.second_adjusted = 0.0;
  } else {
    double second = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(bids.size()); ++i) {
      if (i != best) second = std::max(second, res.adjusted_values[i]);
    }
    res.second_adjusted = second;
  }
  const auto rule = make_binary_rule(g);
  const double q = checked_probability(bids[best].quality, "quality");
  res.payment_if_purchase = res.second_adjusted - rule.score(q, 1);
  res.payment_if_no_purchase = res.second_adjusted - rule.score(q, 0);
  return res;
}

// One Bernoulli purchase draw, reproducible from the seed alone.
inline int realize_purchase(double true_quality, std::uint64_t seed) {
  const double q = checked_probability(true_quality, "true_quality");
  std::mt19937_64 rng(seed);
  return uniform01(rng) < q ? 1 : 0;
}

// Expected utility of the auction's winner whose real type is `true_type`
// while `bids` were the submitted reports. Under truthful bidding this is
// h(true) - h(second).
inline double expected_winner_utility(std::span<const SingleSlotBid> bids,
                                      const SingleSlotBid& true_type, const ConvexFn& g) {
  const auto res = run_auction(bids, g);
  const auto rule = make_binary_rule(g);
  const double p_true = checked_probability(true_type.quality, "true_type.quality");
  const double score = expected_score(rule, bids[res.winner].quality, p_true);
  return true_type.value + score - res.second_adjusted;
}

}  // namespace scoremech
