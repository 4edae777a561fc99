#pragma once

#include <span>
#include <string>
#include <vector>

#include "scoremech/convex.hpp"
#include "scoremech/scoring.hpp"
#include "scoremech/welfare.hpp"

namespace scoremech {

// One bidder's report: a value and a prediction vector for every outcome.
struct BidderBid {
  std::vector<double> values;                     // [outcome]
  std::vector<std::vector<double>> predictions;   // [outcome][state]
};

// A full market: finite outcome set, per-bidder valuations and predictions
// over per-(bidder,outcome) state sets, and a welfare family per outcome.
struct GeneralInstance {
  std::string id = "general";
  std::vector<std::string> outcomes;
  int bidders = 0;
  std::vector<std::vector<double>> valuations;                  // [bidder][outcome]
  std::vector<std::vector<std::vector<std::string>>> states;    // [bidder][outcome][state]
  std::vector<std::vector<std::vector<double>>> predictions;    // [bidder][outcome][state]
  std::vector<OutcomeWelfare> welfare;                          // [outcome]
  // Prediction substituted for a bidder when her bid is removed from the
  // market (the welfare still needs m arguments). Empty means uniform.
  std::vector<std::vector<std::vector<double>>> baselines;      // [bidder][outcome][state]

  int outcome_count() const { return static_cast<int>(outcomes.size()); }

  int outcome_index(const std::string& id_) const {
    for (int o = 0; o < outcome_count(); ++o) {
      if (outcomes[o] == id_) return o;
    }
    throw ValidationError("outcome", "unknown outcome id '" + id_ + "'");
  }

  std::vector<std::vector<double>> predictions_at(int o) const {
    std::vector<std::vector<double>> p(bidders);
    for (int i = 0; i < bidders; ++i) p[i] = predictions[i][o];
    return p;
  }

  std::vector<double> baseline_for(int bidder, int o) const {
    if (!baselines.empty() && !baselines[bidder].empty() && !baselines[bidder][o].empty()) {
      return baselines[bidder][o];
    }
    const auto n = states[bidder][o].size();
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  }

  BidderBid bid_of(int bidder) const { return BidderBid{valuations[bidder], predictions[bidder]}; }

  GeneralInstance with_bid(int bidder, const BidderBid& bid) const {
    GeneralInstance copy = *this;
    copy.valuations[bidder] = bid.values;
    copy.predictions[bidder] = bid.predictions;
    return copy;
  }

  void validate() const {
    if (outcomes.empty()) throw ValidationError("outcomes", "empty outcome set");
    for (int o = 0; o < outcome_count(); ++o) {
      for (int o2 = o + 1; o2 < outcome_count(); ++o2) {
        if (outcomes[o] == outcomes[o2]) {
          throw ValidationError("outcomes", "duplicate outcome id '" + outcomes[o] + "'");
        }
      }
    }
    if (bidders < 1) throw ValidationError("bidders", "need at least one bidder");
    if (static_cast<int>(valuations.size()) != bidders ||
        static_cast<int>(states.size()) != bidders ||
        static_cast<int>(predictions.size()) != bidders) {
      throw ValidationError("bidders", "per-bidder tables do not match the bidder count");
    }
    if (static_cast<int>(welfare.size()) != outcome_count()) {
      throw ValidationError("welfare", "one welfare family required per outcome");
    }
    for (int i = 0; i < bidders; ++i) {
      const std::string bi = "bidders[" + std::to_string(i) + "]";
      if (static_cast<int>(valuations[i].size()) != outcome_count() ||
          static_cast<int>(states[i].size()) != outcome_count() ||
          static_cast<int>(predictions[i].size()) != outcome_count()) {
        throw ValidationError(bi, "per-outcome tables do not match the outcome count");
      }
      for (int o = 0; o < outcome_count(); ++o) {
        const std::string fo = bi + "." + outcomes[o];
        if (!std::isfinite(valuations[i][o])) {
          throw ValidationError(fo + ".valuation", "must be finite");
        }
        if (states[i][o].empty()) throw ValidationError(fo + ".states", "empty state set");
        if (states[i][o].size() != predictions[i][o].size()) {
          throw ValidationError(fo + ".predictions", "length does not match the state set");
        }
        checked_simplex(predictions[i][o], fo + ".predictions");
        if (!baselines.empty() && !baselines[i].empty() && !baselines[i][o].empty()) {
          if (baselines[i][o].size() != states[i][o].size()) {
            throw ValidationError(fo + ".baselines", "length does not match the state set");
          }
          checked_simplex(baselines[i][o], fo + ".baselines");
        }
      }
    }
    for (int o = 0; o < outcome_count(); ++o) {
      if (!welfare[o].eval) {
        throw ValidationError("welfare." + outcomes[o], "missing eval");
      }
      const double probe = welfare[o].eval(predictions_at(o));
      if (!std::isfinite(probe)) {
        throw ValidationError("welfare." + outcomes[o], "not finite at the reported predictions");
      }
    }
  }
};

// Argmax with deterministic ties: equal objectives go to the
// lexicographically smallest outcome id.
inline int argmax_outcome(std::span<const double> w, std::span<const std::string> ids) {
  int best = 0;
  for (int o = 1; o < static_cast<int>(w.size()); ++o) {
    if (w[o] > w[best] || (w[o] == w[best] && ids[o] < ids[best])) best = o;
  }
  return best;
}

// W^o: reported bidder value plus welfare at outcome o.
inline double outcome_objective(const GeneralInstance& inst, int o) {
  double sum = 0.0;
  for (int i = 0; i < inst.bidders; ++i) sum += inst.valuations[i][o];
  return sum + inst.welfare[o].eval(inst.predictions_at(o));
}

inline int select_outcome(const GeneralInstance& inst) {
  if (inst.outcomes.empty()) throw ValidationError("outcomes", "empty outcome set");
  std::vector<double> w(inst.outcome_count());
  for (int o = 0; o < inst.outcome_count(); ++o) w[o] = outcome_objective(inst, o);
  return argmax_outcome(w, inst.outcomes);
}

// W_{-i}: the best objective attainable once bidder i's bid is removed. Her
// valuation drops out and the welfare sees her declared baseline prediction
// instead of her report, so the quantity does not depend on anything she
// says. An empty market (single bidder) is worth zero.
inline double exclude_bidder_value(const GeneralInstance& inst, int bidder) {
  if (inst.bidders == 1) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int o = 0; o < inst.outcome_count(); ++o) {
    double sum = 0.0;
    for (int i = 0; i < inst.bidders; ++i) {
      if (i != bidder) sum += inst.valuations[i][o];
    }
    auto preds = inst.predictions_at(o);
    preds[bidder] = inst.baseline_for(bidder, o);
    best = std::max(best, sum + inst.welfare[o].eval(preds));
  }
  return best;
}

// Welfare at one outcome as a function of a single bidder's prediction, all
// other components pinned. Uses the family's analytic component gradient
// when present and central finite differences otherwise. Unless the caller
// opts out, construction runs a grid subgradient test and rejects slices
// that are not convex (the finite-difference path gets a looser, scaled
// tolerance since its slopes carry ~1e-9 relative noise).
inline SimplexConvexFn component_slice(const OutcomeWelfare& welfare,
                                       std::vector<std::vector<double>> fixed, int bidder,
                                       bool enforce_convexity = true) {
  const int n = static_cast<int>(fixed[bidder].size());
  auto assemble = [fixed = std::move(fixed), bidder](std::span<const double> q) {
    auto full = fixed;
    full[bidder].assign(q.begin(), q.end());
    return full;
  };
  SimplexConvexFn slice;
  slice.state_count = n;
  slice.eval = [assemble, eval = welfare.eval](std::span<const double> q) {
    return eval(assemble(q));
  };
  const bool analytic = static_cast<bool>(welfare.component_subgrad);
  if (analytic) {
    slice.subgrad = [assemble, grad = welfare.component_subgrad,
                     bidder](std::span<const double> q) { return grad(bidder, assemble(q)); };
  } else {
    slice.subgrad = [eval = slice.eval](std::span<const double> q) {
      return central_difference_gradient(eval, q);
    };
  }
  if (enforce_convexity) {
    double tol = kSubgradTol;
    if (!analytic) {
      double scale = 1.0;
      for (const auto& point : simplex_grid(n)) {
        scale = std::max(scale, std::abs(slice.eval(point)));
      }
      tol = 1e-9 * scale;
    }
    if (!satisfies_subgradient_inequality(slice, 0, tol)) {
      throw NotComponentWiseConvex("welfare family '" + welfare.family +
                                   "' is not component-wise convex in bidder " +
                                   std::to_string(bidder));
    }
  }
  return slice;
}

struct GeneralResult {
  std::string chosen_outcome;
  int chosen_index = -1;
  double objective_value = 0.0;
  std::vector<double> outcome_objectives;         // W^o per outcome
  std::vector<double> counterfactuals;            // W_{-i} per bidder
  std::vector<std::vector<double>> transfers;     // [bidder][state at o*], owed by the bidder
  std::vector<int> realized_states;               // empty when no realization was requested
  std::vector<double> realized_payments;
};

// Runs the scoring-rule VCG mechanism: picks the objective-maximizing
// outcome o*, then charges bidder i, in her realized state w,
//   W_{-i} - sum_{j != i} v_j(o*) - S_i(p_i(o*), w)
// where S_i is the Savage rule built from the welfare slice in her
// component. `realized_states` may be empty (transfers only, no realization).
inline GeneralResult run_general(const GeneralInstance& inst, std::span<const int> realized_states,
                                 bool enforce_convexity = true) {
  inst.validate();
  if (!realized_states.empty() && static_cast<int>(realized_states.size()) != inst.bidders) {
    throw ValidationError("realized_states", "need one state per bidder");
  }
  GeneralResult res;
  res.outcome_objectives.resize(inst.outcome_count());
  for (int o = 0; o < inst.outcome_count(); ++o) {
    res.outcome_objectives[o] = outcome_objective(inst, o);
  }
  const int ostar = argmax_outcome(res.outcome_objectives, inst.outcomes);
  res.chosen_index = ostar;
  res.chosen_outcome = inst.outcomes[ostar];
  res.objective_value = res.outcome_objectives[ostar];

  double total_value = 0.0;
  for (int i = 0; i < inst.bidders; ++i) total_value += inst.valuations[i][ostar];
  const auto preds = inst.predictions_at(ostar);

  res.counterfactuals.resize(inst.bidders);
  res.transfers.resize(inst.bidders);
  for (int i = 0; i < inst.bidders; ++i) {
    if (!realized_states.empty()) {
      const int w = realized_states[i];
      if (w < 0 || w >= static_cast<int>(inst.states[i][ostar].size())) {
        throw ValidationError("realized_states[" + std::to_string(i) + "]",
                              "state index out of range for the chosen outcome");
      }
    }
    res.counterfactuals[i] = exclude_bidder_value(inst, i);
    const double others_value = total_value - inst.valuations[i][ostar];
    const auto rule = make_simplex_rule(component_slice(inst.welfare[ostar], preds, i,
                                                        enforce_convexity));
    const int n = rule.state_count;
    res.transfers[i].resize(n);
    for (int w = 0; w < n; ++w) {
      res.transfers[i][w] = res.counterfactuals[i] - others_value - rule.score(preds[i], w);
    }
  }
  if (!realized_states.empty()) {
    res.realized_states.assign(realized_states.begin(), realized_states.end());
    res.realized_payments.resize(inst.bidders);
    for (int i = 0; i < inst.bidders; ++i) {
      res.realized_payments[i] = res.transfers[i][realized_states[i]];
    }
  }
  return res;
}

// Precomputes everything about one bidder's deviation problem that does not
// depend on her report: others' value sums, welfare slices and Savage rules
// per outcome, and W_{-i}. utility() is then cheap enough for grid scans.
class DeviationScanner {
 public:
  DeviationScanner(const GeneralInstance& inst, int bidder, bool enforce_convexity = true)
      : inst_(&inst), bidder_(bidder) {
    const int O = inst.outcome_count();
    slices_.reserve(O);
    rules_.reserve(O);
    for (int o = 0; o < O; ++o) {
      slices_.push_back(component_slice(inst.welfare[o], inst.predictions_at(o), bidder,
                                        enforce_convexity));
      rules_.push_back(make_simplex_rule(slices_.back()));
    }
    w_minus_ = exclude_bidder_value(inst, bidder);
  }

  double w_minus() const { return w_minus_; }

  // Expected utility of submitting `report` when `true_bid` is the real
  // type, everyone else truthful. Outcome selection reproduces
  // select_outcome on the instance with the report substituted, including
  // the summation order, so truthful reports land on the same outcome bit
  // for bit.
  double utility(const BidderBid& report, const BidderBid& true_bid) const {
    const auto& inst = *inst_;
    const int O = inst.outcome_count();
    std::vector<double> w(O);
    for (int o = 0; o < O; ++o) {
      double sum = 0.0;
      for (int i = 0; i < inst.bidders; ++i) {
        sum += i == bidder_ ? report.values[o] : inst.valuations[i][o];
      }
      w[o] = sum + slices_[o].eval(report.predictions[o]);
    }
    const int chosen = argmax_outcome(w, inst.outcomes);
    double others_value = 0.0;
    for (int i = 0; i < inst.bidders; ++i) {
      if (i != bidder_) others_value += inst.valuations[i][chosen];
    }
    const double score =
        expected_score(rules_[chosen], report.predictions[chosen], true_bid.predictions[chosen]);
    return true_bid.values[chosen] - w_minus_ + others_value + score;
  }

 private:
  const GeneralInstance* inst_;
  int bidder_;
  std::vector<SimplexConvexFn> slices_;
  std::vector<SimplexScoringRule> rules_;
  double w_minus_ = 0.0;
};

// Expected utility of bidder `bidder` submitting `report` (instead of her
// entry in the instance) while her true type is `true_type`. Truthful
// reporting yields W^{o*} - W_{-i}.
inline double bidder_expected_utility(const GeneralInstance& inst, int bidder,
                                      const BidderBid& report, const BidderBid& true_type,
                                      bool enforce_convexity = true) {
  return DeviationScanner(inst, bidder, enforce_convexity).utility(report, true_type);
}

}  // namespace scoremech
