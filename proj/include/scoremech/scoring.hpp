#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "scoremech/convex.hpp"

namespace scoremech {

// Score table for a binary event. State 1 is the purchase/success state.
struct BinaryScoringRule {
  std::function<double(double report, int state)> score;
};

// Score table over an n-state event; reports live on the n-simplex.
struct SimplexScoringRule {
  int state_count = 0;
  std::function<double(std::span<const double> report, int state)> score;
};

// Tangent construction
//   S(p, 1) = g(p) + (1 - p) g'(p)
//   S(p, 0) = g(p) -      p  g'(p)
// so the expected score under the reported probability collapses to g(p),
// and for convex g no misreport can do better. Applied to a non-convex g the
// same formulas yield an improper rule; the negative demonstrations rely on
// exactly that, so no convexity check happens here.
inline BinaryScoringRule make_binary_rule(const ConvexFn& g) {
  return BinaryScoringRule{[eval = g.eval, sub = g.subgrad](double report, int state) {
    const double p = checked_probability(report, "report");
    if (state != 0 && state != 1) throw ValidationError("state", "binary state must be 0 or 1");
    const double value = eval(p);
    const double slope = sub(p);
    return state == 1 ? value + (1.0 - p) * slope : value - p * slope;
  }};
}

// Savage construction on the simplex: S(p, w) = g(p) + g'(p).(e_w - p).
inline SimplexScoringRule make_simplex_rule(const SimplexConvexFn& g) {
  const int n = g.state_count;
  if (n < 1) throw ValidationError("state_count", "must be positive");
  return SimplexScoringRule{
      n, [n, eval = g.eval, sub = g.subgrad](std::span<const double> report, int state) {
        if (static_cast<int>(report.size()) != n) {
          throw ValidationError("report", "dimension mismatch: got " +
                                              std::to_string(report.size()) + ", rule has " +
                                              std::to_string(n) + " states");
        }
        if (state < 0 || state >= n) throw ValidationError("state", "state index out of range");
        const auto p = checked_simplex(report, "report");
        const double value = eval(p);
        const auto d = sub(p);
        if (static_cast<int>(d.size()) != n) {
          throw ValidationError("subgrad", "oracle returned wrong dimension");
        }
        return value + d[state] - detail::dot(d, p);
      }};
}

// Expected score of `report` when the state is drawn Bernoulli(truth).
inline double expected_score(const BinaryScoringRule& rule, double report, double truth) {
  const double p = checked_probability(truth, "truth");
  double s = 0.0;
  if (p > 0.0) s += p * rule.score(report, 1);
  if (p < 1.0) s += (1.0 - p) * rule.score(report, 0);
  return s;
}

// Expected score of `report` when the state is drawn from `truth`.
inline double expected_score(const SimplexScoringRule& rule, std::span<const double> report,
                             std::span<const double> truth) {
  if (static_cast<int>(truth.size()) != rule.state_count) {
    throw ValidationError("truth", "dimension mismatch");
  }
  const auto t = checked_simplex(truth, "truth");
  double s = 0.0;
  for (int w = 0; w < rule.state_count; ++w) {
    if (t[w] > 0.0) s += t[w] * rule.score(report, w);
  }
  return s;
}

// Largest improvement any grid misreport achieves over truth-telling:
//   max over (truth, report) of S(report; truth) - S(truth; truth).
// Within float noise of zero (or negative) certifies properness on the grid.
inline double properness_gap(const BinaryScoringRule& rule, int grid_points = 101) {
  const auto grid = unit_grid(grid_points);
  double worst = -std::numeric_limits<double>::infinity();
  for (double truth : grid) {
    const double honest = expected_score(rule, truth, truth);
    for (double report : grid) {
      worst = std::max(worst, expected_score(rule, report, truth) - honest);
    }
  }
  return worst;
}

inline double properness_gap(const SimplexScoringRule& rule, int points_per_axis = 0) {
  const auto grid = simplex_grid(rule.state_count, points_per_axis);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& truth : grid) {
    const double honest = expected_score(rule, truth, truth);
    for (const auto& report : grid) {
      worst = std::max(worst, expected_score(rule, report, truth) - honest);
    }
  }
  return worst;
}

}  // namespace scoremech
