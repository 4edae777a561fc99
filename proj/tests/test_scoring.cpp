#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "scoremech/scoring.hpp"
#include "scoremech/welfare.hpp"

using namespace scoremech;

namespace {

// Lift a one-probability function to the 2-simplex with coordinate 1 as the
// success state; the lifted rule must reproduce the binary one.
SimplexConvexFn lift_binary(const ConvexFn& g) {
  SimplexConvexFn f;
  f.state_count = 2;
  f.eval = [eval = g.eval](std::span<const double> x) { return eval(x[1]); };
  f.subgrad = [sub = g.subgrad](std::span<const double> x) {
    return std::vector<double>{0.0, sub(x[1])};
  };
  return f;
}

}  // namespace

TEST(BinaryRule, LinearGivesWinLoseIndicator) {
  const auto rule = make_binary_rule(linear_g(1.0));
  for (double p : unit_grid(11)) {
    EXPECT_DOUBLE_EQ(rule.score(p, 1), 1.0);
    EXPECT_DOUBLE_EQ(rule.score(p, 0), 0.0);
  }
}

TEST(BinaryRule, SquareClosedForm) {
  const auto rule = make_binary_rule(square_g());
  for (double p : unit_grid(11)) {
    EXPECT_NEAR(rule.score(p, 1), 2.0 * p - p * p, 1e-15);
    EXPECT_NEAR(rule.score(p, 0), -p * p, 1e-15);
  }
}

TEST(BinaryRule, TruthfulExpectationIsG) {
  const auto rule = make_binary_rule(square_g());
  // 0.3 * 0.51 + 0.7 * (-0.09) = 0.09 = g(0.3)
  EXPECT_NEAR(expected_score(rule, 0.3, 0.3), 0.09, 1e-15);
}

TEST(BinaryRule, MisreportLosesUnderSquare) {
  const auto rule = make_binary_rule(square_g());
  // brute expectation: 0.3 * S(0.5, 1) + 0.7 * S(0.5, 0)
  const double brute = 0.3 * (2.0 * 0.5 - 0.25) + 0.7 * (-0.25);
  EXPECT_NEAR(brute, 0.05, 1e-15);
  EXPECT_NEAR(expected_score(rule, 0.5, 0.3), 0.05, 1e-15);
  EXPECT_LT(expected_score(rule, 0.5, 0.3), expected_score(rule, 0.3, 0.3));
}

TEST(BinaryRule, RejectsBadInputs) {
  const auto rule = make_binary_rule(square_g());
  EXPECT_THROW(rule.score(1.5, 1), ValidationError);
  EXPECT_THROW(rule.score(0.5, 2), ValidationError);
  EXPECT_THROW(expected_score(rule, 0.5, -0.2), ValidationError);
}

TEST(SimplexRule, BinaryReduction) {
  for (const auto* name : {"linear", "square", "threshold"}) {
    const auto entry = make_welfare(name);
    const auto binary = make_binary_rule(entry.fn);
    const auto simplex = make_simplex_rule(lift_binary(entry.fn));
    for (double p : unit_grid(101)) {
      const std::vector<double> vec = {1.0 - p, p};
      EXPECT_NEAR(simplex.score(vec, 1), binary.score(p, 1), 1e-12) << name;
      EXPECT_NEAR(simplex.score(vec, 0), binary.score(p, 0), 1e-12) << name;
    }
  }
}

TEST(SimplexRule, BarycenterOfSumOfSquares) {
  SimplexConvexFn g;
  g.state_count = 3;
  g.eval = [](std::span<const double> p) {
    double s = 0.0;
    for (double x : p) s += x * x;
    return s;
  };
  g.subgrad = [](std::span<const double> p) {
    std::vector<double> d(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) d[i] = 2.0 * p[i];
    return d;
  };
  ASSERT_TRUE(satisfies_subgradient_inequality(g));
  const auto rule = make_simplex_rule(g);
  const std::vector<double> center = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  for (int w = 0; w < 3; ++w) {
    EXPECT_NEAR(rule.score(center, w), 1.0 / 3.0, 1e-12);
  }
  EXPECT_NEAR(expected_score(rule, center, center), g.eval(center), 1e-12);
}

TEST(SimplexRule, LinearWelfarePaysStateWeight) {
  const std::vector<double> weights = {2.0, -1.0, 0.5};
  SimplexConvexFn g;
  g.state_count = 3;
  g.eval = [weights](std::span<const double> p) { return detail::dot(weights, p); };
  g.subgrad = [weights](std::span<const double>) { return weights; };
  const auto rule = make_simplex_rule(g);
  for (const auto& p : simplex_grid(3, 5)) {
    for (int w = 0; w < 3; ++w) {
      EXPECT_NEAR(rule.score(p, w), weights[w], 1e-12);
    }
  }
}

TEST(SimplexRule, DimensionAndSimplexChecks) {
  const auto rule = make_simplex_rule(lift_binary(square_g()));
  EXPECT_THROW(rule.score(std::vector<double>{0.2, 0.3, 0.5}, 0), ValidationError);
  EXPECT_THROW(rule.score(std::vector<double>{0.5, 0.3}, 0), ValidationError);  // sums to 0.8
  EXPECT_THROW(expected_score(rule, std::vector<double>{0.5, 0.5},
                              std::vector<double>{0.9, 0.3}),
               ValidationError);
  // tiny negative entries are clamped, not rejected
  EXPECT_NO_THROW(rule.score(std::vector<double>{1.0 + 1e-13, -1e-13}, 0));
}

TEST(SimplexRule, DegenerateTruthPicksOneState) {
  const auto rule = make_simplex_rule(lift_binary(square_g()));
  const std::vector<double> report = {0.6, 0.4};
  EXPECT_DOUBLE_EQ(expected_score(rule, report, std::vector<double>{0.0, 1.0}),
                   rule.score(report, 1));
  EXPECT_DOUBLE_EQ(expected_score(rule, report, std::vector<double>{1.0, 0.0}),
                   rule.score(report, 0));
}

TEST(PointwiseMax, ActivePieceSlopeWithTies) {
  const std::vector<std::pair<double, double>> pieces = {{0.0, 0.0}, {2.0, -1.0}};
  const std::span<const std::pair<double, double>> view(pieces);
  EXPECT_DOUBLE_EQ(subgrad_of_pointwise_max(view, 0.25), 0.0);  // 0 > -0.5
  EXPECT_DOUBLE_EQ(subgrad_of_pointwise_max(view, 0.5), 0.0);   // tie -> lowest index
  EXPECT_DOUBLE_EQ(subgrad_of_pointwise_max(view, 0.9), 2.0);
  EXPECT_THROW(subgrad_of_pointwise_max(std::span<const std::pair<double, double>>{}, 0.5),
               ValidationError);
}

TEST(PointwiseMax, VectorForm) {
  const std::vector<LinearPiece> pieces = {{{1.0, 0.0}, 0.0}, {{0.0, 1.0}, 0.0}};
  const auto d = subgrad_of_pointwise_max(std::span<const LinearPiece>(pieces),
                                          std::vector<double>{0.2, 0.8});
  EXPECT_EQ(d, (std::vector<double>{0.0, 1.0}));
  const auto tie = subgrad_of_pointwise_max(std::span<const LinearPiece>(pieces),
                                            std::vector<double>{0.5, 0.5});
  EXPECT_EQ(tie, (std::vector<double>{1.0, 0.0}));
}

TEST(Properness, CatalogRulesOnGrid) {
  for (const auto* name : {"linear", "square", "threshold"}) {
    const auto entry = make_welfare(name);
    const auto rule = make_binary_rule(entry.fn);
    EXPECT_LE(properness_gap(rule, 101), 1e-12) << name;
    for (double p : unit_grid(101)) {
      EXPECT_NEAR(expected_score(rule, p, p), entry.fn.eval(p), 1e-12) << name;
    }
  }
}

TEST(Properness, StrictForSquareOffTruth) {
  const auto rule = make_binary_rule(square_g());
  const auto grid = unit_grid(101);
  double min_margin = std::numeric_limits<double>::infinity();
  for (double truth : grid) {
    const double honest = expected_score(rule, truth, truth);
    for (double report : grid) {
      if (report != truth) {
        min_margin = std::min(min_margin, honest - expected_score(rule, report, truth));
      }
    }
  }
  // adjacent points differ by 0.01, so the worst margin is (0.01)^2
  EXPECT_NEAR(min_margin, 1e-4, 1e-12);
}

TEST(Subgradients, GridInequalityForCatalog) {
  EXPECT_TRUE(satisfies_subgradient_inequality(linear_g(3.0)));
  EXPECT_TRUE(satisfies_subgradient_inequality(square_g()));
  EXPECT_TRUE(satisfies_subgradient_inequality(threshold_g(0.2, 0.6, 10.0)));
  EXPECT_FALSE(satisfies_subgradient_inequality(concave_counterexample_g()));
}

TEST(Subgradients, MatchCentralDifferences) {
  // differentiable catalog entries only; evaluated away from the endpoints
  for (const auto* name : {"linear", "square"}) {
    const auto entry = make_welfare(name);
    for (double p : unit_grid(99)) {
      if (p < 0.01 || p > 0.99) continue;
      EXPECT_NEAR(entry.fn.subgrad(p), central_difference(entry.fn.eval, p), 1e-5) << name;
    }
  }
}

TEST(Subgradients, ImproperWhenForcedThroughConcave) {
  // The tangent construction applied to a concave function rewards lying:
  // the gain from reporting q against truth p is exactly (p - q)^2.
  const auto g = concave_counterexample_g();
  const auto rule = make_binary_rule(g);
  EXPECT_NEAR(expected_score(rule, 0.0, 0.5) - expected_score(rule, 0.5, 0.5), 0.25, 1e-15);
  EXPECT_GT(properness_gap(rule, 101), 1e-3);
}

TEST(SimplexGrid, CountsAndOrder) {
  const auto g2 = simplex_grid(2, 101);
  EXPECT_EQ(g2.size(), 101u);
  EXPECT_EQ(g2.front(), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(g2.back(), (std::vector<double>{1.0, 0.0}));
  const auto g3 = simplex_grid(3, 5);
  EXPECT_EQ(g3.size(), 15u);  // C(4+2, 2)
  for (const auto& p : g3) {
    double s = 0.0;
    for (double x : p) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_EQ(simplex_grid(1).size(), 1u);
}

