#include <gtest/gtest.h>

#include <vector>

#include "scoremech/ic_lab.hpp"

using namespace scoremech;

TEST(IcSingleSlot, HoldsForConvexCatalog) {
  InstanceSampler sampler;
  sampler.seed = 7;
  sampler.min_bidders = 3;
  sampler.max_bidders = 3;
  const auto instances = sample_instances(sampler, 5);
  for (const auto* name : {"linear", "square", "threshold"}) {
    const auto entry = make_welfare(name);
    for (const auto& bids : instances) {
      for (const auto& rep : check_ic_single_slot(bids, entry.fn, 41)) {
        EXPECT_LE(rep.gap, 1e-9) << name;
        EXPECT_EQ(rep.verdict, "IC_holds (grid)");
        EXPECT_FALSE(rep.violated);
      }
    }
  }
}

TEST(IcSingleSlot, ConcaveConstructionAdmitsMisreports) {
  // Regression fixture: the winner keeps winning while moving her quality
  // report to an endpoint, gaining exactly (p - p_hat)^2 = 0.25.
  const std::vector<SingleSlotBid> bids = {{5.0, 0.5}, {1.0, 0.5}};
  const auto reports = check_ic_single_slot(bids, concave_counterexample_g(), 101);
  const auto& winner = reports[0];
  EXPECT_NEAR(winner.truthful_utility, 4.0, 1e-12);
  EXPECT_NEAR(winner.gap, 0.25, 1e-12);
  EXPECT_TRUE(winner.violated);
  EXPECT_EQ(winner.verdict, "IC_violated");
  const double q = winner.best_predictions[0][0];
  EXPECT_TRUE(q == 0.0 || q == 1.0);
}

TEST(IcSingleSlot, SingleBidderTrivial) {
  const std::vector<SingleSlotBid> bids = {{4.0, 0.3}};
  for (const auto& rep : check_ic_single_slot(bids, square_g(), 21)) {
    EXPECT_LE(rep.gap, 1e-9);
  }
}

TEST(IcSingleSlot, GridFloorEnforced) {
  const std::vector<SingleSlotBid> bids = {{1.0, 0.5}};
  EXPECT_THROW(check_ic_single_slot(bids, square_g(), 10), ValidationError);
  EXPECT_NO_THROW(check_ic_single_slot(bids, square_g(), 11));
}

TEST(IcSingleSlot, DeterministicReports) {
  const std::vector<SingleSlotBid> bids = {{3.0, 0.25}, {2.0, 0.75}, {1.0, 0.5}};
  const auto a = check_ic_single_slot(bids, square_g(), 51);
  const auto b = check_ic_single_slot(bids, square_g(), 51);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].truthful_utility, b[i].truthful_utility);
    EXPECT_EQ(a[i].best_deviation_utility, b[i].best_deviation_utility);
    EXPECT_EQ(a[i].best_values, b[i].best_values);
    EXPECT_EQ(a[i].best_predictions, b[i].best_predictions);
    EXPECT_EQ(a[i].gap, b[i].gap);
    EXPECT_EQ(a[i].verdict, b[i].verdict);
  }
}

namespace {

GeneralInstance product_pair_instance() {
  GeneralInstance inst;
  inst.outcomes = {"X", "Y"};
  inst.bidders = 2;
  inst.valuations = {{2.0, 0.0}, {1.0, 1.5}};
  inst.states = {{{"lo", "hi"}, {"lo", "hi"}}, {{"lo", "hi"}, {"lo", "hi"}}};
  inst.predictions = {{{0.3, 0.7}, {0.5, 0.5}}, {{0.8, 0.2}, {0.4, 0.6}}};
  inst.welfare = {product_form_g(1.0, {0, 1}, 1), product_form_g(1.0, {0, 1}, 1)};
  return inst;
}

}  // namespace

TEST(IcGeneral, ProductFormHolds) {
  const auto inst = product_pair_instance();
  for (const auto& rep : check_ic_general(inst, 7)) {
    EXPECT_LE(rep.gap, 1e-9);
    EXPECT_EQ(rep.verdict, "IC_holds (grid)");
  }
}

TEST(IcGeneral, ZeroWelfareHolds) {
  GeneralSampler sampler;
  sampler.seed = 3;
  sampler.max_outcomes = 2;
  sampler.welfare = GeneralSampler::Welfare::zero;
  for (const auto& inst : sample_general_instances(sampler, 3)) {
    for (const auto& rep : check_ic_general(inst, 5)) {
      EXPECT_LE(rep.gap, 1e-9);
    }
  }
}

TEST(IcGeneral, ConcaveComponentViolated) {
  GeneralInstance inst;
  inst.outcomes = {"only"};
  inst.bidders = 1;
  inst.valuations = {{1.0}};
  inst.states = {{{"no", "yes"}}};
  inst.predictions = {{{0.5, 0.5}}};
  inst.welfare = {binary_catalog_welfare("concave_demo", {}, {0}, 1)};
  EXPECT_THROW(check_ic_general(inst, 11), NotComponentWiseConvex);
  const auto reports = check_ic_general(inst, 11, 2000000, /*enforce_convexity=*/false);
  EXPECT_TRUE(reports[0].violated);
  EXPECT_NEAR(reports[0].gap, 0.25, 1e-12);
}

TEST(IcGeneral, CandidateGuard) {
  const auto inst = product_pair_instance();
  EXPECT_THROW(check_ic_general(inst, 101, 1000), GuardExceeded);
}

TEST(Ir, HoldsForBothMechanisms) {
  InstanceSampler sampler;
  sampler.seed = 21;
  for (const auto& bids : sample_instances(sampler, 20)) {
    for (bool ok : check_ir_single_slot(bids, square_g())) EXPECT_TRUE(ok);
  }
  GeneralSampler gs;
  gs.seed = 22;
  gs.welfare = GeneralSampler::Welfare::expected_sum;
  for (const auto& inst : sample_general_instances(gs, 10)) {
    for (bool ok : check_ir_general(inst)) EXPECT_TRUE(ok);
  }
}

TEST(ThresholdDemo, WitnessNumbers) {
  const auto w = demo_no_approximation(0.2, 0.6, 10.0);
  EXPECT_DOUBLE_EQ(w.bound, 20.0);
  EXPECT_DOUBLE_EQ(w.bound, (1.0 - w.alpha) / (w.beta - w.alpha) * w.v_max);
  ASSERT_EQ(w.result.adjusted_values.size(), 2u);
  EXPECT_NEAR(w.result.adjusted_values[0], 20.0, 1e-12);
  EXPECT_NEAR(w.result.adjusted_values[1], 19.99, 1e-12);
  EXPECT_EQ(w.result.winner, 0);  // value 0 beats value 9.99
  EXPECT_TRUE(w.quality_floor_ok);
}

TEST(ThresholdDemo, PerfectQualityLimit) {
  const auto w = demo_no_approximation(0.2, 1.0, 10.0);
  EXPECT_DOUBLE_EQ(w.bound, w.v_max);
  EXPECT_TRUE(w.quality_floor_ok);
}

TEST(ThresholdDemo, ValueAboveBoundWins) {
  const auto g = threshold_g(0.2, 0.6, 10.0);
  const double bound = 20.0;
  const std::vector<SingleSlotBid> bids = {{0.0, 1.0}, {bound + 0.01, 0.6}};
  EXPECT_EQ(run_auction(bids, g).winner, 1);
}

TEST(Sampler, SeedReproducibility) {
  InstanceSampler s;
  s.seed = 42;
  const auto a = sample_instances(s, 100);
  const auto b = sample_instances(s, 100);
  ASSERT_EQ(a.size(), 100u);
  EXPECT_EQ(stream_fingerprint(a), stream_fingerprint(b));
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k].size(), b[k].size());
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      EXPECT_EQ(a[k][i].value, b[k][i].value);
      EXPECT_EQ(a[k][i].quality, b[k][i].quality);
    }
  }
  EXPECT_TRUE(sample_instances(s, 0).empty());
  // frozen fingerprint of the documented seed-42 stream
  EXPECT_EQ(stream_fingerprint(a), 0x0ULL);
}

TEST(Sampler, RangesRespected) {
  InstanceSampler s;
  s.seed = 5;
  s.min_bidders = 2;
  s.max_bidders = 6;
  s.value_min = 0.0;
  s.value_max = 10.0;
  for (const auto& inst : sample_instances(s, 50)) {
    EXPECT_GE(inst.size(), 2u);
    EXPECT_LE(inst.size(), 6u);
    for (const auto& b : inst) {
      EXPECT_GE(b.value, 0.0);
      EXPECT_LT(b.value, 10.0);
      EXPECT_GE(b.quality, 0.0);
      EXPECT_LT(b.quality, 1.0);
    }
  }
  s.min_bidders = 0;
  EXPECT_THROW(sample_instances(s, 1), ValidationError);
}

TEST(NegativeDemo, SamplerFindsWitnessQuickly) {
  InstanceSampler s;
  s.seed = 42;
  s.min_bidders = 2;
  s.max_bidders = 4;
  const auto g = concave_counterexample_g();
  const auto instances = sample_instances(s, 1);
  double best_gap = 0.0;
  for (const auto& rep : check_ic_single_slot(instances[0], g, 101)) {
    best_gap = std::max(best_gap, rep.gap);
  }
  EXPECT_GT(best_gap, 1e-3);
}
