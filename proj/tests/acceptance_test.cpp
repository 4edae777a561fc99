// Acceptance suite: one test per shipped guarantee, each printing a
// [CRITERION] pass/fail line. Tolerances are pinned here, not configurable.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "process_helpers.hpp"
#include "scoremech/ic_lab.hpp"
#include "scoremech/io.hpp"

using namespace scoremech;
namespace fs = std::filesystem;

namespace {

class Acceptance : public ::testing::Test {
 protected:
  void TearDown() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::printf("[CRITERION] %s: %s\n", info->name(),
                info->result()->Failed() ? "FAIL" : "PASS");
    std::fflush(stdout);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<CatalogEntry> convex_catalog() {
  return {make_welfare("linear"), make_welfare("square"), make_welfare("threshold")};
}

const std::vector<std::vector<SingleSlotBid>>& acceptance_instances() {
  static const auto instances = [] {
    InstanceSampler sampler;
    sampler.seed = 2024;
    sampler.min_bidders = 2;
    sampler.max_bidders = 6;
    sampler.value_min = 0.0;
    sampler.value_max = 10.0;
    return sample_instances(sampler, 200);
  }();
  return instances;
}

}  // namespace

TEST_F(Acceptance, C01_scoring_properness) {
  const auto start = std::chrono::steady_clock::now();
  const auto grid = unit_grid(101);
  for (const auto& entry : convex_catalog()) {
    const auto rule = make_binary_rule(entry.fn);
    double worst_violation = -std::numeric_limits<double>::infinity();
    double strict_margin = std::numeric_limits<double>::infinity();
    for (double truth : grid) {
      const double honest = expected_score(rule, truth, truth);
      for (double report : grid) {
        const double margin = honest - expected_score(rule, report, truth);
        worst_violation = std::max(worst_violation, -margin);
        if (report != truth) strict_margin = std::min(strict_margin, margin);
      }
    }
    EXPECT_LE(worst_violation, 1e-12) << entry.spec.name;
    if (entry.spec.name == "square") {
      EXPECT_GE(strict_margin, 1e-6);
    }
  }
  EXPECT_LT(seconds_since(start), 1.0);
}

TEST_F(Acceptance, C02_consistency_identity) {
  for (const auto& entry : convex_catalog()) {
    const auto rule = make_binary_rule(entry.fn);
    for (double p : unit_grid(101)) {
      EXPECT_NEAR(expected_score(rule, p, p), entry.fn.eval(p), 1e-12) << entry.spec.name;
    }
  }
}

TEST_F(Acceptance, C03_risk_aversion_anchor) {
  const auto g = square_g();
  EXPECT_DOUBLE_EQ(50.0 * g.eval(0.0) + 50.0 * g.eval(1.0), 50.0);
  EXPECT_DOUBLE_EQ(100.0 * g.eval(0.5), 25.0);
}

TEST_F(Acceptance, C04_single_slot_ic_ir) {
  const auto start = std::chrono::steady_clock::now();
  const auto& instances = acceptance_instances();
  ASSERT_GE(instances.size(), 200u);
  double max_gap = -std::numeric_limits<double>::infinity();
  double min_truthful = std::numeric_limits<double>::infinity();
  for (const auto& entry : convex_catalog()) {
    for (const auto& bids : instances) {
      for (const auto& rep : check_ic_single_slot(bids, entry.fn, 101)) {
        max_gap = std::max(max_gap, rep.gap);
        min_truthful = std::min(min_truthful, rep.truthful_utility);
      }
    }
  }
  EXPECT_LE(max_gap, 1e-9);
  EXPECT_GE(min_truthful, -1e-12);
  EXPECT_LT(seconds_since(start), 60.0);
}

TEST_F(Acceptance, C05_welfare_argmax) {
  // single slot: winner always maximizes v + g(p)
  int mismatches = 0;
  for (const auto& entry : convex_catalog()) {
    for (const auto& bids : acceptance_instances()) {
      const auto res = run_auction(bids, entry.fn);
      int oracle = 0;
      for (int i = 1; i < static_cast<int>(bids.size()); ++i) {
        if (bids[i].value + entry.fn.eval(bids[i].quality) >
            bids[oracle].value + entry.fn.eval(bids[oracle].quality)) {
          oracle = i;
        }
      }
      if (res.winner != oracle) ++mismatches;
    }
  }
  // general: chosen outcome maximizes the reported objective
  GeneralSampler gs;
  gs.seed = 6;
  gs.welfare = GeneralSampler::Welfare::expected_sum;
  for (const auto& inst : sample_general_instances(gs, 100)) {
    const int chosen = select_outcome(inst);
    int oracle = 0;
    std::vector<double> w(inst.outcome_count());
    for (int o = 0; o < inst.outcome_count(); ++o) {
      w[o] = 0.0;
      for (int i = 0; i < inst.bidders; ++i) w[o] += inst.valuations[i][o];
      w[o] += inst.welfare[o].eval(inst.predictions_at(o));
      if (w[o] > w[oracle] ||
          (w[o] == w[oracle] && inst.outcomes[o] < inst.outcomes[oracle])) {
        oracle = o;
      }
    }
    if (chosen != oracle) ++mismatches;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST_F(Acceptance, C06_vcg_reduction) {
  GeneralSampler gs;
  gs.seed = 6;
  gs.welfare = GeneralSampler::Welfare::zero;
  const auto instances = sample_general_instances(gs, 100);
  ASSERT_GE(instances.size(), 100u);
  for (const auto& inst : instances) {
    const auto res = run_general(inst, {});
    for (int i = 0; i < inst.bidders; ++i) {
      // independent Clarke pivot: externality imposed on the others
      double w_minus = -std::numeric_limits<double>::infinity();
      for (int o = 0; o < inst.outcome_count(); ++o) {
        double s = 0.0;
        for (int j = 0; j < inst.bidders; ++j) {
          if (j != i) s += inst.valuations[j][o];
        }
        w_minus = std::max(w_minus, s);
      }
      double others_at_star = 0.0;
      for (int j = 0; j < inst.bidders; ++j) {
        if (j != i) others_at_star += inst.valuations[j][res.chosen_index];
      }
      const double clarke = w_minus - others_at_star;
      for (double t : res.transfers[i]) {
        EXPECT_NEAR(t, clarke, 1e-12);
      }
    }
  }
}

TEST_F(Acceptance, C07_convexity_necessity_demo) {
  // committed regression fixture: under g(p) = -(p - 1/2)^2 the winner gains
  // exactly 0.25 by reporting an endpoint quality and padding her value
  const std::vector<SingleSlotBid> fixture = {{5.0, 0.5}, {1.0, 0.5}};
  const auto reports = check_ic_single_slot(fixture, concave_counterexample_g(), 101);
  EXPECT_GT(reports[0].gap, 1e-3);
  EXPECT_NEAR(reports[0].gap, 0.25, 1e-12);
  EXPECT_EQ(reports[0].verdict, "IC_violated");
}

TEST_F(Acceptance, C08_threshold_guarantees) {
  const double alpha = 0.2, beta = 0.6, v_max = 10.0;
  const auto g = threshold_g(alpha, beta, v_max);
  std::mt19937_64 rng(88);
  int checked = 0;
  for (int k = 0; k < 500; ++k) {
    std::vector<SingleSlotBid> bids(uniform_int(rng, 2, 6));
    for (auto& b : bids) {
      b.value = uniform_in(rng, 0.0, v_max);
      b.quality = uniform01(rng);
    }
    // force the premise: someone has quality at least beta
    bids[0].quality = beta + (1.0 - beta) * uniform01(rng);
    const auto res = run_auction(bids, g);
    EXPECT_GE(bids[res.winner].quality, alpha);
    ++checked;
  }
  EXPECT_EQ(checked, 500);

  const auto witness = demo_no_approximation(alpha, beta, v_max);
  EXPECT_DOUBLE_EQ(witness.bound, (1.0 - alpha) / (beta - alpha) * v_max);
  EXPECT_DOUBLE_EQ(witness.bound, 20.0);
  EXPECT_EQ(witness.result.winner, 0);
  EXPECT_DOUBLE_EQ(witness.bids[0].value, 0.0);
  EXPECT_DOUBLE_EQ(witness.bids[0].quality, 1.0);
  EXPECT_NEAR(witness.result.adjusted_values[1], 19.99, 1e-12);
  EXPECT_TRUE(witness.quality_floor_ok);
}

TEST_F(Acceptance, C09_network_procurement) {
  std::mt19937_64 rng(77);
  int graphs = 0;
  while (graphs < 50) {
    // random graph with a guaranteed s-t backbone through all nodes
    NetworkProcurementSpec spec;
    const int n = uniform_int(rng, 4, 6);
    for (int i = 0; i < n; ++i) spec.nodes.push_back("n" + std::to_string(i));
    spec.source = "n0";
    spec.sink = "n" + std::to_string(n - 1);
    spec.failure_penalty = uniform_in(rng, 1.0, 10.0);
    int owner = 0;
    for (int i = 0; i + 1 < n; ++i) {
      spec.edges.push_back({"n" + std::to_string(i), "n" + std::to_string(i + 1), owner++,
                            uniform_in(rng, 0.0, 5.0), uniform_in(rng, 0.0, 0.5)});
    }
    for (int a = 0; a < n; ++a) {
      for (int b = a + 2; b < n; ++b) {
        if (uniform01(rng) < 0.3) {
          spec.edges.push_back({"n" + std::to_string(a), "n" + std::to_string(b), owner++,
                                uniform_in(rng, 0.0, 5.0), uniform_in(rng, 0.0, 0.5)});
        }
      }
    }
    ++graphs;

    const auto inst = build_network_instance(spec);
    const int chosen = select_outcome(inst);

    // independent enumeration: recompute cost + C * P(any failure) per path
    double best_cost = std::numeric_limits<double>::infinity();
    for (int o = 0; o < inst.outcome_count(); ++o) {
      double cost = 0.0, all_ok = 1.0;
      for (int i = 0; i < inst.bidders; ++i) {
        if (inst.states[i][o].size() == 2) {
          cost -= inst.valuations[i][o];
          all_ok *= 1.0 - spec.edges[i].failure_prob;
        }
      }
      best_cost = std::min(best_cost, cost + spec.failure_penalty * (1.0 - all_ok));
    }
    EXPECT_NEAR(-outcome_objective(inst, chosen), best_cost, 1e-9);

    for (const auto& rep : check_ic_network(spec, 21)) {
      EXPECT_LE(rep.gap, 1e-9);
    }
  }
  EXPECT_EQ(graphs, 50);
}

TEST_F(Acceptance, C10_principal_agent_obedience) {
  std::mt19937_64 rng(55);
  for (int k = 0; k < 100; ++k) {
    PrincipalAgentSpec spec;
    const int agents = uniform_int(rng, 1, 3);
    for (int i = 0; i < agents; ++i) {
      std::vector<EffortLevel> menu;
      const int efforts = uniform_int(rng, 1, 3);
      for (int e = 0; e < efforts; ++e) {
        menu.push_back({"e" + std::to_string(e), uniform_in(rng, 0.0, 3.0), uniform01(rng)});
      }
      spec.agents.push_back(std::move(menu));
    }
    spec.welfare_scale = uniform_in(rng, 0.0, 20.0);
    for (const auto& rep : principal_agent_obedience(spec)) {
      ASSERT_GE(rep.assigned_effort, 0);
      const double assigned = rep.utility_by_effort[rep.assigned_effort];
      for (double u : rep.utility_by_effort) {
        EXPECT_GE(assigned - u, -1e-9);
      }
    }
  }
}

TEST_F(Acceptance, C11_cli_determinism) {
  const auto dir = fs::temp_directory_path() / ("scoremech_acc_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto single = dir / "single.json";
  testutil::spit(single,
                 io::single_slot_to_json({{1.0, 0.2}, {0.5, 0.9}}, "acc").dump(2) + "\n");
  NetworkProcurementSpec net;
  net.id = "accnet";
  net.nodes = {"s", "a", "t"};
  net.edges = {{"s", "a", 0, 2.5, 0.0}, {"a", "t", 1, 2.5, 0.0}, {"s", "t", 2, 1.0, 0.5}};
  net.source = "s";
  net.sink = "t";
  net.failure_penalty = 10.0;
  const auto netfile = dir / "net.json";
  testutil::spit(netfile, io::network_to_json(net).dump(2) + "\n");
  const auto built = dir / "built.json";

  const std::vector<std::string> commands = {
      "run-single --instance " + single.string() + " --welfare square --seed 42",
      "verify-ic --instance " + single.string() + " --welfare threshold --grid 41 --seed 42",
      "verify-ic --instance " + single.string() +
          " --welfare square --grid 41 --seed 42 --format csv",
      "demo-threshold --param alpha=0.2 --param beta=0.6 --param v_max=10",
      "demo-negative --seed 42 --grid 41",
      "build-network --instance " + netfile.string() + " --out " + built.string(),
  };
  for (const auto& cmd : commands) {
    const auto a = testutil::run_cli(cmd);
    const auto b = testutil::run_cli(cmd);
    EXPECT_EQ(a.exit_code, b.exit_code) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
    ASSERT_EQ(a.exit_code, 0) << cmd << "\n" << a.err;
  }
  // seeded general run on the compiled network file
  const auto run_cmd = "run-general --instance " + built.string() + " --seed 42";
  const auto a = testutil::run_cli(run_cmd);
  const auto b = testutil::run_cli(run_cmd);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.exit_code, 0);
  fs::remove_all(dir);
}
