// Command-line front end: loads instance files, runs the auctions, drives the
// incentive-compatibility lab, and writes JSON/CSV reports.
//
// Exit codes: 0 success, 1 usage error, 2 unreadable/unparseable file,
// 3 schema or domain validation failure, 4 incentive violation under a
// welfare that claims convexity (a bug signal), 5 enumeration guard tripped.

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scoremech/ic_lab.hpp"
#include "scoremech/io.hpp"

namespace {

using scoremech::io::json;

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIcViolation = 4;
constexpr int kExitGuard = 5;

struct Options {
  std::string command;
  std::string instance_path;
  std::string welfare = "linear";
  std::vector<std::string> params;
  std::optional<std::uint64_t> seed;
  int grid = 101;
  std::string out_path;
  std::string format = "json";
};

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> params;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw scoremech::ValidationError("--param", "expected k=v, got '" + kv + "'");
    }
    try {
      params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw scoremech::ValidationError("--param", "'" + kv + "' has no numeric value");
    }
  }
  return params;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json config_echo(const Options& opt, bool with_welfare,
                 const std::map<std::string, double>& params) {
  json cfg;
  cfg["command"] = opt.command;
  if (!opt.instance_path.empty()) cfg["instance"] = opt.instance_path;
  if (with_welfare) cfg["welfare"] = {{"name", opt.welfare}, {"params", params}};
  if (opt.seed) {
    cfg["seed"] = *opt.seed;
  } else {
    cfg["seed"] = nullptr;
  }
  cfg["grid"] = opt.grid;
  cfg["format"] = opt.format;
  return cfg;
}

void emit(const Options& opt, const std::string& text) {
  if (opt.out_path.empty()) {
    std::cout << text;
  } else {
    scoremech::io::write_text_file(opt.out_path, text);
  }
}

void emit_json(const Options& opt, const json& report) {
  emit(opt, report.dump(2) + "\n");
}

scoremech::io::LoadedInstance load_kind(const Options& opt,
                                        scoremech::io::LoadedInstance::Kind kind,
                                        const char* expected) {
  auto li = scoremech::io::load_instance(opt.instance_path);
  if (li.kind != kind) {
    throw scoremech::ValidationError("kind", std::string("this command needs a ") + expected +
                                                 " instance");
  }
  return li;
}

int cmd_run_single(const Options& opt) {
  auto li = load_kind(opt, scoremech::io::LoadedInstance::Kind::single_slot, "single_slot");
  const auto params = parse_params(opt.params);
  const auto entry = scoremech::make_welfare(opt.welfare, params);
  const auto result = scoremech::run_auction(li.bids, entry.fn);

  json report;
  report["command"] = "run-single";
  report["config"] = config_echo(opt, true, entry.spec.parameters);
  report["instance_id"] = li.id;
  report["winner"] = result.winner;
  report["adjusted_values"] = result.adjusted_values;
  report["second_adjusted"] = result.second_adjusted;
  report["payment_if_purchase"] = result.payment_if_purchase;
  report["payment_if_no_purchase"] = result.payment_if_no_purchase;
  if (opt.seed) {
    const int purchase = scoremech::realize_purchase(li.bids[result.winner].quality, *opt.seed);
    report["realized"] = {
        {"purchase", purchase},
        {"payment", purchase ? result.payment_if_purchase : result.payment_if_no_purchase}};
  }
  emit_json(opt, report);
  return 0;
}

int cmd_run_general(const Options& opt) {
  auto li = load_kind(opt, scoremech::io::LoadedInstance::Kind::general, "general");
  const auto& inst = li.general;
  std::vector<int> realized;
  if (opt.seed) {
    // One engine, bidders in index order, inverse-CDF on the reported
    // prediction at the chosen outcome.
    const int ostar = scoremech::select_outcome(inst);
    std::mt19937_64 rng(*opt.seed);
    realized.resize(inst.bidders);
    for (int i = 0; i < inst.bidders; ++i) {
      const auto& p = inst.predictions[i][ostar];
      const double u = scoremech::uniform01(rng);
      double acc = 0.0;
      int chosen = static_cast<int>(p.size()) - 1;
      for (std::size_t s = 0; s < p.size(); ++s) {
        acc += p[s];
        if (u < acc) {
          chosen = static_cast<int>(s);
          break;
        }
      }
      realized[i] = chosen;
    }
  }
  const auto result = scoremech::run_general(inst, realized);

  json report;
  report["command"] = "run-general";
  report["config"] = config_echo(opt, false, {});
  report["instance_id"] = li.id;
  report["chosen_outcome"] = result.chosen_outcome;
  report["objective_value"] = result.objective_value;
  json table;
  for (int o = 0; o < inst.outcome_count(); ++o) {
    table[inst.outcomes[o]] = result.outcome_objectives[o];
  }
  report["outcome_objectives"] = std::move(table);
  report["counterfactuals"] = result.counterfactuals;
  json transfers = json::array();
  for (int i = 0; i < inst.bidders; ++i) {
    transfers.push_back({{"bidder", i},
                         {"states", inst.states[i][result.chosen_index]},
                         {"payments", result.transfers[i]}});
  }
  report["transfers"] = std::move(transfers);
  const bool custom_baseline = !inst.baselines.empty();
  report["baseline_policy"] = custom_baseline ? "custom" : "uniform";
  if (opt.seed) {
    json names = json::array();
    for (int i = 0; i < inst.bidders; ++i) {
      names.push_back(inst.states[i][result.chosen_index][result.realized_states[i]]);
    }
    report["realized"] = {{"states", std::move(names)},
                          {"payments", result.realized_payments}};
  }
  emit_json(opt, report);
  return 0;
}

json deviation_report_json(const scoremech::DeviationReport& r) {
  return json{{"bidder", r.bidder},
              {"truthful_utility", r.truthful_utility},
              {"best_deviation_utility", r.best_deviation_utility},
              {"best_values", r.best_values},
              {"best_predictions", r.best_predictions},
              {"gap", r.gap},
              {"value_grid_points", r.value_grid_points},
              {"simplex_grid_points", r.simplex_grid_points},
              {"verdict", r.verdict}};
}

int cmd_verify_ic(const Options& opt) {
  auto li = scoremech::io::load_instance(opt.instance_path);
  std::vector<scoremech::DeviationReport> reports;
  std::vector<bool> ir;
  bool convex_claim = true;
  json cfg;
  std::string kind;
  if (li.kind == scoremech::io::LoadedInstance::Kind::single_slot) {
    kind = "single_slot";
    const auto params = parse_params(opt.params);
    const auto entry = scoremech::make_welfare(opt.welfare, params);
    convex_claim = entry.spec.convexity_claim != scoremech::Convexity::non_convex;
    reports = scoremech::check_ic_single_slot(li.bids, entry.fn, opt.grid);
    ir = scoremech::check_ir_single_slot(li.bids, entry.fn);
    cfg = config_echo(opt, true, entry.spec.parameters);
  } else if (li.kind == scoremech::io::LoadedInstance::Kind::general) {
    kind = "general";
    for (const auto& w : li.general.welfare) {
      if (w.convexity_claim == scoremech::Convexity::non_convex) convex_claim = false;
    }
    // Scans run even on families that fail the slice test; that is the point
    // of verification.
    reports = scoremech::check_ic_general(li.general, opt.grid, 2000000,
                                          /*enforce_convexity=*/false);
    ir = scoremech::check_ir_general(li.general, /*enforce_convexity=*/false);
    cfg = config_echo(opt, false, {});
  } else {
    throw scoremech::ValidationError(
        "kind", "verify-ic needs a single_slot or general instance; compile network or "
                "principal_agent specs with build-network / build-principal-agent first");
  }

  int violations = 0;
  for (const auto& r : reports) {
    if (r.violated) ++violations;
  }

  if (opt.format == "csv") {
    std::string csv = "instance_id,bidder,truthful_utility,best_gap,verdict,seed,grid\n";
    for (const auto& r : reports) {
      csv += li.id + "," + std::to_string(r.bidder) + "," + format_double(r.truthful_utility) +
             "," + format_double(r.gap) + "," + r.verdict + "," +
             (opt.seed ? std::to_string(*opt.seed) : "") + "," + std::to_string(opt.grid) + "\n";
    }
    emit(opt, csv);
  } else {
    json report;
    report["command"] = "verify-ic";
    report["config"] = cfg;
    report["instance_id"] = li.id;
    report["instance_kind"] = kind;
    report["welfare_claims_convex"] = convex_claim;
    json rs = json::array();
    for (const auto& r : reports) rs.push_back(deviation_report_json(r));
    report["reports"] = std::move(rs);
    report["ir"] = ir;
    report["violations"] = violations;
    emit_json(opt, report);
  }
  if (violations > 0 && convex_claim) return kExitIcViolation;
  return 0;
}

int cmd_demo_threshold(const Options& opt) {
  const auto params = parse_params(opt.params);
  const double alpha = params.count("alpha") ? params.at("alpha") : 0.2;
  const double beta = params.count("beta") ? params.at("beta") : 0.6;
  const double v_max = params.count("v_max") ? params.at("v_max") : 10.0;
  const auto witness = scoremech::demo_no_approximation(alpha, beta, v_max);

  json report;
  report["command"] = "demo-threshold";
  report["config"] = config_echo(opt, false, {});
  report["welfare"] = {{"name", "threshold"},
                       {"params", {{"alpha", alpha}, {"beta", beta}, {"v_max", v_max}}}};
  report["bids"] = json::array();
  for (const auto& b : witness.bids) {
    report["bids"].push_back({{"value", b.value}, {"quality", b.quality}});
  }
  report["winner"] = witness.result.winner;
  report["adjusted_values"] = witness.result.adjusted_values;
  report["value_bound"] = witness.bound;
  report["quality_floor_ok"] = witness.quality_floor_ok;
  emit_json(opt, report);
  return 0;
}

int cmd_demo_negative(const Options& opt) {
  const auto g = scoremech::concave_counterexample_g();
  scoremech::InstanceSampler sampler;
  sampler.seed = opt.seed.value_or(42);
  sampler.min_bidders = 2;
  sampler.max_bidders = 4;

  json report;
  report["command"] = "demo-negative";
  report["config"] = config_echo(opt, false, {});
  report["welfare"] = {{"name", "concave_demo"}, {"params", json::object()}};
  const auto instances = scoremech::sample_instances(sampler, 200);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto reports = scoremech::check_ic_single_slot(instances[k], g, opt.grid);
    for (const auto& r : reports) {
      if (r.gap > 1e-3) {
        json bids = json::array();
        for (const auto& b : instances[k]) {
          bids.push_back({{"value", b.value}, {"quality", b.quality}});
        }
        report["witness"] = {{"instance_index", k},
                             {"bids", std::move(bids)},
                             {"report", deviation_report_json(r)}};
        report["found"] = true;
        emit_json(opt, report);
        return 0;
      }
    }
  }
  report["found"] = false;
  emit_json(opt, report);
  std::cerr << "demo-negative: no witness found (unexpected)\n";
  return kExitIcViolation;
}

int cmd_build_network(const Options& opt) {
  auto li = load_kind(opt, scoremech::io::LoadedInstance::Kind::network, "network");
  const auto inst = scoremech::build_network_instance(li.network);
  emit_json(opt, scoremech::io::general_to_json(inst));
  return 0;
}

int cmd_build_principal_agent(const Options& opt) {
  auto li = load_kind(opt, scoremech::io::LoadedInstance::Kind::principal_agent,
                      "principal_agent");
  const auto inst = scoremech::build_principal_agent_instance(li.principal_agent);
  emit_json(opt, scoremech::io::general_to_json(inst));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scoring-rule auctions: truthful deal selection and verification lab"};
  app.require_subcommand(1);

  Options opt;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool needs_instance) {
    if (needs_instance) {
      sub->add_option("--instance", opt.instance_path, "instance file (JSON)")->required();
    }
    sub->add_option("--seed", seed_value, "seed for realization draws")
        ->check(CLI::NonNegativeNumber)
        ->each([&](const std::string&) { opt.seed = seed_value; });
    sub->add_option("--out", opt.out_path, "write the report here instead of stdout");
    sub->add_option("--format", opt.format, "json or csv (csv: verify-ic only)")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--grid", opt.grid, "deviation grid resolution")
        ->check(CLI::Range(3, 100000));
  };
  auto add_welfare = [&](CLI::App* sub) {
    sub->add_option("--welfare", opt.welfare,
                    "catalog welfare: linear, square, threshold, concave_demo");
    sub->add_option("--param", opt.params, "welfare/demo parameter k=v (repeatable)");
  };

  auto* run_single = app.add_subcommand("run-single", "run the one-winner deals auction");
  add_common(run_single, true);
  add_welfare(run_single);

  auto* run_general = app.add_subcommand("run-general", "run the general mechanism");
  add_common(run_general, true);

  auto* verify = app.add_subcommand("verify-ic", "deviation-scan a loaded instance");
  add_common(verify, true);
  add_welfare(verify);

  auto* demo_t = app.add_subcommand("demo-threshold", "threshold welfare: quality floor vs value");
  add_common(demo_t, false);
  add_welfare(demo_t);

  auto* demo_n = app.add_subcommand("demo-negative", "find a misreport under a concave welfare");
  add_common(demo_n, false);

  auto* build_net = app.add_subcommand("build-network", "compile a network spec to general form");
  add_common(build_net, false);
  build_net->add_option("--instance", opt.instance_path, "network spec file (JSON)")->required();

  auto* build_pa =
      app.add_subcommand("build-principal-agent", "compile a principal-agent spec");
  add_common(build_pa, false);
  build_pa->add_option("--instance", opt.instance_path, "principal-agent spec file (JSON)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (opt.format == "csv" && !verify->parsed()) {
      throw scoremech::ValidationError("--format", "csv is only available for verify-ic");
    }
    if (run_single->parsed()) {
      opt.command = "run-single";
      return cmd_run_single(opt);
    }
    if (run_general->parsed()) {
      opt.command = "run-general";
      return cmd_run_general(opt);
    }
    if (verify->parsed()) {
      opt.command = "verify-ic";
      return cmd_verify_ic(opt);
    }
    if (demo_t->parsed()) {
      opt.command = "demo-threshold";
      return cmd_demo_threshold(opt);
    }
    if (demo_n->parsed()) {
      opt.command = "demo-negative";
      return cmd_demo_negative(opt);
    }
    if (build_net->parsed()) {
      opt.command = "build-network";
      return cmd_build_network(opt);
    }
    if (build_pa->parsed()) {
      opt.command = "build-principal-agent";
      return cmd_build_principal_agent(opt);
    }
  } catch (const scoremech::io::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const scoremech::GuardExceeded& e) {
    std::cerr << "guard exceeded: " << e.what() << "\n";
    return kExitGuard;
  } catch (const scoremech::NotComponentWiseConvex& e) {
    std::cerr << "rejected welfare: " << e.what() << "\n";
    return kExitValidation;
  } catch (const scoremech::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
