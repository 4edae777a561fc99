#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scoremech/general.hpp"

namespace scoremech {

inline constexpr int kOutcomeGuard = 10000;

// ---------------------------------------------------------------------------
// Reliable network procurement: buy an s-t path from edge owners who
// privately know their cost and failure probability.
// ---------------------------------------------------------------------------

struct NetworkEdge {
  std::string from;
  std::string to;
  int owner = 0;       // bidder index; one bidder per edge
  double cost = 0.0;
  double failure_prob = 0.0;
};

struct NetworkProcurementSpec {
  std::string id = "network";
  std::vector<std::string> nodes;
  std::vector<NetworkEdge> edges;  // undirected
  std::string source;
  std::string sink;
  double failure_penalty = 0.0;
};

namespace detail {

inline int node_index(const std::vector<std::string>& nodes, const std::string& name,
                      const std::string& field) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == name) return static_cast<int>(i);
  }
  throw ValidationError(field, "unknown node '" + name + "'");
}

inline void enumerate_paths(const std::vector<std::vector<std::pair<int, int>>>& adjacency,
                            int node, int sink, std::vector<bool>& visited,
                            std::vector<int>& edge_trail, std::vector<std::vector<int>>& paths) {
  if (node == sink) {
    paths.push_back(edge_trail);
    if (static_cast<int>(paths.size()) > kOutcomeGuard) {
      throw GuardExceeded("more than " + std::to_string(kOutcomeGuard) + " s-t paths");
    }
    return;
  }
  for (const auto& [next, edge] : adjacency[node]) {
    if (visited[next]) continue;
    visited[next] = true;
    edge_trail.push_back(edge);
    enumerate_paths(adjacency, next, sink, visited, edge_trail, paths);
    edge_trail.pop_back();
    visited[next] = false;
  }
}

inline std::string path_outcome_id(const std::vector<int>& edge_trail) {
  std::string id = "path:";
  for (std::size_t k = 0; k < edge_trail.size(); ++k) {
    if (k > 0) id += ",";
    id += std::to_string(edge_trail[k]);
  }
  return id;
}

}  // namespace detail

inline void validate_network_spec(const NetworkProcurementSpec& spec) {
  if (spec.nodes.empty()) throw ValidationError("nodes", "empty node list");
  if (spec.edges.empty()) throw ValidationError("edges", "empty edge list");
  detail::node_index(spec.nodes, spec.source, "source");
  detail::node_index(spec.nodes, spec.sink, "sink");
  if (spec.source == spec.sink) throw ValidationError("sink", "source and sink coincide");
  if (spec.failure_penalty < 0.0) throw ValidationError("failure_penalty", "must be >= 0");
  std::set<int> owners;
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const std::string fe = "edges[" + std::to_string(e) + "]";
    detail::node_index(spec.nodes, spec.edges[e].from, fe + ".from");
    detail::node_index(spec.nodes, spec.edges[e].to, fe + ".to");
    if (spec.edges[e].cost < 0.0) throw ValidationError(fe + ".cost", "must be >= 0");
    checked_probability(spec.edges[e].failure_prob, fe + ".failure_prob");
    if (spec.edges[e].owner < 0 || spec.edges[e].owner >= static_cast<int>(spec.edges.size()) ||
        !owners.insert(spec.edges[e].owner).second) {
      throw ValidationError(fe + ".owner", "owners must be distinct bidder indices 0..edges-1");
    }
  }
}

// All simple s-t paths of the (undirected) graph, as edge-index sequences in
// DFS order. Guarded at kOutcomeGuard paths.
inline std::vector<std::vector<int>> enumerate_simple_paths(const NetworkProcurementSpec& spec) {
  const int n = static_cast<int>(spec.nodes.size());
  std::vector<std::vector<std::pair<int, int>>> adjacency(n);
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const int a = detail::node_index(spec.nodes, spec.edges[e].from, "edges.from");
    const int b = detail::node_index(spec.nodes, spec.edges[e].to, "edges.to");
    adjacency[a].push_back({b, static_cast<int>(e)});
    adjacency[b].push_back({a, static_cast<int>(e)});
  }
  const int s = detail::node_index(spec.nodes, spec.source, "source");
  const int t = detail::node_index(spec.nodes, spec.sink, "sink");
  std::vector<bool> visited(n, false);
  visited[s] = true;
  std::vector<int> trail;
  std::vector<std::vector<int>> paths;
  detail::enumerate_paths(adjacency, s, t, visited, trail, paths);
  if (paths.empty()) throw ValidationError("edges", "no path from source to sink");
  return paths;
}

// Outcomes are simple s-t paths; an edge owner values a path at minus her
// cost when her edge is used; welfare charges the penalty times the
// probability that any used edge fails. Linear in every failure report, so
// the mechanism applies.
inline GeneralInstance build_network_instance(const NetworkProcurementSpec& spec) {
  validate_network_spec(spec);
  const auto paths = enumerate_simple_paths(spec);
  const int m = static_cast<int>(spec.edges.size());
  const int O = static_cast<int>(paths.size());

  GeneralInstance inst;
  inst.id = spec.id;
  inst.bidders = m;
  inst.outcomes.resize(O);
  inst.valuations.assign(m, std::vector<double>(O, 0.0));
  inst.states.assign(m, std::vector<std::vector<std::string>>(O));
  inst.predictions.assign(m, std::vector<std::vector<double>>(O));
  inst.welfare.resize(O);

  std::vector<int> owner_of_edge(m);
  for (int e = 0; e < m; ++e) owner_of_edge[e] = spec.edges[e].owner;

  for (int o = 0; o < O; ++o) {
    inst.outcomes[o] = detail::path_outcome_id(paths[o]);
    std::vector<bool> on_path(m, false);
    std::vector<int> on_path_bidders;
    for (int e : paths[o]) on_path[e] = true;
    for (int e = 0; e < m; ++e) {
      const int i = owner_of_edge[e];
      if (on_path[e]) {
        inst.valuations[i][o] = -spec.edges[e].cost;
        inst.states[i][o] = {"fail", "succeed"};
        const double q = checked_probability(spec.edges[e].failure_prob, "failure_prob");
        inst.predictions[i][o] = {q, 1.0 - q};
        on_path_bidders.push_back(i);
      } else {
        inst.states[i][o] = {"off_path"};
        inst.predictions[i][o] = {1.0};
      }
    }
    std::sort(on_path_bidders.begin(), on_path_bidders.end());
    inst.welfare[o] = failure_penalty_welfare(spec.failure_penalty, on_path_bidders, 1);
  }
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------
// Delay variant: edges carry a probabilistic delay; the buyer's cost of delay
// is concave, so its negation is a valid welfare.
// ---------------------------------------------------------------------------

struct DelayEdge {
  std::string from;
  std::string to;
  int owner = 0;
  double cost = 0.0;
  std::vector<std::pair<double, double>> delay_dist;  // (delay, probability)
};

struct DelayNetworkSpec {
  std::string id = "delay_network";
  std::vector<std::string> nodes;
  std::vector<DelayEdge> edges;
  std::string source;
  std::string sink;
  std::function<double(double)> delay_cost;
  std::string delay_cost_name = "custom";
};

// Midpoint concavity test on a grid spanning the union of delay supports.
inline void verify_concave_on_hull(const std::function<double(double)>& f, double lo, double hi,
                                   const std::string& name) {
  if (!(hi >= lo)) throw ValidationError("delay_dist", "empty delay support");
  const int kPoints = 21;
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i) grid[i] = lo + (hi - lo) * i / (kPoints - 1);
  for (double a : grid) {
    for (double b : grid) {
      if (f(0.5 * (a + b)) < 0.5 * (f(a) + f(b)) - 1e-9) {
        throw ValidationError("delay_cost",
                              "'" + name + "' is not concave on the delay support hull");
      }
    }
  }
}

// Same path outcomes as the failure model; states are the delay support of
// each used edge and welfare subtracts the expected delay cost, edge by
// edge. A non-concave delay cost is rejected up front: its negation would
// not be a usable welfare.
inline GeneralInstance build_delay_instance(const DelayNetworkSpec& spec) {
  NetworkProcurementSpec skeleton;
  skeleton.id = spec.id;
  skeleton.nodes = spec.nodes;
  skeleton.source = spec.source;
  skeleton.sink = spec.sink;
  skeleton.failure_penalty = 0.0;
  for (const auto& e : spec.edges) skeleton.edges.push_back({e.from, e.to, e.owner, e.cost, 0.0});
  validate_network_spec(skeleton);
  if (!spec.delay_cost) throw ValidationError("delay_cost", "missing");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const std::string fe = "edges[" + std::to_string(e) + "].delay_dist";
    if (spec.edges[e].delay_dist.empty()) throw ValidationError(fe, "empty delay support");
    std::vector<double> probs;
    for (const auto& [delay, prob] : spec.edges[e].delay_dist) {
      lo = std::min(lo, delay);
      hi = std::max(hi, delay);
      probs.push_back(prob);
    }
    checked_simplex(probs, fe);
  }
  verify_concave_on_hull(spec.delay_cost, lo, hi, spec.delay_cost_name);

  const auto paths = enumerate_simple_paths(skeleton);
  const int m = static_cast<int>(spec.edges.size());
  const int O = static_cast<int>(paths.size());

  GeneralInstance inst;
  inst.id = spec.id;
  inst.bidders = m;
  inst.outcomes.resize(O);
  inst.valuations.assign(m, std::vector<double>(O, 0.0));
  inst.states.assign(m, std::vector<std::vector<std::string>>(O));
  inst.predictions.assign(m, std::vector<std::vector<double>>(O));
  inst.welfare.resize(O);

  for (int o = 0; o < O; ++o) {
    inst.outcomes[o] = detail::path_outcome_id(paths[o]);
    std::vector<bool> on_path(m, false);
    for (int e : paths[o]) on_path[e] = true;
    std::vector<std::vector<double>> weights(m);
    for (int e = 0; e < m; ++e) {
      const int i = spec.edges[e].owner;
      if (on_path[e]) {
        inst.valuations[i][o] = -spec.edges[e].cost;
        const auto& dist = spec.edges[e].delay_dist;
        std::vector<std::string> labels(dist.size());
        std::vector<double> probs(dist.size());
        std::vector<double> row(dist.size());
        for (std::size_t s = 0; s < dist.size(); ++s) {
          labels[s] = "d" + std::to_string(s);
          probs[s] = dist[s].second;
          row[s] = -spec.delay_cost(dist[s].first);
        }
        inst.states[i][o] = labels;
        inst.predictions[i][o] = probs;
        weights[i] = row;
      } else {
        inst.states[i][o] = {"off_path"};
        inst.predictions[i][o] = {1.0};
      }
    }
    inst.welfare[o] = expected_sum_welfare(weights);
  }
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------
// Principal-agent effort assignment with observable success signals.
// ---------------------------------------------------------------------------

struct EffortLevel {
  std::string name;
  double cost = 0.0;
  double success_prob = 0.0;
};

struct PrincipalAgentSpec {
  std::string id = "principal_agent";
  std::vector<std::vector<EffortLevel>> agents;  // effort menu per agent
  double welfare_scale = 1.0;  // project pays scale * P(all hired agents succeed)
};

inline void validate_principal_agent_spec(const PrincipalAgentSpec& spec) {
  if (spec.agents.empty()) throw ValidationError("agents", "empty agent list");
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    const std::string fa = "agents[" + std::to_string(i) + "]";
    if (spec.agents[i].empty()) throw ValidationError(fa, "agent needs at least one effort level");
    std::set<std::string> names;
    for (std::size_t e = 0; e < spec.agents[i].size(); ++e) {
      const std::string fe = fa + ".efforts[" + std::to_string(e) + "]";
      if (spec.agents[i][e].name.empty() || !names.insert(spec.agents[i][e].name).second) {
        throw ValidationError(fe + ".name", "effort names must be distinct and non-empty");
      }
      if (spec.agents[i][e].cost < 0.0) throw ValidationError(fe + ".cost", "must be >= 0");
      checked_probability(spec.agents[i][e].success_prob, fe + ".success_prob");
    }
  }
}

// Outcomes assign each agent either "-" (not hired) or one of her effort
// levels. A hired agent values an outcome at minus the effort cost; welfare
// pays welfare_scale times the probability that every hired agent succeeds.
inline GeneralInstance build_principal_agent_instance(const PrincipalAgentSpec& spec) {
  validate_principal_agent_spec(spec);
  const int m = static_cast<int>(spec.agents.size());
  long long combos = 1;
  for (const auto& menu : spec.agents) {
    combos *= static_cast<long long>(menu.size()) + 1;
    if (combos > kOutcomeGuard) {
      throw GuardExceeded("more than " + std::to_string(kOutcomeGuard) + " effort assignments");
    }
  }

  GeneralInstance inst;
  inst.id = spec.id;
  inst.bidders = m;
  const int O = static_cast<int>(combos);
  inst.outcomes.resize(O);
  inst.valuations.assign(m, std::vector<double>(O, 0.0));
  inst.states.assign(m, std::vector<std::vector<std::string>>(O));
  inst.predictions.assign(m, std::vector<std::vector<double>>(O));
  inst.welfare.resize(O);

  std::vector<int> choice(m, -1);  // -1 = skip, otherwise effort index
  for (int o = 0; o < O; ++o) {
    std::string id;
    std::vector<int> hired;
    for (int i = 0; i < m; ++i) {
      if (i > 0) id += ",";
      id += "a" + std::to_string(i) + "=";
      if (choice[i] < 0) {
        id += "-";
        inst.states[i][o] = {"idle"};
        inst.predictions[i][o] = {1.0};
      } else {
        const auto& effort = spec.agents[i][choice[i]];
        id += effort.name;
        inst.valuations[i][o] = -effort.cost;
        inst.states[i][o] = {"fail", "succeed"};
        const double p = checked_probability(effort.success_prob, "success_prob");
        inst.predictions[i][o] = {1.0 - p, p};
        hired.push_back(i);
      }
    }
    inst.outcomes[o] = id;
    inst.welfare[o] = all_succeed_bonus_welfare(spec.welfare_scale, hired, 1);
    // odometer: advance the assignment
    for (int i = m - 1; i >= 0; --i) {
      if (++choice[i] < static_cast<int>(spec.agents[i].size())) break;
      choice[i] = -1;
    }
  }
  inst.validate();
  return inst;
}

// Expected utilities a hired agent gets from each effort level she could
// actually exert, given the payment schedule of the chosen outcome. The
// mechanism is obedient when the assigned effort tops each list.
struct ObedienceReport {
  int agent = 0;
  int assigned_effort = -1;                  // index into the agent's menu
  std::vector<double> utility_by_effort;     // one entry per menu effort
};

inline std::vector<ObedienceReport> principal_agent_obedience(const PrincipalAgentSpec& spec) {
  const auto inst = build_principal_agent_instance(spec);
  const auto result = run_general(inst, {});
  std::vector<ObedienceReport> reports;
  const std::string& id = result.chosen_outcome;
  for (int i = 0; i < inst.bidders; ++i) {
    if (inst.states[i][result.chosen_index].size() != 2) continue;  // not hired
    ObedienceReport rep;
    rep.agent = i;
    // recover the assigned effort from the outcome id
    const std::string tag = "a" + std::to_string(i) + "=";
    const auto pos = id.find(tag);
    const auto end = id.find(',', pos);
    const std::string name = id.substr(pos + tag.size(), end == std::string::npos
                                                              ? std::string::npos
                                                              : end - pos - tag.size());
    const auto& transfers = result.transfers[i];
    for (std::size_t e = 0; e < spec.agents[i].size(); ++e) {
      const auto& effort = spec.agents[i][e];
      if (effort.name == name) rep.assigned_effort = static_cast<int>(e);
      const double p = effort.success_prob;
      const double expected_payment = (1.0 - p) * transfers[0] + p * transfers[1];
      rep.utility_by_effort.push_back(-effort.cost - expected_payment);
    }
    reports.push_back(rep);
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Daily deals where quality splits between merchant and platform signals.
// ---------------------------------------------------------------------------

struct SplitInfoMerchant {
  double display_value = 0.0;    // value of being shown at all
  double per_purchase_value = 0.0;
  double merchant_signal = 0.0;
};

struct SplitInfoDealSpec {
  std::string id = "split_info";
  std::vector<SplitInfoMerchant> merchants;
  std::vector<double> platform_signals;  // one per merchant
  // Purchase probability of merchant i under assignment index o.
  std::function<double(int assignment, int merchant, double x, double y)> quality_model;
  std::string welfare_name = "linear";
  std::map<std::string, double> welfare_params;
};

// Compiles slot assignments into a general instance: the platform computes
// each included merchant's purchase probability from the two signals, sets
// her valuation to display value plus expected purchase value, and applies
// the named catalog welfare to each shown deal's purchase probability.
// Baselines are pinned to "no sale" so that removing a merchant values her
// slot at g(0), matching the one-winner auction's zero reserve.
inline GeneralInstance build_split_info_instance(const SplitInfoDealSpec& spec,
                                                 const std::vector<std::vector<int>>& assignments) {
  const int m = static_cast<int>(spec.merchants.size());
  if (m == 0) throw ValidationError("merchants", "empty merchant list");
  if (static_cast<int>(spec.platform_signals.size()) != m) {
    throw ValidationError("platform_signals", "need one signal per merchant");
  }
  if (!spec.quality_model) throw ValidationError("quality_model", "missing");
  if (assignments.empty()) throw ValidationError("assignments", "empty assignment list");

  const int O = static_cast<int>(assignments.size());
  GeneralInstance inst;
  inst.id = spec.id;
  inst.bidders = m;
  inst.outcomes.resize(O);
  inst.valuations.assign(m, std::vector<double>(O, 0.0));
  inst.states.assign(m, std::vector<std::vector<std::string>>(O));
  inst.predictions.assign(m, std::vector<std::vector<double>>(O));
  inst.baselines.assign(m, std::vector<std::vector<double>>(O));
  inst.welfare.resize(O);

  for (int o = 0; o < O; ++o) {
    std::string id = "slots[";
    std::vector<int> included = assignments[o];
    std::sort(included.begin(), included.end());
    for (std::size_t k = 0; k < included.size(); ++k) {
      if (included[k] < 0 || included[k] >= m) {
        throw ValidationError("assignments[" + std::to_string(o) + "]", "merchant index out of range");
      }
      if (k > 0) id += ",";
      id += std::to_string(included[k]);
    }
    id += "]";
    inst.outcomes[o] = id;
    std::vector<bool> shown(m, false);
    for (int i : included) shown[i] = true;
    for (int i = 0; i < m; ++i) {
      if (shown[i]) {
        const double f = spec.quality_model(o, i, spec.merchants[i].merchant_signal,
                                            spec.platform_signals[i]);
        if (!is_probability(f)) {
          throw ValidationError("quality_model", "returned " + std::to_string(f) +
                                                     " outside [0,1]");
        }
        inst.valuations[i][o] =
            spec.merchants[i].display_value + f * spec.merchants[i].per_purchase_value;
        inst.states[i][o] = {"no_sale", "sale"};
        inst.predictions[i][o] = {1.0 - f, f};
        inst.baselines[i][o] = {1.0, 0.0};
      } else {
        inst.states[i][o] = {"out"};
        inst.predictions[i][o] = {1.0};
        inst.baselines[i][o] = {1.0};
      }
    }
    inst.welfare[o] = binary_catalog_welfare(spec.welfare_name, spec.welfare_params, included, 1);
  }
  inst.validate();
  return inst;
}

}  // namespace scoremech
