#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scoremech/applications.hpp"
#include "scoremech/general.hpp"
#include "scoremech/single_slot.hpp"

namespace scoremech::io {

using json = nlohmann::ordered_json;

// Unreadable file or malformed JSON (distinct from schema violations, which
// raise ValidationError with a field path).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(path.empty() ? key : path + "." + key, "missing field");
  }
  return j.at(key);
}

inline std::string field(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  return j.get<double>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> as_number_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::vector<int> as_int_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) {
      throw ValidationError(path + "[" + std::to_string(i) + "]", "expected an integer");
    }
    out.push_back(j[i].get<int>());
  }
  return out;
}

inline std::map<std::string, double> as_param_map(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object of numbers");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = as_number(v, path + "." + k);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Welfare families.
// ---------------------------------------------------------------------------

inline OutcomeWelfare parse_welfare_family(const json& j, const std::string& path) {
  const std::string family = detail::as_string(detail::require(j, "family", path),
                                               detail::field(path, "family"));
  if (family == "zero") return zero_welfare();
  if (family == "expected_sum") {
    const auto& w = detail::require(j, "weights", path);
    if (!w.is_array()) throw ValidationError(detail::field(path, "weights"), "expected an array");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < w.size(); ++i) {
      rows.push_back(detail::as_number_array(w[i], detail::field(path, "weights") + "[" +
                                                       std::to_string(i) + "]"));
    }
    return expected_sum_welfare(std::move(rows));
  }
  if (family == "product_pair") {
    const double scale = detail::as_number(detail::require(j, "scale", path),
                                           detail::field(path, "scale"));
    auto bidders = detail::as_int_array(detail::require(j, "bidders", path),
                                        detail::field(path, "bidders"));
    if (bidders.size() != 2) {
      throw ValidationError(detail::field(path, "bidders"), "product_pair needs two bidders");
    }
    const int state = j.contains("state") ? j.at("state").get<int>() : 1;
    return product_form_g(scale, {bidders[0], bidders[1]}, state);
  }
  if (family == "binary_catalog") {
    const std::string name = detail::as_string(detail::require(j, "name", path),
                                               detail::field(path, "name"));
    std::map<std::string, double> params;
    if (j.contains("params")) params = detail::as_param_map(j.at("params"),
                                                            detail::field(path, "params"));
    auto bidders = detail::as_int_array(detail::require(j, "bidders", path),
                                        detail::field(path, "bidders"));
    const int state = j.contains("state") ? j.at("state").get<int>() : 1;
    return binary_catalog_welfare(name, params, std::move(bidders), state);
  }
  if (family == "failure_penalty") {
    const double penalty = detail::as_number(detail::require(j, "penalty", path),
                                             detail::field(path, "penalty"));
    auto bidders = detail::as_int_array(detail::require(j, "bidders", path),
                                        detail::field(path, "bidders"));
    const int state = j.contains("state") ? j.at("state").get<int>() : 1;
    return failure_penalty_welfare(penalty, std::move(bidders), state);
  }
  if (family == "all_succeed_bonus") {
    const double scale = detail::as_number(detail::require(j, "scale", path),
                                           detail::field(path, "scale"));
    auto bidders = detail::as_int_array(detail::require(j, "bidders", path),
                                        detail::field(path, "bidders"));
    const int state = j.contains("state") ? j.at("state").get<int>() : 1;
    return all_succeed_bonus_welfare(scale, std::move(bidders), state);
  }
  throw ValidationError(detail::field(path, "family"), "unknown welfare family '" + family + "'");
}

inline json welfare_family_to_json(const OutcomeWelfare& w) {
  json j;
  j["family"] = w.family;
  if (w.family == "expected_sum") {
    j["weights"] = w.weights;
  } else if (w.family == "product_pair") {
    j["scale"] = w.params.at("scale");
    j["bidders"] = w.bidders;
    j["state"] = w.state;
  } else if (w.family == "binary_catalog") {
    j["name"] = w.catalog_name;
    j["params"] = w.params;
    j["bidders"] = w.bidders;
    j["state"] = w.state;
  } else if (w.family == "failure_penalty") {
    j["penalty"] = w.params.at("penalty");
    j["bidders"] = w.bidders;
    j["state"] = w.state;
  } else if (w.family == "all_succeed_bonus") {
    j["scale"] = w.params.at("scale");
    j["bidders"] = w.bidders;
    j["state"] = w.state;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Instances.
// ---------------------------------------------------------------------------

struct LoadedInstance {
  enum class Kind { single_slot, general, network, principal_agent } kind = Kind::single_slot;
  std::string id;
  std::vector<SingleSlotBid> bids;
  GeneralInstance general;
  NetworkProcurementSpec network;
  PrincipalAgentSpec principal_agent;
};

inline std::vector<SingleSlotBid> parse_single_slot_bids(const json& j) {
  const auto& arr = detail::require(j, "bids", "");
  if (!arr.is_array() || arr.empty()) throw ValidationError("bids", "expected a non-empty array");
  std::vector<SingleSlotBid> bids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "bids[" + std::to_string(i) + "]";
    SingleSlotBid b;
    b.value = detail::as_number(detail::require(arr[i], "value", path), path + ".value");
    b.quality = detail::as_number(detail::require(arr[i], "quality", path), path + ".quality");
    if (!std::isfinite(b.value)) throw ValidationError(path + ".value", "must be finite");
    checked_probability(b.quality, path + ".quality");
    bids.push_back(b);
  }
  return bids;
}

inline GeneralInstance parse_general_instance(const json& j) {
  GeneralInstance inst;
  inst.id = j.contains("id") ? detail::as_string(j.at("id"), "id") : "general";
  const auto& outs = detail::require(j, "outcomes", "");
  if (!outs.is_array() || outs.empty()) {
    throw ValidationError("outcomes", "expected a non-empty array");
  }
  for (std::size_t o = 0; o < outs.size(); ++o) {
    inst.outcomes.push_back(detail::as_string(outs[o], "outcomes[" + std::to_string(o) + "]"));
  }
  const auto& bidders = detail::require(j, "bidders", "");
  if (!bidders.is_array() || bidders.empty()) {
    throw ValidationError("bidders", "expected a non-empty array");
  }
  inst.bidders = static_cast<int>(bidders.size());
  const int O = inst.outcome_count();
  inst.valuations.assign(inst.bidders, std::vector<double>(O, 0.0));
  inst.states.assign(inst.bidders, std::vector<std::vector<std::string>>(O));
  inst.predictions.assign(inst.bidders, std::vector<std::vector<double>>(O));
  bool any_baseline = false;
  std::vector<std::vector<std::vector<double>>> baselines(
      inst.bidders, std::vector<std::vector<double>>(O));
  for (int i = 0; i < inst.bidders; ++i) {
    const std::string bp = "bidders[" + std::to_string(i) + "]";
    const auto& vals = detail::require(bidders[i], "valuations", bp);
    const auto& states = detail::require(bidders[i], "states", bp);
    const auto& preds = detail::require(bidders[i], "predictions", bp);
    for (int o = 0; o < O; ++o) {
      const std::string& oid = inst.outcomes[o];
      inst.valuations[i][o] = detail::as_number(detail::require(vals, oid, bp + ".valuations"),
                                                bp + ".valuations." + oid);
      const auto& st = detail::require(states, oid, bp + ".states");
      if (!st.is_array() || st.empty()) {
        throw ValidationError(bp + ".states." + oid, "expected a non-empty array");
      }
      for (std::size_t s = 0; s < st.size(); ++s) {
        inst.states[i][o].push_back(
            detail::as_string(st[s], bp + ".states." + oid + "[" + std::to_string(s) + "]"));
      }
      inst.predictions[i][o] = detail::as_number_array(
          detail::require(preds, oid, bp + ".predictions"), bp + ".predictions." + oid);
      if (bidders[i].contains("baselines") && bidders[i].at("baselines").contains(oid)) {
        baselines[i][o] = detail::as_number_array(bidders[i].at("baselines").at(oid),
                                                  bp + ".baselines." + oid);
        any_baseline = true;
      }
    }
  }
  if (any_baseline) inst.baselines = std::move(baselines);
  const auto& welfare = detail::require(j, "welfare", "");
  inst.welfare.resize(O);
  for (int o = 0; o < O; ++o) {
    inst.welfare[o] = parse_welfare_family(detail::require(welfare, inst.outcomes[o], "welfare"),
                                           "welfare." + inst.outcomes[o]);
  }
  inst.validate();
  return inst;
}

inline NetworkProcurementSpec parse_network_spec(const json& j) {
  NetworkProcurementSpec spec;
  spec.id = j.contains("id") ? detail::as_string(j.at("id"), "id") : "network";
  const auto& nodes = detail::require(j, "nodes", "");
  if (!nodes.is_array()) throw ValidationError("nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    spec.nodes.push_back(detail::as_string(nodes[i], "nodes[" + std::to_string(i) + "]"));
  }
  const auto& edges = detail::require(j, "edges", "");
  if (!edges.is_array()) throw ValidationError("edges", "expected an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string ep = "edges[" + std::to_string(e) + "]";
    NetworkEdge edge;
    edge.from = detail::as_string(detail::require(edges[e], "from", ep), ep + ".from");
    edge.to = detail::as_string(detail::require(edges[e], "to", ep), ep + ".to");
    const auto& owner = detail::require(edges[e], "owner", ep);
    if (!owner.is_number_integer()) throw ValidationError(ep + ".owner", "expected an integer");
    edge.owner = owner.get<int>();
    edge.cost = detail::as_number(detail::require(edges[e], "cost", ep), ep + ".cost");
    edge.failure_prob = detail::as_number(detail::require(edges[e], "failure_prob", ep),
                                          ep + ".failure_prob");
    spec.edges.push_back(edge);
  }
  spec.source = detail::as_string(detail::require(j, "source", ""), "source");
  spec.sink = detail::as_string(detail::require(j, "sink", ""), "sink");
  spec.failure_penalty = detail::as_number(detail::require(j, "failure_penalty", ""),
                                           "failure_penalty");
  validate_network_spec(spec);
  return spec;
}

inline PrincipalAgentSpec parse_principal_agent_spec(const json& j) {
  PrincipalAgentSpec spec;
  spec.id = j.contains("id") ? detail::as_string(j.at("id"), "id") : "principal_agent";
  const auto& agents = detail::require(j, "agents", "");
  if (!agents.is_array()) throw ValidationError("agents", "expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string ap = "agents[" + std::to_string(i) + "]";
    const auto& efforts = detail::require(agents[i], "efforts", ap);
    if (!efforts.is_array()) throw ValidationError(ap + ".efforts", "expected an array");
    std::vector<EffortLevel> menu;
    for (std::size_t e = 0; e < efforts.size(); ++e) {
      const std::string fp = ap + ".efforts[" + std::to_string(e) + "]";
      EffortLevel lvl;
      lvl.name = detail::as_string(detail::require(efforts[e], "name", fp), fp + ".name");
      lvl.cost = detail::as_number(detail::require(efforts[e], "cost", fp), fp + ".cost");
      lvl.success_prob = detail::as_number(detail::require(efforts[e], "success_prob", fp),
                                           fp + ".success_prob");
      menu.push_back(lvl);
    }
    spec.agents.push_back(std::move(menu));
  }
  spec.welfare_scale = detail::as_number(detail::require(j, "welfare_scale", ""),
                                         "welfare_scale");
  validate_principal_agent_spec(spec);
  return spec;
}

inline LoadedInstance parse_instance(const json& j) {
  const std::string kind = detail::as_string(detail::require(j, "kind", ""), "kind");
  LoadedInstance li;
  if (kind == "single_slot") {
    li.kind = LoadedInstance::Kind::single_slot;
    li.id = j.contains("id") ? detail::as_string(j.at("id"), "id") : "single_slot";
    li.bids = parse_single_slot_bids(j);
  } else if (kind == "general") {
    li.kind = LoadedInstance::Kind::general;
    li.general = parse_general_instance(j);
    li.id = li.general.id;
  } else if (kind == "network") {
    li.kind = LoadedInstance::Kind::network;
    li.network = parse_network_spec(j);
    li.id = li.network.id;
  } else if (kind == "principal_agent") {
    li.kind = LoadedInstance::Kind::principal_agent;
    li.principal_agent = parse_principal_agent_spec(j);
    li.id = li.principal_agent.id;
  } else {
    throw ValidationError("kind", "unknown instance kind '" + kind + "'");
  }
  return li;
}

inline LoadedInstance load_instance(const std::string& path) {
  return parse_instance(read_json_file(path));
}

inline json single_slot_to_json(const std::vector<SingleSlotBid>& bids, const std::string& id) {
  json j;
  j["kind"] = "single_slot";
  j["id"] = id;
  j["bids"] = json::array();
  for (const auto& b : bids) j["bids"].push_back({{"value", b.value}, {"quality", b.quality}});
  return j;
}

inline json general_to_json(const GeneralInstance& inst) {
  json j;
  j["kind"] = "general";
  j["id"] = inst.id;
  j["outcomes"] = inst.outcomes;
  j["bidders"] = json::array();
  for (int i = 0; i < inst.bidders; ++i) {
    json b;
    json vals, states, preds, bases;
    bool any_base = false;
    for (int o = 0; o < inst.outcome_count(); ++o) {
      const std::string& oid = inst.outcomes[o];
      vals[oid] = inst.valuations[i][o];
      states[oid] = inst.states[i][o];
      preds[oid] = inst.predictions[i][o];
      if (!inst.baselines.empty() && !inst.baselines[i].empty() &&
          !inst.baselines[i][o].empty()) {
        bases[oid] = inst.baselines[i][o];
        any_base = true;
      }
    }
    b["valuations"] = std::move(vals);
    b["states"] = std::move(states);
    b["predictions"] = std::move(preds);
    if (any_base) b["baselines"] = std::move(bases);
    j["bidders"].push_back(std::move(b));
  }
  json welfare;
  for (int o = 0; o < inst.outcome_count(); ++o) {
    welfare[inst.outcomes[o]] = welfare_family_to_json(inst.welfare[o]);
  }
  j["welfare"] = std::move(welfare);
  return j;
}

inline json network_to_json(const NetworkProcurementSpec& spec) {
  json j;
  j["kind"] = "network";
  j["id"] = spec.id;
  j["nodes"] = spec.nodes;
  j["edges"] = json::array();
  for (const auto& e : spec.edges) {
    j["edges"].push_back({{"from", e.from},
                          {"to", e.to},
                          {"owner", e.owner},
                          {"cost", e.cost},
                          {"failure_prob", e.failure_prob}});
  }
  j["source"] = spec.source;
  j["sink"] = spec.sink;
  j["failure_penalty"] = spec.failure_penalty;
  return j;
}

inline json principal_agent_to_json(const PrincipalAgentSpec& spec) {
  json j;
  j["kind"] = "principal_agent";
  j["id"] = spec.id;
  j["agents"] = json::array();
  for (const auto& menu : spec.agents) {
    json efforts = json::array();
    for (const auto& e : menu) {
      efforts.push_back({{"name", e.name}, {"cost", e.cost}, {"success_prob", e.success_prob}});
    }
    j["agents"].push_back({{"efforts", std::move(efforts)}});
  }
  j["welfare_scale"] = spec.welfare_scale;
  return j;
}

inline json instance_to_json(const LoadedInstance& li) {
  switch (li.kind) {
    case LoadedInstance::Kind::single_slot: return single_slot_to_json(li.bids, li.id);
    case LoadedInstance::Kind::general: return general_to_json(li.general);
    case LoadedInstance::Kind::network: return network_to_json(li.network);
    case LoadedInstance::Kind::principal_agent: return principal_agent_to_json(li.principal_agent);
  }
  throw std::logic_error("unreachable");
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

}  // namespace scoremech::io
