#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scoremech/applications.hpp"
#include "scoremech/general.hpp"
#include "scoremech/rng.hpp"
#include "scoremech/single_slot.hpp"

namespace scoremech {

// A deviation gap above this refutes incentive compatibility; anything below
// is float noise from the closed-form expectations.
inline constexpr double kIcTol = 1e-9;
inline constexpr double kIrTol = 1e-12;

// Outcome of one bidder's deviation scan. Grid search cannot prove
// incentive compatibility, only fail to refute it, hence the hedged verdict
// string. best_values / best_predictions hold the best report found: one
// entry per outcome for general instances, a single (value, quality-vector)
// pair for single-slot ones.
struct DeviationReport {
  int bidder = 0;
  double truthful_utility = 0.0;
  double best_deviation_utility = 0.0;
  std::vector<double> best_values;
  std::vector<std::vector<double>> best_predictions;
  double gap = 0.0;
  int value_grid_points = 0;
  int simplex_grid_points = 0;
  bool violated = false;
  std::string verdict;
};

namespace detail {

inline std::string verdict_string(bool violated) {
  return violated ? "IC_violated" : "IC_holds (grid)";
}

inline std::vector<double> grid_with_point(std::vector<double> grid, double point) {
  grid.push_back(point);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

inline std::vector<double> value_grid(double lo, double hi, int points) {
  const double pad = 1.0 + 0.25 * (hi - lo);
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) {
    g[i] = (lo - pad) + (hi - lo + 2.0 * pad) * i / (points - 1);
  }
  return g;
}

}  // namespace detail

// Deviation scan for the one-winner auction. Everyone else reports
// truthfully; bidder b sweeps a value grid (instance value range, padded,
// with her true value inserted) crossed with a quality grid on [0,1] (true
// quality inserted). Expected utilities are closed-form, so verdicts are
// exact up to float error; no sampling is involved.
inline std::vector<DeviationReport> check_ic_single_slot(std::span<const SingleSlotBid> bids,
                                                         const ConvexFn& g, int grid_resolution) {
  if (grid_resolution < 11) {
    throw ValidationError("grid_resolution", "deviation grids need at least 11 points");
  }
  validate_bids(bids);
  const int m = static_cast<int>(bids.size());
  std::vector<double> adjusted(m);
  for (int i = 0; i < m; ++i) {
    adjusted[i] = bids[i].value + g.eval(checked_probability(bids[i].quality, "quality"));
  }
  double vmin = bids[0].value, vmax = bids[0].value;
  for (const auto& b : bids) {
    vmin = std::min(vmin, b.value);
    vmax = std::max(vmax, b.value);
  }
  const auto base_values = detail::value_grid(vmin, vmax, grid_resolution);
  const auto base_quality = unit_grid(grid_resolution);

  std::vector<DeviationReport> reports;
  reports.reserve(m);
  for (int b = 0; b < m; ++b) {
    // Best opposing adjusted value and its (lowest) index; b wins at
    // equality only from a lower index.
    double other_h = 0.0;
    int other_idx = m;  // sentinel: a single bidder always wins
    if (m > 1) {
      other_h = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < m; ++j) {
        if (j != b && adjusted[j] > other_h) {
          other_h = adjusted[j];
          other_idx = j;
        }
      }
    }
    const auto wins = [&](double h) {
      return m == 1 || h > other_h || (h == other_h && b < other_idx);
    };

    const auto vgrid = detail::grid_with_point(base_values, bids[b].value);
    const auto qgrid = detail::grid_with_point(base_quality, bids[b].quality);
    const double p_true = bids[b].quality;
    const double v_true = bids[b].value;

    std::vector<double> g_at(qgrid.size()), score_at(qgrid.size());
    for (std::size_t k = 0; k < qgrid.size(); ++k) {
      g_at[k] = g.eval(qgrid[k]);
      // S(report; p_true) under the tangent rule, closed form
      score_at[k] = g_at[k] + (p_true - qgrid[k]) * g.subgrad(qgrid[k]);
    }

    DeviationReport rep;
    rep.bidder = b;
    rep.value_grid_points = static_cast<int>(vgrid.size());
    rep.simplex_grid_points = static_cast<int>(qgrid.size());
    {
      const double h_true = v_true + g.eval(p_true);
      rep.truthful_utility = wins(h_true) ? v_true + g.eval(p_true) - other_h : 0.0;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double v_hat : vgrid) {
      for (std::size_t k = 0; k < qgrid.size(); ++k) {
        const double u =
            wins(v_hat + g_at[k]) ? v_true + score_at[k] - other_h : 0.0;
        if (u > best) {
          best = u;
          rep.best_values = {v_hat};
          rep.best_predictions = {{qgrid[k]}};
        }
      }
    }
    rep.best_deviation_utility = best;
    rep.gap = best - rep.truthful_utility;
    rep.violated = rep.gap > kIcTol;
    rep.verdict = detail::verdict_string(rep.violated);
    reports.push_back(std::move(rep));
  }
  return reports;
}

// Deviation scan for the general mechanism: per-outcome value grids crossed
// with per-outcome prediction grids, all combinations enumerated. The
// product can explode, so it is guarded; callers see the guard trip rather
// than a silent truncation. Set enforce_convexity=false to run the scan on
// welfare families that fail the slice test (that is how the negative
// demonstrations are produced).
inline std::vector<DeviationReport> check_ic_general(const GeneralInstance& inst,
                                                     int grid_resolution,
                                                     std::uint64_t max_candidates = 2000000,
                                                     bool enforce_convexity = true) {
  inst.validate();
  if (grid_resolution < 3) {
    throw ValidationError("grid_resolution", "deviation grids need at least 3 points");
  }
  const int O = inst.outcome_count();
  double vmin = inst.valuations[0][0], vmax = vmin;
  for (const auto& row : inst.valuations) {
    for (double v : row) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  const auto base_values = detail::value_grid(vmin, vmax, grid_resolution);

  std::vector<DeviationReport> reports;
  for (int b = 0; b < inst.bidders; ++b) {
    const BidderBid truth = inst.bid_of(b);
    const double w_minus = exclude_bidder_value(inst, b);

    std::vector<std::vector<double>> vgrids(O);
    std::vector<std::vector<std::vector<double>>> pgrids(O);
    std::uint64_t candidates = 1;
    int pred_points = 0;
    for (int o = 0; o < O; ++o) {
      vgrids[o] = detail::grid_with_point(base_values, truth.values[o]);
      const int n = static_cast<int>(truth.predictions[o].size());
      const int axis = n == 1 ? 2 : (n == 2 ? grid_resolution : std::min(grid_resolution, 9));
      auto grid = simplex_grid(n, axis);
      grid.push_back(truth.predictions[o]);
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      pgrids[o] = std::move(grid);
      pred_points = std::max(pred_points, static_cast<int>(pgrids[o].size()));
      candidates *= static_cast<std::uint64_t>(vgrids[o].size()) * pgrids[o].size();
      if (candidates > max_candidates) {
        throw GuardExceeded("deviation grid has more than " + std::to_string(max_candidates) +
                            " candidates; lower the grid resolution");
      }
    }

    // The induced outcome depends on the whole report, but the welfare slice
    // value and the expected score at an outcome depend only on that
    // outcome's grid point, so both are precomputed per (outcome, point).
    std::vector<double> others_value(O, 0.0);
    std::vector<std::vector<double>> slice_value(O), exp_score(O);
    std::vector<std::size_t> truth_pred_index(O, 0);
    for (int o = 0; o < O; ++o) {
      for (int i = 0; i < inst.bidders; ++i) {
        if (i != b) others_value[o] += inst.valuations[i][o];
      }
      const auto slice =
          component_slice(inst.welfare[o], inst.predictions_at(o), b, enforce_convexity);
      const auto rule = make_simplex_rule(slice);
      slice_value[o].resize(pgrids[o].size());
      exp_score[o].resize(pgrids[o].size());
      for (std::size_t k = 0; k < pgrids[o].size(); ++k) {
        slice_value[o][k] = slice.eval(pgrids[o][k]);
        exp_score[o][k] = expected_score(rule, pgrids[o][k], truth.predictions[o]);
        if (pgrids[o][k] == truth.predictions[o]) truth_pred_index[o] = k;
      }
    }

    // Utility of a candidate expressed through the tables: pick the
    // objective-maximizing outcome, then collect the true value plus the
    // expected score there, net of the fixed counterfactual.
    std::vector<double> w(O);
    const auto utility_at = [&](const std::vector<std::size_t>& vi,
                                const std::vector<std::size_t>& ki) {
      for (int o = 0; o < O; ++o) {
        w[o] = others_value[o] + vgrids[o][vi[o]] + slice_value[o][ki[o]];
      }
      const int chosen = argmax_outcome(w, inst.outcomes);
      return truth.values[chosen] - w_minus + others_value[chosen] +
             exp_score[chosen][ki[chosen]];
    };

    DeviationReport rep;
    rep.bidder = b;
    rep.value_grid_points = static_cast<int>(vgrids[0].size());
    rep.simplex_grid_points = pred_points;
    {
      std::vector<std::size_t> vi(O), ki(truth_pred_index);
      for (int o = 0; o < O; ++o) {
        vi[o] = static_cast<std::size_t>(
            std::find(vgrids[o].begin(), vgrids[o].end(), truth.values[o]) - vgrids[o].begin());
      }
      rep.truthful_utility = utility_at(vi, ki);
    }

    std::vector<std::size_t> digit(O, 0);  // per outcome: vi * |pgrid| + ki
    std::vector<std::size_t> vi(O, 0), ki(O, 0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_digit;
    bool carry = false;
    while (!carry) {
      for (int o = 0; o < O; ++o) {
        vi[o] = digit[o] / pgrids[o].size();
        ki[o] = digit[o] % pgrids[o].size();
      }
      const double u = utility_at(vi, ki);
      if (u > best) {
        best = u;
        best_digit = digit;
      }
      carry = true;
      for (int o = O - 1; o >= 0; --o) {
        if (++digit[o] < vgrids[o].size() * pgrids[o].size()) {
          carry = false;
          break;
        }
        digit[o] = 0;
      }
    }
    rep.best_values.resize(O);
    rep.best_predictions.resize(O);
    for (int o = 0; o < O; ++o) {
      rep.best_values[o] = vgrids[o][best_digit[o] / pgrids[o].size()];
      rep.best_predictions[o] = pgrids[o][best_digit[o] % pgrids[o].size()];
    }
    rep.best_deviation_utility = best;
    rep.gap = best - rep.truthful_utility;
    rep.violated = rep.gap > kIcTol;
    rep.verdict = detail::verdict_string(rep.violated);
    reports.push_back(std::move(rep));
  }
  return reports;
}

// Per-edge deviation scan for network procurement: an edge owner's report
// is a (cost, failure probability) pair, which fans out to her valuation
// and prediction at every path outcome.
inline std::vector<DeviationReport> check_ic_network(const NetworkProcurementSpec& spec,
                                                     int grid_resolution) {
  const auto inst = build_network_instance(spec);
  const int O = inst.outcome_count();
  double cmax = 0.0;
  for (const auto& e : spec.edges) cmax = std::max(cmax, e.cost);
  const auto base_costs = detail::value_grid(0.0, cmax, grid_resolution);
  const auto base_probs = unit_grid(grid_resolution);

  std::vector<DeviationReport> reports;
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const int b = spec.edges[e].owner;
    const BidderBid truth = inst.bid_of(b);
    const double w_minus = exclude_bidder_value(inst, b);
    const auto cgrid = detail::grid_with_point(base_costs, spec.edges[e].cost);
    const auto qgrid = detail::grid_with_point(base_probs, spec.edges[e].failure_prob);

    // Per (outcome, reported failure probability) tables; the builder's
    // welfare already passed the slice test, so the scan skips it.
    std::vector<double> others_value(O, 0.0);
    std::vector<char> on_path(O, 0);
    std::vector<std::vector<double>> slice_value(O), exp_score(O);
    for (int o = 0; o < O; ++o) {
      for (int i = 0; i < inst.bidders; ++i) {
        if (i != b) others_value[o] += inst.valuations[i][o];
      }
      on_path[o] = inst.states[b][o].size() == 2;
      const auto slice = component_slice(inst.welfare[o], inst.predictions_at(o), b,
                                         /*enforce_convexity=*/false);
      const auto rule = make_simplex_rule(slice);
      slice_value[o].resize(qgrid.size());
      exp_score[o].resize(qgrid.size());
      for (std::size_t k = 0; k < qgrid.size(); ++k) {
        const std::vector<double> p_hat =
            on_path[o] ? std::vector<double>{qgrid[k], 1.0 - qgrid[k]} : truth.predictions[o];
        slice_value[o][k] = slice.eval(p_hat);
        exp_score[o][k] = expected_score(rule, p_hat, truth.predictions[o]);
      }
    }

    std::vector<double> w(O);
    const auto utility_at = [&](double cost_hat, std::size_t k) {
      for (int o = 0; o < O; ++o) {
        const double v_hat = on_path[o] ? -cost_hat : 0.0;
        w[o] = others_value[o] + v_hat + slice_value[o][k];
      }
      const int chosen = argmax_outcome(w, inst.outcomes);
      return truth.values[chosen] - w_minus + others_value[chosen] + exp_score[chosen][k];
    };

    DeviationReport rep;
    rep.bidder = b;
    rep.value_grid_points = static_cast<int>(cgrid.size());
    rep.simplex_grid_points = static_cast<int>(qgrid.size());
    {
      const auto kt = static_cast<std::size_t>(
          std::find(qgrid.begin(), qgrid.end(), spec.edges[e].failure_prob) - qgrid.begin());
      rep.truthful_utility = utility_at(spec.edges[e].cost, kt);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double cost_hat : cgrid) {
      for (std::size_t k = 0; k < qgrid.size(); ++k) {
        const double u = utility_at(cost_hat, k);
        if (u > best) {
          best = u;
          rep.best_values = {cost_hat};
          rep.best_predictions = {{qgrid[k], 1.0 - qgrid[k]}};
        }
      }
    }
    rep.best_deviation_utility = best;
    rep.gap = best - rep.truthful_utility;
    rep.violated = rep.gap > kIcTol;
    rep.verdict = detail::verdict_string(rep.violated);
    reports.push_back(std::move(rep));
  }
  return reports;
}

// Truthful expected utility must be non-negative for every bidder.
inline std::vector<bool> check_ir_single_slot(std::span<const SingleSlotBid> bids,
                                              const ConvexFn& g) {
  const auto res = run_auction(bids, g);
  std::vector<bool> ok(bids.size(), true);
  const double u = expected_winner_utility(bids, bids[res.winner], g);
  ok[res.winner] = u >= -kIrTol;
  return ok;  // losers pay nothing and get exactly zero
}

inline std::vector<bool> check_ir_general(const GeneralInstance& inst,
                                          bool enforce_convexity = true) {
  std::vector<bool> ok(inst.bidders, true);
  for (int i = 0; i < inst.bidders; ++i) {
    const auto truth = inst.bid_of(i);
    const double u = bidder_expected_utility(inst, i, truth, truth, enforce_convexity);
    ok[i] = u >= -kIrTol;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Threshold-mechanism demonstration.
// ---------------------------------------------------------------------------

// Two-bidder instance showing that the threshold welfare buys its quality
// floor at the price of any value guarantee: a (value 0, quality 1) bidder
// beats a quality-beta bidder whose value falls below
// (1-alpha)/(beta-alpha) * v_max.
struct ThresholdWitness {
  double alpha = 0.0, beta = 0.0, v_max = 0.0;
  double bound = 0.0;  // (1-alpha)/(beta-alpha) * v_max
  std::vector<SingleSlotBid> bids;
  SingleSlotResult result;
  bool quality_floor_ok = false;  // winner quality >= alpha
};

inline ThresholdWitness demo_no_approximation(double alpha, double beta, double v_max) {
  const auto g = threshold_g(alpha, beta, v_max);  // validates the parameters
  ThresholdWitness w;
  w.alpha = alpha;
  w.beta = beta;
  w.v_max = v_max;
  w.bound = (1.0 - alpha) / (beta - alpha) * v_max;
  w.bids = {SingleSlotBid{0.0, 1.0},                 // worthless but certain to convert
            SingleSlotBid{0.999 * v_max, beta}};     // near the value cap at quality beta
  w.result = run_auction(w.bids, g);
  w.quality_floor_ok = w.bids[w.result.winner].quality >= alpha;
  return w;
}

// ---------------------------------------------------------------------------
// Seed-reproducible instance streams.
// ---------------------------------------------------------------------------

struct InstanceSampler {
  std::uint64_t seed = 42;
  int min_bidders = 2;
  int max_bidders = 6;
  double value_min = 0.0;
  double value_max = 10.0;
};

// Draw order per instance: bidder count, then (value, quality) per bidder.
inline std::vector<std::vector<SingleSlotBid>> sample_instances(const InstanceSampler& s, int n) {
  if (s.min_bidders < 1 || s.max_bidders < s.min_bidders) {
    throw ValidationError("sampler", "bad bidder-count range");
  }
  if (!(s.value_max >= s.value_min)) throw ValidationError("sampler", "bad value range");
  std::mt19937_64 rng(s.seed);
  std::vector<std::vector<SingleSlotBid>> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const int m = uniform_int(rng, s.min_bidders, s.max_bidders);
    std::vector<SingleSlotBid> bids(m);
    for (auto& b : bids) {
      b.value = uniform_in(rng, s.value_min, s.value_max);
      b.quality = uniform01(rng);
    }
    out.push_back(std::move(bids));
  }
  return out;
}

namespace detail {

inline std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFFu;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

// FNV-1a over the raw bit patterns of the stream; regression tests freeze it.
inline std::uint64_t stream_fingerprint(const std::vector<std::vector<SingleSlotBid>>& stream) {
  std::uint64_t h = 14695981039346656037ULL;
  h = detail::fnv1a_u64(h, stream.size());
  for (const auto& inst : stream) {
    h = detail::fnv1a_u64(h, inst.size());
    for (const auto& b : inst) {
      h = detail::fnv1a_u64(h, std::bit_cast<std::uint64_t>(b.value));
      h = detail::fnv1a_u64(h, std::bit_cast<std::uint64_t>(b.quality));
    }
  }
  return h;
}

// Random general instances for lab runs: small outcome and state sets,
// uniform valuations, normalized-uniform predictions, one welfare kind
// applied at every outcome.
struct GeneralSampler {
  std::uint64_t seed = 42;
  int min_bidders = 2;
  int max_bidders = 3;
  int min_outcomes = 2;
  int max_outcomes = 4;
  int min_states = 2;
  int max_states = 3;
  double value_min = 0.0;
  double value_max = 10.0;
  enum class Welfare { zero, expected_sum, product_pair, binary_square } welfare = Welfare::zero;
};

inline std::vector<GeneralInstance> sample_general_instances(const GeneralSampler& s, int n) {
  std::mt19937_64 rng(s.seed);
  const bool pair_form = s.welfare == GeneralSampler::Welfare::product_pair;
  std::vector<GeneralInstance> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    GeneralInstance inst;
    inst.id = "sampled" + std::to_string(k);
    const int m = pair_form ? 2 : uniform_int(rng, s.min_bidders, s.max_bidders);
    const int O = uniform_int(rng, s.min_outcomes, s.max_outcomes);
    inst.bidders = m;
    inst.outcomes.resize(O);
    for (int o = 0; o < O; ++o) inst.outcomes[o] = "o" + std::to_string(o);
    inst.valuations.assign(m, std::vector<double>(O, 0.0));
    inst.states.assign(m, std::vector<std::vector<std::string>>(O));
    inst.predictions.assign(m, std::vector<std::vector<double>>(O));
    inst.welfare.resize(O);
    for (int i = 0; i < m; ++i) {
      for (int o = 0; o < O; ++o) {
        inst.valuations[i][o] = uniform_in(rng, s.value_min, s.value_max);
        const int ns = pair_form || s.welfare == GeneralSampler::Welfare::binary_square
                           ? 2
                           : uniform_int(rng, s.min_states, s.max_states);
        inst.states[i][o].resize(ns);
        inst.predictions[i][o].resize(ns);
        double sum = 0.0;
        for (int st = 0; st < ns; ++st) {
          inst.states[i][o][st] = "s" + std::to_string(st);
          inst.predictions[i][o][st] = uniform01(rng) + 1e-9;
          sum += inst.predictions[i][o][st];
        }
        for (int st = 0; st < ns; ++st) inst.predictions[i][o][st] /= sum;
      }
    }
    for (int o = 0; o < O; ++o) {
      switch (s.welfare) {
        case GeneralSampler::Welfare::zero:
          inst.welfare[o] = zero_welfare();
          break;
        case GeneralSampler::Welfare::expected_sum: {
          std::vector<std::vector<double>> weights(m);
          for (int i = 0; i < m; ++i) {
            weights[i].resize(inst.predictions[i][o].size());
            for (auto& w : weights[i]) w = uniform_in(rng, -1.0, 1.0);
          }
          inst.welfare[o] = expected_sum_welfare(std::move(weights));
          break;
        }
        case GeneralSampler::Welfare::product_pair:
          inst.welfare[o] = product_form_g(uniform_in(rng, 0.5, 2.0), {0, 1}, 1);
          break;
        case GeneralSampler::Welfare::binary_square: {
          std::vector<int> everyone(m);
          for (int i = 0; i < m; ++i) everyone[i] = i;
          inst.welfare[o] = binary_catalog_welfare("square", {}, everyone, 1);
          break;
        }
      }
    }
    inst.validate();
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace scoremech
