#pragma once

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scoremech/convex.hpp"

namespace scoremech {

// ---------------------------------------------------------------------------
// Catalog of consumer-welfare functions of a single purchase probability.
// ---------------------------------------------------------------------------

// g(p) = slope * p. The natural "expected value" welfare; scale the slope by
// the audience size to model many identical consumers.
inline ConvexFn linear_g(double slope) {
  return ConvexFn{[slope](double p) { return slope * p; }, [slope](double) { return slope; },
                  Convexity::convex};
}

// g(p) = p^2. Strictly convex; a risk-averse audience that prefers a sure
// outcome to a lottery with the same mean.
inline ConvexFn square_g() {
  return ConvexFn{[](double p) { return p * p; }, [](double p) { return 2.0 * p; },
                  Convexity::strictly_convex};
}

// Piecewise-linear ramp: zero below alpha, rising to v_max at beta and
// beyond. Equals the pointwise max of the zero function and the ramp, which
// is where its subgradient comes from (ties take the left piece).
inline ConvexFn threshold_g(double alpha, double beta, double v_max) {
  if (!(alpha >= 0.0 && alpha < beta && beta <= 1.0)) {
    throw ValidationError("threshold", "requires 0 <= alpha < beta <= 1");
  }
  if (!(v_max > 0.0)) throw ValidationError("v_max", "must be positive");
  const double slope = v_max / (beta - alpha);
  const std::vector<std::pair<double, double>> pieces = {{0.0, 0.0}, {slope, -slope * alpha}};
  return ConvexFn{[alpha, beta, v_max](double p) {
                    return p < alpha ? 0.0 : (p - alpha) / (beta - alpha) * v_max;
                  },
                  [pieces](double p) {
                    return subgrad_of_pointwise_max(std::span<const std::pair<double, double>>(pieces), p);
                  },
                  Convexity::convex};
}

// g(p) = -(p - 1/2)^2, deliberately concave. The tangent construction applied
// to it produces an improper rule; shipped only for negative demonstrations.
inline ConvexFn concave_counterexample_g() {
  return ConvexFn{[](double p) { return -(p - 0.5) * (p - 0.5); },
                  [](double p) { return -2.0 * (p - 0.5); }, Convexity::non_convex};
}

struct WelfareSpec {
  std::string name;
  enum class Kind { binary, simplex, component_wise } kind = Kind::binary;
  std::map<std::string, double> parameters;
  Convexity convexity_claim = Convexity::convex;
};

struct CatalogEntry {
  WelfareSpec spec;
  ConvexFn fn;
};

namespace detail {

inline double param_or(const std::map<std::string, double>& params, const std::string& key,
                       double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// The convexity claim of every catalog entry is checked against a grid
// subgradient test when the entry is built; a mismatch is a catalog bug.
inline void verify_claim(const CatalogEntry& e) {
  const bool grid_convex = satisfies_subgradient_inequality(e.fn);
  const bool claimed_convex = e.spec.convexity_claim == Convexity::convex ||
                              e.spec.convexity_claim == Convexity::strictly_convex;
  if (grid_convex != claimed_convex) {
    throw std::logic_error("welfare catalog entry '" + e.spec.name +
                           "' fails its convexity claim");
  }
  if (e.spec.convexity_claim == Convexity::strictly_convex &&
      min_strict_subgrad_margin(e.fn) <= 0.0) {
    throw std::logic_error("welfare catalog entry '" + e.spec.name + "' is not strictly convex");
  }
}

}  // namespace detail

// Looks up a catalog function by the name used in instance files and on the
// command line: "linear", "square", "threshold", "concave_demo". The name
// "product" is a two-bidder family and only makes sense inside a general
// instance (see product_form_g below).
inline CatalogEntry make_welfare(const std::string& name,
                                 const std::map<std::string, double>& params = {}) {
  CatalogEntry entry;
  entry.spec.name = name;
  entry.spec.kind = WelfareSpec::Kind::binary;
  if (name == "linear") {
    const double slope = detail::param_or(params, "slope", 1.0);
    entry.spec.parameters = {{"slope", slope}};
    entry.spec.convexity_claim = Convexity::convex;
    entry.fn = linear_g(slope);
  } else if (name == "square") {
    entry.spec.convexity_claim = Convexity::strictly_convex;
    entry.fn = square_g();
  } else if (name == "threshold") {
    const double alpha = detail::param_or(params, "alpha", 0.2);
    const double beta = detail::param_or(params, "beta", 0.6);
    const double v_max = detail::param_or(params, "v_max", 10.0);
    entry.spec.parameters = {{"alpha", alpha}, {"beta", beta}, {"v_max", v_max}};
    entry.spec.convexity_claim = Convexity::convex;
    entry.fn = threshold_g(alpha, beta, v_max);
  } else if (name == "concave_demo") {
    entry.spec.convexity_claim = Convexity::non_convex;
    entry.fn = concave_counterexample_g();
  } else if (name == "product") {
    throw ValidationError("welfare",
                          "'product' is a two-bidder family; reference it from a general "
                          "instance file, not as a single-probability welfare");
  } else {
    throw ValidationError("welfare", "unknown catalog name '" + name + "'");
  }
  detail::verify_claim(entry);
  return entry;
}

// ---------------------------------------------------------------------------
// Welfare families over the predictions of all bidders at one outcome.
// ---------------------------------------------------------------------------

// Welfare at a single outcome as a function of the m prediction vectors.
// `component_subgrad(i, p)` returns d eval / d p[i]; families without an
// analytic gradient leave it empty and fall back to central differences when
// sliced. The metadata fields make the family serializable.
struct OutcomeWelfare {
  std::string family = "zero";
  std::map<std::string, double> params;
  std::vector<int> bidders;  // components the family reads
  int state = 1;             // designated state index within those components
  std::vector<std::vector<double>> weights;  // expected_sum only
  std::string catalog_name;                  // binary_catalog only
  Convexity convexity_claim = Convexity::convex;
  std::function<double(const std::vector<std::vector<double>>&)> eval;
  std::function<std::vector<double>(int, const std::vector<std::vector<double>>&)>
      component_subgrad;
};

inline OutcomeWelfare zero_welfare() {
  OutcomeWelfare w;
  w.family = "zero";
  w.convexity_claim = Convexity::convex;
  w.eval = [](const std::vector<std::vector<double>>&) { return 0.0; };
  w.component_subgrad = [](int i, const std::vector<std::vector<double>>& p) {
    return std::vector<double>(p[i].size(), 0.0);
  };
  return w;
}

// g(p) = sum_i w_i . p_i. Rows may be empty (bidder ignored) but otherwise
// must match the bidder's state count.
inline OutcomeWelfare expected_sum_welfare(std::vector<std::vector<double>> weights) {
  OutcomeWelfare w;
  w.family = "expected_sum";
  w.weights = std::move(weights);
  w.convexity_claim = Convexity::convex;
  w.eval = [rows = w.weights](const std::vector<std::vector<double>>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size() && i < p.size(); ++i) {
      if (rows[i].empty()) continue;
      if (rows[i].size() != p[i].size()) {
        throw ValidationError("expected_sum.weights[" + std::to_string(i) + "]",
                              "weight row does not match state count");
      }
      s += detail::dot(rows[i], p[i]);
    }
    return s;
  };
  w.component_subgrad = [rows = w.weights](int i, const std::vector<std::vector<double>>& p) {
    if (i < static_cast<int>(rows.size()) && !rows[i].empty()) return rows[i];
    return std::vector<double>(p[i].size(), 0.0);
  };
  return w;
}

// g(p_a, p_b) = scale * (p_a[s] - 1/2)(p_b[s] - 1/2): convex in each
// component separately, not jointly (the anti-diagonal chord lies above it).
inline OutcomeWelfare product_form_g(double scale = 1.0, std::array<int, 2> bidders = {0, 1},
                                     int state = 1) {
  OutcomeWelfare w;
  w.family = "product_pair";
  w.params = {{"scale", scale}};
  w.bidders = {bidders[0], bidders[1]};
  w.state = state;
  w.convexity_claim = Convexity::component_wise_convex_only;
  const int a = bidders[0], b = bidders[1];
  w.eval = [scale, a, b, state](const std::vector<std::vector<double>>& p) {
    return scale * (p[a][state] - 0.5) * (p[b][state] - 0.5);
  };
  w.component_subgrad = [scale, a, b, state](int i, const std::vector<std::vector<double>>& p) {
    std::vector<double> d(p[i].size(), 0.0);
    if (i == a) d[state] = scale * (p[b][state] - 0.5);
    if (i == b) d[state] = scale * (p[a][state] - 0.5);
    return d;
  };
  return w;
}

// Applies a catalog function to the designated state's probability of each
// listed bidder and sums the results. Convex in every component (constant in
// the unlisted ones); inherits non-convexity from the catalog entry.
inline OutcomeWelfare binary_catalog_welfare(const std::string& catalog_name,
                                             const std::map<std::string, double>& params,
                                             std::vector<int> bidders, int state = 1) {
  CatalogEntry entry = make_welfare(catalog_name, params);
  OutcomeWelfare w;
  w.family = "binary_catalog";
  w.catalog_name = catalog_name;
  w.params = entry.spec.parameters;
  w.bidders = std::move(bidders);
  w.state = state;
  w.convexity_claim =
      entry.spec.convexity_claim == Convexity::non_convex ? Convexity::non_convex : Convexity::convex;
  w.eval = [fn = entry.fn, ids = w.bidders, state](const std::vector<std::vector<double>>& p) {
    double s = 0.0;
    for (int i : ids) s += fn.eval(checked_probability(p[i][state], "prediction"));
    return s;
  };
  w.component_subgrad = [fn = entry.fn, ids = w.bidders,
                         state](int i, const std::vector<std::vector<double>>& p) {
    std::vector<double> d(p[i].size(), 0.0);
    for (int id : ids) {
      if (id == i) d[state] = fn.subgrad(checked_probability(p[i][state], "prediction"));
    }
    return d;
  };
  return w;
}

// g(p) = -penalty * (1 - prod_i p_i[s]): the expected cost of any listed
// component failing, negated. Multilinear, so convex in each component.
inline OutcomeWelfare failure_penalty_welfare(double penalty, std::vector<int> bidders,
                                              int succeed_state = 1) {
  OutcomeWelfare w;
  w.family = "failure_penalty";
  w.params = {{"penalty", penalty}};
  w.bidders = std::move(bidders);
  w.state = succeed_state;
  w.convexity_claim = Convexity::component_wise_convex_only;
  w.eval = [penalty, ids = w.bidders, succeed_state](const std::vector<std::vector<double>>& p) {
    double all_ok = 1.0;
    for (int i : ids) all_ok *= p[i][succeed_state];
    return -penalty * (1.0 - all_ok);
  };
  w.component_subgrad = [penalty, ids = w.bidders,
                         succeed_state](int i, const std::vector<std::vector<double>>& p) {
    std::vector<double> d(p[i].size(), 0.0);
    bool member = false;
    double others = 1.0;
    for (int id : ids) {
      if (id == i) {
        member = true;
      } else {
        others *= p[id][succeed_state];
      }
    }
    if (member) d[succeed_state] = penalty * others;
    return d;
  };
  return w;
}

// g(p) = scale * prod_i p_i[s] over the listed bidders; zero when the list is
// empty (a project with nobody hired produces nothing).
inline OutcomeWelfare all_succeed_bonus_welfare(double scale, std::vector<int> bidders,
                                                int succeed_state = 1) {
  OutcomeWelfare w;
  w.family = "all_succeed_bonus";
  w.params = {{"scale", scale}};
  w.bidders = std::move(bidders);
  w.state = succeed_state;
  w.convexity_claim = Convexity::component_wise_convex_only;
  w.eval = [scale, ids = w.bidders, succeed_state](const std::vector<std::vector<double>>& p) {
    if (ids.empty()) return 0.0;
    double all_ok = 1.0;
    for (int i : ids) all_ok *= p[i][succeed_state];
    return scale * all_ok;
  };
  w.component_subgrad = [scale, ids = w.bidders,
                         succeed_state](int i, const std::vector<std::vector<double>>& p) {
    std::vector<double> d(p[i].size(), 0.0);
    bool member = false;
    double others = 1.0;
    for (int id : ids) {
      if (id == i) {
        member = true;
      } else {
        others *= p[id][succeed_state];
      }
    }
    if (member && !ids.empty()) d[succeed_state] = scale * others;
    return d;
  };
  return w;
}

}  // namespace scoremech
