#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scoremech {

// Library-wide tolerances. Probability vectors must sum to one within
// kSimplexSumTol; entries down to -kSimplexEntryTol are treated as zero.
// Nothing is ever renormalized: a malformed vector is the caller's bug.
inline constexpr double kSimplexSumTol = 1e-9;
inline constexpr double kSimplexEntryTol = 1e-12;
inline constexpr double kSubgradTol = 1e-12;

// Validation failure carrying the offending field path, e.g. "bids[2].quality".
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Enumeration guard tripped (path counts, deviation-grid products, ...).
class GuardExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a welfare function fails the per-component convexity test.
class NotComponentWiseConvex : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Convexity { convex, strictly_convex, component_wise_convex_only, non_convex };

inline std::string to_string(Convexity c) {
  switch (c) {
    case Convexity::convex: return "convex";
    case Convexity::strictly_convex: return "strictly_convex";
    case Convexity::component_wise_convex_only: return "component_wise_convex_only";
    case Convexity::non_convex: return "non_convex";
  }
  return "unknown";
}

inline bool is_probability(double p) {
  return std::isfinite(p) && p >= -kSimplexEntryTol && p <= 1.0 + kSimplexEntryTol;
}

inline double checked_probability(double p, const std::string& field) {
  if (!is_probability(p)) {
    throw ValidationError(field, "not a probability in [0,1]: " + std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

// Rejects vectors off the probability simplex; returns a copy with tiny
// negative entries clamped to zero.
inline std::vector<double> checked_simplex(std::span<const double> p, const std::string& field) {
  if (p.empty()) throw ValidationError(field, "empty probability vector");
  std::vector<double> out(p.begin(), p.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!std::isfinite(out[k]) || out[k] < -kSimplexEntryTol) {
      throw ValidationError(field + "[" + std::to_string(k) + "]",
                            "negative or non-finite probability entry");
    }
    if (out[k] < 0.0) out[k] = 0.0;
    sum += out[k];
  }
  if (std::abs(sum - 1.0) > kSimplexSumTol) {
    throw ValidationError(field, "entries sum to " + std::to_string(sum) + ", expected 1");
  }
  return out;
}

// A function on [0,1] together with a subgradient oracle. For a convex
// function the oracle must satisfy eval(q) >= eval(p) + subgrad(p)*(q - p)
// everywhere. Deliberately non-convex entries (used by the negative
// demonstrations) carry their pointwise derivative and the non_convex flag.
struct ConvexFn {
  std::function<double(double)> eval;
  std::function<double(double)> subgrad;
  Convexity strictness = Convexity::convex;
};

// Convex function on the probability simplex with state_count coordinates.
// The subgradient is any vector d with eval(q) >= eval(p) + d.(q - p) on the
// simplex; it is only ever used through d.(e_w - p), so the component of d
// along the all-ones direction is irrelevant.
struct SimplexConvexFn {
  int state_count = 0;
  std::function<double(std::span<const double>)> eval;
  std::function<std::vector<double>(std::span<const double>)> subgrad;
};

// Evenly spaced grid over [0,1], endpoints included.
inline std::vector<double> unit_grid(int points) {
  if (points < 2) throw ValidationError("points", "grid needs at least 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = static_cast<double>(i) / (points - 1);
  return g;
}

namespace detail {

inline void emit_compositions(int slots, int remaining, int denom, std::vector<double>& cur,
                              std::vector<std::vector<double>>& out) {
  if (slots == 1) {
    cur.push_back(static_cast<double>(remaining) / denom);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    cur.push_back(static_cast<double>(c) / denom);
    emit_compositions(slots - 1, remaining - c, denom, cur, out);
    cur.pop_back();
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Default per-axis resolution for simplex grids, chosen to keep pairwise
// scans tractable as the state count grows.
inline int default_simplex_axis_points(int state_count) {
  if (state_count <= 2) return 21;
  if (state_count == 3) return 9;
  return 5;
}

}  // namespace detail

// All simplex points whose coordinates are multiples of 1/(points_per_axis-1),
// in lexicographic order of the coordinate tuple.
inline std::vector<std::vector<double>> simplex_grid(int state_count, int points_per_axis = 0) {
  if (state_count < 1) throw ValidationError("state_count", "must be positive");
  if (points_per_axis <= 0) points_per_axis = detail::default_simplex_axis_points(state_count);
  if (points_per_axis < 2) throw ValidationError("points_per_axis", "grid needs at least 2 points");
  std::vector<std::vector<double>> out;
  std::vector<double> cur;
  if (state_count == 1) {
    out.push_back({1.0});
    return out;
  }
  detail::emit_compositions(state_count, points_per_axis - 1, points_per_axis - 1, cur, out);
  return out;
}

// One linear piece y = slope.p + intercept of a pointwise maximum.
struct LinearPiece {
  std::vector<double> slope;
  double intercept = 0.0;
};

// Subgradient of max_j (slope_j.p + intercept_j): the slope of an active
// piece, ties resolved toward the lowest piece index.
inline std::vector<double> subgrad_of_pointwise_max(std::span<const LinearPiece> pieces,
                                                    std::span<const double> p) {
  if (pieces.empty()) throw ValidationError("pieces", "empty piece list");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (pieces[j].slope.size() != p.size()) {
      throw ValidationError("pieces[" + std::to_string(j) + "].slope", "dimension mismatch");
    }
    double v = detail::dot(pieces[j].slope, p) + pieces[j].intercept;
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return pieces[best].slope;
}

// Scalar form for functions of a single probability; pieces are
// (slope, intercept) pairs.
inline double subgrad_of_pointwise_max(std::span<const std::pair<double, double>> pieces,
                                       double p) {
  if (pieces.empty()) throw ValidationError("pieces", "empty piece list");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    double v = pieces[j].first * p + pieces[j].second;
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return pieces[best].first;
}

inline double pointwise_max_value(std::span<const std::pair<double, double>> pieces, double p) {
  if (pieces.empty()) throw ValidationError("pieces", "empty piece list");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [slope, intercept] : pieces) best = std::max(best, slope * p + intercept);
  return best;
}

// Grid check of the subgradient inequality eval(q) >= eval(p) + d(p)*(q-p).
inline bool satisfies_subgradient_inequality(const ConvexFn& g, int grid_points = 101,
                                             double tol = kSubgradTol) {
  const auto grid = unit_grid(grid_points);
  std::vector<double> vals(grid.size()), subs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = g.eval(grid[i]);
    if (!std::isfinite(vals[i])) return false;
    subs[i] = g.subgrad(grid[i]);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (vals[j] < vals[i] + subs[i] * (grid[j] - grid[i]) - tol) return false;
    }
  }
  return true;
}

inline bool satisfies_subgradient_inequality(const SimplexConvexFn& g, int points_per_axis = 0,
                                             double tol = kSubgradTol) {
  const auto grid = simplex_grid(g.state_count, points_per_axis);
  std::vector<double> vals(grid.size());
  std::vector<std::vector<double>> subs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = g.eval(grid[i]);
    if (!std::isfinite(vals[i])) return false;
    subs[i] = g.subgrad(grid[i]);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double lin = vals[i];
      for (int k = 0; k < g.state_count; ++k) lin += subs[i][k] * (grid[j][k] - grid[i][k]);
      if (vals[j] < lin - tol) return false;
    }
  }
  return true;
}

// Smallest slack of the strict subgradient inequality over distinct grid
// points. Positive for strictly convex functions (at the grid's spacing),
// zero for linear ones.
inline double min_strict_subgrad_margin(const ConvexFn& g, int grid_points = 101) {
  const auto grid = unit_grid(grid_points);
  double margin = std::numeric_limits<double>::infinity();
  for (double p : grid) {
    const double vp = g.eval(p), dp = g.subgrad(p);
    for (double q : grid) {
      if (q == p) continue;
      margin = std::min(margin, g.eval(q) - (vp + dp * (q - p)));
    }
  }
  return margin;
}

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::vector<double> central_difference_gradient(
    const std::function<double(std::span<const double>)>& f, std::span<const double> x,
    double h = 1e-6) {
  std::vector<double> grad(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + h;
    const double up = f(probe);
    probe[k] = saved - h;
    const double down = f(probe);
    probe[k] = saved;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace scoremech
