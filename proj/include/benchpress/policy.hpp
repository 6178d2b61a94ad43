#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "benchpress/behavior.hpp"

namespace benchpress {

enum class Model { lower_only, higher_only, comprehensive };

/// Inclusive lattice lower, lower + step, ..., upper.
struct WeightGrid {
  double lower = 0.0;
  double upper = 0.0;
  double step = 2.5;

  void validate() const {
    if (!(step > 0.0) || upper < lower - 1e-9)
      throw Error(ErrorCode::empty_grid, "grid has no points");
    const double n = (upper - lower) / step;
    if (std::abs(n - std::round(n)) > 1e-6)
      throw Error(ErrorCode::empty_grid, "upper - lower is not a multiple of step");
  }

  std::vector<double> points() const {
    validate();
    const int n = static_cast<int>(std::round((upper - lower) / step));
    std::vector<double> out;
    out.reserve(n + 1);
    for (int i = 0; i <= n; ++i) out.push_back(lower + i * step);
    return out;
  }
};

/// Grid from `lower` up to the first lattice point at or beyond
/// anchor + span * scale of the lifter's curve.
inline WeightGrid default_grid(double lower, const SuccessCurve& q_self, double kappa,
                               double span = 12.0) {
  const double target = q_self.anchor + span * q_self.scale;
  const double steps = std::max(0.0, std::ceil((target - lower) / kappa - 1e-9));
  return {lower, lower + steps * kappa, kappa};
}

using EvaluationRegime = std::variant<Regime, RivalCase>;

struct PolicyResult {
  double chosen_weight = 0.0;
  double achieved_eu = 0.0;
  EvaluationRegime regime = Regime::below_both;
  double runner_up_gap = 0.0;
};

namespace detail {

inline bool is_boundary(double w, const RivalContext& c, Model m) {
  const bool lower = m != Model::higher_only && tie(w, c.w_lower);
  const bool higher = m != Model::lower_only && (tie(w, c.w_higher) || tie(w, c.y_higher));
  return lower || higher;
}

inline double evaluate(double w, const RivalContext& c, const ValueParams& p, Model m) {
  switch (m) {
    case Model::lower_only: return eu_lower_rival(w, c, p);
    case Model::higher_only: return eu_higher_rival(w, c, p);
    case Model::comprehensive: return eu_comprehensive(w, c, p);
  }
  return 0.0;
}

inline EvaluationRegime classify(double w, const RivalContext& c, Model m) {
  switch (m) {
    case Model::lower_only: return lower_case(w, c);
    case Model::higher_only: return higher_case(w, c);
    case Model::comprehensive: return regime_of(w, c);
  }
  return Regime::below_both;
}

constexpr double kEuTolerance = 1e-12;

}  // namespace detail

/// Exhaustive argmax over the grid. Boundary points are skipped; among equal
/// expected utilities the lightest weight wins.
inline PolicyResult optimal_weight(const RivalContext& ctx, const ValueParams& params,
                                   const WeightGrid& grid, Model model) {
  params.validate();
  double best_w = 0.0, best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (double w : grid.points()) {
    if (detail::is_boundary(w, ctx, model)) continue;
    const double eu = detail::evaluate(w, ctx, params, model);
    if (!any || eu > best + detail::kEuTolerance) {
      if (any) second = best;
      best = eu;
      best_w = w;
      any = true;
    } else {
      second = std::max(second, eu);
    }
  }
  if (!any) throw Error(ErrorCode::empty_grid, "every grid point is a boundary tie");
  PolicyResult r;
  r.chosen_weight = best_w;
  r.achieved_eu = best;
  r.regime = detail::classify(best_w, ctx, model);
  r.runner_up_gap = std::isfinite(second) ? std::max(0.0, best - second) : 0.0;
  return r;
}

/// Closed-form recommendation: the best of the "boundary + kappa" candidates
/// (w_L + k, y_H + k, w_H + k, max(w_L, w_H) + k) and the lightest admissible
/// weight, all evaluated with the closed forms. `min_weight` defaults to
/// y_i + kappa.
inline double theoretical_prediction(const RivalContext& ctx, const ValueParams& params,
                                     Model model, std::optional<double> min_weight = {}) {
  params.validate();
  const double k = ctx.kappa;
  const double lo = min_weight.value_or(ctx.y_self + k);
  std::vector<double> candidates{lo, lo + k};
  if (model != Model::higher_only) candidates.push_back(ctx.w_lower + k);
  if (model != Model::lower_only) {
    candidates.push_back(ctx.y_higher + k);
    candidates.push_back(ctx.w_higher + k);
  }
  if (model == Model::comprehensive) {
    candidates.push_back(std::max(ctx.w_lower, ctx.y_higher) + k);
    candidates.push_back(std::max(ctx.w_lower, ctx.w_higher) + k);
  }
  std::sort(candidates.begin(), candidates.end());
  double best_w = 0.0, best = -std::numeric_limits<double>::infinity();
  for (double w : candidates) {
    if (w < lo - 1e-9 || detail::is_boundary(w, ctx, model)) continue;
    const double eu = detail::evaluate(w, ctx, params, model);
    if (eu > best + detail::kEuTolerance) best = eu, best_w = w;
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::context_violation, "no admissible candidate");
  return best_w;
}

}  // namespace benchpress
