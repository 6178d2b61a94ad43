#pragma once

// Rank-dependent prospect-theory evaluation of a single attempt: value
// function, success curves, the lifting-stage utility table, per-rival and
// joint expected evaluations, and the enumeration oracle they are checked
// against.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "benchpress/error.hpp"

namespace benchpress {

struct ValueParams {
  double alpha = 1.0;
  double lambda = 2.25;
  int reference_rank = 1;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0) || !(lambda > 0.0))
      throw Error(ErrorCode::context_violation, "need 0 < alpha <= 1 and lambda > 0");
  }
};

/// `x` is the lifter's standing counted upward (higher is better), so moving
/// up one place from the reference is x = r + 1.
inline double value(int x, const ValueParams& p) {
  const int d = x - p.reference_rank;
  if (d >= 0) return std::pow(static_cast<double>(d), p.alpha);
  return -p.lambda * std::pow(static_cast<double>(-d), p.alpha);
}

inline double value_of_change(int change, const ValueParams& p) {
  return value(p.reference_rank + change, p);
}

/// Logistic in (w - anchor) / scale, mapped into [floor, ceiling].
struct SuccessCurve {
  double anchor = 100.0;
  double scale = 5.0;
  double ceiling = 0.95;
  double floor = 0.02;

  void validate() const {
    if (!(scale > 0.0) || !(ceiling > 0.0 && ceiling <= 1.0) || !(floor >= 0.0 && floor < ceiling))
      throw Error(ErrorCode::context_violation, "invalid success curve");
  }
};

inline double success_prob(const SuccessCurve& c, double w) {
  if (!(w > 0.0)) throw Error(ErrorCode::nonpositive_weight, std::to_string(w));
  return c.floor + (c.ceiling - c.floor) / (1.0 + std::exp((w - c.anchor) / c.scale));
}

struct CurvePoint {
  double distance;  // kg relative to the lifter's best
  double rate;
};

/// Least-squares fit of anchor and scale with fixed floor/ceiling
/// (Levenberg-Marquardt on (anchor, log scale)).
inline SuccessCurve fit_success_curve(std::span<const CurvePoint> points, double floor,
                                      double ceiling, SuccessCurve start = {0.0, 5.0, 1.0, 0.0}) {
  if (points.size() < 2) throw Error(ErrorCode::empty_input, "need at least two points");
  double anchor = start.anchor, log_scale = std::log(start.scale);
  auto sse = [&](double a, double ls) {
    double s = 0.0;
    for (const auto& pt : points) {
      const double q = floor + (ceiling - floor) / (1.0 + std::exp((pt.distance - a) / std::exp(ls)));
      s += (q - pt.rate) * (q - pt.rate);
    }
    return s;
  };
  double mu = 1e-3;
  double current = sse(anchor, log_scale);
  for (int iter = 0; iter < 500; ++iter) {
    double jtj[2][2] = {{0, 0}, {0, 0}}, jtr[2] = {0, 0};
    const double scale = std::exp(log_scale);
    for (const auto& pt : points) {
      const double z = (pt.distance - anchor) / scale;
      const double e = std::exp(z);
      const double g = 1.0 / (1.0 + e);
      const double q = floor + (ceiling - floor) * g;
      const double dg_dz = -e * g * g;
      const double d_anchor = (ceiling - floor) * dg_dz * (-1.0 / scale);
      const double d_logscale = (ceiling - floor) * dg_dz * (-z);
      const double r = q - pt.rate;
      jtj[0][0] += d_anchor * d_anchor;
      jtj[0][1] += d_anchor * d_logscale;
      jtj[1][1] += d_logscale * d_logscale;
      jtr[0] += d_anchor * r;
      jtr[1] += d_logscale * r;
    }
    jtj[1][0] = jtj[0][1];
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      const double a00 = jtj[0][0] * (1 + mu), a11 = jtj[1][1] * (1 + mu), a01 = jtj[0][1];
      const double det = a00 * a11 - a01 * a01;
      if (std::abs(det) < 1e-300) {
        mu *= 10;
        continue;
      }
      const double step0 = -(a11 * jtr[0] - a01 * jtr[1]) / det;
      const double step1 = -(-a01 * jtr[0] + a00 * jtr[1]) / det;
      const double next = sse(anchor + step0, log_scale + step1);
      if (next < current) {
        anchor += step0;
        log_scale += step1;
        improved = std::abs(current - next) > 1e-16;
        current = next;
        mu = std::max(mu / 10, 1e-12);
        if (!improved) return {anchor, std::exp(log_scale), ceiling, floor};
        improved = true;
      } else {
        mu *= 10;
      }
    }
    if (!improved) break;
  }
  return {anchor, std::exp(log_scale), ceiling, floor};
}

// ---------------------------------------------------------------------------
// Lifting stage

/// Utility of one lift given which pressures are live and the realised
/// outcomes (the 2x2 utility-tuple table).
inline double lifting_stage_utility(bool turned_around_possible, bool turning_around_possible,
                                    bool own_success, bool higher_success, bool lower_success,
                                    const ValueParams& p) {
  double u = 0.0;
  if (turned_around_possible && !own_success && lower_success) u += value_of_change(-1, p);
  if (turning_around_possible && own_success && !higher_success) u += value_of_change(+1, p);
  return u;
}

// ---------------------------------------------------------------------------
// Attempt stage

/// Everything one expected-utility evaluation needs. `w_higher` is the
/// higher rival's expected declaration (a prediction in data, the truth in
/// simulation).
struct RivalContext {
  double w_lower = 0.0;
  double w_higher = 0.0;
  double y_lower = 0.0;
  double y_self = 0.0;
  double y_higher = 0.0;
  double kappa = 2.5;
  SuccessCurve q_self;
  SuccessCurve q_lower;
  SuccessCurve q_higher;
  // Optional plug-ins replacing the 0/1 indicators P(w_i > y_H), P(w_L > y_i)
  // where the regime does not already force them.
  std::optional<double> p_self_above_higher_best;
  std::optional<double> p_lower_above_self_best;
};

enum class Regime { below_both, between, inverted_between, above_both };
enum class RivalCase { L1, L2, L3, H1, H2, H3 };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::below_both: return "below_both";
    case Regime::between: return "between";
    case Regime::inverted_between: return "inverted_between";
    case Regime::above_both: return "above_both";
  }
  return "?";
}

inline std::string_view to_string(RivalCase c) {
  constexpr std::array<std::string_view, 6> names{"L1", "L2", "L3", "H1", "H2", "H3"};
  return names[static_cast<std::size_t>(c)];
}

enum class Channels { lower_only, higher_only, both };

namespace detail {

inline bool tie(double a, double b) { return std::abs(a - b) <= 1e-9; }

inline void check_lower(double w_i, const RivalContext& c) {
  if (!(c.y_lower < c.y_self) || c.y_lower > c.w_lower + 1e-9 || w_i < c.y_self - 1e-9)
    throw Error(ErrorCode::context_violation, "need y_L < y_i, y_L <= w_L, w_i >= y_i");
}

inline void check_higher(double w_i, const RivalContext& c) {
  if (!(c.y_self < c.y_higher) || c.y_higher > c.w_higher + 1e-9 || w_i < c.y_self - 1e-9)
    throw Error(ErrorCode::context_violation, "need y_i < y_H, y_H <= w_H, w_i >= y_i");
}

inline double clamp_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::context_violation, "plug-in not a probability");
  return p;
}

// P(w_L > y_i), assuming the lower rival does not already out-declare i.
inline double lower_passes_best(const RivalContext& c) {
  if (c.p_lower_above_self_best) return clamp_probability(*c.p_lower_above_self_best);
  return c.w_lower > c.y_self ? 1.0 : 0.0;
}

// P(w_i > y_H), assuming i stays below the higher rival's declaration.
inline double self_passes_higher_best(double w_i, const RivalContext& c) {
  if (c.p_self_above_higher_best) return clamp_probability(*c.p_self_above_higher_best);
  return w_i > c.y_higher ? 1.0 : 0.0;
}

}  // namespace detail

inline RivalCase lower_case(double w_i, const RivalContext& c) {
  if (detail::tie(w_i, c.w_lower)) throw Error(ErrorCode::boundary_tie, "w_i == w_L");
  if (c.w_lower > w_i) return RivalCase::L1;
  return c.w_lower > c.y_self ? RivalCase::L2 : RivalCase::L3;
}

inline RivalCase higher_case(double w_i, const RivalContext& c) {
  if (detail::tie(w_i, c.w_higher) || detail::tie(w_i, c.y_higher))
    throw Error(ErrorCode::boundary_tie, "w_i on a higher-rival boundary");
  if (w_i > c.w_higher) return RivalCase::H3;
  return w_i > c.y_higher ? RivalCase::H2 : RivalCase::H1;
}

/// Response to the lower rival alone: -lambda q(w_L), -lambda (1-q(w_i)) q(w_L), or 0.
inline double eu_lower_rival(double w_i, const RivalContext& c, const ValueParams& p) {
  detail::check_lower(w_i, c);
  const double loss = -value_of_change(-1, p);
  const double q_l = success_prob(c.q_lower, c.w_lower);
  if (lower_case(w_i, c) == RivalCase::L1) return -loss * q_l;
  return -loss * (1.0 - success_prob(c.q_self, w_i)) * q_l * detail::lower_passes_best(c);
}

/// Response to the higher rival alone: 0, q(w_i)(1-q(w_H)), or q(w_i).
inline double eu_higher_rival(double w_i, const RivalContext& c, const ValueParams& p) {
  detail::check_higher(w_i, c);
  const double gain = value_of_change(+1, p);
  const double q_i = success_prob(c.q_self, w_i);
  if (higher_case(w_i, c) == RivalCase::H3) return gain * q_i;
  return gain * q_i * (1.0 - success_prob(c.q_higher, c.w_higher)) *
         detail::self_passes_higher_best(w_i, c);
}

inline Regime regime_of(double w_i, const RivalContext& c) {
  if (detail::tie(w_i, c.w_lower) || detail::tie(w_i, c.w_higher) || detail::tie(w_i, c.y_higher))
    throw Error(ErrorCode::boundary_tie, "w_i on a regime boundary");
  const bool above_l = w_i > c.w_lower, above_h = w_i > c.w_higher;
  if (!above_l && !above_h) return Regime::below_both;
  if (above_l && above_h) return Regime::above_both;
  return above_l ? Regime::between : Regime::inverted_between;
}

/// Joint evaluation against both rivals; one branch per regime. The
/// inverted branch (w_H < w_i < w_L) is the case the three-branch form does
/// not list; it follows from the same outcome table.
inline double eu_comprehensive(double w_i, const RivalContext& c, const ValueParams& p) {
  detail::check_lower(w_i, c);
  detail::check_higher(w_i, c);
  const Regime regime = regime_of(w_i, c);
  const double loss = -value_of_change(-1, p);
  const double gain = value_of_change(+1, p);
  const double q = success_prob(c.q_self, w_i);
  const double q_l = success_prob(c.q_lower, c.w_lower);
  const double q_h = success_prob(c.q_higher, c.w_higher);
  switch (regime) {
    case Regime::below_both: {
      const double p_above = detail::self_passes_higher_best(w_i, c);
      return -loss * (q * q_l * q_h + q * q_l * (1 - q_h) * (1 - p_above) + (1 - q) * q_l) +
             gain * q * (1 - q_l) * (1 - q_h) * p_above;
    }
    case Regime::between:
      return -loss * (1 - q) * q_l * detail::lower_passes_best(c) +
             gain * q * (1 - q_h) * detail::self_passes_higher_best(w_i, c);
    case Regime::inverted_between:
      return -loss * (1 - q) * q_l + gain * q * (1 - q_l);
    case Regime::above_both:
      return -loss * (1 - q) * q_l * detail::lower_passes_best(c) + gain * q;
  }
  return 0.0;
}

/// Enumeration oracle: walks every success/failure combination of
/// (self, lower, higher), recomputes the final standing of the three lifters
/// from their resulting best weights and sums probability-weighted values.
/// Comparisons that the context cannot decide with certainty (w_i vs y_H,
/// w_L vs y_i) are split into two branches when a plug-in probability is
/// supplied. A disabled channel's rival can neither pass nor be passed.
inline double brute_force_eu(double w_i, const RivalContext& c, const ValueParams& p,
                             Channels channels = Channels::both) {
  const bool use_lower = channels != Channels::higher_only;
  const bool use_higher = channels != Channels::lower_only;
  if (use_lower) detail::check_lower(w_i, c);
  if (use_higher) detail::check_higher(w_i, c);
  if (use_higher && (detail::tie(w_i, c.w_higher) || detail::tie(w_i, c.y_higher)))
    throw Error(ErrorCode::boundary_tie, "w_i on a higher-rival boundary");
  if (use_lower && detail::tie(w_i, c.w_lower)) throw Error(ErrorCode::boundary_tie, "w_i == w_L");

  const double q = success_prob(c.q_self, w_i);
  const double q_l = use_lower ? success_prob(c.q_lower, c.w_lower) : 0.0;
  const double q_h = use_higher ? success_prob(c.q_higher, c.w_higher) : 1.0;

  double total = 0.0;
  for (int s_i = 0; s_i < 2; ++s_i)
    for (int s_l = 0; s_l < 2; ++s_l)
      for (int s_h = 0; s_h < 2; ++s_h) {
        const double prob = (s_i ? q : 1 - q) * (s_l ? q_l : 1 - q_l) * (s_h ? q_h : 1 - q_h);
        if (prob == 0.0) continue;
        const double final_i = s_i ? w_i : c.y_self;
        const double final_l = s_l ? c.w_lower : c.y_lower;
        const double final_h = s_h ? c.w_higher : c.y_higher;

        // Each uncertain comparison becomes a list of (probability, outcome).
        std::vector<std::pair<double, bool>> pass_h{{1.0, false}};
        if (use_higher) {
          if (s_i && !s_h && c.p_self_above_higher_best && !(w_i > c.w_higher)) {
            const double pp = detail::clamp_probability(*c.p_self_above_higher_best);
            pass_h = {{pp, true}, {1 - pp, false}};
          } else {
            pass_h = {{1.0, final_i > final_h}};
          }
        }
        std::vector<std::pair<double, bool>> passed_by_l{{1.0, false}};
        if (use_lower) {
          if (!s_i && s_l && c.p_lower_above_self_best && !(c.w_lower > w_i)) {
            const double pp = detail::clamp_probability(*c.p_lower_above_self_best);
            passed_by_l = {{pp, true}, {1 - pp, false}};
          } else {
            passed_by_l = {{1.0, final_l > final_i}};
          }
        }
        for (const auto& [ph, up] : pass_h)
          for (const auto& [pl, down] : passed_by_l)
            total += prob * ph * pl * value_of_change((up ? 1 : 0) - (down ? 1 : 0), p);
      }
  return total;
}

}  // namespace benchpress
