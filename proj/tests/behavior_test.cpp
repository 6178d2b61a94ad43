#include "benchpress/behavior.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "support.hpp"

using namespace benchpress;
using testing_support::constant_curve;
using testing_support::curve_through;
using testing_support::expect_code;

namespace {

ValueParams with_lambda(double lambda, double alpha = 1.0) {
  ValueParams p;
  p.lambda = lambda;
  p.alpha = alpha;
  return p;
}

// Expected utility of the lifting stage summed over (own, lower, higher)
// outcomes, with live channels decided by the caller.
double table_enumeration(double q_i, double q_l, double q_h, bool lower_live, bool higher_live,
                         const ValueParams& p) {
  double eu = 0.0;
  for (int s_i = 0; s_i < 2; ++s_i)
    for (int s_l = 0; s_l < 2; ++s_l)
      for (int s_h = 0; s_h < 2; ++s_h) {
        const double prob = (s_i ? q_i : 1 - q_i) * (s_l ? q_l : 1 - q_l) * (s_h ? q_h : 1 - q_h);
        eu += prob * lifting_stage_utility(lower_live, higher_live, s_i, s_h, s_l, p);
      }
  return eu;
}

RivalContext random_context(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto lattice = [&](double lo, int span) {
    return lo + 2.5 * std::uniform_int_distribution<int>(0, span)(rng);
  };
  RivalContext c;
  c.y_self = lattice(95.0, 8);
  c.y_lower = c.y_self - lattice(2.5, 4);
  c.y_higher = c.y_self + lattice(2.5, 4);
  c.w_lower = c.y_lower + lattice(0.0, 8);
  c.w_higher = c.y_higher + lattice(0.0, 8);
  auto curve = [&] {
    return SuccessCurve{90.0 + 30.0 * u(rng), 1.0 + 6.0 * u(rng), 0.6 + 0.4 * u(rng), 0.2 * u(rng)};
  };
  c.q_self = curve();
  c.q_lower = curve();
  c.q_higher = curve();
  if (u(rng) < 0.3) c.p_self_above_higher_best = u(rng);
  if (u(rng) < 0.3) c.p_lower_above_self_best = u(rng);
  return c;
}

bool on_boundary(double w, const RivalContext& c) {
  return std::abs(w - c.w_lower) < 1e-9 || std::abs(w - c.w_higher) < 1e-9 ||
         std::abs(w - c.y_higher) < 1e-9;
}

}  // namespace

TEST(Value, ReferenceAndUnitSteps) {
  const ValueParams p = with_lambda(2.25);
  EXPECT_DOUBLE_EQ(value(p.reference_rank, p), 0.0);
  EXPECT_DOUBLE_EQ(value(p.reference_rank + 1, p), 1.0);
  EXPECT_DOUBLE_EQ(value(p.reference_rank - 1, p), -2.25);
  EXPECT_DOUBLE_EQ(value(p.reference_rank - 1, with_lambda(2.25, 0.88)), -2.25);
}

TEST(Value, SignStructureAndMonotone) {
  ValueParams p = with_lambda(1.7, 0.6);
  p.reference_rank = 4;
  for (int x = 0; x < 10; ++x) {
    EXPECT_EQ(value(x, p) < 0.0, x < p.reference_rank);
    EXPECT_LT(value(x, p), value(x + 1, p));
  }
}

TEST(Value, RejectsBadParams) {
  expect_code(ErrorCode::context_violation, [] { with_lambda(0.0).validate(); });
  expect_code(ErrorCode::context_violation, [] { with_lambda(2.0, 1.5).validate(); });
}

TEST(SuccessCurve, SaturationMidpointAndMonotone) {
  const SuccessCurve c{100.0, 4.0, 0.9, 0.05};
  EXPECT_NEAR(success_prob(c, 1.0), c.ceiling, 1e-9);
  EXPECT_NEAR(success_prob(c, 1e5), c.floor, 1e-12);
  EXPECT_DOUBLE_EQ(success_prob(c, 100.0), (c.ceiling + c.floor) / 2);
  for (double w = 50.0; w < 150.0; w += 2.5) EXPECT_GT(success_prob(c, w), success_prob(c, w + 2.5));
  expect_code(ErrorCode::nonpositive_weight, [&] { success_prob(c, 0.0); });
}

TEST(SuccessCurve, FitMatchesGridSearchAndBands) {
  // Digitised success rate by distance from personal best (kg).
  const std::vector<CurvePoint> pts{{-10, 0.93}, {-5, 0.92}, {0, 0.84}, {2.5, 0.71}, {5, 0.55},
                                    {7.5, 0.41}, {10, 0.29}, {15, 0.14}, {20, 0.08}};
  const SuccessCurve fit = fit_success_curve(pts, 0.0, 0.95);

  double best = 1e9, best_a = 0, best_s = 0;
  for (double a = 0.0; a <= 12.0; a += 0.005)
    for (double s = 1.0; s <= 8.0; s += 0.005) {
      double sse = 0;
      for (const auto& p : pts) {
        const double q = 0.95 / (1 + std::exp((p.distance - a) / s));
        sse += (q - p.rate) * (q - p.rate);
      }
      if (sse < best) best = sse, best_a = a, best_s = s;
    }
  EXPECT_NEAR(fit.anchor, best_a, 0.01);
  EXPECT_NEAR(fit.scale, best_s, 0.01);

  // shift so the curve is evaluated on positive weights
  SuccessCurve shifted = fit;
  shifted.anchor += 100.0;
  EXPECT_GE(success_prob(shifted, 100.0), 0.75);
  EXPECT_LE(success_prob(shifted, 100.0), 1.0);
  EXPECT_LT(success_prob(shifted, 120.0), 0.25);
}

TEST(LiftingStage, UtilityTable) {
  const ValueParams p = with_lambda(2.0);
  for (int bits = 0; bits < 8; ++bits)
    EXPECT_EQ(lifting_stage_utility(false, false, bits & 1, bits & 2, bits & 4, p), 0.0);
  EXPECT_EQ(lifting_stage_utility(true, false, false, false, true, p), -2.0);
  EXPECT_EQ(lifting_stage_utility(true, false, true, false, true, p), 0.0);
  EXPECT_EQ(lifting_stage_utility(false, true, true, false, false, p), 1.0);
  EXPECT_EQ(lifting_stage_utility(false, true, true, true, false, p), 0.0);
  EXPECT_EQ(lifting_stage_utility(true, true, false, false, true, p), -2.0);
  EXPECT_EQ(lifting_stage_utility(true, true, true, false, true, p), 1.0);
}

TEST(LowerRival, Cases) {
  const ValueParams p = with_lambda(2.0);
  RivalContext c;
  c.y_lower = 95;
  c.y_self = 100;
  c.y_higher = 120;
  c.w_higher = 125;

  // L1: w_L > w_i >= y_i
  c.w_lower = 107.5;
  c.q_lower = curve_through(107.5, 0.8);
  c.q_self = curve_through(102.5, 0.5);
  EXPECT_EQ(lower_case(102.5, c), RivalCase::L1);
  EXPECT_NEAR(eu_lower_rival(102.5, c, p), -1.6, 1e-12);
  EXPECT_NEAR(eu_lower_rival(102.5, c, p), table_enumeration(0.5, 0.8, 0.0, false, false, p) +
                                               (-2.0 * 0.8), 1e-12);

  // L2: w_i > w_L > y_i
  c.w_lower = 102.5;
  c.q_lower = curve_through(102.5, 0.8);
  c.q_self = curve_through(105.0, 0.5);
  EXPECT_EQ(lower_case(105.0, c), RivalCase::L2);
  EXPECT_NEAR(eu_lower_rival(105.0, c, p), -0.8, 1e-12);
  EXPECT_NEAR(eu_lower_rival(105.0, c, p), table_enumeration(0.5, 0.8, 0.0, true, false, p), 1e-12);

  // L3: y_i > w_L
  c.w_lower = 97.5;
  EXPECT_EQ(lower_case(105.0, c), RivalCase::L3);
  EXPECT_EQ(eu_lower_rival(105.0, c, p), 0.0);

  expect_code(ErrorCode::context_violation, [&] { eu_lower_rival(97.5, c, p); });
}

TEST(LowerRival, CaseOrderingHoldsForRandomCurves) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int t = 0; t < 500; ++t) {
    const ValueParams p = with_lambda(0.2 + 5 * u(rng));
    RivalContext c;
    c.y_lower = 90;
    c.y_self = 100;
    c.y_higher = 130;
    c.w_higher = 130;
    c.q_self = {100 + 20 * u(rng), 1 + 5 * u(rng), 0.7 + 0.3 * u(rng), 0.1 * u(rng)};
    c.q_lower = {100 + 20 * u(rng), 1 + 5 * u(rng), 0.7 + 0.3 * u(rng), 0.1 * u(rng)};
    const double w_i = 105.0;
    c.w_lower = 95.0;
    const double case3 = eu_lower_rival(w_i, c, p);
    c.w_lower = 102.5;
    const double case2 = eu_lower_rival(w_i, c, p);
    c.w_lower = 107.5;
    const double case1_same_wl = eu_lower_rival(102.5, c, p);
    // case 1 with the same w_L as case 2
    c.w_lower = 102.5;
    const double case1 = eu_lower_rival(100.0, c, p);
    EXPECT_GE(case3, case2);
    EXPECT_GE(case2, case1);
    EXPECT_LE(case1_same_wl, 0.0);
  }
}

TEST(LowerRival, LinearInLambda) {
  RivalContext c;
  c.y_lower = 95;
  c.y_self = 100;
  c.y_higher = 120;
  c.w_higher = 125;
  c.w_lower = 102.5;
  c.q_lower = curve_through(102.5, 0.7);
  c.q_self = curve_through(105.0, 0.45);
  const double slope = -(1 - 0.45) * 0.7;
  for (double lambda : {1.0, 2.0, 4.0})
    EXPECT_NEAR(eu_lower_rival(105.0, c, with_lambda(lambda)), lambda * slope, 1e-12);
}

TEST(HigherRival, Cases) {
  const ValueParams p = with_lambda(2.0);
  RivalContext c;
  c.y_lower = 90;
  c.w_lower = 90;
  c.y_self = 100;
  c.y_higher = 105;
  c.w_higher = 112.5;
  c.q_higher = curve_through(112.5, 0.7);

  EXPECT_EQ(higher_case(102.5, c), RivalCase::H1);
  EXPECT_EQ(eu_higher_rival(102.5, c, p), 0.0);

  c.q_self = curve_through(107.5, 0.6);
  EXPECT_EQ(higher_case(107.5, c), RivalCase::H2);
  EXPECT_NEAR(eu_higher_rival(107.5, c, p), 0.18, 1e-12);
  EXPECT_NEAR(eu_higher_rival(107.5, c, p), table_enumeration(0.6, 0.0, 0.7, false, true, p), 1e-12);

  c.q_self = curve_through(115.0, 0.4);
  EXPECT_EQ(higher_case(115.0, c), RivalCase::H3);
  EXPECT_NEAR(eu_higher_rival(115.0, c, p), 0.4, 1e-12);
  EXPECT_NEAR(eu_higher_rival(115.0, c, p), table_enumeration(0.4, 0.0, 0.0, false, true, p), 1e-12);

  expect_code(ErrorCode::boundary_tie, [&] { eu_higher_rival(112.5, c, p); });
  expect_code(ErrorCode::boundary_tie, [&] { eu_higher_rival(105.0, c, p); });
}

TEST(HigherRival, OrderingFlipsAtThreshold) {
  // Fix q_self; move q(w_H) by shifting the rival's curve and locate the
  // point where jumping over w_H stops paying.
  const ValueParams p = with_lambda(2.0);
  RivalContext c;
  c.y_lower = 90;
  c.w_lower = 90;
  c.y_self = 100;
  c.y_higher = 105;
  c.w_higher = 110;
  c.q_self = {108.0, 3.0, 0.95, 0.02};
  const double w_minus = 107.5, w_plus = 112.5;
  auto gap = [&](double anchor) {
    c.q_higher = {anchor, 3.0, 0.95, 0.02};
    return eu_higher_rival(w_plus, c, p) - eu_higher_rival(w_minus, c, p);
  };
  // low anchor: rival rarely makes w_H, so staying below pays
  double lo = 80.0, hi = 140.0;
  ASSERT_LT(gap(lo), 0.0);
  ASSERT_GT(gap(hi), 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (gap(mid) < 0 ? lo : hi) = mid;
  }
  c.q_higher = {lo, 3.0, 0.95, 0.02};
  const double ratio = success_prob(c.q_self, w_plus) / success_prob(c.q_self, w_minus);
  EXPECT_NEAR(ratio, 1.0 - success_prob(c.q_higher, c.w_higher), 1e-9);
}

TEST(Monotonicity, SlopeNonPositiveWithinRegimes) {
  const ValueParams p = with_lambda(2.25);
  RivalContext c;
  c.y_lower = 95;
  c.y_self = 100;
  c.y_higher = 110;
  c.w_lower = 102.5;
  c.w_higher = 120;
  c.q_self = {105, 4, 0.95, 0.02};
  c.q_lower = {103, 4, 0.95, 0.02};
  c.q_higher = {115, 4, 0.95, 0.02};
  const double step = c.kappa / 10;
  auto check = [&](double from, double to, auto&& f) {
    for (double w = from; w + step < to; w += step) EXPECT_LE(f(w + step) - f(w), 1e-15) << w;
  };
  auto lower = [&](double w) { return eu_lower_rival(w, c, p); };
  auto higher = [&](double w) { return eu_higher_rival(w, c, p); };
  check(100.0 + 1e-6, 102.5 - 1e-6, lower);
  check(102.5 + 1e-6, 130.0, lower);
  check(110.0 + 1e-6, 120.0 - 1e-6, higher);
  check(120.0 + 1e-6, 140.0, higher);
}

TEST(Comprehensive, ExampleAboveBoth) {
  RivalContext c;
  c.y_lower = 95;
  c.y_self = 100;
  c.y_higher = 105;
  c.w_lower = 102.5;
  c.w_higher = 107.5;
  c.q_self = curve_through(110.0, 0.5);
  c.q_lower = curve_through(102.5, 0.9);
  c.q_higher = curve_through(107.5, 0.3);
  const ValueParams p = with_lambda(2.0);
  EXPECT_EQ(regime_of(110.0, c), Regime::above_both);
  EXPECT_NEAR(eu_comprehensive(110.0, c, p), -0.4, 1e-12);
  EXPECT_NEAR(brute_force_eu(110.0, c, p), -0.4, 1e-12);
}

TEST(Comprehensive, MiddleRegimeIndicators) {
  RivalContext c;
  c.y_lower = 95;
  c.y_self = 100;
  c.y_higher = 110;
  c.w_lower = 102.5;
  c.w_higher = 115;
  c.q_self = curve_through(105.0, 0.6);
  c.q_lower = curve_through(102.5, 0.7);
  c.q_higher = curve_through(115.0, 0.5);
  const ValueParams p = with_lambda(2.0);
  EXPECT_EQ(regime_of(105.0, c), Regime::between);
  EXPECT_NEAR(eu_comprehensive(105.0, c, p), -2.0 * 0.4 * 0.7, 1e-12);

  c.w_lower = 97.5;
  c.q_lower = curve_through(97.5, 0.7);
  EXPECT_EQ(eu_comprehensive(105.0, c, p), 0.0);
}

TEST(Comprehensive, BoundaryTies) {
  RivalContext c;
  c.y_lower = 95;
  c.y_self = 100;
  c.y_higher = 105;
  c.w_lower = 102.5;
  c.w_higher = 110;
  const ValueParams p;
  for (double w : {102.5, 105.0, 110.0})
    expect_code(ErrorCode::boundary_tie, [&] { eu_comprehensive(w, c, p); });
  c.y_lower = 101;
  expect_code(ErrorCode::context_violation, [&] { eu_comprehensive(107.5, c, p); });
}

TEST(Oracle, MatchesComprehensiveOnRandomContexts) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  std::set<Regime> seen;
  while (checked < 1000) {
    const RivalContext c = random_context(rng);
    const double w = c.y_self + 2.5 * std::uniform_int_distribution<int>(0, 12)(rng);
    if (on_boundary(w, c)) continue;
    const ValueParams p = with_lambda(0.5 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng),
                                      0.5 + 0.5 * std::uniform_real_distribution<double>(0, 1)(rng));
    seen.insert(regime_of(w, c));
    ASSERT_NEAR(brute_force_eu(w, c, p), eu_comprehensive(w, c, p), 1e-12) << checked;
    ++checked;
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Oracle, MatchesPerRivalEvaluators) {
  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 1000) {
    const RivalContext c = random_context(rng);
    const double w = c.y_self + 2.5 * std::uniform_int_distribution<int>(0, 12)(rng);
    if (on_boundary(w, c)) continue;
    const ValueParams p = with_lambda(2.25);
    ASSERT_NEAR(brute_force_eu(w, c, p, Channels::lower_only), eu_lower_rival(w, c, p), 1e-12);
    ASSERT_NEAR(brute_force_eu(w, c, p, Channels::higher_only), eu_higher_rival(w, c, p), 1e-12);
    ++checked;
  }
}

TEST(Oracle, DegenerateRivals) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    RivalContext c = random_context(rng);
    const double w = c.y_self + 2.5 * std::uniform_int_distribution<int>(1, 12)(rng);
    if (on_boundary(w, c)) continue;
    const ValueParams p = with_lambda(2.25);

    RivalContext silent_lower = c;
    silent_lower.q_lower = constant_curve(false);
    EXPECT_NEAR(brute_force_eu(w, silent_lower, p), eu_higher_rival(w, c, p), 1e-12);

    if (w < c.w_higher) {
      RivalContext sure_higher = c;
      sure_higher.q_higher = constant_curve(true);
      sure_higher.p_self_above_higher_best.reset();
      EXPECT_NEAR(brute_force_eu(w, sure_higher, p, Channels::higher_only), 0.0, 1e-12);
    }
  }
}
