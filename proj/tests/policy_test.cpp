#include "benchpress/policy.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace benchpress;
using testing_support::expect_code;

namespace {

RivalContext base_context() {
  RivalContext c;
  c.y_lower = 95;
  c.y_self = 100;
  c.y_higher = 105;
  c.w_lower = 102.5;
  c.w_higher = 110;
  c.q_self = {105, 4, 0.95, 0.02};
  c.q_lower = {105, 4, 0.95, 0.02};
  c.q_higher = {112, 4, 0.95, 0.02};
  return c;
}

RivalContext random_context(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto steps = [&](int lo, int hi) { return 2.5 * std::uniform_int_distribution<int>(lo, hi)(rng); };
  RivalContext c;
  c.y_self = 100 + steps(0, 8);
  c.y_lower = c.y_self - steps(1, 4);
  c.y_higher = c.y_self + steps(1, 4);
  c.w_lower = c.y_lower + steps(0, 8);
  c.w_higher = c.y_higher + steps(0, 8);
  auto curve = [&] {
    return SuccessCurve{c.y_self + 20 * u(rng) - 5, 0.5 + 6 * u(rng), 0.6 + 0.4 * u(rng), 0.1 * u(rng)};
  };
  c.q_self = curve();
  c.q_lower = curve();
  c.q_higher = curve();
  return c;
}

}  // namespace

TEST(Grid, PointsAndValidation) {
  const WeightGrid g{100, 110, 2.5};
  EXPECT_EQ(g.points(), (std::vector<double>{100, 102.5, 105, 107.5, 110}));
  expect_code(ErrorCode::empty_grid, [] { WeightGrid{110, 100, 2.5}.points(); });
  expect_code(ErrorCode::empty_grid, [] { WeightGrid{100, 101, 2.5}.points(); });
  const WeightGrid d = default_grid(102.5, SuccessCurve{100, 2, 0.9, 0.05}, 2.5);
  EXPECT_EQ(d.lower, 102.5);
  EXPECT_EQ(d.upper, 125.0);
}

TEST(Regime, Examples) {
  RivalContext c = base_context();
  c.w_lower = 105;
  c.w_higher = 110;
  c.y_higher = 108;
  EXPECT_EQ(regime_of(100, c), Regime::below_both);
  EXPECT_EQ(regime_of(107, c), Regime::between);
  EXPECT_EQ(regime_of(112.5, c), Regime::above_both);
  expect_code(ErrorCode::boundary_tie, [&] { regime_of(110, c); });
}

TEST(Policy, HigherOnlyFlatCurveJumpsOverDeclaration) {
  RivalContext c = base_context();
  c.q_self = {140, 40, 0.95, 0.02};
  const ValueParams p;
  const PolicyResult r = optimal_weight(c, p, {102.5, 130, 2.5}, Model::higher_only);
  EXPECT_EQ(r.chosen_weight, c.w_higher + c.kappa);
  EXPECT_EQ(std::get<RivalCase>(r.regime), RivalCase::H3);
  EXPECT_EQ(theoretical_prediction(c, p, Model::higher_only), c.w_higher + c.kappa);
}

TEST(Policy, HigherOnlyShakyRivalStaysAboveBest) {
  RivalContext c = base_context();
  c.q_higher = {100, 4, 0.95, 0.02};  // q(w_H) low
  c.q_self = {108, 2, 0.95, 0.02};
  const ValueParams p;
  const double k = c.kappa;
  const double ratio = success_prob(c.q_self, c.w_higher + k) / success_prob(c.q_self, c.y_higher + k);
  ASSERT_LT(ratio, 1.0 - success_prob(c.q_higher, c.w_higher));
  EXPECT_EQ(theoretical_prediction(c, p, Model::higher_only), c.y_higher + k);
  EXPECT_EQ(optimal_weight(c, p, {102.5, 130, 2.5}, Model::higher_only).chosen_weight, c.y_higher + k);
}

TEST(Policy, SteepCurvePastDeclarationStaysBelow) {
  RivalContext c = base_context();
  c.w_higher = 115;
  c.q_self = {c.w_higher + 0.5, 0.2, 0.95, 0.0};
  const PolicyResult r = optimal_weight(c, ValueParams{}, {102.5, 130, 2.5}, Model::higher_only);
  EXPECT_LT(r.chosen_weight, c.w_higher);
  EXPECT_EQ(r.chosen_weight, c.y_higher + c.kappa);
}

TEST(Policy, ComprehensiveBelowBothPicksBestPlusIncrement) {
  RivalContext c = base_context();
  c.w_lower = 115;
  c.w_higher = 117.5;
  const WeightGrid below{102.5, 112.5, 2.5};
  const PolicyResult r = optimal_weight(c, ValueParams{}, below, Model::comprehensive);
  EXPECT_EQ(r.chosen_weight, c.y_higher + c.kappa);
  EXPECT_EQ(std::get<Regime>(r.regime), Regime::below_both);
}

TEST(Policy, LowerOnlyJustAboveRival) {
  RivalContext c = base_context();
  c.w_lower = 105;
  EXPECT_EQ(theoretical_prediction(c, ValueParams{}, Model::lower_only), 107.5);
  EXPECT_EQ(optimal_weight(c, ValueParams{}, {102.5, 130, 2.5}, Model::lower_only).chosen_weight, 107.5);
}

TEST(Policy, TiesGoToLightestAndGridOfBoundariesIsEmpty) {
  RivalContext c = base_context();
  c.w_lower = 97.5;  // case 3 everywhere: EU identically 0
  const PolicyResult r = optimal_weight(c, ValueParams{}, {102.5, 120, 2.5}, Model::lower_only);
  EXPECT_EQ(r.chosen_weight, 102.5);
  EXPECT_EQ(r.runner_up_gap, 0.0);
  expect_code(ErrorCode::empty_grid,
              [&] { optimal_weight(c, ValueParams{}, {110, 110, 2.5}, Model::higher_only); });
}

TEST(Policy, ArgmaxDominatesAndMatchesClosedForm) {
  std::mt19937_64 rng(11);
  const ValueParams p;
  int agreements = 0;
  for (int t = 0; t < 600; ++t) {
    const RivalContext c = random_context(rng);
    const Model m = static_cast<Model>(t % 3);
    const WeightGrid g{c.y_self + c.kappa, c.y_self + 60, c.kappa};
    const PolicyResult r = optimal_weight(c, p, g, m);
    for (double w : g.points()) {
      if (detail::is_boundary(w, c, m)) continue;
      EXPECT_GE(r.achieved_eu + 1e-12, detail::evaluate(w, c, p, m));
    }
    EXPECT_GE(r.runner_up_gap, 0.0);
    EXPECT_EQ(r.chosen_weight, theoretical_prediction(c, p, m)) << t;
    agreements += r.chosen_weight == theoretical_prediction(c, p, m);
  }
  EXPECT_EQ(agreements, 600);
}

TEST(Policy, HigherDeclarationPullsChoiceUp) {
  std::mt19937_64 rng(3);
  const ValueParams p;
  int checked = 0;
  for (int t = 0; t < 2000 && checked < 200; ++t) {
    RivalContext c = random_context(rng);
    RivalContext raised = c;
    raised.w_higher += c.kappa;
    auto jump_dominant = [&](const RivalContext& x) {
      const double plus = success_prob(x.q_self, x.w_higher + x.kappa);
      const double minus = success_prob(x.q_self, x.y_higher + x.kappa);
      return plus / minus > 1.0 - success_prob(x.q_higher, x.w_higher);
    };
    if (!jump_dominant(c) || !jump_dominant(raised)) continue;
    const WeightGrid g{c.y_self + c.kappa, c.y_self + 60, c.kappa};
    EXPECT_GE(optimal_weight(raised, p, g, Model::higher_only).chosen_weight,
              optimal_weight(c, p, g, Model::higher_only).chosen_weight);
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}
