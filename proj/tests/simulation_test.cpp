#include "benchpress/simulation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"

using namespace benchpress;
using testing_support::expect_code;

namespace {

PanelConfig small_panel(int n, std::uint64_t seed) {
  PanelConfig cfg;
  cfg.n_competitions = n;
  cfg.master_seed = seed;
  return cfg;
}

Formula attempt_formula(int round) {
  Formula f;
  f.kind = FormulaKind::attempt_eq1;
  f.round = round;
  f.sample = Sample::prior_success;
  return f;
}

Formula success_formula(int round) {
  Formula f;
  f.kind = FormulaKind::success_lpm;
  f.round = round;
  return f;
}

std::vector<ObservationRow> complete_rows(const std::vector<ObservationRow>& rows, int round) {
  std::vector<ObservationRow> out;
  for (const auto& r : rows)
    if (r.round == round && r.z_lower && r.z_higher) out.push_back(r);
  return out;
}

double sd(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

TEST(Simulation, SeedFixesTheEventLog) {
  const PanelConfig cfg = small_panel(10, 42);
  const auto a = simulate_competition(cfg, 3);
  const auto b = simulate_competition(cfg, 3);
  EXPECT_EQ(to_text(a.state.events()), to_text(b.state.events()));
  EXPECT_NE(to_text(a.state.events()), to_text(simulate_competition(cfg, 4).state.events()));
  EXPECT_NE(to_text(a.state.events()),
            to_text(simulate_competition(small_panel(10, 43), 3).state.events()));
}

TEST(Simulation, PanelDoesNotDependOnThreadCount) {
  PanelConfig cfg = small_panel(60, 5);
  std::ostringstream one, many;
  write_observations(one, simulate_panel(cfg));
  cfg.jobs = 4;
  write_observations(many, simulate_panel(cfg));
  EXPECT_EQ(one.str(), many.str());
}

TEST(Simulation, InvalidConfigRejected) {
  auto with = [](auto change) {
    PanelConfig cfg = small_panel(5, 1);
    change(cfg);
    return cfg;
  };
  for (const PanelConfig& cfg :
       {with([](PanelConfig& c) { c.n_competitions = 0; }),
        with([](PanelConfig& c) { c.lifters_per_competition = 1; }),
        with([](PanelConfig& c) { c.kappa = 0.0; }),
        with([](PanelConfig& c) { c.lambda = {0.5, 2.0}; }),
        with([](PanelConfig& c) { c.curve_scale = {3.0, 2.0}; }),
        with([](PanelConfig& c) { c.shock_correlation = 1.5; })})
    expect_code(ErrorCode::config_invalid, [&] { simulate_panel(cfg); });
}

TEST(Simulation, LogsReplayAndPassTheInformationAudit) {
  for (auto mode : {SimulationMode::reduced_form, SimulationMode::structural_agents}) {
    PanelConfig cfg = small_panel(40, 9);
    cfg.mode = mode;
    for (int c = 0; c < cfg.n_competitions; ++c) {
      const auto sim = simulate_competition(cfg, c);
      ASSERT_TRUE(sim.state.finished());
      const auto again = replay(sim.state.category(), sim.state.roster(), sim.state.events(),
                                sim.state.rules());
      EXPECT_EQ(again.events(), sim.state.events());
      EXPECT_GT(audit_information(sim.state, observations(sim)), 0);
    }
  }
}

TEST(Simulation, CertainSuccessRanksByFinalDeclaration) {
  PanelConfig cfg = small_panel(30, 11);
  cfg.success_override = 1.0;
  for (int c = 0; c < cfg.n_competitions; ++c) {
    const auto sim = simulate_competition(cfg, c);
    const auto& roster = sim.state.roster();
    std::vector<std::size_t> expected(roster.size());
    std::iota(expected.begin(), expected.end(), 0);
    std::sort(expected.begin(), expected.end(), [&](std::size_t a, std::size_t b) {
      const double wa = sim.state.attempt(a, 3)->declared_weight;
      const double wb = sim.state.attempt(b, 3)->declared_weight;
      return wa != wb ? wa > wb : roster[a].bodyweight < roster[b].bodyweight;
    });
    const auto rank = sim.state.interim_rank_indices(3);
    for (std::size_t pos = 0; pos < expected.size(); ++pos)
      EXPECT_EQ(rank[expected[pos]], static_cast<int>(pos) + 1);
  }
}

TEST(Simulation, RecoversPlantedHigherRivalResponse) {
  const auto rows = simulate_panel(small_panel(2000, 2024));
  const EstimateResult r = ols(build_design(rows, attempt_formula(2)));
  EXPECT_LT(std::abs(r.coef("z_higher") - 0.449), 3.0 * r.se("z_higher"));
  EXPECT_LT(std::abs(r.coef("z_lower") - 0.106), 3.0 * r.se("z_lower"));
}

TEST(Simulation, NullPressureGivesInsignificantEstimates) {
  int significant = 0, runs = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    PanelConfig cfg = small_panel(500, 300 + seed);
    cfg.planted.gamma_lower = {0.0, 0.0};
    cfg.planted.gamma_higher = {0.0, 0.0};
    const auto rows = simulate_panel(cfg);
    for (int round : {2, 3}) {
      const EstimateResult r = ols(build_design(rows, attempt_formula(round)));
      for (const char* name : {"z_lower", "z_higher"}) {
        ++runs;
        significant += std::abs(r.coef(name) / r.se(name)) >= 3.0;
      }
    }
  }
  EXPECT_LE(significant, runs / 100);
}

TEST(Simulation, SpreadShrinksWithRootOfPanelSize) {
  std::vector<double> small, large;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    small.push_back(
        ols(build_design(simulate_panel(small_panel(200, 700 + seed)), attempt_formula(2)))
            .coef("z_higher"));
    large.push_back(
        ols(build_design(simulate_panel(small_panel(2000, 900 + seed)), attempt_formula(2)))
            .coef("z_higher"));
  }
  EXPECT_NEAR(sd(small) / sd(large), std::sqrt(10.0), 0.2 * std::sqrt(10.0));
}

TEST(Simulation, StructuralAgentsDeclareBoundaryPlusKappa) {
  PanelConfig cfg = small_panel(300, 17);
  cfg.mode = SimulationMode::structural_agents;
  const auto panel = simulate_panel_detailed(cfg, true);
  int decisions = 0, boundary = 0, modelled = 0, agree = 0;
  std::vector<CompetitionState> histories;
  for (const auto& c : panel.competitions) {
    histories.push_back(c.state);
    for (const auto& d : c.decisions) {
      ++decisions;
      boundary += d.boundary_plus_kappa;
      if (!d.model) continue;
      ++modelled;
      agree += d.predicted && std::abs(*d.predicted - d.chosen) < 1e-9;
    }
  }
  EXPECT_GT(static_cast<double>(boundary) / decisions, 0.6);
  EXPECT_GT(static_cast<double>(agree) / modelled, 0.95);
  const auto table = rank_change_distribution(histories);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_GT(table.frequency[r][2], 0.5);
    EXPECT_EQ(std::max_element(table.frequency[r].begin(), table.frequency[r].end()) -
                  table.frequency[r].begin(),
              2);
  }
}

TEST(Simulation, ConsistentBeliefsMatchTheirOwnProjection) {
  PanelConfig cfg = with_consistent_beliefs(small_panel(1500, 5), 4);
  const auto rows = simulate_panel(cfg);
  const RivalModel refit =
      predict_rival_attempt(rows, PredictionModelSpec{3, FeatureSet::without_previous_success, 5});
  const RivalModel& used = cfg.belief_models.at(3);
  ASSERT_EQ(refit.names, used.names);
  const auto at = std::find(used.names.begin(), used.names.end(), "previous_attempt") - used.names.begin();
  EXPECT_NEAR(refit.coefficients[at], used.coefficients[at], 0.03);
  cfg.belief_models[3].spec.feature_set = FeatureSet::full;
  expect_code(ErrorCode::config_invalid, [&] { simulate_panel(cfg); });
}

// ---------------------------------------------------------------------------

class Counterfactual : public ::testing::Test {
 protected:
  void SetUp() override {
    rows_ = complete_rows(simulate_panel(small_panel(800, 31)), 2);
    attempt_ = ols(build_design(rows_, attempt_formula(2)));
    success_ = two_sls(build_design(rows_, success_formula(2)));
  }

  CounterfactualResult run(Scenario s) const {
    return counterfactual_outcomes(attempt_, success_, rows_, s);
  }

  std::vector<ObservationRow> rows_;
  EstimateResult attempt_, success_;
};

TEST_F(Counterfactual, ProductIdentityHoldsExactly) {
  for (auto s : {Scenario::benchmark, Scenario::no_pressure_attempt, Scenario::no_pressure_lifting,
                 Scenario::no_pressure_both}) {
    const auto res = run(s);
    ASSERT_EQ(res.outcomes.size(), rows_.size());
    for (const auto& e : res.outcomes) {
      EXPECT_EQ(e.expected_achieved, e.attempt_weight * e.success_prob);
      EXPECT_GE(e.success_prob, 0.0);
      EXPECT_LE(e.success_prob, 1.0);
    }
  }
}

TEST_F(Counterfactual, BenchmarkIsTheFittedModel) {
  const auto res = run(Scenario::benchmark);
  const Design d = build_design(rows_, attempt_formula(2));
  for (std::size_t a = 0; a < d.rows.size(); ++a) {
    const auto& r = rows_[d.rows[a]];
    const double fitted = d.X.row(static_cast<Eigen::Index>(a)).dot(attempt_.coefficients);
    EXPECT_NEAR(res.outcomes[d.rows[a]].attempt_weight, r.current_best + fitted, 1e-8);
  }
}

TEST_F(Counterfactual, RemovingAttemptPressureLowersAttempts) {
  ASSERT_GT(attempt_.coef("z_lower"), 0.0);
  ASSERT_GT(attempt_.coef("z_higher"), 0.0);
  double zl = 0.0, zh = 0.0;
  for (const auto& r : rows_) zl += *r.z_lower, zh += *r.z_higher;
  ASSERT_GT(zl, 0.0);
  ASSERT_GT(zh, 0.0);
  const auto bench = run(Scenario::benchmark).outcomes;
  const auto alt = run(Scenario::no_pressure_attempt).outcomes;
  double mb = 0.0, ma = 0.0;
  for (std::size_t i = 0; i < bench.size(); ++i) mb += bench[i].attempt_weight, ma += alt[i].attempt_weight;
  EXPECT_LT(ma, mb);
  const auto lifting = run(Scenario::no_pressure_lifting).outcomes;
  for (std::size_t i = 0; i < bench.size(); ++i)
    EXPECT_EQ(lifting[i].attempt_weight, bench[i].attempt_weight);
}

TEST_F(Counterfactual, ScenariosCoincideWithoutPressure) {
  for (auto& r : rows_) {
    r.z_lower = 0.0;
    r.z_higher = 0.0;
    r.turned_around = 0;
    r.turning_around = 0;
  }
  const auto bench = run(Scenario::benchmark).outcomes;
  for (auto s : {Scenario::no_pressure_attempt, Scenario::no_pressure_lifting,
                 Scenario::no_pressure_both}) {
    const auto alt = run(s).outcomes;
    for (std::size_t i = 0; i < bench.size(); ++i) {
      EXPECT_EQ(alt[i].attempt_weight, bench[i].attempt_weight);
      EXPECT_EQ(alt[i].success_prob, bench[i].success_prob);
    }
  }
}

TEST_F(Counterfactual, MissingPressureRowsAreSkippedAndUnknownNamesRejected) {
  rows_.front().z_higher.reset();
  for (auto s : {Scenario::benchmark, Scenario::no_pressure_attempt, Scenario::no_pressure_both})
    EXPECT_EQ(run(s).skipped, 1);
  attempt_.names.back() = "no_such_feature";
  expect_code(ErrorCode::schema_mismatch, [&] { run(Scenario::benchmark); });
}

TEST(ProportionalChange, IdentityAndUniformScaling) {
  std::vector<ExpectedOutcome> bench;
  for (int i = 0; i < 50; ++i)
    bench.push_back({"m", "l" + std::to_string(i), 2, 100.0 + 3.7 * i, 0.5 + 0.009 * i, 0.0});
  for (auto& e : bench) e.expected_achieved = e.attempt_weight * e.success_prob;

  const auto same = proportional_change(bench, bench);
  for (const auto& c : same.changes) {
    EXPECT_EQ(c.attempt_weight, 0.0);
    EXPECT_EQ(c.expected_achieved, 0.0);
  }

  auto scaled = bench;
  for (auto& e : scaled) {
    e.attempt_weight *= 0.9;
    e.expected_achieved = e.attempt_weight * e.success_prob;
  }
  const auto res = proportional_change(bench, scaled, {-0.2, 0.2, 0.005});
  for (const auto& c : res.changes) EXPECT_NEAR(c.attempt_weight, -0.1, 1e-12);
  const auto& h = res.attempt_weight.counts;
  EXPECT_EQ(std::count(h.begin(), h.end(), 0u), static_cast<long>(h.size()) - 1);
  EXPECT_EQ(*std::max_element(h.begin(), h.end()), bench.size());
  EXPECT_EQ(std::max_element(h.begin(), h.end()) - h.begin(), 20);
}

TEST(ProportionalChange, ZeroBenchmarkExcludedAndMisalignmentRejected) {
  std::vector<ExpectedOutcome> bench{{"m", "a", 2, 100.0, 0.0, 0.0}, {"m", "b", 2, 100.0, 0.5, 50.0}};
  const auto res = proportional_change(bench, bench);
  EXPECT_EQ(res.zero_benchmark, 1);
  EXPECT_EQ(res.changes.size(), 1u);
  auto other = bench;
  other[1].lifter_id = "c";
  expect_code(ErrorCode::schema_mismatch, [&] { proportional_change(bench, other); });
  other.pop_back();
  expect_code(ErrorCode::schema_mismatch, [&] { proportional_change(bench, other); });
}

TEST(ProportionalChange, RemovingAllPressureLowersExpectedAchievement) {
  PanelConfig cfg = small_panel(2000, 55);
  cfg.planted.turning_around = {0.02, 0.03};
  const auto rows = complete_rows(simulate_panel(cfg), 3);
  const EstimateResult attempt = ols(build_design(rows, attempt_formula(3)));
  const EstimateResult success = two_sls(build_design(rows, success_formula(3)));
  const auto bench = counterfactual_outcomes(attempt, success, rows, Scenario::benchmark);
  const auto none = counterfactual_outcomes(attempt, success, rows, Scenario::no_pressure_both);
  const auto change = proportional_change(bench.outcomes, none.outcomes);
  EXPECT_LT(change.mean_attempt_weight(), 0.0);
  EXPECT_LT(change.mean_expected_achieved(), 0.0);
}
