#pragma once

// Synthetic competition panels and counterfactual re-evaluation.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "benchpress/behavior.hpp"
#include "benchpress/competition.hpp"
#include "benchpress/econometrics.hpp"
#include "benchpress/observation.hpp"
#include "benchpress/policy.hpp"
#include "benchpress/pressure.hpp"

namespace benchpress {

enum class SimulationMode { structural_agents, reduced_form };

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool valid() const { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; }
  double draw(std::mt19937_64& rng) const {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  }
};

/// Round-2 values first, round-3 second.
struct PlantedCoefficients {
  std::array<double, 2> gamma_lower{0.106, 0.057};
  std::array<double, 2> gamma_higher{0.449, 0.409};
  std::array<double, 2> turned_around{0.013, 0.032};
  std::array<double, 2> turning_around{-0.005, -0.034};
  double attempt_gap = -0.001;

  std::array<double, 2> attempt_intercept{-5.0, -8.0};
  std::array<double, 2> male{-1.279, 3.583};
  std::array<double, 2> bodyweight{0.269, 0.373};
  std::array<double, 2> num_experience{0.306, 0.325};
  std::array<double, 2> first_participation{32.122, 33.623};

  double success_intercept = 0.80;
  double success_male = 0.02;
  double success_bodyweight = -0.0005;
  double success_experience = 0.003;
  double success_first_participation = -0.02;
};

struct PanelConfig {
  int n_competitions = 2000;
  int lifters_per_competition = 5;
  int federations = 40;
  std::uint64_t master_seed = 1;
  SimulationMode mode = SimulationMode::reduced_form;
  double kappa = 2.5;
  int jobs = 1;

  PlantedCoefficients planted;
  double attempt_noise_sd = 5.0;
  // Correlation between the declaration noise and a +-1 shock that also
  // shifts the success probability of the same attempt by `shock_loading`.
  double shock_correlation = 0.0;
  double shock_loading = 0.0;
  double first_round_success = 0.9;
  double fixed_effect_scale = 1.0;
  // Expected rival declaration: the round's rival model when present,
  // otherwise the previous declaration + increment.
  double belief_increment = 5.0;
  std::map<int, RivalModel> belief_models;
  std::optional<double> success_override;

  double male_share = 0.7;
  int max_experience = 8;
  double strength_sd = 18.0;

  Range lambda{1.5, 3.0};
  Range alpha{0.88, 1.0};
  Range curve_offset{-2.0, 6.0};
  Range curve_scale{2.5, 6.0};
  double curve_ceiling = 0.95;
  double curve_floor = 0.02;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::config_invalid, what); };
    if (n_competitions < 1) fail("n_competitions must be positive");
    if (lifters_per_competition < 2) fail("lifters_per_competition must be at least 2");
    if (federations < 1) fail("federations must be positive");
    if (!(kappa > 0.0)) fail("kappa must be positive");
    if (jobs < 1) fail("jobs must be positive");
    if (!(attempt_noise_sd >= 0.0)) fail("attempt_noise_sd must be non-negative");
    if (!(std::abs(shock_correlation) <= 1.0)) fail("shock_correlation must lie in [-1, 1]");
    if (!(first_round_success >= 0.0 && first_round_success <= 1.0))
      fail("first_round_success must be a probability");
    if (success_override && !(*success_override >= 0.0 && *success_override <= 1.0))
      fail("success_override must be a probability");
    if (!(belief_increment >= 0.0)) fail("belief_increment must be non-negative");
    for (const auto& [round, m] : belief_models) {
      if (round < 2 || round > kRounds || m.spec.target_round != round)
        fail("belief model rounds must be 2 or 3");
      if (m.spec.feature_set != FeatureSet::without_previous_success)
        fail("belief models cannot use the rival's unseen previous outcome");
    }
    if (!(male_share >= 0.0 && male_share <= 1.0)) fail("male_share must be a probability");
    if (max_experience < 0) fail("max_experience must be non-negative");
    if (!(strength_sd >= 0.0)) fail("strength_sd must be non-negative");
    if (!lambda.valid() || lambda.lo < 1.0) fail("lambda range must lie in [1, inf)");
    if (!alpha.valid() || alpha.lo <= 0.0 || alpha.hi > 1.0) fail("alpha range must lie in (0, 1]");
    if (!curve_offset.valid()) fail("curve_offset range invalid");
    if (!curve_scale.valid() || curve_scale.lo <= 0.0) fail("curve_scale must be positive");
    if (!(curve_floor >= 0.0 && curve_floor < curve_ceiling && curve_ceiling <= 1.0))
      fail("curve floor/ceiling must satisfy 0 <= floor < ceiling <= 1");
  }
};

/// One structural-agent declaration next to the closed-form recommendation.
struct DecisionRecord {
  LifterId lifter;
  int round = 2;
  double chosen = 0.0;
  std::optional<Model> model;
  std::optional<double> predicted;
  bool boundary_plus_kappa = false;
};

struct SimulatedCompetition {
  std::string meet_id;
  CompetitionState state;
  std::map<PredictionKey, double> beliefs;
  std::vector<DecisionRecord> decisions;
  int clamped_probabilities = 0;
  int raised_declarations = 0;
};

/// SplitMix64 step of master ^ index: independent per-competition streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace detail {

inline const std::array<std::string, 4>& sim_age_classes() {
  static const std::array<std::string, 4> v{"20-23", "24-34", "35-39", "40-44"};
  return v;
}
inline const std::array<std::string, 2>& sim_divisions() {
  static const std::array<std::string, 2> v{"Open", "Masters"};
  return v;
}
inline const std::array<std::string, 5>& sim_weight_classes() {
  static const std::array<std::string, 5> v{"66", "74", "83", "93", "105"};
  return v;
}

struct SimCategory {
  CategoryKey key;
  std::array<int, 5> level{};  // equipment, age, division, weight class, federation
};

inline double snap(double w, double kappa) { return std::round(w / kappa) * kappa; }

struct Agent {
  double strength = 0.0;
  SuccessCurve curve;
  ValueParams params;
  std::array<double, 3> uniform{};
  std::array<double, 3> noise{};
  std::array<double, 3> shock{};
};

inline std::string federation_name(int f) {
  std::string s = std::to_string(f);
  return "F" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

class CompetitionSimulator {
 public:
  CompetitionSimulator(const PanelConfig& cfg, int index)
      : cfg_(cfg), rng_(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index))) {
    meet_id_ = "sim-" + std::to_string(index);
    draw_category(index);
    draw_roster(index);
  }

  SimulatedCompetition run() {
    CompetitionRules rules;
    rules.kappa = cfg_.kappa;
    rules.lattice_only = true;
    CompetitionState state(cat_.key, roster_, openers_, rules);
    for (int k = 1; k <= kRounds; ++k) {
      std::vector<int> success(roster_.size(), 0);
      std::vector<int> rank_after;
      std::vector<double> best_after(roster_.size(), 0.0);
      {
        CompetitionRules dry_rules = rules;
        dry_rules.strict_timeline = false;
        CompetitionState dry = replay(cat_.key, roster_, state.events(), dry_rules);
        const auto order = dry.current_order().indices;
        for (auto i : order) {
          success[i] = agents_[i].uniform[k - 1] < success_probability(dry, i, k);
          dry.record_outcome(roster_[i].id, success[i] != 0);
        }
        rank_after = dry.interim_rank_indices(k);
        for (std::size_t i = 0; i < roster_.size(); ++i) best_after[i] = dry.best_outcome(i, k);
      }
      const auto order = state.current_order().indices;
      for (auto i : order) {
        state.record_outcome(roster_[i].id, success[i] != 0);
        if (k < kRounds) state.declare_next(roster_[i].id, declare(state, i, k + 1, rank_after, best_after));
      }
      if (k < kRounds)
        for (std::size_t j = 0; j < roster_.size(); ++j)
          out_.beliefs[{meet_id_, roster_[j].id, k + 1}] = belief(state, j, k + 1);
    }
    return SimulatedCompetition{meet_id_, std::move(state), std::move(out_.beliefs),
                                std::move(out_.decisions), out_.clamped_probabilities,
                                out_.raised_declarations};
  }

 private:
  struct Accumulator {
    std::map<PredictionKey, double> beliefs;
    std::vector<DecisionRecord> decisions;
    int clamped_probabilities = 0;
    int raised_declarations = 0;
  };

  void draw_category(int index) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double e = u(rng_);
    cat_.level[0] = e < 0.6 ? 0 : (e < 0.9 ? 1 : 2);
    cat_.key.equipment = static_cast<Equipment>(cat_.level[0]);
    cat_.level[1] = std::uniform_int_distribution<int>(0, 3)(rng_);
    cat_.level[2] = std::uniform_int_distribution<int>(0, 1)(rng_);
    cat_.level[3] = std::uniform_int_distribution<int>(0, 4)(rng_);
    cat_.level[4] = index % cfg_.federations;
    cat_.key.age_class = sim_age_classes()[cat_.level[1]];
    cat_.key.division = sim_divisions()[cat_.level[2]];
    cat_.key.weight_class = sim_weight_classes()[cat_.level[3]];
    cat_.key.federation = federation_name(cat_.level[4]);
    cat_.key.gender = u(rng_) < cfg_.male_share ? Gender::male : Gender::female;
  }

  void draw_roster(int index) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    const double limit = std::stod(cat_.key.weight_class);
    const bool male = cat_.key.gender == Gender::male;
    for (int j = 0; j < cfg_.lifters_per_competition; ++j) {
      LifterProfile p;
      p.id = "s" + std::to_string(index) + "-" + std::to_string(j);
      p.gender = cat_.key.gender;
      p.bodyweight = std::round((limit - 10.0 * u(rng_)) * 10.0) / 10.0;
      p.age = 20 + 5 * cat_.level[1] + std::uniform_int_distribution<int>(0, 4)(rng_);
      p.num_experience = std::uniform_int_distribution<int>(0, cfg_.max_experience)(rng_);
      p.first_participation = p.num_experience == 0;
      Agent a;
      a.strength = std::max(40.0, (male ? 150.0 : 90.0) + 0.8 * (p.bodyweight - 80.0) +
                                      cfg_.strength_sd * z(rng_));
      p.personal_best = p.first_participation ? 0.0 : snap(a.strength - 8.0 * u(rng_), cfg_.kappa);
      a.curve = SuccessCurve{a.strength + cfg_.curve_offset.draw(rng_), cfg_.curve_scale.draw(rng_),
                             cfg_.curve_ceiling, cfg_.curve_floor};
      a.params.lambda = cfg_.lambda.draw(rng_);
      a.params.alpha = cfg_.alpha.draw(rng_);
      openers_[p.id] = std::max(cfg_.kappa, snap(a.strength * (0.88 + 0.06 * u(rng_)), cfg_.kappa));
      const double rho = cfg_.shock_correlation;
      for (int k = 0; k < kRounds; ++k) {
        a.uniform[k] = u(rng_);
        a.shock[k] = u(rng_) < 0.5 ? -1.0 : 1.0;
        a.noise[k] = cfg_.attempt_noise_sd * (rho * a.shock[k] + std::sqrt(1.0 - rho * rho) * z(rng_));
      }
      roster_.push_back(std::move(p));
      agents_.push_back(a);
    }
  }

  double fixed_effect_shift(double scale) const {
    const auto& l = cat_.level;
    return scale * cfg_.fixed_effect_scale *
           (2.0 * l[0] + 0.5 * l[1] - 1.0 * l[2] + 0.3 * l[3] + 0.8 * ((l[4] % 5) - 2));
  }

  double current_best(const CompetitionState& s, std::size_t i, int round) const {
    return std::max(roster_[i].personal_best, s.best_outcome(i, round - 1));
  }

  double success_probability(const CompetitionState& s, std::size_t i, int k) {
    if (cfg_.success_override) return *cfg_.success_override;
    const Agent& a = agents_[i];
    const double w = s.attempt(i, k)->declared_weight;
    if (cfg_.mode == SimulationMode::structural_agents) return success_prob(a.curve, w);
    if (k == 1) return cfg_.first_round_success;
    const auto& pc = cfg_.planted;
    const auto& p = roster_[i];
    const std::size_t r = static_cast<std::size_t>(k - 2);
    const auto [lower, higher] = adjacent_rivals(s.interim_rank_indices(k - 1), i);
    const LiftingFlags f = lifting_flags(s, i, k, lower, higher);
    double prob = pc.success_intercept + pc.success_male * (p.gender == Gender::male) +
                  pc.success_bodyweight * p.bodyweight + pc.success_experience * p.num_experience +
                  pc.success_first_participation * p.first_participation +
                  fixed_effect_shift(0.01) + pc.turned_around[r] * f.turned_around +
                  pc.turning_around[r] * f.turning_around +
                  pc.attempt_gap * (w - current_best(s, i, k)) + cfg_.shock_loading * a.shock[k - 1];
    if (prob < 0.0 || prob > 1.0) {
      ++out_.clamped_probabilities;
      prob = std::clamp(prob, 0.0, 1.0);
    }
    return prob;
  }

  double belief(const CompetitionState& s, std::size_t j, int round) const {
    const auto it = cfg_.belief_models.find(round);
    if (it == cfg_.belief_models.end())
      return s.attempt(j, round - 1)->declared_weight + cfg_.belief_increment;
    const auto& p = roster_[j];
    ObservationRow r;
    r.round = round;
    r.male = p.gender == Gender::male;
    r.bodyweight = p.bodyweight;
    r.num_experience = p.num_experience;
    r.first_participation = p.first_participation;
    r.historical_best = p.first_participation ? 0.0 : p.personal_best;
    r.previous_attempt = s.attempt(j, round - 1)->declared_weight;
    r.previous_tie = tied(s, j, round - 1);
    r.previous_mismatch = order_mismatch(s, j, round - 1, s.interim_rank_indices(round - 2));
    r.equipment = std::string(to_string(cat_.key.equipment));
    r.age_class = cat_.key.age_class;
    r.division = cat_.key.division;
    r.weight_class = cat_.key.weight_class;
    r.federation = cat_.key.federation;
    return it->second.predict(r);
  }

  double declare(const CompetitionState& s, std::size_t i, int t, const std::vector<int>& rank,
                 const std::vector<double>& best) {
    const auto& prev = *s.attempt(i, t - 1);
    const bool ok = prev.outcome == Outcome::success;
    const double floor = prev.declared_weight + (ok ? cfg_.kappa : 0.0);
    const auto [lower, higher] = adjacent_rivals(rank, i);
    const std::optional<double> w_lower =
        lower == std::string::npos || !s.attempt(lower, t)
            ? std::nullopt
            : std::optional<double>(s.attempt(lower, t)->declared_weight);
    if (cfg_.mode == SimulationMode::structural_agents)
      return structural(s, i, t, floor, lower, higher, w_lower, best);
    if (!ok) return prev.declared_weight;

    const auto& pc = cfg_.planted;
    const auto& p = roster_[i];
    const std::size_t r = static_cast<std::size_t>(t - 2);
    const double cb = current_best(s, i, t);
    double gap = pc.attempt_intercept[r] + pc.male[r] * (p.gender == Gender::male) +
                 pc.bodyweight[r] * p.bodyweight + pc.num_experience[r] * p.num_experience +
                 pc.first_participation[r] * p.first_participation + fixed_effect_shift(1.0) +
                 agents_[i].noise[t - 1];
    if (w_lower) gap += pc.gamma_lower[r] * (*w_lower - cb);
    if (higher != std::string::npos) gap += pc.gamma_higher[r] * (belief(s, higher, t) - cb);
    const double w = snap(cb + gap, cfg_.kappa);
    if (w < floor - 1e-9) {
      ++out_.raised_declarations;
      return floor;
    }
    return w;
  }

  double structural(const CompetitionState& s, std::size_t i, int t, double floor, std::size_t lower,
                    std::size_t higher, std::optional<double> w_lower,
                    const std::vector<double>& best) {
    const Agent& a = agents_[i];
    RivalContext ctx;
    ctx.kappa = cfg_.kappa;
    ctx.q_self = a.curve;
    ctx.y_self = best[i];
    const bool use_lower = w_lower && best[lower] < best[i];
    const bool use_higher = higher != std::string::npos && best[i] < best[higher];
    if (use_lower) {
      ctx.w_lower = *w_lower;
      ctx.y_lower = best[lower];
      ctx.q_lower = agents_[lower].curve;
    }
    if (use_higher) {
      ctx.y_higher = best[higher];
      ctx.w_higher = std::max(snap(belief(s, higher, t), cfg_.kappa), best[higher]);
      ctx.q_higher = agents_[higher].curve;
    }
    DecisionRecord rec;
    rec.lifter = roster_[i].id;
    rec.round = t;
    rec.chosen = floor;
    if (use_lower || use_higher) {
      const Model m = use_lower && use_higher ? Model::comprehensive
                      : use_higher            ? Model::higher_only
                                              : Model::lower_only;
      rec.model = m;
      try {
        const WeightGrid grid = default_grid(floor, a.curve, cfg_.kappa);
        rec.chosen = optimal_weight(ctx, a.params, grid, m).chosen_weight;
        rec.predicted = theoretical_prediction(ctx, a.params, m, floor);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_grid && e.code() != ErrorCode::context_violation) throw;
      }
      std::vector<double> marks;
      if (use_lower) marks.push_back(ctx.w_lower + cfg_.kappa);
      if (use_higher) {
        marks.push_back(ctx.y_higher + cfg_.kappa);
        marks.push_back(ctx.w_higher + cfg_.kappa);
      }
      for (double w : marks) rec.boundary_plus_kappa |= std::abs(w - rec.chosen) < 1e-9;
    }
    out_.decisions.push_back(rec);
    return rec.chosen;
  }

  const PanelConfig& cfg_;
  std::mt19937_64 rng_;
  std::string meet_id_;
  SimCategory cat_;
  std::vector<LifterProfile> roster_;
  std::vector<Agent> agents_;
  std::map<LifterId, double> openers_;
  Accumulator out_;
};

}  // namespace detail

inline SimulatedCompetition simulate_competition(const PanelConfig& cfg, int index) {
  cfg.validate();
  return detail::CompetitionSimulator(cfg, index).run();
}

/// Observation rows of one simulated competition, built by the same
/// pressure construction as ingested meets with the agents' beliefs as the
/// expected rival declarations.
inline std::vector<ObservationRow> observations(const SimulatedCompetition& c) {
  return compute_pressures(c.state, MeetContext{c.meet_id, {}}, c.beliefs);
}

struct SimulatedPanel {
  std::vector<ObservationRow> rows;
  std::vector<SimulatedCompetition> competitions;  // empty unless kept
  int clamped_probabilities = 0;
  int raised_declarations = 0;
};

inline SimulatedPanel simulate_panel_detailed(const PanelConfig& cfg, bool keep_competitions = false) {
  cfg.validate();
  const int n = cfg.n_competitions;
  std::vector<std::optional<SimulatedCompetition>> comps(static_cast<std::size_t>(n));
  std::vector<std::vector<ObservationRow>> rows(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next++; c < n; c = next++) {
      auto sim = detail::CompetitionSimulator(cfg, c).run();
      rows[c] = observations(sim);
      comps[c] = std::move(sim);
    }
  };
  const int jobs = std::min(cfg.jobs, n);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        try {
          worker();
        } catch (...) {
          errors[j] = std::current_exception();
          next = n;
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  SimulatedPanel panel;
  for (int c = 0; c < n; ++c) {
    panel.rows.insert(panel.rows.end(), rows[c].begin(), rows[c].end());
    panel.clamped_probabilities += comps[c]->clamped_probabilities;
    panel.raised_declarations += comps[c]->raised_declarations;
    if (keep_competitions) panel.competitions.push_back(std::move(*comps[c]));
  }
  return panel;
}

inline std::vector<ObservationRow> simulate_panel(const PanelConfig& cfg) {
  return simulate_panel_detailed(cfg).rows;
}

/// Replaces the agents' rival forecasts by linear rival models and refits
/// them on the panels they generate until forecasts and fitted projections
/// agree: expectations an analyst's first-step predictor estimates
/// consistently.
inline PanelConfig with_consistent_beliefs(PanelConfig cfg, int iterations = 4) {
  if (iterations < 1) throw Error(ErrorCode::config_invalid, "iterations must be positive");
  for (int it = 0; it < iterations; ++it) {
    const auto rows = simulate_panel(cfg);
    for (int round = 2; round <= kRounds; ++round) {
      RivalModel m = predict_rival_attempt(
          rows, PredictionModelSpec{round, FeatureSet::without_previous_success, 5});
      m.predictions.clear();
      cfg.belief_models[round] = std::move(m);
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Counterfactuals

enum class Scenario { benchmark, no_pressure_attempt, no_pressure_lifting, no_pressure_both };

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::benchmark: return "benchmark";
    case Scenario::no_pressure_attempt: return "no_pressure_attempt";
    case Scenario::no_pressure_lifting: return "no_pressure_lifting";
    case Scenario::no_pressure_both: return "no_pressure_both";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view s) {
  for (auto c : {Scenario::benchmark, Scenario::no_pressure_attempt, Scenario::no_pressure_lifting,
                 Scenario::no_pressure_both})
    if (to_string(c) == s) return c;
  throw Error(ErrorCode::config_invalid, "unknown scenario " + std::string(s));
}

struct ExpectedOutcome {
  std::string meet_id;
  std::string lifter_id;
  int round = 2;
  double attempt_weight = 0.0;
  double success_prob = 0.0;
  double expected_achieved = 0.0;
};

/// Which attempt gap enters the success model when only the lifting block
/// is zeroed: the benchmark fit, or the fit without attempt pressures.
enum class LiftingGap { benchmark, without_attempt_pressure };

struct CounterfactualOptions {
  LiftingGap lifting_gap = LiftingGap::benchmark;
};

struct CounterfactualResult {
  std::vector<ExpectedOutcome> outcomes;
  int clamped = 0;
  int skipped = 0;  // rows with a missing regressor
};

namespace detail {

inline bool mentions(const std::string& name, std::initializer_list<std::string_view> parts) {
  std::size_t start = 0;
  while (true) {
    const auto colon = name.find(':', start);
    const std::string_view part = std::string_view(name).substr(start, colon - start);
    for (auto p : parts)
      if (part == p) return true;
    if (colon == std::string::npos) return false;
    start = colon + 1;
  }
}

inline double linear_fit(const EstimateResult& m, const ObservationRow& r, bool zero_block,
                         std::initializer_list<std::string_view> block) {
  double v = 0.0;
  for (std::size_t c = 0; c < m.names.size(); ++c) {
    if (zero_block && mentions(m.names[c], block)) continue;
    v += m.coefficients[static_cast<Eigen::Index>(c)] * feature_value(r, m.names[c]);
  }
  return v;
}

}  // namespace detail

/// Predicted attempts and success probabilities with the designated
/// pressure coefficients held at zero. The attempt model explains the
/// attempt gap; its prediction replaces attempt_gap in the success model.
inline CounterfactualResult counterfactual_outcomes(const EstimateResult& attempt_model,
                                                    const EstimateResult& success_model,
                                                    std::span<const ObservationRow> rows,
                                                    Scenario scenario,
                                                    const CounterfactualOptions& opt = {}) {
  const bool zero_attempt =
      scenario == Scenario::no_pressure_attempt || scenario == Scenario::no_pressure_both;
  const bool zero_lifting =
      scenario == Scenario::no_pressure_lifting || scenario == Scenario::no_pressure_both;
  const auto attempt_block = {std::string_view("z_lower"), std::string_view("z_higher")};
  const auto lifting_block = {std::string_view("turned_around"), std::string_view("turning_around")};
  CounterfactualResult out;
  for (const auto& r : rows) {
    // rows missing any regressor are skipped in every scenario
    if (!std::isfinite(detail::linear_fit(attempt_model, r, false, attempt_block)) ||
        !std::isfinite(detail::linear_fit(success_model, r, false, lifting_block))) {
      ++out.skipped;
      continue;
    }
    const double gap = detail::linear_fit(attempt_model, r, zero_attempt, attempt_block);
    double success_gap = gap;
    if (scenario == Scenario::no_pressure_lifting &&
        opt.lifting_gap == LiftingGap::without_attempt_pressure)
      success_gap = detail::linear_fit(attempt_model, r, true, attempt_block);
    ObservationRow alt = r;
    alt.attempt_gap = success_gap;
    alt.attempt = r.current_best + success_gap;
    double p = detail::linear_fit(success_model, alt, zero_lifting, lifting_block);
    if (!std::isfinite(gap) || !std::isfinite(p)) {
      ++out.skipped;
      continue;
    }
    if (p < 0.0 || p > 1.0) {
      ++out.clamped;
      p = std::clamp(p, 0.0, 1.0);
    }
    ExpectedOutcome e;
    e.meet_id = r.meet_id;
    e.lifter_id = r.lifter_id;
    e.round = r.round;
    e.attempt_weight = r.current_best + gap;
    e.success_prob = p;
    e.expected_achieved = e.attempt_weight * e.success_prob;
    out.outcomes.push_back(std::move(e));
  }
  return out;
}

/// Fixed-width bins [lo + i*width, lo + (i+1)*width) with overflow counts.
struct Histogram {
  double lo = -0.5;
  double width = 0.01;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  Histogram() = default;
  Histogram(double lo_, double hi, double width_) : lo(lo_), width(width_) {
    if (!(width_ > 0.0) || !(hi > lo_)) throw Error(ErrorCode::config_invalid, "bad histogram range");
    counts.assign(static_cast<std::size_t>(std::ceil((hi - lo_) / width_ - 1e-9)), 0);
  }

  void add(double v) {
    const double t = std::floor((v - lo) / width + 1e-9);
    if (t < 0) ++underflow;
    else if (t >= static_cast<double>(counts.size())) ++overflow;
    else ++counts[static_cast<std::size_t>(t)];
  }
};

struct HistogramSpec {
  double lo = -0.5;
  double hi = 0.5;
  double width = 0.01;
};

struct RelativeChange {
  std::string meet_id;
  std::string lifter_id;
  int round = 2;
  double attempt_weight = 0.0;
  double success_prob = 0.0;
  double expected_achieved = 0.0;
};

struct ProportionalChanges {
  std::vector<RelativeChange> changes;
  Histogram attempt_weight;
  Histogram success_prob;
  Histogram expected_achieved;
  int zero_benchmark = 0;

  double mean_attempt_weight() const { return mean(&RelativeChange::attempt_weight); }
  double mean_success_prob() const { return mean(&RelativeChange::success_prob); }
  double mean_expected_achieved() const { return mean(&RelativeChange::expected_achieved); }

 private:
  double mean(double RelativeChange::*field) const {
    if (changes.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const auto& c : changes) s += c.*field;
    return s / static_cast<double>(changes.size());
  }
};

/// (alt - benchmark) / benchmark per lifter-round. Rows with a zero
/// benchmark value are excluded and counted.
inline ProportionalChanges proportional_change(const std::vector<ExpectedOutcome>& benchmark,
                                               const std::vector<ExpectedOutcome>& alt,
                                               const HistogramSpec& bins = {}) {
  if (benchmark.size() != alt.size())
    throw Error(ErrorCode::schema_mismatch, "benchmark and alternative differ in length");
  ProportionalChanges out;
  out.attempt_weight = Histogram(bins.lo, bins.hi, bins.width);
  out.success_prob = out.attempt_weight;
  out.expected_achieved = out.attempt_weight;
  for (std::size_t i = 0; i < benchmark.size(); ++i) {
    const auto& b = benchmark[i];
    const auto& a = alt[i];
    if (b.meet_id != a.meet_id || b.lifter_id != a.lifter_id || b.round != a.round)
      throw Error(ErrorCode::schema_mismatch, "unaligned lifter-round at " + std::to_string(i));
    if (b.attempt_weight == 0.0 || b.success_prob == 0.0 || b.expected_achieved == 0.0) {
      ++out.zero_benchmark;
      continue;
    }
    RelativeChange c{b.meet_id,
                     b.lifter_id,
                     b.round,
                     (a.attempt_weight - b.attempt_weight) / b.attempt_weight,
                     (a.success_prob - b.success_prob) / b.success_prob,
                     (a.expected_achieved - b.expected_achieved) / b.expected_achieved};
    out.attempt_weight.add(c.attempt_weight);
    out.success_prob.add(c.success_prob);
    out.expected_achieved.add(c.expected_achieved);
    out.changes.push_back(std::move(c));
  }
  return out;
}

inline void write_histogram(std::ostream& out, std::string_view quantity, const Histogram& h) {
  auto edge = [&](std::size_t i) { return std::round((h.lo + i * h.width) * 1e9) / 1e9; };
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << quantity << '\t' << format_number(edge(i)) << '\t' << format_number(edge(i + 1)) << '\t'
        << h.counts[i] << '\n';
  out << quantity << "\tunderflow\t\t" << h.underflow << '\n';
  out << quantity << "\toverflow\t\t" << h.overflow << '\n';
}

}  // namespace benchpress
