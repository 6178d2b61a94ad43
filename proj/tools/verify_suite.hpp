#pragma once

// Invariant checks run by `bpress verify`.

#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "benchpress/behavior.hpp"
#include "benchpress/policy.hpp"
#include "benchpress/pressure.hpp"
#include "benchpress/simulation.hpp"

namespace bpress {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace verify_detail {

using namespace benchpress;

inline RivalContext random_context(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto step = [&](int span) { return 2.5 * std::uniform_int_distribution<int>(0, span)(rng); };
  RivalContext c;
  c.y_self = 95.0 + step(8);
  c.y_lower = c.y_self - 2.5 - step(4);
  c.y_higher = c.y_self + 2.5 + step(4);
  c.w_lower = c.y_lower + step(8);
  c.w_higher = c.y_higher + step(8);
  auto curve = [&] {
    return SuccessCurve{90.0 + 30.0 * u(rng), 1.0 + 6.0 * u(rng), 0.6 + 0.4 * u(rng), 0.2 * u(rng)};
  };
  c.q_self = curve();
  c.q_lower = curve();
  c.q_higher = curve();
  return c;
}

inline CheckResult oracle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int n = 0;
  while (n < 2000) {
    const RivalContext c = random_context(rng);
    const double w = c.y_self + 2.5 * std::uniform_int_distribution<int>(0, 12)(rng);
    if (detail::tie(w, c.w_lower) || detail::tie(w, c.w_higher) || detail::tie(w, c.y_higher)) continue;
    ValueParams p;
    p.lambda = 1.0 + 3.0 * u(rng);
    p.alpha = u(rng) < 0.5 ? 0.88 : 1.0;
    worst = std::max(worst, std::abs(eu_comprehensive(w, c, p) - brute_force_eu(w, c, p)));
    ++n;
  }
  std::ostringstream d;
  d << n << " contexts, max |diff| " << worst;
  return {"expected utility matches enumeration", worst <= 1e-12, d.str()};
}

inline CheckResult policy_closed_form(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ValueParams p;
  int agree = 0, n = 0;
  for (; n < 600; ++n) {
    const RivalContext c = random_context(rng);
    const Model m = static_cast<Model>(n % 3);
    const WeightGrid grid{c.y_self + c.kappa, c.y_self + 60.0, c.kappa};
    agree += optimal_weight(c, p, grid, m).chosen_weight == theoretical_prediction(c, p, m);
  }
  return {"grid argmax equals closed-form candidate", agree == n,
          std::to_string(agree) + "/" + std::to_string(n)};
}

inline CheckResult information(std::uint64_t seed) {
  PanelConfig cfg;
  cfg.n_competitions = 200;
  cfg.master_seed = seed;
  int components = 0;
  try {
    for (auto mode : {SimulationMode::reduced_form, SimulationMode::structural_agents}) {
      cfg.mode = mode;
      for (int c = 0; c < cfg.n_competitions; ++c) {
        const auto sim = simulate_competition(cfg, c);
        components += audit_information(sim.state, observations(sim));
      }
    }
  } catch (const Error& e) {
    return {"attempt-stage pressures inside information sets", false, e.what()};
  }
  return {"attempt-stage pressures inside information sets", true,
          std::to_string(components) + " components audited"};
}

inline CheckResult determinism(std::uint64_t seed) {
  PanelConfig cfg;
  cfg.n_competitions = 50;
  cfg.master_seed = seed;
  std::ostringstream a, b;
  write_observations(a, simulate_panel(cfg));
  cfg.jobs = 3;
  write_observations(b, simulate_panel(cfg));
  return {"panel fixed by seed across thread counts", a.str() == b.str(),
          std::to_string(a.str().size()) + " bytes"};
}

inline CheckResult product_identity(std::uint64_t seed) {
  PanelConfig cfg;
  cfg.n_competitions = 400;
  cfg.master_seed = seed;
  std::vector<ObservationRow> rows;
  for (auto& r : simulate_panel(cfg))
    if (r.round == 2 && r.z_lower && r.z_higher) rows.push_back(r);
  Formula a, s;
  a.kind = FormulaKind::attempt_eq1;
  s.kind = FormulaKind::success_lpm;
  const auto am = ols(build_design(rows, a));
  const auto sm = two_sls(build_design(rows, s));
  std::size_t checked = 0;
  bool ok = true;
  for (auto sc : {Scenario::benchmark, Scenario::no_pressure_attempt, Scenario::no_pressure_lifting,
                  Scenario::no_pressure_both})
    for (const auto& e : counterfactual_outcomes(am, sm, rows, sc).outcomes) {
      ok &= e.expected_achieved == e.attempt_weight * e.success_prob;
      ++checked;
    }
  return {"expected achieved = attempt x probability", ok, std::to_string(checked) + " rows"};
}

inline CheckResult golden(const std::string& csv_path, const std::string& golden_path) {
  std::ifstream csv(csv_path), gold(golden_path);
  if (!csv || !gold) return {"ingest reproduces golden observations", false, "fixture missing"};
  std::ostringstream produced, expected;
  write_observations(produced, ingest(csv).rows);
  expected << gold.rdbuf();
  return {"ingest reproduces golden observations", produced.str() == expected.str(),
          std::to_string(expected.str().size()) + " bytes"};
}

}  // namespace verify_detail

inline std::vector<CheckResult> run_verify_suite(std::uint64_t seed, const std::string& fixture_csv,
                                                 const std::string& fixture_golden) {
  using namespace verify_detail;
  std::vector<std::function<CheckResult()>> checks{
      [&] { return oracle(seed); },
      [&] { return policy_closed_form(seed + 1); },
      [&] { return information(seed + 2); },
      [&] { return determinism(seed + 3); },
      [&] { return product_identity(seed + 4); },
      [&] { return golden(fixture_csv, fixture_golden); },
  };
  std::vector<CheckResult> out;
  for (auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"check raised", false, e.what()});
    }
  }
  return out;
}

}  // namespace bpress
