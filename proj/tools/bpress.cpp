// bpress: ingest meet results, simulate panels, estimate, run counterfactuals.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "benchpress/pressure.hpp"
#include "benchpress/report.hpp"
#include "benchpress/simulation.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "verify_suite.hpp"

#ifndef BENCHPRESS_DATA_DIR
#define BENCHPRESS_DATA_DIR "data"
#endif

namespace bpress {
namespace {

using namespace benchpress;
using nlohmann::json;

enum ExitCode { ok = 0, usage = 1, data_error = 2, verification_failure = 3 };

const std::vector<std::string> kPlantedKeys{
    "gamma_lower_2",    "gamma_lower_3",     "gamma_higher_2",    "gamma_higher_3", "turned_around_2",
    "turned_around_3",  "turning_around_2",  "turning_around_3",  "attempt_gap"};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{
        "command", "seed", "jobs", "kappa",
        // ingest
        "input", "best_policy", "best_months", "tie_break",
        // simulate
        "competitions", "lifters", "federations", "mode", "noise_sd", "shock_correlation",
        "shock_loading", "first_round_success", "belief_iterations",
        // estimate, counterfactual, report
        "observations", "attempt_sample", "heterogeneity", "folds", "feature_set",
        "bootstrap_replications", "bootstrap_round", "recovery", "scenario", "lifting_gap",
        "histogram_lo", "histogram_hi", "histogram_width"};
    k.insert(kPlantedKeys.begin(), kPlantedKeys.end());
    return k;
  }();
  return keys;
}

struct Run {
  std::string command;
  RunConfig config;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string output;
};

int positive(const RunConfig& c, const std::string& key, long long fallback) {
  const long long v = c.integer(key, fallback);
  if (v < 1 || v > 100'000'000) throw UsageError(key + " must be a positive integer");
  return static_cast<int>(v);
}

template <class Enum>
Enum choice(const RunConfig& c, const std::string& key, const std::map<std::string, Enum>& options,
            const std::string& fallback) {
  const std::string v = c.text(key, fallback);
  const auto it = options.find(v);
  if (it != options.end()) return it->second;
  std::string names;
  for (const auto& [n, _] : options) names += (names.empty() ? "" : ", ") + n;
  throw UsageError(key + ": '" + v + "' is not one of " + names);
}

Sample attempt_sample(const RunConfig& c) {
  return choice<Sample>(c, "attempt_sample", {{"all", Sample::all}, {"prior_success", Sample::prior_success}},
                        "prior_success");
}

FeatureSet feature_set(const RunConfig& c) {
  return choice<FeatureSet>(c, "feature_set",
                            {{"full", FeatureSet::full},
                             {"without_previous_success", FeatureSet::without_previous_success}},
                            "without_previous_success");
}

PlantedCoefficients planted(const RunConfig& c) {
  PlantedCoefficients p;
  for (int k = 0; k < 2; ++k) {
    const std::string r = std::to_string(k + 2);
    p.gamma_lower[k] = c.number("gamma_lower_" + r, p.gamma_lower[k]);
    p.gamma_higher[k] = c.number("gamma_higher_" + r, p.gamma_higher[k]);
    p.turned_around[k] = c.number("turned_around_" + r, p.turned_around[k]);
    p.turning_around[k] = c.number("turning_around_" + r, p.turning_around[k]);
  }
  p.attempt_gap = c.number("attempt_gap", p.attempt_gap);
  return p;
}

std::vector<ObservationRow> load_observations(const RunConfig& c) {
  std::ifstream in(c.input("observations"));
  return read_observations(in);
}

std::vector<ObservationRow> only_round(const std::vector<ObservationRow>& rows, int round) {
  std::vector<ObservationRow> out;
  for (const auto& r : rows)
    if (r.round == round) out.push_back(r);
  return out;
}

Formula formula(FormulaKind kind, int round, Sample sample = Sample::all,
                Moderator moderator = Moderator::gender) {
  Formula f;
  f.kind = kind;
  f.round = round;
  f.sample = sample;
  f.moderator = moderator;
  return f;
}

// ---------------------------------------------------------------------------

void cmd_ingest(const Run& run, Artifacts& out) {
  IngestOptions opt;
  opt.best_policy.mode = choice<BestPolicy::Mode>(
      run.config, "best_policy",
      {{"all_time", BestPolicy::Mode::all_time}, {"within_months", BestPolicy::Mode::within_months}},
      "all_time");
  opt.best_policy.months = positive(run.config, "best_months", 12);
  opt.rules.kappa = run.config.number("kappa", 2.5);
  opt.rules.tie_break = choice<TieBreak>(
      run.config, "tie_break",
      {{"lighter_bodyweight", TieBreak::lighter_bodyweight}, {"first_to_achieve", TieBreak::first_to_achieve}},
      "lighter_bodyweight");
  std::ifstream csv(run.config.input("input"));
  const IngestResult result = ingest(csv, opt);
  {
    auto f = out.open("observations.tsv", false);
    write_observations(f, result.rows, out.provenance());
  }
  const auto& r = result.report;
  json issues = json::array();
  for (const auto& i : r.issues) issues.push_back({{"line", i.line}, {"message", i.message}});
  out.write_json("ingest_report.json", {{"parsed_rows", r.parsed_rows},
                                        {"issues", issues},
                                        {"excluded", r.excluded},
                                        {"kept_rows", r.kept_rows},
                                        {"categories", r.categories},
                                        {"observations", r.observations},
                                        {"audited_components", r.audited_components},
                                        {"prediction_notes", r.prediction_notes}});
  std::cout << "ingested " << r.observations << " observations from " << r.kept_rows << " rows\n";
}

PanelConfig panel_config(const Run& run) {
  const RunConfig& c = run.config;
  PanelConfig cfg;
  cfg.n_competitions = positive(c, "competitions", cfg.n_competitions);
  cfg.lifters_per_competition = positive(c, "lifters", cfg.lifters_per_competition);
  cfg.federations = positive(c, "federations", cfg.federations);
  cfg.master_seed = run.seed;
  cfg.jobs = run.jobs;
  cfg.kappa = c.number("kappa", cfg.kappa);
  cfg.mode = choice<SimulationMode>(
      c, "mode",
      {{"reduced_form", SimulationMode::reduced_form}, {"structural_agents", SimulationMode::structural_agents}},
      "reduced_form");
  cfg.attempt_noise_sd = c.number("noise_sd", cfg.attempt_noise_sd);
  cfg.shock_correlation = c.number("shock_correlation", cfg.shock_correlation);
  cfg.shock_loading = c.number("shock_loading", cfg.shock_loading);
  cfg.first_round_success = c.number("first_round_success", cfg.first_round_success);
  cfg.planted = planted(c);
  cfg.validate();
  const long long iterations = c.integer("belief_iterations", 0);
  if (iterations < 0) throw UsageError("belief_iterations must be non-negative");
  if (iterations > 0) cfg = with_consistent_beliefs(cfg, static_cast<int>(iterations));
  return cfg;
}

std::string model_name(const std::optional<Model>& m) {
  if (!m) return "lightest";
  switch (*m) {
    case Model::lower_only: return "lower_only";
    case Model::higher_only: return "higher_only";
    case Model::comprehensive: return "comprehensive";
  }
  return "";
}

void cmd_simulate(const Run& run, Artifacts& out) {
  const PanelConfig cfg = panel_config(run);
  const SimulatedPanel panel = simulate_panel_detailed(cfg, true);
  {
    auto f = out.open("panel.tsv", false);
    write_observations(f, panel.rows, out.provenance());
  }
  std::vector<CompetitionState> histories;
  {
    auto log = out.open("events.log");
    auto dec = out.open("decisions.tsv");
    dec << "meet_id\tlifter_id\tround\tchosen\tmodel\tpredicted\tboundary_plus_kappa\n";
    for (const auto& c : panel.competitions) {
      log << "## " << c.meet_id << '\n' << to_text(c.state.events());
      for (const auto& d : c.decisions)
        dec << c.meet_id << '\t' << d.lifter << '\t' << d.round << '\t' << format_number(d.chosen) << '\t'
            << model_name(d.model) << '\t' << (d.predicted ? format_number(*d.predicted) : "NA") << '\t'
            << d.boundary_plus_kappa << '\n';
      histories.push_back(c.state);
    }
  }
  const RankChangeTable ranks = rank_change_distribution(histories);
  {
    auto f = out.open("rank_changes.tsv");
    write_rank_change_table(f, ranks);
  }
  out.write_json("simulate_report.json",
                 {{"competitions", cfg.n_competitions},
                  {"observations", panel.rows.size()},
                  {"mode", cfg.mode == SimulationMode::reduced_form ? "reduced_form" : "structural_agents"},
                  {"clamped_probabilities", panel.clamped_probabilities},
                  {"raised_declarations", panel.raised_declarations},
                  {"consistent_belief_rounds", cfg.belief_models.size()},
                  {"rank_change_frequency", ranks.frequency}});
  std::cout << "simulated " << cfg.n_competitions << " competitions, " << panel.rows.size()
            << " observations\n";
}

void cmd_estimate(const Run& run, Artifacts& out) {
  const RunConfig& c = run.config;
  const auto rows = load_observations(c);
  const Sample sample = attempt_sample(c);
  auto records = out.open("records.tsv");
  write_record_header(records);
  auto keep = [&](const std::string& model, const EstimateResult& r) {
    write_records(records, model, r);
    return r;
  };

  std::map<int, EstimateResult> attempt, success;
  for (int round = 2; round <= kRounds; ++round) {
    const std::string r = std::to_string(round);
    attempt[round] = keep("attempt_r" + r, ols(build_design(rows, formula(FormulaKind::attempt_eq1, round, sample))));
    success[round] = keep("success_r" + r, two_sls(build_design(rows, formula(FormulaKind::success_lpm, round))));
  }
  {
    auto f = out.open("attempt_table.tsv");
    write_coefficient_table(f, "Attempt weight relative to current best (OLS)",
                            {{"Round 2", attempt[2]}, {"Round 3", attempt[3]}});
  }
  {
    auto f = out.open("success_table.tsv");
    write_coefficient_table(f, "Success probability (2SLS)", {{"Round 2", success[2]}, {"Round 3", success[3]}});
  }
  if (c.flag("heterogeneity", true)) {
    for (Moderator m : {Moderator::gender, Moderator::experience, Moderator::rivalry}) {
      const std::string name = moderator_name(m);
      std::vector<ReportColumn> cols;
      for (int round = 2; round <= kRounds; ++round) {
        const std::string r = std::to_string(round);
        cols.push_back({"Attempt R" + r, keep("attempt_" + name + "_r" + r,
                                              ols(build_design(rows, formula(FormulaKind::attempt_heterogeneity,
                                                                             round, sample, m))))});
      }
      for (int round = 2; round <= kRounds; ++round) {
        const std::string r = std::to_string(round);
        cols.push_back({"Success R" + r,
                        keep("success_" + name + "_r" + r,
                             two_sls(build_design(rows, formula(FormulaKind::success_heterogeneity, round,
                                                                Sample::all, m))))});
      }
      auto f = out.open("heterogeneity_" + name + ".tsv");
      write_coefficient_table(f, "Heterogeneity by " + name, cols);
    }
  }

  const int folds = positive(c, "folds", 5);
  std::vector<CvRow> cv;
  for (int round = 2; round <= kRounds; ++round)
    cv.push_back({"round " + std::to_string(round),
                  kfold_cv(rows, {round, FeatureSet::full, folds}, run.seed),
                  kfold_cv(rows, {round, FeatureSet::without_previous_success, folds}, run.seed)});
  {
    auto f = out.open("cv_table.tsv");
    write_cv_table(f, cv);
  }

  BootstrapOptions boot;
  boot.replications = positive(c, "bootstrap_replications", 200);
  boot.seed = run.seed;
  boot.jobs = run.jobs;
  const int boot_round = static_cast<int>(c.integer("bootstrap_round", 3));
  if (boot_round < 2 || boot_round > kRounds) throw UsageError("bootstrap_round must be 2 or 3");
  boot.outcome = formula(FormulaKind::attempt_eq1, boot_round, sample);
  boot.predictor = {boot_round, feature_set(c), folds};
  const EstimateResult plug_in = keep("bootstrap_plug_in", generated_regressor_estimate(rows, boot));
  const BootstrapResult boot_result = bootstrap_generated_regressor(rows, boot);
  {
    auto f = out.open("bootstrap_table.tsv");
    write_bootstrap_table(f, "Attempt weight, round " + std::to_string(boot_round), plug_in, boot_result);
  }

  json report{{"observations", rows.size()},
              {"attempt_sample", sample == Sample::all ? "all" : "prior_success"},
              {"bootstrap_replications", boot_result.replications},
              {"bootstrap_redraws", boot_result.redraws}};
  if (c.flag("recovery", false)) {
    const PlantedCoefficients p = planted(c);
    auto f = out.open("recovery.tsv");
    f << "model\tterm\tplanted\testimate\tstd_error\tdistance_se\twithin_3se\n";
    bool all_within = true;
    auto check = [&](const std::string& model, const EstimateResult& r, const std::string& term, double truth) {
      const double distance = std::abs(r.coef(term) - truth) / r.se(term);
      const bool within = distance <= 3.0;
      all_within &= within;
      f << model << '\t' << term << '\t' << format_number(truth) << '\t' << format_number(r.coef(term)) << '\t'
        << format_number(r.se(term)) << '\t' << fixed(distance) << '\t' << (within ? "yes" : "NO") << '\n';
    };
    for (int k = 0; k < 2; ++k) {
      const std::string m = "r" + std::to_string(k + 2);
      check("attempt_" + m, attempt[k + 2], "z_lower", p.gamma_lower[k]);
      check("attempt_" + m, attempt[k + 2], "z_higher", p.gamma_higher[k]);
      check("success_" + m, success[k + 2], "turned_around", p.turned_around[k]);
      check("success_" + m, success[k + 2], "turning_around", p.turning_around[k]);
      check("success_" + m, success[k + 2], "attempt_gap", p.attempt_gap);
    }
    report["recovery_all_within_3se"] = all_within;
    std::cout << "recovery: " << (all_within ? "all planted coefficients within 3 SE" : "some planted coefficients outside 3 SE")
              << '\n';
  }
  records.close();
  out.write_json("estimate_report.json", report);
  std::cout << "estimated " << rows.size() << " observations\n";
}

void cmd_counterfactual(const Run& run, Artifacts& out) {
  const RunConfig& c = run.config;
  const auto rows = load_observations(c);
  const Sample sample = attempt_sample(c);
  CounterfactualOptions opt;
  opt.lifting_gap = choice<LiftingGap>(
      c, "lifting_gap",
      {{"benchmark", LiftingGap::benchmark}, {"without_attempt_pressure", LiftingGap::without_attempt_pressure}},
      "benchmark");
  HistogramSpec bins;
  bins.lo = c.number("histogram_lo", bins.lo);
  bins.hi = c.number("histogram_hi", bins.hi);
  bins.width = c.number("histogram_width", bins.width);
  if (!(bins.width > 0.0) || !(bins.hi > bins.lo)) throw UsageError("histogram needs lo < hi and width > 0");

  std::vector<Scenario> scenarios;
  const std::string which = c.text("scenario", "all");
  if (which == "all")
    scenarios = {Scenario::no_pressure_attempt, Scenario::no_pressure_lifting, Scenario::no_pressure_both};
  else
    scenarios = {parse_scenario(which)};
  if (scenarios.front() == Scenario::benchmark) throw UsageError("scenario must differ from the benchmark");

  auto outcomes = out.open("expected_outcomes.tsv");
  outcomes << "scenario\tmeet_id\tlifter_id\tround\tattempt_weight\tsuccess_prob\texpected_achieved\n";
  auto changes = out.open("proportional_changes.tsv");
  changes << "scenario\tmeet_id\tlifter_id\tround\tattempt_weight\tsuccess_prob\texpected_achieved\n";
  auto hist = out.open("histograms.tsv");
  hist << "scenario\tround\tquantity\tbin_lo\tbin_hi\tcount\n";
  auto write_outcomes = [&](std::string_view name, const std::vector<ExpectedOutcome>& v) {
    for (const auto& e : v)
      outcomes << name << '\t' << e.meet_id << '\t' << e.lifter_id << '\t' << e.round << '\t'
               << format_number(e.attempt_weight) << '\t' << format_number(e.success_prob) << '\t'
               << format_number(e.expected_achieved) << '\n';
  };

  json summary = json::array();
  for (int round = 2; round <= kRounds; ++round) {
    const auto sub = only_round(rows, round);
    const EstimateResult am = ols(build_design(sub, formula(FormulaKind::attempt_eq1, round, sample)));
    const EstimateResult sm = two_sls(build_design(sub, formula(FormulaKind::success_lpm, round)));
    const CounterfactualResult bench = counterfactual_outcomes(am, sm, sub, Scenario::benchmark, opt);
    write_outcomes(to_string(Scenario::benchmark), bench.outcomes);
    for (Scenario s : scenarios) {
      const CounterfactualResult alt = counterfactual_outcomes(am, sm, sub, s, opt);
      write_outcomes(to_string(s), alt.outcomes);
      const ProportionalChanges pc = proportional_change(bench.outcomes, alt.outcomes, bins);
      for (const auto& x : pc.changes)
        changes << to_string(s) << '\t' << x.meet_id << '\t' << x.lifter_id << '\t' << x.round << '\t'
                << format_number(x.attempt_weight) << '\t' << format_number(x.success_prob) << '\t'
                << format_number(x.expected_achieved) << '\n';
      std::ostringstream h;
      write_histogram(h, "attempt_weight", pc.attempt_weight);
      write_histogram(h, "success_prob", pc.success_prob);
      write_histogram(h, "expected_achieved", pc.expected_achieved);
      std::istringstream lines(h.str());
      for (std::string line; std::getline(lines, line);)
        hist << to_string(s) << '\t' << round << '\t' << line << '\n';
      summary.push_back({{"scenario", to_string(s)},
                         {"round", round},
                         {"rows", pc.changes.size()},
                         {"zero_benchmark", pc.zero_benchmark},
                         {"skipped", alt.skipped},
                         {"clamped_benchmark", bench.clamped},
                         {"clamped", alt.clamped},
                         {"mean_change_attempt_weight", pc.mean_attempt_weight()},
                         {"mean_change_success_prob", pc.mean_success_prob()},
                         {"mean_change_expected_achieved", pc.mean_expected_achieved()}});
    }
  }
  outcomes.close();
  changes.close();
  hist.close();
  out.write_json("counterfactual_summary.json",
                 {{"lifting_gap", opt.lifting_gap == LiftingGap::benchmark ? "benchmark" : "without_attempt_pressure"},
                  {"scenarios", summary}});
  std::cout << "counterfactuals written for " << scenarios.size() << " scenario(s)\n";
}

void cmd_report(const Run& run, Artifacts& out) {
  const auto rows = load_observations(run.config);
  const std::vector<std::string> vars{"attempt_gap", "success",       "z_lower", "z_higher",
                                      "turned_around", "turning_around", "rivalry"};
  auto f = out.open("pressure_summary.tsv");
  f << "round\tvariable\tn\tmean\tsd\tmin\tmax\n";
  for (int round = 2; round <= kRounds; ++round) {
    std::vector<RunningMoments> m(vars.size());
    for (const auto& r : rows) {
      if (r.round != round) continue;
      m[0].add(r.attempt_gap);
      m[1].add(r.success);
      if (r.z_lower) m[2].add(*r.z_lower);
      if (r.z_higher) m[3].add(*r.z_higher);
      m[4].add(r.turned_around);
      m[5].add(r.turning_around);
      m[6].add(r.rivalry);
    }
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const SummaryLine s = m[v].line(vars[v]);
      f << round << '\t' << s.variable << '\t' << s.n << '\t' << fixed(s.mean) << '\t' << fixed(s.sd) << '\t'
        << fixed(s.min) << '\t' << fixed(s.max) << '\n';
    }
  }
  std::cout << "summarized " << rows.size() << " observations\n";
}

int cmd_verify(const Run& run, Artifacts* out) {
  const std::string dir = BENCHPRESS_DATA_DIR;
  const auto results =
      run_verify_suite(run.seed, dir + "/meets_fixture.csv", dir + "/meets_fixture_observations.tsv");
  bool all = true;
  std::ostringstream ledger;
  for (const auto& r : results) {
    all &= r.passed;
    ledger << (r.passed ? "PASS" : "FAIL") << '\t' << r.name << '\t' << r.detail << '\n';
  }
  std::cout << ledger.str();
  if (out) {
    auto f = out->open("verify.tsv");
    f << ledger.str();
  }
  if (!all) throw VerificationFailure("invariant suite failed");
  return ok;
}

// ---------------------------------------------------------------------------

void report_error(std::string_view kind, std::string_view message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

int dispatch(Run& run) {
  if (run.config.has("command") && run.config.text("command", "") != run.command)
    throw UsageError("config is for '" + run.config.text("command", "") + "', not '" + run.command + "'");
  run.config.set("seed", std::to_string(run.seed));
  if (run.command == "verify" && run.output.empty()) return cmd_verify(run, nullptr);

  Artifacts out(run.output, run.command, run.config.hash(), run.seed);
  int status = ok;
  if (run.command == "ingest") cmd_ingest(run, out);
  else if (run.command == "simulate") cmd_simulate(run, out);
  else if (run.command == "estimate") cmd_estimate(run, out);
  else if (run.command == "counterfactual") cmd_counterfactual(run, out);
  else if (run.command == "report") cmd_report(run, out);
  else status = cmd_verify(run, &out);
  out.commit(run.config.to_json());
  return status;
}

}  // namespace
}  // namespace bpress

int main(int argc, char** argv) {
  using namespace bpress;
  CLI::App app{"Pressure and attempt choices in bench-press competitions"};
  app.require_subcommand(1);
  Run run;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  for (const char* name : {"ingest", "simulate", "estimate", "counterfactual", "report", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key=value run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "overrides the configured seed");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--output", run.output, "output directory");
    if (std::string(name) != "verify") sub->get_option("--config")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what(), usage);
    return usage;
  }
  run.command = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) {
      run.config = RunConfig::load(config_path, known_keys());
    }
    if (seed) {
      run.seed = *seed;
    } else {
      const long long s = run.config.integer("seed", 1);
      if (s < 0) throw UsageError("seed must be non-negative");
      run.seed = static_cast<std::uint64_t>(s);
    }
    run.jobs = jobs.value_or(static_cast<int>(run.config.integer("jobs", 1)));
    if (run.jobs < 1) throw UsageError("jobs must be positive");
    return dispatch(run);
  } catch (const UsageError& e) {
    report_error("usage", e.what(), usage);
    return usage;
  } catch (const VerificationFailure& e) {
    report_error("verification_failure", e.what(), verification_failure);
    return verification_failure;
  } catch (const benchpress::Error& e) {
    const bool config = e.code() == benchpress::ErrorCode::config_invalid || e.code() == benchpress::ErrorCode::usage;
    const int code = config ? usage : data_error;
    report_error(benchpress::to_string(e.code()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    report_error("io", e.what(), data_error);
    return data_error;
  }
}
