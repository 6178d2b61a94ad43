#pragma once

// From OpenPowerlifting-style meet results to observation rows: CSV parsing,
// sample filters, personal-best resolution, the serial replay of each
// category, and the attempt- and lifting-stage pressure variables.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "benchpress/competition.hpp"
#include "benchpress/econometrics.hpp"
#include "benchpress/observation.hpp"

namespace benchpress {

struct RawMeetRow {
  std::size_t line = 0;
  std::string name;
  std::string sex;
  std::string event;
  std::string equipment;
  std::optional<double> age;
  std::string age_class;
  std::optional<double> bodyweight;
  std::string weight_class;
  std::string division;
  std::string federation;
  std::string date;  // YYYY-MM-DD
  std::string meet_name;
  std::string meet_id;
  std::array<std::optional<double>, kRounds> bench;  // negative = failed
  std::optional<double> best;
  std::string place;

  double declared(int round) const { return std::abs(bench[round - 1].value_or(0.0)); }
  bool succeeded(int round) const { return bench[round - 1].value_or(0.0) > 0.0; }
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<RawMeetRow> rows;
  std::vector<ParseIssue> issues;
};

inline const std::vector<std::string>& required_columns() {
  static const std::vector<std::string> cols{
      "Name",      "Sex",        "Event",     "Equipment", "Age",       "AgeClass",
      "BodyweightKg", "WeightClassKg", "Division", "Bench1Kg", "Bench2Kg", "Bench3Kg",
      "Best3BenchKg", "Place",   "Federation", "Date",     "MeetName"};
  return cols;
}

namespace detail {

/// Splits one CSV record; double quotes protect commas and "" escapes a quote.
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline std::optional<double> parse_cell(const std::string& s, const char* column) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument(std::string(column) + " is not a number: '" + s + "'");
  return v;
}

inline bool valid_date(const std::string& d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (d[i] < '0' || d[i] > '9') return false;
  const int month = std::stoi(d.substr(5, 2)), day = std::stoi(d.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

}  // namespace detail

/// Meet identity: federation, date and meet name.
inline std::string make_meet_id(const std::string& federation, const std::string& date,
                                const std::string& meet_name) {
  return federation + "|" + date + "|" + meet_name;
}

inline ParseResult parse_meet_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::missing_header, "empty input");
  const auto header = detail::split_csv(line);
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < header.size(); ++i) at[header[i]] = i;
  for (const auto& c : required_columns())
    if (!at.count(c)) throw Error(ErrorCode::missing_header, "column " + c + " not found");

  ParseResult result;
  std::size_t line_no = 1;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv(line);
    if (f.size() != header.size()) {
      result.issues.push_back({line_no, "expected " + std::to_string(header.size()) +
                                            " fields, found " + std::to_string(f.size())});
      continue;
    }
    auto cell = [&](const char* name) -> const std::string& { return f[at.at(name)]; };
    try {
      RawMeetRow r;
      r.line = line_no;
      r.name = cell("Name");
      r.sex = cell("Sex");
      r.event = cell("Event");
      r.equipment = cell("Equipment");
      r.age = detail::parse_cell(cell("Age"), "Age");
      r.age_class = cell("AgeClass");
      r.bodyweight = detail::parse_cell(cell("BodyweightKg"), "BodyweightKg");
      r.weight_class = cell("WeightClassKg");
      r.division = cell("Division");
      r.federation = cell("Federation");
      r.date = cell("Date");
      r.meet_name = cell("MeetName");
      r.bench[0] = detail::parse_cell(cell("Bench1Kg"), "Bench1Kg");
      r.bench[1] = detail::parse_cell(cell("Bench2Kg"), "Bench2Kg");
      r.bench[2] = detail::parse_cell(cell("Bench3Kg"), "Bench3Kg");
      r.best = detail::parse_cell(cell("Best3BenchKg"), "Best3BenchKg");
      r.place = cell("Place");
      if (r.name.empty()) throw std::invalid_argument("empty Name");
      if (!detail::valid_date(r.date)) throw std::invalid_argument("bad Date '" + r.date + "'");
      for (const auto& b : r.bench)
        if (b && *b == 0.0) throw std::invalid_argument("zero attempt weight");
      r.meet_id = make_meet_id(r.federation, r.date, r.meet_name);
      if (!seen.insert({r.meet_id, r.name}).second)
        throw std::invalid_argument("duplicate lifter in meet");
      result.rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      result.issues.push_back({line_no, e.what()});
    }
  }
  return result;
}

inline std::optional<Equipment> parse_equipment(const std::string& s) {
  if (s == "Raw" || s == "Wraps" || s == "Straps") return Equipment::raw;
  if (s == "Single-ply") return Equipment::single_ply;
  if (s == "Multi-ply" || s == "Unlimited") return Equipment::multi_ply;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Filters

/// Exclusion reasons in the order they are applied.
inline const std::vector<std::string>& exclusion_reasons() {
  static const std::vector<std::string> reasons{
      "not_bench_only", "missing_age_or_bodyweight", "age_out_of_range", "unknown_sex_or_equipment",
      "missing_attempts", "non_monotone_attempts", "category_too_small"};
  return reasons;
}

struct FilterResult {
  std::vector<RawMeetRow> rows;
  std::map<std::string, int> excluded;  // reason -> count
};

/// Category within a meet: the competition unit lifters rank against.
inline std::string category_id(const RawMeetRow& r) {
  return r.meet_id + "|" + r.sex + "|" + std::string(to_string(*parse_equipment(r.equipment))) +
         "|" + r.age_class + "|" + r.weight_class + "|" + r.division;
}

inline FilterResult filter_sample(const std::vector<RawMeetRow>& rows) {
  FilterResult out;
  for (const auto& reason : exclusion_reasons()) out.excluded[reason] = 0;
  std::vector<RawMeetRow> kept;
  for (const auto& r : rows) {
    const char* reason = nullptr;
    if (r.event != "B") {
      reason = "not_bench_only";
    } else if (!r.age || !r.bodyweight) {
      reason = "missing_age_or_bodyweight";
    } else if (*r.age < 15 || *r.age > 69) {
      reason = "age_out_of_range";
    } else if ((r.sex != "M" && r.sex != "F") || !parse_equipment(r.equipment)) {
      reason = "unknown_sex_or_equipment";
    } else if (!r.bench[0] || !r.bench[1] || !r.bench[2]) {
      reason = "missing_attempts";
    } else {
      for (int k = 2; k <= kRounds && !reason; ++k) {
        const double prev = r.declared(k - 1), cur = r.declared(k);
        if (cur < prev - 1e-9 || (std::abs(cur - prev) <= 1e-9 && r.succeeded(k - 1)))
          reason = "non_monotone_attempts";
      }
    }
    if (reason) {
      ++out.excluded[reason];
      continue;
    }
    kept.push_back(r);
  }
  std::map<std::string, int> size;
  for (const auto& r : kept) ++size[category_id(r)];
  for (auto& r : kept) {
    if (size[category_id(r)] < 2) {
      ++out.excluded["category_too_small"];
      continue;
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Personal bests

struct PriorResult {
  std::string date;
  double best = 0.0;
};

struct BestPolicy {
  enum class Mode { all_time, within_months } mode = Mode::all_time;
  int months = 12;
};

namespace detail {

inline int month_index(const std::string& date) {
  return std::stoi(date.substr(0, 4)) * 12 + std::stoi(date.substr(5, 2)) - 1;
}

}  // namespace detail

/// Best prior result under `policy` as of `as_of`; a lifter with nothing to
/// show (0) falls back to `first_attempt_outcome`.
inline double resolve_personal_best(const std::vector<PriorResult>& history, const BestPolicy& policy,
                                    const std::string& as_of, double first_attempt_outcome) {
  if (policy.mode == BestPolicy::Mode::within_months && policy.months <= 0)
    throw Error(ErrorCode::config_invalid, "window must be positive");
  for (std::size_t i = 1; i < history.size(); ++i)
    if (history[i].date < history[i - 1].date)
      throw Error(ErrorCode::unsorted_history, history[i].date + " after " + history[i - 1].date);
  double best = 0.0;
  for (const auto& h : history) {
    if (h.date >= as_of) break;
    if (policy.mode == BestPolicy::Mode::within_months &&
        detail::month_index(as_of) - detail::month_index(h.date) > policy.months)
      continue;
    best = std::max(best, h.best);
  }
  return best > 0.0 ? best : first_attempt_outcome;
}

// ---------------------------------------------------------------------------
// Pressures

struct MeetContext {
  std::string meet_id;
  // prior meets shared by two lifters in the same category; empty means none
  std::function<int(const LifterId&, const LifterId&)> shared_meets;
};

namespace detail {

// Rank-adjacent rivals under interim_rank(after_round); index or npos.
inline std::pair<std::size_t, std::size_t> adjacent_rivals(const std::vector<int>& rank,
                                                           std::size_t i) {
  std::size_t lower = std::string::npos, higher = std::string::npos;
  for (std::size_t j = 0; j < rank.size(); ++j) {
    if (rank[j] == rank[i] + 1) lower = j;
    if (rank[j] == rank[i] - 1) higher = j;
  }
  return {lower, higher};
}

inline int order_mismatch(const CompetitionState& s, std::size_t i, int round,
                          const std::vector<int>& rank) {
  const auto [lower, higher] = adjacent_rivals(rank, i);
  const auto pos = [&](std::size_t j) { return s.position_in_round(j, round); };
  if (lower != std::string::npos && pos(lower) > pos(i)) return 1;
  if (higher != std::string::npos && pos(higher) < pos(i)) return 1;
  return 0;
}

inline int tied(const CompetitionState& s, std::size_t i, int round) {
  const auto order = s.lifting_order(round);
  for (std::size_t p = 0; p < order.indices.size(); ++p)
    if (order.indices[p] == i) return order.tied[p] ? 1 : 0;
  return 0;
}

}  // namespace detail

/// Best of `j` as visible when `i` lifts in `round`.
inline double standing_best_at_lift(const CompetitionState& s, std::size_t j, std::size_t i,
                                    int round) {
  double best = s.best_outcome(j, round - 1);
  const auto& a = s.attempt(j, round);
  if (a && a->outcome == Outcome::success &&
      s.position_in_round(j, round) < s.position_in_round(i, round))
    best = std::max(best, a->declared_weight);
  return best;
}

struct LiftingFlags {
  int turned_around = 0;
  int turning_around = 0;
};

/// Lifting-stage exposure of `i` in `round` given the rank-adjacent rivals
/// (npos when absent): the lower rival's attempt can still pass i's best,
/// and i's attempt beats the higher rival's best as seen at lift time.
inline LiftingFlags lifting_flags(const CompetitionState& s, std::size_t i, int round,
                                  std::size_t lower, std::size_t higher) {
  LiftingFlags f;
  const double y_i = s.best_outcome(i, round - 1);
  if (lower != std::string::npos) {
    const auto& a = *s.attempt(lower, round);
    const bool already_missed = a.outcome == Outcome::failure &&
                                s.position_in_round(lower, round) < s.position_in_round(i, round);
    f.turned_around = a.declared_weight > y_i + 1e-9 && !already_missed;
  }
  if (higher != std::string::npos)
    f.turning_around =
        s.attempt(i, round)->declared_weight > standing_best_at_lift(s, higher, i, round) + 1e-9;
  return f;
}

/// Observation rows for rounds 2 and 3 of a completed competition.
/// `predictions` holds the expected declaration of each (meet, lifter,
/// round); the higher-rival pressure is missing when it has none.
inline std::vector<ObservationRow> compute_pressures(
    const CompetitionState& s, const MeetContext& meet,
    const std::map<PredictionKey, double>& predictions = {}) {
  if (!s.finished()) throw Error(ErrorCode::incomplete_round, "competition not finished");
  const auto& roster = s.roster();
  const auto& cat = s.category();
  std::vector<ObservationRow> rows;
  for (int k = 2; k <= kRounds; ++k) {
    const auto rank = s.interim_rank_indices(k - 1);
    const auto prev_rank = s.interim_rank_indices(k - 2);
    for (std::size_t i = 0; i < roster.size(); ++i) {
      const auto& p = roster[i];
      const auto& own = *s.attempt(i, k);
      const auto& prev = *s.attempt(i, k - 1);
      ObservationRow r;
      r.meet_id = meet.meet_id;
      r.lifter_id = p.id;
      r.round = k;
      r.attempt = own.declared_weight;
      const double y_i = s.best_outcome(i, k - 1);
      r.current_best = std::max(p.personal_best, y_i);
      r.attempt_gap = r.attempt - r.current_best;
      r.success = own.outcome == Outcome::success;
      r.male = p.gender == Gender::male;
      r.bodyweight = p.bodyweight;
      r.num_experience = p.num_experience;
      r.first_participation = p.first_participation;
      r.tie = detail::tied(s, i, k);
      r.mismatch = detail::order_mismatch(s, i, k, rank);
      r.equipment = std::string(to_string(cat.equipment));
      r.age_class = cat.age_class;
      r.division = cat.division;
      r.weight_class = cat.weight_class;
      r.federation = cat.federation;
      r.cluster = cat.federation;
      r.historical_best = p.first_participation ? 0.0 : p.personal_best;
      r.previous_attempt = prev.declared_weight;
      r.previous_success = prev.outcome == Outcome::success;
      r.previous_tie = detail::tied(s, i, k - 1);
      r.previous_mismatch = detail::order_mismatch(s, i, k - 1, prev_rank);
      r.interim_rank = rank[i];

      const auto [lower, higher] = detail::adjacent_rivals(rank, i);
      const InformationSet info = s.information_set(p.id, {DecisionKind::declare, k});
      if (lower != std::string::npos) {
        const auto& L = roster[lower];
        r.lower_rival = L.id;
        if (const auto w = info.declared(L.id, k)) r.z_lower = *w - r.current_best;
      }
      if (higher != std::string::npos) {
        const auto& H = roster[higher];
        r.higher_rival = H.id;
        if (const auto it = predictions.find({meet.meet_id, H.id, k}); it != predictions.end())
          r.z_higher = it->second - r.current_best;
      }
      const LiftingFlags flags = lifting_flags(s, i, k, lower, higher);
      r.turned_around = flags.turned_around;
      r.turning_around = flags.turning_around;
      if (meet.shared_meets) {
        int most = 0;
        for (auto j : {lower, higher})
          if (j != std::string::npos) most = std::max(most, meet.shared_meets(p.id, roster[j].id));
        r.rivalry = most;
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

/// Re-derives every attempt-stage pressure component from the declaring
/// lifter's information set and throws InformationLeakage on any mismatch.
/// Returns the number of components checked.
inline int audit_information(const CompetitionState& s, const std::vector<ObservationRow>& rows) {
  int checked = 0;
  for (const auto& r : rows) {
    const InformationSet info = s.information_set(r.lifter_id, {DecisionKind::declare, r.round});
    const auto leak = [&](const std::string& what) {
      throw Error(ErrorCode::information_leakage,
                  r.lifter_id + " round " + std::to_string(r.round) + ": " + what);
    };
    // own standing best: every own outcome before this round must be visible
    for (int k = 1; k < r.round; ++k)
      if (!info.outcome(r.lifter_id, k)) leak("own round " + std::to_string(k) + " outcome");
    ++checked;
    if (r.z_lower) {
      const auto w = info.declared(r.lower_rival, r.round);
      if (!w || std::abs(*w - r.current_best - *r.z_lower) > 1e-9)
        leak("lower rival declaration " + r.lower_rival);
      ++checked;
    }
    if (r.z_higher) {
      if (!info.declared(r.higher_rival, r.round - 1))
        leak("higher rival previous declaration " + r.higher_rival);
      ++checked;
    }
  }
  return checked;
}

// ---------------------------------------------------------------------------
// Ingest

struct IngestOptions {
  BestPolicy best_policy;
  CompetitionRules rules;
  // Higher-rival expectations; rounds are filled in per target round.
  std::optional<PredictionModelSpec> predictor =
      PredictionModelSpec{2, FeatureSet::without_previous_success, 5};
};

struct IngestReport {
  std::size_t parsed_rows = 0;
  std::vector<ParseIssue> issues;
  std::map<std::string, int> excluded;
  std::size_t kept_rows = 0;
  std::size_t categories = 0;
  std::size_t observations = 0;
  int audited_components = 0;
  std::vector<std::string> prediction_notes;
};

struct IngestResult {
  std::vector<ObservationRow> rows;
  IngestReport report;
};

/// Replays one category under the serial timeline: lifting order by
/// declaration, each lifter declaring the next attempt right after lifting.
inline CompetitionState replay_category(const CategoryKey& category,
                                        const std::vector<LifterProfile>& roster,
                                        const std::vector<const RawMeetRow*>& entries,
                                        const CompetitionRules& rules = {}) {
  std::map<LifterId, double> openers;
  std::map<LifterId, const RawMeetRow*> by_id;
  for (const auto* e : entries) {
    openers[e->name] = e->declared(1);
    by_id[e->name] = e;
  }
  CompetitionState s(category, roster, openers, rules);
  while (!s.finished()) {
    const int k = s.current_round();
    const auto order = s.current_order();
    for (const auto& id : order.lifters) {
      s.record_outcome(id, by_id.at(id)->succeeded(k));
      if (k < kRounds) s.declare_next(id, by_id.at(id)->declared(k + 1));
    }
  }
  return s;
}

inline IngestResult ingest(std::istream& csv, const IngestOptions& opt = {}) {
  IngestResult out;
  ParseResult parsed = parse_meet_csv(csv);
  out.report.parsed_rows = parsed.rows.size() + parsed.issues.size();
  out.report.issues = parsed.issues;
  FilterResult filtered = filter_sample(parsed.rows);
  out.report.excluded = filtered.excluded;
  out.report.kept_rows = filtered.rows.size();
  const auto& rows = filtered.rows;

  // date-ordered history per lifter
  std::map<std::string, std::vector<PriorResult>> history;
  for (const auto& r : rows) {
    double best = r.best.value_or(0.0);
    for (int k = 1; k <= kRounds; ++k)
      if (r.succeeded(k)) best = std::max(best, r.declared(k));
    history[r.name].push_back({r.date, best});
  }
  for (auto& [name, h] : history)
    std::stable_sort(h.begin(), h.end(), [](const auto& a, const auto& b) { return a.date < b.date; });

  std::map<std::string, std::vector<const RawMeetRow*>> categories;
  for (const auto& r : rows) categories[category_id(r)].push_back(&r);
  out.report.categories = categories.size();

  // prior shared categories per lifter pair
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> shared;
  for (const auto& [id, members] : categories)
    for (const auto* a : members)
      for (const auto* b : members)
        if (a->name < b->name) shared[{a->name, b->name}].push_back(a->date);

  std::vector<std::pair<CompetitionState, MeetContext>> replays;
  for (const auto& [id, members] : categories) {
    const RawMeetRow& first = *members.front();
    CategoryKey key{*parse_equipment(first.equipment), first.age_class, first.weight_class,
                    first.sex == "M" ? Gender::male : Gender::female, first.division,
                    first.federation};
    std::vector<LifterProfile> roster;
    for (const auto* m : members) {
      LifterProfile p;
      p.id = m->name;
      p.gender = m->sex == "M" ? Gender::male : Gender::female;
      p.bodyweight = *m->bodyweight;
      p.age = static_cast<int>(*m->age);
      const auto& h = history[m->name];
      p.num_experience = static_cast<int>(
          std::count_if(h.begin(), h.end(), [&](const auto& x) { return x.date < m->date; }));
      p.first_participation = p.num_experience == 0;
      p.personal_best = resolve_personal_best(h, opt.best_policy, m->date, 0.0);
      roster.push_back(p);
    }
    const std::string date = first.date;
    MeetContext ctx;
    ctx.meet_id = first.meet_id;
    ctx.shared_meets = [&shared, date](const LifterId& a, const LifterId& b) {
      const auto it = shared.find(a < b ? std::pair{a, b} : std::pair{b, a});
      if (it == shared.end()) return 0;
      return static_cast<int>(
          std::count_if(it->second.begin(), it->second.end(), [&](const auto& d) { return d < date; }));
    };
    replays.emplace_back(replay_category(key, roster, members, opt.rules), std::move(ctx));
  }

  std::map<PredictionKey, double> predictions;
  if (opt.predictor) {
    std::vector<ObservationRow> unpredicted;
    for (const auto& [state, ctx] : replays) {
      auto rows_k = compute_pressures(state, ctx);
      unpredicted.insert(unpredicted.end(), rows_k.begin(), rows_k.end());
    }
    for (int k = 2; k <= kRounds; ++k) {
      PredictionModelSpec spec = *opt.predictor;
      spec.target_round = k;
      try {
        const RivalModel m = predict_rival_attempt(unpredicted, spec);
        predictions.insert(m.predictions.begin(), m.predictions.end());
      } catch (const Error& e) {
        out.report.prediction_notes.push_back("round " + std::to_string(k) + ": " + e.what());
      }
    }
  }
  std::vector<ObservationRow> all;
  for (const auto& [state, ctx] : replays) {
    auto rows_k = compute_pressures(state, ctx, predictions);
    out.report.audited_components += audit_information(state, rows_k);
    all.insert(all.end(), rows_k.begin(), rows_k.end());
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::tie(a.meet_id, a.equipment, a.age_class, a.weight_class, a.division, a.round,
                    a.lifter_id) < std::tie(b.meet_id, b.equipment, b.age_class, b.weight_class,
                                            b.division, b.round, b.lifter_id);
  });
  out.report.observations = all.size();
  out.rows = std::move(all);
  return out;
}

// ---------------------------------------------------------------------------
// Summary statistics

struct SummaryLine {
  std::string variable;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// One-pass (Welford) moments of a column.
class RunningMoments {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
    min_ = n_ == 1 ? x : std::min(min_, x);
    max_ = n_ == 1 ? x : std::max(max_, x);
  }
  SummaryLine line(std::string name) const {
    return {std::move(name), n_, mean_, n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0,
            min_, max_};
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, min_ = 0.0, max_ = 0.0;
};

/// Per-equipment summary over lifter-meet entries; `personal_best` maps a
/// row to its resolved best.
inline std::map<std::string, std::vector<SummaryLine>> summarize_sample(
    const std::vector<RawMeetRow>& rows, const std::function<double(const RawMeetRow&)>& personal_best) {
  const std::vector<std::string> names{"Male",
                                       "Personal best",
                                       "First attempt weight",
                                       "Second attempt weight",
                                       "Third attempt weight",
                                       "Successful first attempt",
                                       "Successful second attempt",
                                       "Successful third attempt",
                                       "Best attempt",
                                       "Age",
                                       "Bodyweight"};
  std::map<std::string, std::vector<RunningMoments>> acc;
  for (const auto& r : rows) {
    const auto eq = parse_equipment(r.equipment);
    if (!eq) continue;
    auto& m = acc.try_emplace(std::string(to_string(*eq)), names.size()).first->second;
    m[0].add(r.sex == "M");
    m[1].add(personal_best(r));
    for (int k = 1; k <= kRounds; ++k) {
      if (r.bench[k - 1]) m[1 + k].add(r.declared(k));
      if (r.bench[k - 1]) m[4 + k].add(r.succeeded(k));
    }
    if (r.best) m[8].add(*r.best);
    if (r.age) m[9].add(*r.age);
    if (r.bodyweight) m[10].add(*r.bodyweight);
  }
  std::map<std::string, std::vector<SummaryLine>> out;
  for (const auto& [eq, m] : acc)
    for (std::size_t v = 0; v < names.size(); ++v) out[eq].push_back(m[v].line(names[v]));
  return out;
}

}  // namespace benchpress
