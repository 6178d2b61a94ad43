#pragma once

// Bench-press competition state machine: declarations, lifting order,
// outcomes, interim ranking and per-lifter information sets. Every mutation
// is appended to an ordered event log, and information sets are log
// prefixes, so "who knew what when" can be replayed mechanically.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "benchpress/error.hpp"

namespace benchpress {

using LifterId = std::string;

inline constexpr int kRounds = 3;

enum class Gender { male, female };
enum class Equipment { raw, single_ply, multi_ply };
enum class Outcome { pending, success, failure };
enum class TieBreak { lighter_bodyweight, first_to_achieve };

inline std::string_view to_string(Gender g) { return g == Gender::male ? "M" : "F"; }

inline std::string_view to_string(Equipment e) {
  switch (e) {
    case Equipment::raw: return "Raw";
    case Equipment::single_ply: return "Single-ply";
    case Equipment::multi_ply: return "Multi-ply";
  }
  return "Raw";
}

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::pending: return "pending";
    case Outcome::success: return "success";
    case Outcome::failure: return "failure";
  }
  return "pending";
}

struct LifterProfile {
  LifterId id;
  Gender gender = Gender::male;
  double bodyweight = 0.0;  // kg
  int age = 30;
  int num_experience = 0;
  bool first_participation = true;
  double personal_best = 0.0;  // 0 encodes "never competed"
};

struct CategoryKey {
  Equipment equipment = Equipment::raw;
  std::string age_class;
  std::string weight_class;
  Gender gender = Gender::male;
  std::string division;
  std::string federation;

  friend bool operator==(const CategoryKey&, const CategoryKey&) = default;
  friend auto operator<=>(const CategoryKey&, const CategoryKey&) = default;
};

struct AttemptRecord {
  int round = 1;
  double declared_weight = 0.0;
  Outcome outcome = Outcome::pending;
};

struct CompetitionRules {
  double kappa = 2.5;
  TieBreak tie_break = TieBreak::lighter_bodyweight;
  // Simulator output is restricted to multiples of kappa; ingested data is not.
  bool lattice_only = false;
  // Figure-1 timeline: a lifter's next declaration is due before the next
  // lifter's outcome. Only simulator dry runs turn this off.
  bool strict_timeline = true;
};

enum class EventKind { declare, lift };

struct Event {
  EventKind kind = EventKind::declare;
  LifterId lifter;
  int round = 1;
  double weight = 0.0;
  Outcome outcome = Outcome::pending;

  friend bool operator==(const Event&, const Event&) = default;
};

struct LiftingOrder {
  std::vector<std::size_t> indices;  // roster indices, lifting sequence
  std::vector<LifterId> lifters;
  std::vector<bool> tied;  // aligned with `indices`: shares its declared weight
};

enum class DecisionKind { declare, lift };

struct DecisionPoint {
  DecisionKind kind = DecisionKind::declare;
  int round = 1;
};

struct ObservedAttempt {
  LifterId lifter;
  int round;
  double weight;
  friend bool operator==(const ObservedAttempt&, const ObservedAttempt&) = default;
};

struct ObservedOutcome {
  LifterId lifter;
  int round;
  Outcome outcome;
  friend bool operator==(const ObservedOutcome&, const ObservedOutcome&) = default;
};

struct InformationSet {
  LifterId observer;
  DecisionPoint point;
  std::vector<ObservedAttempt> attempts;
  std::vector<ObservedOutcome> outcomes;

  std::optional<double> declared(const LifterId& lifter, int round) const {
    for (const auto& a : attempts)
      if (a.lifter == lifter && a.round == round) return a.weight;
    return std::nullopt;
  }
  std::optional<Outcome> outcome(const LifterId& lifter, int round) const {
    for (const auto& o : outcomes)
      if (o.lifter == lifter && o.round == round) return o.outcome;
    return std::nullopt;
  }
  bool contains_outcome(const LifterId& lifter, int round) const {
    return outcome(lifter, round).has_value();
  }
  bool is_superset_of(const InformationSet& other) const {
    for (const auto& a : other.attempts)
      if (std::find(attempts.begin(), attempts.end(), a) == attempts.end()) return false;
    for (const auto& o : other.outcomes)
      if (std::find(outcomes.begin(), outcomes.end(), o) == outcomes.end()) return false;
    return true;
  }
};

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) <= 1e-9; }

inline bool on_lattice(double w, double kappa) {
  const double steps = w / kappa;
  return std::abs(steps - std::round(steps)) <= 1e-9;
}

}  // namespace detail

/// One competition within one category. Value type; safe to copy and move
/// across threads.
class CompetitionState {
 public:
  CompetitionState(CategoryKey category, std::vector<LifterProfile> roster,
                   const std::map<LifterId, double>& openers, CompetitionRules rules = {})
      : category_(std::move(category)), roster_(std::move(roster)), rules_(rules) {
    if (roster_.size() < 2)
      throw Error(ErrorCode::roster_too_small, "a competition needs at least two lifters");
    std::unordered_set<LifterId> seen;
    for (const auto& l : roster_)
      if (!seen.insert(l.id).second) throw Error(ErrorCode::duplicate_lifter, l.id);
    attempts_.resize(roster_.size());
    for (std::size_t i = 0; i < roster_.size(); ++i) {
      auto it = openers.find(roster_[i].id);
      if (it == openers.end() || !(it->second > 0.0))
        throw Error(ErrorCode::missing_opener, roster_[i].id);
      check_lattice(it->second);
      attempts_[i][0] = AttemptRecord{1, it->second, Outcome::pending};
      log_.push_back({EventKind::declare, roster_[i].id, 1, it->second, Outcome::pending});
    }
    order_ = lifting_order(1);
  }

  const CategoryKey& category() const { return category_; }
  const std::vector<LifterProfile>& roster() const { return roster_; }
  const CompetitionRules& rules() const { return rules_; }
  const std::vector<Event>& events() const { return log_; }
  int current_round() const { return round_; }
  std::size_t position_cursor() const { return cursor_; }
  bool finished() const { return finished_; }
  const LiftingOrder& current_order() const { return order_; }

  std::size_t index_of(const LifterId& id) const {
    for (std::size_t i = 0; i < roster_.size(); ++i)
      if (roster_[i].id == id) return i;
    throw Error(ErrorCode::out_of_turn, "unknown lifter " + id);
  }

  const std::optional<AttemptRecord>& attempt(std::size_t index, int round) const {
    return attempts_.at(index).at(static_cast<std::size_t>(round - 1));
  }

  /// Ascending declared weight; ties to the lighter lifter, then roster order.
  LiftingOrder lifting_order(int round) const {
    LiftingOrder order;
    order.indices.resize(roster_.size());
    std::iota(order.indices.begin(), order.indices.end(), std::size_t{0});
    for (std::size_t i = 0; i < roster_.size(); ++i)
      if (!attempt(i, round))
        throw Error(ErrorCode::missing_declaration,
                    roster_[i].id + " round " + std::to_string(round));
    std::stable_sort(order.indices.begin(), order.indices.end(),
                     [&](std::size_t a, std::size_t b) {
                       const double wa = attempt(a, round)->declared_weight;
                       const double wb = attempt(b, round)->declared_weight;
                       if (!detail::near(wa, wb)) return wa < wb;
                       return roster_[a].bodyweight < roster_[b].bodyweight;
                     });
    for (auto i : order.indices) {
      order.lifters.push_back(roster_[i].id);
      bool tied = false;
      for (std::size_t j = 0; j < roster_.size(); ++j)
        if (j != i && detail::near(attempt(i, round)->declared_weight,
                                   attempt(j, round)->declared_weight))
          tied = true;
      order.tied.push_back(tied);
    }
    return order;
  }

  std::size_t position_in_round(std::size_t index, int round) const {
    const auto order = round == round_ ? order_ : lifting_order(round);
    return static_cast<std::size_t>(
        std::find(order.indices.begin(), order.indices.end(), index) - order.indices.begin());
  }

  void record_outcome(const LifterId& lifter, bool success) {
    const std::size_t idx = index_of(lifter);
    if (finished_) throw Error(ErrorCode::already_recorded, lifter);
    auto& rec = attempts_[idx][static_cast<std::size_t>(round_ - 1)];
    if (rec->outcome != Outcome::pending) throw Error(ErrorCode::already_recorded, lifter);
    if (order_.indices[cursor_] != idx)
      throw Error(ErrorCode::out_of_turn, lifter + " is not at the lifting position");
    if (rules_.strict_timeline && round_ < kRounds && cursor_ > 0) {
      const std::size_t prev = order_.indices[cursor_ - 1];
      if (!attempt(prev, round_ + 1))
        throw Error(ErrorCode::out_of_turn,
                    roster_[prev].id + " must declare before the next outcome");
    }
    rec->outcome = success ? Outcome::success : Outcome::failure;
    log_.push_back({EventKind::lift, lifter, round_, rec->declared_weight, rec->outcome});
    ++cursor_;
    maybe_advance();
  }

  void declare_next(const LifterId& lifter, double weight) {
    const std::size_t idx = index_of(lifter);
    if (finished_ || round_ >= kRounds)
      throw Error(ErrorCode::out_of_turn, "no further round to declare for");
    const auto& cur = attempts_[idx][static_cast<std::size_t>(round_ - 1)];
    if (cur->outcome == Outcome::pending)
      throw Error(ErrorCode::out_of_turn, lifter + " has not lifted this round");
    if (attempt(idx, round_ + 1)) throw Error(ErrorCode::already_recorded, lifter);
    if (rules_.strict_timeline) {
      const std::size_t pos = position_in_round(idx, round_);
      if (cursor_ != pos + 1)
        throw Error(ErrorCode::out_of_turn, lifter + " declared after the next outcome");
    }
    if (!(weight > 0.0)) throw Error(ErrorCode::decrease_not_allowed, "weight must be positive");
    if (weight < cur->declared_weight - 1e-9)
      throw Error(ErrorCode::decrease_not_allowed, lifter);
    if (detail::near(weight, cur->declared_weight) && cur->outcome == Outcome::success)
      throw Error(ErrorCode::repeat_after_success_not_allowed, lifter);
    check_lattice(weight);
    attempts_[idx][static_cast<std::size_t>(round_)] =
        AttemptRecord{round_ + 1, weight, Outcome::pending};
    log_.push_back({EventKind::declare, lifter, round_ + 1, weight, Outcome::pending});
    maybe_advance();
  }

  /// Heaviest successful declaration through `through_round`, 0 if none.
  double best_outcome(std::size_t index, int through_round = kRounds) const {
    double best = 0.0;
    for (int r = 1; r <= through_round; ++r) {
      const auto& a = attempt(index, r);
      if (a && a->outcome == Outcome::success) best = std::max(best, a->declared_weight);
    }
    return best;
  }

  bool round_complete(int round) const {
    for (std::size_t i = 0; i < roster_.size(); ++i) {
      const auto& a = attempt(i, round);
      if (!a || a->outcome == Outcome::pending) return false;
    }
    return true;
  }

  /// Rank per roster index (1 = best). `after_round` 0 ranks by opener.
  std::vector<int> interim_rank_indices(int after_round) const {
    for (int r = 1; r <= after_round; ++r)
      if (!round_complete(r))
        throw Error(ErrorCode::incomplete_round, "round " + std::to_string(r));
    std::vector<std::size_t> idx(roster_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (after_round == 0) {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double wa = attempt(a, 1)->declared_weight, wb = attempt(b, 1)->declared_weight;
        if (!detail::near(wa, wb)) return wa > wb;
        return roster_[a].bodyweight < roster_[b].bodyweight;
      });
    } else {
      std::vector<double> best(roster_.size());
      std::vector<std::size_t> when(roster_.size(), log_.size());
      for (std::size_t i = 0; i < roster_.size(); ++i) {
        best[i] = best_outcome(i, after_round);
        for (std::size_t e = 0; e < log_.size(); ++e)
          if (log_[e].kind == EventKind::lift && log_[e].lifter == roster_[i].id &&
              log_[e].outcome == Outcome::success && log_[e].round <= after_round &&
              detail::near(log_[e].weight, best[i])) {
            when[i] = e;
            break;
          }
      }
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (!detail::near(best[a], best[b])) return best[a] > best[b];
        if (rules_.tie_break == TieBreak::first_to_achieve && best[a] > 0.0 &&
            when[a] != when[b])
          return when[a] < when[b];
        return roster_[a].bodyweight < roster_[b].bodyweight;
      });
    }
    std::vector<int> rank(roster_.size());
    for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = static_cast<int>(r) + 1;
    return rank;
  }

  std::map<LifterId, int> interim_rank(int after_round) const {
    const auto rank = interim_rank_indices(after_round);
    std::map<LifterId, int> out;
    for (std::size_t i = 0; i < roster_.size(); ++i) out[roster_[i].id] = rank[i];
    return out;
  }

  /// Observables available to `lifter` at `point`: exactly the event-log
  /// prefix preceding that decision. Openers are declared simultaneously, so
  /// the round-1 declaration sees nothing.
  InformationSet information_set(const LifterId& lifter, DecisionPoint point) const {
    const std::size_t idx = index_of(lifter);
    if (point.round < 1 || point.round > kRounds)
      throw Error(ErrorCode::invalid_decision_point, "round out of range");
    InformationSet info{lifter, point, {}, {}};
    if (point.kind == DecisionKind::declare && point.round == 1) return info;

    const EventKind kind = point.kind == DecisionKind::declare ? EventKind::declare : EventKind::lift;
    std::size_t end = log_.size();
    bool found = false;
    for (std::size_t e = 0; e < log_.size(); ++e)
      if (log_[e].kind == kind && log_[e].lifter == lifter && log_[e].round == point.round) {
        end = e;
        found = true;
        break;
      }
    if (!found && !is_pending_decision(idx, point))
      throw Error(ErrorCode::invalid_decision_point,
                  lifter + " has no such decision at this point");
    for (std::size_t e = 0; e < end; ++e) {
      const auto& ev = log_[e];
      if (ev.kind == EventKind::declare)
        info.attempts.push_back({ev.lifter, ev.round, ev.weight});
      else
        info.outcomes.push_back({ev.lifter, ev.round, ev.outcome});
    }
    return info;
  }

  /// Index of the event that realises `point` for `lifter`, if it happened.
  std::optional<std::size_t> event_index(const LifterId& lifter, DecisionPoint point) const {
    const EventKind kind = point.kind == DecisionKind::declare ? EventKind::declare : EventKind::lift;
    for (std::size_t e = 0; e < log_.size(); ++e)
      if (log_[e].kind == kind && log_[e].lifter == lifter && log_[e].round == point.round)
        return e;
    return std::nullopt;
  }

 private:
  bool is_pending_decision(std::size_t idx, DecisionPoint point) const {
    if (finished_) return false;
    if (point.kind == DecisionKind::lift)
      return point.round == round_ && cursor_ < order_.indices.size() &&
             order_.indices[cursor_] == idx;
    const auto& prev = attempt(idx, point.round - 1);
    return point.round - 1 == round_ && prev && prev->outcome != Outcome::pending &&
           !attempt(idx, point.round);
  }

  void check_lattice(double w) const {
    if (rules_.lattice_only && !detail::on_lattice(w, rules_.kappa))
      throw Error(ErrorCode::off_lattice, std::to_string(w));
  }

  void maybe_advance() {
    if (cursor_ < roster_.size()) return;
    if (round_ == kRounds) {
      finished_ = true;
      return;
    }
    for (std::size_t i = 0; i < roster_.size(); ++i)
      if (!attempt(i, round_ + 1)) return;
    ++round_;
    cursor_ = 0;
    order_ = lifting_order(round_);
  }

  CategoryKey category_;
  std::vector<LifterProfile> roster_;
  CompetitionRules rules_;
  std::vector<std::array<std::optional<AttemptRecord>, kRounds>> attempts_;
  std::vector<Event> log_;
  LiftingOrder order_;
  int round_ = 1;
  std::size_t cursor_ = 0;
  bool finished_ = false;
};

// ---------------------------------------------------------------------------
// Event-log text format: one event per line,
//   <kind>\t<lifter>\t<round>\t<weight>\t<outcome>

inline std::string format_weight(double w) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), w);
  return std::string(buf, res.ptr);
}

inline std::string to_text(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    out += e.kind == EventKind::declare ? "declare" : "lift";
    out += '\t';
    out += e.lifter;
    out += '\t';
    out += std::to_string(e.round);
    out += '\t';
    out += format_weight(e.weight);
    out += '\t';
    out += to_string(e.outcome);
    out += '\n';
  }
  return out;
}

inline std::vector<Event> parse_event_log(std::string_view text) {
  std::vector<Event> events;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, '\t')) f.push_back(cell);
    if (f.size() != 5) throw Error(ErrorCode::empty_input, "malformed event line: " + line);
    Event e;
    e.kind = f[0] == "declare" ? EventKind::declare : EventKind::lift;
    e.lifter = f[1];
    e.round = std::stoi(f[2]);
    e.weight = std::stod(f[3]);
    e.outcome = f[4] == "success"   ? Outcome::success
                : f[4] == "failure" ? Outcome::failure
                                    : Outcome::pending;
    events.push_back(std::move(e));
  }
  return events;
}

/// Rebuilds a state by re-applying a log through the public mutators, so
/// every protocol check runs again.
inline CompetitionState replay(const CategoryKey& category, const std::vector<LifterProfile>& roster,
                               const std::vector<Event>& events, CompetitionRules rules = {}) {
  std::map<LifterId, double> openers;
  std::size_t e = 0;
  for (; e < events.size() && events[e].kind == EventKind::declare && events[e].round == 1; ++e)
    openers[events[e].lifter] = events[e].weight;
  CompetitionState state(category, roster, openers, rules);
  for (; e < events.size(); ++e) {
    const auto& ev = events[e];
    if (ev.kind == EventKind::lift)
      state.record_outcome(ev.lifter, ev.outcome == Outcome::success);
    else
      state.declare_next(ev.lifter, ev.weight);
  }
  return state;
}

// ---------------------------------------------------------------------------

/// Rows: rank change caused by round 2 and round 3. Columns: <=-2, -1, 0,
/// +1, >=+2, where positive means the lifter moved up.
struct RankChangeTable {
  std::array<std::array<double, 5>, 2> frequency{};
  std::array<std::array<std::size_t, 5>, 2> count{};
};

inline std::size_t rank_change_bucket(int change) {
  if (change <= -2) return 0;
  if (change >= 2) return 4;
  return static_cast<std::size_t>(change + 2);
}

inline RankChangeTable rank_change_distribution(const std::vector<CompetitionState>& histories) {
  if (histories.empty()) throw Error(ErrorCode::empty_input, "no competitions");
  RankChangeTable t;
  for (const auto& h : histories) {
    for (int round = 2; round <= kRounds; ++round) {
      const auto before = h.interim_rank_indices(round - 1);
      const auto after = h.interim_rank_indices(round);
      for (std::size_t i = 0; i < before.size(); ++i)
        ++t.count[static_cast<std::size_t>(round - 2)][rank_change_bucket(before[i] - after[i])];
    }
  }
  for (std::size_t r = 0; r < 2; ++r) {
    const double total = static_cast<double>(
        std::accumulate(t.count[r].begin(), t.count[r].end(), std::size_t{0}));
    for (std::size_t b = 0; b < 5; ++b) t.frequency[r][b] = t.count[r][b] / total;
  }
  return t;
}

}  // namespace benchpress
