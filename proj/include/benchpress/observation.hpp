#pragma once

// One lifter-round observation and the name-addressable features built on it.

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "benchpress/error.hpp"

namespace benchpress {

struct ObservationRow {
  std::string meet_id;
  std::string lifter_id;
  int round = 2;

  double attempt = 0.0;
  double current_best = 0.0;
  double attempt_gap = 0.0;  // attempt - current_best
  int success = 0;

  int male = 1;
  double bodyweight = 0.0;
  int num_experience = 0;
  int first_participation = 0;
  int tie = 0;
  int mismatch = 0;

  std::string equipment;
  std::string age_class;
  std::string division;
  std::string weight_class;
  std::string federation;
  std::string cluster;

  std::optional<double> z_lower;
  std::optional<double> z_higher;
  int turned_around = 0;
  int turning_around = 0;
  double rivalry = 0.0;

  // previous-round quantities, all observable when the round is declared
  double historical_best = 0.0;  // 0 for debutants
  double previous_attempt = 0.0;
  int previous_success = 0;
  int previous_tie = 0;
  int previous_mismatch = 0;

  int interim_rank = 0;
  std::string lower_rival;
  std::string higher_rival;
};

inline constexpr std::array<std::string_view, 5> kFixedEffectKeys{
    "equipment", "age_class", "division", "weight_class", "federation"};

inline const std::string& fixed_effect_level(const ObservationRow& r, std::string_view key) {
  if (key == "equipment") return r.equipment;
  if (key == "age_class") return r.age_class;
  if (key == "division") return r.division;
  if (key == "weight_class") return r.weight_class;
  if (key == "federation") return r.federation;
  throw Error(ErrorCode::schema_mismatch, "unknown fixed effect " + std::string(key));
}

namespace detail {

inline double base_feature(const ObservationRow& r, std::string_view name) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (name == "intercept") return 1.0;
  if (name == "male") return r.male;
  if (name == "female") return 1 - r.male;
  if (name == "bodyweight") return r.bodyweight;
  if (name == "num_experience") return r.num_experience;
  if (name == "first_participation") return r.first_participation;
  if (name == "tie") return r.tie;
  if (name == "mismatch") return r.mismatch;
  if (name == "z_lower") return r.z_lower.value_or(nan);
  if (name == "z_higher") return r.z_higher.value_or(nan);
  if (name == "turned_around") return r.turned_around;
  if (name == "turning_around") return r.turning_around;
  if (name == "attempt_gap") return r.attempt_gap;
  if (name == "rivalry") return r.rivalry;
  if (name == "success") return r.success;
  if (name == "attempt") return r.attempt;
  if (name == "current_best") return r.current_best;
  if (name == "historical_best") return r.historical_best;
  if (name == "previous_attempt") return r.previous_attempt;
  if (name == "previous_success") return r.previous_success;
  if (name == "previous_tie") return r.previous_tie;
  if (name == "previous_mismatch") return r.previous_mismatch;
  if (const auto eq = name.find('='); eq != std::string_view::npos)
    return fixed_effect_level(r, name.substr(0, eq)) == name.substr(eq + 1) ? 1.0 : 0.0;
  throw Error(ErrorCode::schema_mismatch, "unknown feature " + std::string(name));
}

}  // namespace detail

/// Value of a design column for one row. Names are base features
/// ("z_lower"), fixed-effect indicators ("federation=IPF") or products
/// joined by ':' ("z_lower:female"). Missing pressures yield NaN.
inline double feature_value(const ObservationRow& r, std::string_view name) {
  double v = 1.0;
  std::size_t start = 0;
  while (true) {
    const auto colon = name.find(':', start);
    v *= detail::base_feature(r, name.substr(start, colon - start));
    if (colon == std::string_view::npos) return v;
    start = colon + 1;
  }
}

// ---------------------------------------------------------------------------
// TSV serialisation

inline constexpr std::string_view kObservationMagic = "# bpress-observations v1";

inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline const std::vector<std::string>& observation_columns() {
  static const std::vector<std::string> cols{
      "meet_id",        "lifter_id",         "round",        "attempt",
      "current_best",   "attempt_gap",       "success",      "male",
      "bodyweight",     "num_experience",    "first_participation",
      "tie",            "mismatch",          "equipment",    "age_class",
      "division",       "weight_class",      "federation",   "cluster",
      "z_lower",        "z_higher",          "turned_around", "turning_around",
      "rivalry",        "historical_best",   "previous_attempt", "previous_success",
      "previous_tie",   "previous_mismatch", "interim_rank", "lower_rival",
      "higher_rival"};
  return cols;
}

inline double parse_number(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::schema_mismatch, "not a number: '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::schema_mismatch, "not an integer: '" + s + "'");
  return v;
}

inline std::string optional_text(const std::optional<double>& v) {
  return v ? format_number(*v) : "NA";
}

inline std::optional<double> parse_optional(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return parse_number(s);
}

}  // namespace detail

inline void write_observations(std::ostream& out, const std::vector<ObservationRow>& rows,
                               std::string_view provenance = {}) {
  out << kObservationMagic << '\n';
  if (!provenance.empty()) out << "# " << provenance << '\n';
  const auto& cols = detail::observation_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "\t" : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    using detail::optional_text;
    out << r.meet_id << '\t' << r.lifter_id << '\t' << r.round << '\t' << format_number(r.attempt)
        << '\t' << format_number(r.current_best) << '\t' << format_number(r.attempt_gap) << '\t'
        << r.success << '\t' << r.male << '\t' << format_number(r.bodyweight) << '\t'
        << r.num_experience << '\t' << r.first_participation << '\t' << r.tie << '\t'
        << r.mismatch << '\t' << r.equipment << '\t' << r.age_class << '\t' << r.division << '\t'
        << r.weight_class << '\t' << r.federation << '\t' << r.cluster << '\t'
        << optional_text(r.z_lower) << '\t' << optional_text(r.z_higher) << '\t'
        << r.turned_around << '\t' << r.turning_around << '\t' << format_number(r.rivalry) << '\t'
        << format_number(r.historical_best) << '\t' << format_number(r.previous_attempt) << '\t'
        << r.previous_success << '\t' << r.previous_tie << '\t' << r.previous_mismatch << '\t'
        << r.interim_rank << '\t' << r.lower_rival << '\t' << r.higher_rival << '\n';
  }
}

inline std::vector<ObservationRow> read_observations(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kObservationMagic)
    throw Error(ErrorCode::schema_mismatch, "missing '" + std::string(kObservationMagic) + "'");
  while (std::getline(in, line) && line.starts_with("#")) {
  }
  const auto& cols = detail::observation_columns();
  {
    std::vector<std::string> header;
    std::istringstream hs(line);
    for (std::string f; std::getline(hs, f, '\t');) header.push_back(f);
    if (header != cols) throw Error(ErrorCode::schema_mismatch, "unexpected column header");
  }
  std::vector<ObservationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != cols.size())
      throw Error(ErrorCode::schema_mismatch, "row has " + std::to_string(f.size()) + " fields");
    using detail::parse_int;
    using detail::parse_number;
    ObservationRow r;
    std::size_t i = 0;
    r.meet_id = f[i++];
    r.lifter_id = f[i++];
    r.round = parse_int(f[i++]);
    r.attempt = parse_number(f[i++]);
    r.current_best = parse_number(f[i++]);
    r.attempt_gap = parse_number(f[i++]);
    r.success = parse_int(f[i++]);
    r.male = parse_int(f[i++]);
    r.bodyweight = parse_number(f[i++]);
    r.num_experience = parse_int(f[i++]);
    r.first_participation = parse_int(f[i++]);
    r.tie = parse_int(f[i++]);
    r.mismatch = parse_int(f[i++]);
    r.equipment = f[i++];
    r.age_class = f[i++];
    r.division = f[i++];
    r.weight_class = f[i++];
    r.federation = f[i++];
    r.cluster = f[i++];
    r.z_lower = detail::parse_optional(f[i++]);
    r.z_higher = detail::parse_optional(f[i++]);
    r.turned_around = parse_int(f[i++]);
    r.turning_around = parse_int(f[i++]);
    r.rivalry = parse_number(f[i++]);
    r.historical_best = parse_number(f[i++]);
    r.previous_attempt = parse_number(f[i++]);
    r.previous_success = parse_int(f[i++]);
    r.previous_tie = parse_int(f[i++]);
    r.previous_mismatch = parse_int(f[i++]);
    r.interim_rank = parse_int(f[i++]);
    r.lower_rival = f[i++];
    r.higher_rival = f[i++];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace benchpress
