#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace benchpress {

enum class ErrorCode {
  // competition-core
  duplicate_lifter,
  missing_opener,
  roster_too_small,
  missing_declaration,
  decrease_not_allowed,
  repeat_after_success_not_allowed,
  out_of_turn,
  already_recorded,
  incomplete_round,
  invalid_decision_point,
  empty_input,
  off_lattice,
  // behavior-model / attempt-policy
  nonpositive_weight,
  context_violation,
  boundary_tie,
  empty_grid,
  // econometrics
  rank_deficient,
  singular_normal_equations,
  too_few_clusters,
  under_identified,
  too_few_rows,
  feature_leakage,
  degenerate_replicate,
  // pressure-pipeline
  missing_header,
  unsorted_history,
  information_leakage,
  // simulation
  config_invalid,
  schema_mismatch,
  zero_benchmark,
  // cli
  usage,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::duplicate_lifter: return "DuplicateLifter";
    case ErrorCode::missing_opener: return "MissingOpener";
    case ErrorCode::roster_too_small: return "RosterTooSmall";
    case ErrorCode::missing_declaration: return "MissingDeclaration";
    case ErrorCode::decrease_not_allowed: return "DecreaseNotAllowed";
    case ErrorCode::repeat_after_success_not_allowed: return "RepeatAfterSuccessNotAllowed";
    case ErrorCode::out_of_turn: return "OutOfTurn";
    case ErrorCode::already_recorded: return "AlreadyRecorded";
    case ErrorCode::incomplete_round: return "IncompleteRound";
    case ErrorCode::invalid_decision_point: return "InvalidDecisionPoint";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::off_lattice: return "OffLattice";
    case ErrorCode::nonpositive_weight: return "NonpositiveWeight";
    case ErrorCode::context_violation: return "ContextViolation";
    case ErrorCode::boundary_tie: return "BoundaryTie";
    case ErrorCode::empty_grid: return "EmptyGrid";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::singular_normal_equations: return "SingularNormalEquations";
    case ErrorCode::too_few_clusters: return "TooFewClusters";
    case ErrorCode::under_identified: return "UnderIdentified";
    case ErrorCode::too_few_rows: return "TooFewRows";
    case ErrorCode::feature_leakage: return "FeatureLeakage";
    case ErrorCode::degenerate_replicate: return "DegenerateReplicate";
    case ErrorCode::missing_header: return "MissingHeader";
    case ErrorCode::unsorted_history: return "UnsortedHistory";
    case ErrorCode::information_leakage: return "InformationLeakage";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::schema_mismatch: return "SchemaMismatch";
    case ErrorCode::zero_benchmark: return "ZeroBenchmark";
    case ErrorCode::usage: return "Usage";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this type; `code()` is
/// the stable machine-readable identifier.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace benchpress
