#pragma once

// Fixed-effects OLS / LPM, 2SLS, CR1 cluster-robust inference, rival-attempt
// prediction with k-fold CV, and the federation-level bootstrap for the
// generated higher-rival pressure.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "benchpress/observation.hpp"

namespace benchpress {

enum class FormulaKind {
  attempt_eq1,
  success_lpm,
  first_stage,
  attempt_heterogeneity,
  success_heterogeneity
};
enum class Moderator { gender, experience, rivalry };
enum class Sample { all, prior_success };

struct Formula {
  FormulaKind kind = FormulaKind::attempt_eq1;
  Moderator moderator = Moderator::gender;
  std::optional<int> round;
  Sample sample = Sample::all;
  std::vector<std::string> fixed_effects{kFixedEffectKeys.begin(), kFixedEffectKeys.end()};
};

/// Column-level recipe behind a design matrix.
struct DesignSpec {
  std::string response;
  std::vector<std::string> columns;
  std::vector<std::string> fixed_effects;
  std::vector<std::string> instruments;
  std::vector<std::string> endogenous;
  std::function<bool(const ObservationRow&)> filter;
};

struct Design {
  std::string response;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  Eigen::MatrixXd instruments;
  std::vector<std::string> instrument_names;
  std::vector<std::string> endogenous;
  std::vector<std::string> clusters;
  std::vector<std::size_t> rows;  // positions in the input
  std::vector<std::string> dropped;
};

struct EstimateResult {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd clustered_se;
  Eigen::MatrixXd vcov;
  int n_obs = 0;
  int n_clusters = 0;
  double r2 = 0.0;
  double r2_adj = 0.0;
  double rmse = 0.0;
  std::vector<std::string> dropped;
  std::shared_ptr<const EstimateResult> first_stage;
  std::optional<double> first_stage_f;
  bool weak_instruments = false;

  std::optional<std::size_t> index_of(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  }
  double coef(std::string_view name) const { return coefficients[at(name)]; }
  double se(std::string_view name) const { return clustered_se[at(name)]; }

 private:
  std::size_t at(std::string_view name) const {
    if (auto i = index_of(name)) return *i;
    throw Error(ErrorCode::schema_mismatch, "no coefficient " + std::string(name));
  }
};

// ---------------------------------------------------------------------------
// Designs

/// Controls of the declaration equations carry the tie and order-mismatch
/// flags of the round just lifted, which shape what the declaring lifter
/// could observe. Lifting equations use the flags of the current round.
inline std::vector<std::string> control_columns(bool declaration_stage = false) {
  std::vector<std::string> c{"intercept", "male", "bodyweight", "num_experience",
                             "first_participation"};
  if (declaration_stage) {
    c.push_back("previous_tie");
    c.push_back("previous_mismatch");
  } else {
    c.push_back("tie");
    c.push_back("mismatch");
  }
  return c;
}

inline std::string moderator_name(Moderator m) {
  switch (m) {
    case Moderator::gender: return "gender";
    case Moderator::experience: return "num_experience";
    case Moderator::rivalry: return "rivalry";
  }
  return "?";
}

namespace detail {

inline std::vector<std::string> interact(const std::vector<std::string>& bases, Moderator m) {
  std::vector<std::string> out;
  for (const auto& b : bases) {
    if (m == Moderator::gender) {
      out.push_back(b + ":female");
      out.push_back(b + ":male");
    } else {
      out.push_back(b + ":" + moderator_name(m));
    }
  }
  return out;
}

}  // namespace detail

inline DesignSpec spec_for(const Formula& f) {
  DesignSpec s;
  s.fixed_effects = f.fixed_effects;
  s.columns = control_columns(f.kind == FormulaKind::attempt_eq1 ||
                              f.kind == FormulaKind::attempt_heterogeneity);
  const std::vector<std::string> z{"z_lower", "z_higher"};
  const std::vector<std::string> lifting{"turned_around", "turning_around"};
  auto append = [&](const std::vector<std::string>& v) {
    s.columns.insert(s.columns.end(), v.begin(), v.end());
  };
  switch (f.kind) {
    case FormulaKind::attempt_eq1:
      s.response = "attempt_gap";
      append(z);
      break;
    case FormulaKind::attempt_heterogeneity:
      s.response = "attempt_gap";
      append(detail::interact(z, f.moderator));
      break;
    case FormulaKind::first_stage:
      s.response = "attempt_gap";
      append(lifting);
      append(z);
      break;
    case FormulaKind::success_lpm:
      s.response = "success";
      append(lifting);
      append({"attempt_gap"});
      s.instruments = z;
      s.endogenous = {"attempt_gap"};
      break;
    case FormulaKind::success_heterogeneity:
      s.response = "success";
      append(detail::interact(lifting, f.moderator));
      append({"attempt_gap"});
      s.instruments = z;
      s.endogenous = {"attempt_gap"};
      break;
  }
  const auto round = f.round;
  const auto sample = f.sample;
  s.filter = [round, sample](const ObservationRow& r) {
    return (!round || r.round == *round) && (sample == Sample::all || r.previous_success == 1);
  };
  return s;
}

namespace detail {

// Keeps columns left to right, dropping any that lies in the span of the
// ones already kept (incremental Cholesky on the Gram matrix).
inline std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& X, double tol = 1e-9) {
  const Eigen::MatrixXd G = X.transpose() * X;
  const Eigen::Index k = G.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double diag = G(j, j);
    if (!(diag > 0.0)) continue;
    const Eigen::Index m = static_cast<Eigen::Index>(kept.size());
    Eigen::VectorXd b(m);
    for (Eigen::Index a = 0; a < m; ++a) b[a] = G(kept[a], j);
    Eigen::VectorXd c = b;
    if (m > 0) L.topLeftCorner(m, m).triangularView<Eigen::Lower>().solveInPlace(c);
    const double resid = diag - c.squaredNorm();
    if (resid <= tol * diag) continue;
    L.row(m).head(m) = c.transpose();
    L(m, m) = std::sqrt(resid);
    kept.push_back(j);
  }
  return kept;
}

}  // namespace detail

inline Design build_design(std::span<const ObservationRow> rows, const DesignSpec& spec) {
  if (rows.empty()) throw Error(ErrorCode::empty_input, "no rows");
  std::vector<std::string> names = spec.columns;
  for (const auto& e : spec.endogenous)
    if (std::find(names.begin(), names.end(), e) == names.end())
      throw Error(ErrorCode::schema_mismatch, "endogenous column " + e + " not in design");

  std::vector<std::size_t> use;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (spec.filter && !spec.filter(r)) continue;
    bool complete = std::isfinite(feature_value(r, spec.response));
    for (const auto& c : spec.columns) complete = complete && std::isfinite(feature_value(r, c));
    for (const auto& c : spec.instruments) complete = complete && std::isfinite(feature_value(r, c));
    if (complete) use.push_back(i);
  }
  if (use.empty()) throw Error(ErrorCode::empty_input, "no complete rows after filtering");

  for (const auto& key : spec.fixed_effects) {
    std::set<std::string> levels;
    for (auto i : use) levels.insert(fixed_effect_level(rows[i], key));
    for (auto it = std::next(levels.begin()); it != levels.end(); ++it)
      names.push_back(key + "=" + *it);
  }

  const auto n = static_cast<Eigen::Index>(use.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(names.size()));
  Eigen::VectorXd y(n);
  Eigen::MatrixXd Z(n, static_cast<Eigen::Index>(spec.instruments.size()));
  Design d;
  d.response = spec.response;
  d.clusters.reserve(use.size());
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& r = rows[use[a]];
    y[a] = feature_value(r, spec.response);
    for (std::size_t c = 0; c < names.size(); ++c) X(a, c) = feature_value(r, names[c]);
    for (std::size_t c = 0; c < spec.instruments.size(); ++c)
      Z(a, c) = feature_value(r, spec.instruments[c]);
    d.clusters.push_back(r.cluster);
  }
  if ((y.array() == y[0]).all())
    throw Error(ErrorCode::rank_deficient, "response " + spec.response + " is constant");

  const auto kept = detail::independent_columns(X);
  d.X.resize(n, static_cast<Eigen::Index>(kept.size()));
  std::set<Eigen::Index> kept_set(kept.begin(), kept.end());
  for (std::size_t c = 0; c < names.size(); ++c)
    if (!kept_set.count(static_cast<Eigen::Index>(c))) d.dropped.push_back(names[c]);
  for (std::size_t a = 0; a < kept.size(); ++a) {
    d.X.col(static_cast<Eigen::Index>(a)) = X.col(kept[a]);
    d.names.push_back(names[kept[a]]);
  }
  for (const auto& e : spec.endogenous)
    if (std::find(d.names.begin(), d.names.end(), e) == d.names.end())
      throw Error(ErrorCode::rank_deficient, "endogenous column " + e + " is collinear");
  d.y = std::move(y);
  d.instruments = std::move(Z);
  d.instrument_names = spec.instruments;
  d.endogenous = spec.endogenous;
  d.rows = std::move(use);
  return d;
}

inline Design build_design(std::span<const ObservationRow> rows, const Formula& f) {
  return build_design(rows, spec_for(f));
}

// ---------------------------------------------------------------------------
// Estimation

namespace detail {

inline std::vector<int> cluster_index(const std::vector<std::string>& ids, int& groups) {
  std::unordered_map<std::string, int> map;
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto [it, inserted] = map.emplace(id, static_cast<int>(map.size()));
    out.push_back(it->second);
  }
  groups = static_cast<int>(map.size());
  return out;
}

inline Eigen::MatrixXd inverse_gram(const Eigen::MatrixXd& X) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::Index k = X.cols();
  if (qr.rank() < k) throw Error(ErrorCode::singular_normal_equations, "X'X is singular");
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  const auto& P = qr.colsPermutation();
  return P * inner * P.transpose();
}

/// Least squares of y on `regressors`, residuals against `structural`
/// (identical for OLS; the original endogenous columns for 2SLS) and a CR1
/// sandwich with `regressors` as the bread.
inline EstimateResult fit(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& structural,
                          const Eigen::VectorXd& y, const std::vector<std::string>& names,
                          const std::vector<std::string>& clusters) {
  const Eigen::Index n = regressors.rows(), k = regressors.cols();
  if (n <= k) throw Error(ErrorCode::too_few_rows, std::to_string(n) + " rows for " +
                                                       std::to_string(k) + " parameters");
  int groups = 0;
  const std::vector<int> g = cluster_index(clusters, groups);
  if (groups < 2) throw Error(ErrorCode::too_few_clusters, std::to_string(groups) + " cluster(s)");

  const Eigen::MatrixXd bread = inverse_gram(regressors);
  const Eigen::VectorXd beta = bread * (regressors.transpose() * y);
  const Eigen::VectorXd u = y - structural * beta;

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(groups, k);
  for (Eigen::Index i = 0; i < n; ++i) scores.row(g[i]) += u[i] * regressors.row(i);
  const double dn = static_cast<double>(n), dk = static_cast<double>(k), dg = groups;
  const double scale = dg / (dg - 1.0) * (dn - 1.0) / (dn - dk);
  EstimateResult r;
  r.names = names;
  r.coefficients = beta;
  r.vcov = scale * bread * (scores.transpose() * scores) * bread;
  r.clustered_se = r.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  r.n_obs = static_cast<int>(n);
  r.n_clusters = groups;
  const double ssr = u.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  r.r2 = 1.0 - ssr / sst;
  r.r2_adj = 1.0 - (1.0 - r.r2) * (dn - 1.0) / (dn - dk);
  r.rmse = std::sqrt(ssr / dn);
  return r;
}

}  // namespace detail

inline EstimateResult ols(const Design& d) {
  EstimateResult r = detail::fit(d.X, d.X, d.y, d.names, d.clusters);
  r.dropped = d.dropped;
  return r;
}

/// Two-stage least squares. Excluded instruments come from the design;
/// every other column is its own instrument. Standard errors use the
/// structural residuals with the projected-regressor bread.
inline EstimateResult two_sls(const Design& d) {
  if (d.endogenous.empty() || d.instrument_names.size() < d.endogenous.size())
    throw Error(ErrorCode::under_identified, std::to_string(d.instrument_names.size()) +
                                                 " instrument(s) for " +
                                                 std::to_string(d.endogenous.size()) +
                                                 " endogenous regressor(s)");
  std::vector<Eigen::Index> exog, endog;
  for (std::size_t c = 0; c < d.names.size(); ++c) {
    const bool is_endog =
        std::find(d.endogenous.begin(), d.endogenous.end(), d.names[c]) != d.endogenous.end();
    (is_endog ? endog : exog).push_back(static_cast<Eigen::Index>(c));
  }
  const Eigen::Index n = d.X.rows();
  const auto n_exog = static_cast<Eigen::Index>(exog.size());
  const auto n_inst = d.instruments.cols();
  Eigen::MatrixXd W(n, n_exog + n_inst);
  std::vector<std::string> w_names;
  for (Eigen::Index a = 0; a < n_exog; ++a) {
    W.col(a) = d.X.col(exog[a]);
    w_names.push_back(d.names[exog[a]]);
  }
  W.rightCols(n_inst) = d.instruments;
  w_names.insert(w_names.end(), d.instrument_names.begin(), d.instrument_names.end());
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(W).rank() < W.cols())
    throw Error(ErrorCode::under_identified, "instruments are collinear with exogenous columns");

  Eigen::MatrixXd X_hat = d.X;
  std::shared_ptr<const EstimateResult> first;
  for (auto c : endog) {
    const EstimateResult fs = detail::fit(W, W, d.X.col(c), w_names, d.clusters);
    X_hat.col(c) = W * fs.coefficients;
    if (!first) first = std::make_shared<const EstimateResult>(fs);
  }
  EstimateResult r = detail::fit(X_hat, d.X, d.y, d.names, d.clusters);
  r.dropped = d.dropped;
  r.first_stage = first;

  const Eigen::VectorXd b = first->coefficients.tail(n_inst);
  const Eigen::MatrixXd V = first->vcov.bottomRightCorner(n_inst, n_inst);
  const double wald = b.dot(V.ldlt().solve(b));
  r.first_stage_f = wald / static_cast<double>(n_inst);
  r.weak_instruments = *r.first_stage_f < 10.0;
  return r;
}

/// Two-sided Student-t critical value with the cluster count minus one
/// degrees of freedom.
inline double critical_value(const EstimateResult& r, double level = 0.95) {
  boost::math::students_t dist(std::max(1, r.n_clusters - 1));
  return boost::math::quantile(dist, 0.5 + level / 2.0);
}

inline std::pair<double, double> confidence_interval(const EstimateResult& r, std::string_view name,
                                                     double level = 0.95) {
  const double t = critical_value(r, level);
  return {r.coef(name) - t * r.se(name), r.coef(name) + t * r.se(name)};
}

// ---------------------------------------------------------------------------
// Rival-attempt prediction

enum class FeatureSet { full, without_previous_success };

struct PredictionModelSpec {
  int target_round = 2;
  FeatureSet feature_set = FeatureSet::full;
  int folds = 5;
};

inline std::vector<std::string> predictor_columns(FeatureSet set) {
  std::vector<std::string> cols{"intercept",         "male",         "bodyweight",
                                "first_participation", "num_experience", "historical_best",
                                "previous_tie",      "previous_mismatch", "previous_attempt"};
  if (set == FeatureSet::full) cols.push_back("previous_success");
  return cols;
}

/// Rejects any feature that is not known when the rival declares, and the
/// previous outcome when the spec excludes it.
inline void audit_features(const std::vector<std::string>& names, const PredictionModelSpec& spec) {
  static const std::set<std::string, std::less<>> forbidden{
      "attempt", "attempt_gap", "current_best", "success", "tie", "mismatch",
      "z_lower", "z_higher",    "turned_around", "turning_around"};
  for (const auto& name : names) {
    std::size_t start = 0;
    while (true) {
      const auto colon = name.find(':', start);
      const std::string_view part = std::string_view(name).substr(start, colon - start);
      if (forbidden.count(part) ||
          (spec.feature_set == FeatureSet::without_previous_success && part == "previous_success"))
        throw Error(ErrorCode::feature_leakage, std::string(part));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
  }
}

using PredictionKey = std::tuple<std::string, std::string, int>;  // meet, lifter, round

struct RivalModel {
  PredictionModelSpec spec;
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  std::map<PredictionKey, double> predictions;

  double predict(const ObservationRow& r) const {
    double v = 0.0;
    for (std::size_t c = 0; c < names.size(); ++c)
      v += coefficients[static_cast<Eigen::Index>(c)] * feature_value(r, names[c]);
    return v;
  }
};

inline DesignSpec predictor_design(const PredictionModelSpec& spec) {
  DesignSpec s;
  s.response = "attempt";
  s.columns = predictor_columns(spec.feature_set);
  s.fixed_effects = {kFixedEffectKeys.begin(), kFixedEffectKeys.end()};
  const int round = spec.target_round;
  s.filter = [round](const ObservationRow& r) { return r.round == round; };
  return s;
}

namespace detail {

inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return X.colPivHouseholderQr().solve(y);
}

}  // namespace detail

/// Linear predictor of a lifter's declaration in `spec.target_round`, with
/// in-sample predictions for every row of that round.
inline RivalModel predict_rival_attempt(std::span<const ObservationRow> rows,
                                        const PredictionModelSpec& spec) {
  const Design d = build_design(rows, predictor_design(spec));
  audit_features(d.names, spec);
  RivalModel m;
  m.spec = spec;
  m.names = d.names;
  m.coefficients = detail::least_squares(d.X, d.y);
  const Eigen::VectorXd fitted = d.X * m.coefficients;
  for (std::size_t a = 0; a < d.rows.size(); ++a) {
    const auto& r = rows[d.rows[a]];
    m.predictions[{r.meet_id, r.lifter_id, r.round}] = fitted[static_cast<Eigen::Index>(a)];
  }
  return m;
}

/// Rebuilds z_higher = (predicted declaration of the higher rival) -
/// current_best for the model's round. Rows whose rival has no prediction
/// get a missing value.
inline void rebuild_higher_pressure(std::vector<ObservationRow>& rows, const RivalModel& model) {
  for (auto& r : rows) {
    if (r.round != model.spec.target_round) continue;
    r.z_higher.reset();
    if (r.higher_rival.empty()) continue;
    const auto it = model.predictions.find({r.meet_id, r.higher_rival, r.round});
    if (it != model.predictions.end()) r.z_higher = it->second - r.current_best;
  }
}

struct CvResult {
  double rmse = 0.0;
  double r2 = 0.0;
  std::uint64_t seed = 0;
  int folds = 0;
  std::vector<int> assignment;  // fold of each design row
};

inline CvResult kfold_cv(std::span<const ObservationRow> rows, const PredictionModelSpec& spec,
                         std::uint64_t seed) {
  if (spec.folds < 2) throw Error(ErrorCode::too_few_rows, "need at least two folds");
  const Design d = build_design(rows, predictor_design(spec));
  audit_features(d.names, spec);
  const Eigen::Index n = d.X.rows();
  if (n < spec.folds) throw Error(ErrorCode::too_few_rows, std::to_string(n) + " rows");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
  CvResult out;
  out.seed = seed;
  out.folds = spec.folds;
  out.assignment.assign(perm.size(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) out.assignment[perm[i]] = static_cast<int>(i) % spec.folds;

  Eigen::VectorXd oof(n);
  for (int f = 0; f < spec.folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i) (out.assignment[i] == f ? test : train).push_back(i);
    const Eigen::VectorXd beta = detail::least_squares(d.X(train, Eigen::all), d.y(train));
    oof(test) = d.X(test, Eigen::all) * beta;
  }
  const double ssr = (d.y - oof).squaredNorm();
  const double sst = (d.y.array() - d.y.mean()).square().sum();
  out.rmse = std::sqrt(ssr / static_cast<double>(n));
  out.r2 = 1.0 - ssr / sst;
  return out;
}

// ---------------------------------------------------------------------------
// Generated-regressor bootstrap

enum class Estimator { ols, two_sls };

struct BootstrapOptions {
  int replications = 200;
  std::uint64_t seed = 1;
  int jobs = 1;
  Formula outcome;
  Estimator estimator = Estimator::ols;
  PredictionModelSpec predictor;
  std::function<std::uint64_t(std::uint64_t seed, int replicate)> replicate_seed;
};

struct BootstrapResult {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::vector<int> used;  // replicates contributing to each name
  int replications = 0;
  int redraws = 0;

  double sd_of(std::string_view name) const { return sd[at(name)]; }
  double mean_of(std::string_view name) const { return mean[at(name)]; }

 private:
  std::size_t at(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::schema_mismatch, std::string(name));
    return static_cast<std::size_t>(it - names.begin());
  }
};

/// Predictor refit, higher-rival pressure rebuilt, outcome regression: the
/// plug-in estimate the bootstrap is compared against.
inline EstimateResult generated_regressor_estimate(std::vector<ObservationRow> rows,
                                                   const BootstrapOptions& opt) {
  rebuild_higher_pressure(rows, predict_rival_attempt(rows, opt.predictor));
  const Design d = build_design(rows, opt.outcome);
  return opt.estimator == Estimator::ols ? ols(d) : two_sls(d);
}

inline std::vector<ObservationRow> resample_clusters(std::span<const ObservationRow> rows,
                                                     std::mt19937_64& rng, int* distinct = nullptr) {
  std::map<std::string, std::vector<std::size_t>> by_cluster;
  for (std::size_t i = 0; i < rows.size(); ++i) by_cluster[rows[i].cluster].push_back(i);
  std::vector<const std::vector<std::size_t>*> groups;
  std::vector<std::string> ids;
  for (const auto& [id, members] : by_cluster) {
    ids.push_back(id);
    groups.push_back(&members);
  }
  std::uniform_int_distribution<std::size_t> pick(0, groups.size() - 1);
  std::vector<ObservationRow> out;
  std::set<std::size_t> seen;
  for (std::size_t draw = 0; draw < groups.size(); ++draw) {
    const std::size_t g = pick(rng);
    seen.insert(g);
    const std::string tag = "#" + std::to_string(draw);
    for (auto i : *groups[g]) {
      ObservationRow r = rows[i];
      r.cluster += tag;
      r.meet_id += tag;
      out.push_back(std::move(r));
    }
  }
  if (distinct) *distinct = static_cast<int>(seen.size());
  return out;
}

/// Federation-level bootstrap of the outcome regression with the rival
/// predictor refit in every replicate. Degenerate replicates (fewer than
/// two distinct federations, or a failed fit) are redrawn.
inline BootstrapResult bootstrap_generated_regressor(std::span<const ObservationRow> rows,
                                                     const BootstrapOptions& opt) {
  if (opt.replications < 2) throw Error(ErrorCode::config_invalid, "need at least two replications");
  {
    std::set<std::string> clusters;
    for (const auto& r : rows) clusters.insert(r.cluster);
    if (clusters.size() < 2) throw Error(ErrorCode::too_few_clusters, "need two federations");
  }
  const EstimateResult base =
      generated_regressor_estimate(std::vector<ObservationRow>(rows.begin(), rows.end()), opt);
  const auto seed_for = opt.replicate_seed ? opt.replicate_seed
                                           : [](std::uint64_t s, int b) {
                                               std::seed_seq seq{s, static_cast<std::uint64_t>(b)};
                                               std::uint64_t out = 0;
                                               std::array<std::uint32_t, 2> words{};
                                               seq.generate(words.begin(), words.end());
                                               out = (std::uint64_t(words[0]) << 32) | words[1];
                                               return out;
                                             };
  const int B = opt.replications;
  const int max_attempts = 10 * B;
  std::vector<std::optional<EstimateResult>> results(static_cast<std::size_t>(B));
  std::vector<int> attempts_used(static_cast<std::size_t>(B), 0);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int b = next++; b < B; b = next++) {
      std::mt19937_64 rng(seed_for(opt.seed, b));
      for (int attempt = 0; attempt < max_attempts; ++attempt) {
        attempts_used[b] = attempt + 1;
        int distinct = 0;
        auto sample = resample_clusters(rows, rng, &distinct);
        if (distinct < 2) continue;
        try {
          results[b] = generated_regressor_estimate(std::move(sample), opt);
          break;
        } catch (const Error& e) {
          switch (e.code()) {
            case ErrorCode::rank_deficient:
            case ErrorCode::singular_normal_equations:
            case ErrorCode::too_few_clusters:
            case ErrorCode::too_few_rows:
            case ErrorCode::empty_input:
            case ErrorCode::under_identified:
              continue;
            default:
              throw;
          }
        }
      }
    }
  };
  const int jobs = std::max(1, std::min(opt.jobs, B));
  if (jobs == 1) {
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
          next = B;
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  BootstrapResult out;
  out.replications = B;
  const int total_attempts = std::accumulate(attempts_used.begin(), attempts_used.end(), 0);
  out.redraws = total_attempts - B;
  for (const auto& r : results)
    if (!r) throw Error(ErrorCode::degenerate_replicate, "replicate never produced a fit");
  if (total_attempts > max_attempts)
    throw Error(ErrorCode::degenerate_replicate,
                std::to_string(out.redraws) + " redraws exceed the attempt budget");

  out.names = base.names;
  const auto k = static_cast<Eigen::Index>(base.names.size());
  out.mean = Eigen::VectorXd::Zero(k);
  out.sd = Eigen::VectorXd::Zero(k);
  out.used.assign(base.names.size(), 0);
  for (Eigen::Index c = 0; c < k; ++c) {
    std::vector<double> values;
    for (const auto& r : results)
      if (auto i = r->index_of(base.names[c])) values.push_back(r->coefficients[*i]);
    out.used[c] = static_cast<int>(values.size());
    if (values.empty()) continue;
    const double m = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    out.mean[c] = m;
    out.sd[c] = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
  }
  return out;
}

}  // namespace benchpress
