#pragma once

// Paper-style tables ("coefficient over (SE)") and parallel machine records.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "benchpress/competition.hpp"
#include "benchpress/econometrics.hpp"

namespace benchpress {

struct ReportColumn {
  std::string label;
  EstimateResult result;
};

/// Two-sided p-value of coef/se against t with clusters - 1 degrees of freedom.
inline double p_value(const EstimateResult& r, std::size_t i) {
  const double se = r.clustered_se[static_cast<Eigen::Index>(i)];
  if (!(se > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double t = r.coefficients[static_cast<Eigen::Index>(i)] / se;
  boost::math::students_t dist(std::max(1, r.n_clusters - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

inline std::string stars(double p) {
  if (!(p < 0.1)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  return "*";
}

inline std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace detail {

inline bool is_fixed_effect(const std::string& name) {
  return name.find('=') != std::string::npos && name.find(':') == std::string::npos;
}

}  // namespace detail

/// Terms of all columns in first-seen order, fixed-effect dummies and the
/// intercept left out.
inline std::vector<std::string> reported_terms(const std::vector<ReportColumn>& cols) {
  std::vector<std::string> terms;
  for (const auto& c : cols)
    for (const auto& n : c.result.names)
      if (n != "intercept" && !detail::is_fixed_effect(n) &&
          std::find(terms.begin(), terms.end(), n) == terms.end())
        terms.push_back(n);
  return terms;
}

/// Tab-separated table: one row with the estimate and stars, one with the
/// clustered SE in parentheses, then fit statistics.
inline void write_coefficient_table(std::ostream& out, std::string_view title,
                                    const std::vector<ReportColumn>& cols) {
  out << "# " << title << '\n' << "term";
  for (const auto& c : cols) out << '\t' << c.label;
  out << '\n';
  for (const auto& term : reported_terms(cols)) {
    out << term;
    for (const auto& c : cols) {
      out << '\t';
      if (auto i = c.result.index_of(term))
        out << fixed(c.result.coefficients[static_cast<Eigen::Index>(*i)]) << stars(p_value(c.result, *i));
    }
    out << '\n';
    for (const auto& c : cols) {
      out << '\t';
      if (auto i = c.result.index_of(term))
        out << '(' << fixed(c.result.clustered_se[static_cast<Eigen::Index>(*i)]) << ')';
    }
    out << '\n';
  }
  auto stat = [&](std::string_view name, auto get) {
    out << name;
    for (const auto& c : cols) out << '\t' << get(c.result);
    out << '\n';
  };
  stat("Num.Obs.", [](const EstimateResult& r) { return std::to_string(r.n_obs); });
  stat("Clusters", [](const EstimateResult& r) { return std::to_string(r.n_clusters); });
  stat("R2", [](const EstimateResult& r) { return fixed(r.r2); });
  stat("R2 Adj.", [](const EstimateResult& r) { return fixed(r.r2_adj); });
  stat("RMSE", [](const EstimateResult& r) { return fixed(r.rmse); });
  bool any_iv = false;
  for (const auto& c : cols) any_iv |= c.result.first_stage_f.has_value();
  if (any_iv)
    stat("First-stage F", [](const EstimateResult& r) {
      return r.first_stage_f ? fixed(*r.first_stage_f, 1) + (r.weak_instruments ? " (weak)" : "")
                             : std::string();
    });
}

inline void write_record_header(std::ostream& out) {
  out << "model\tterm\testimate\tstd_error\tt\tp\tstars\tci_low\tci_high\tn_obs\tclusters\n";
}

/// One line per coefficient, fixed effects included.
inline void write_records(std::ostream& out, std::string_view model, const EstimateResult& r) {
  const double crit = critical_value(r);
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double b = r.coefficients[k], se = r.clustered_se[k];
    const double p = p_value(r, i);
    out << model << '\t' << r.names[i] << '\t' << format_number(b) << '\t' << format_number(se)
        << '\t' << (se > 0.0 ? format_number(b / se) : "NA") << '\t'
        << (std::isfinite(p) ? format_number(p) : "NA") << '\t' << stars(p) << '\t'
        << format_number(b - crit * se) << '\t' << format_number(b + crit * se) << '\t' << r.n_obs
        << '\t' << r.n_clusters << '\n';
  }
}

struct CvRow {
  std::string label;
  CvResult full;
  CvResult without;
};

inline void write_cv_table(std::ostream& out, const std::vector<CvRow>& rows) {
  out << "# Out-of-sample fit of rival-attempt predictors (k-fold CV)\n"
      << "target\tfeature_set\tfolds\tseed\trmse\tr2\n";
  for (const auto& r : rows) {
    for (const auto* cv : {&r.full, &r.without})
      out << r.label << '\t' << (cv == &r.full ? "full" : "without_previous_success") << '\t'
          << cv->folds << '\t' << cv->seed << '\t' << fixed(cv->rmse) << '\t' << fixed(cv->r2)
          << '\n';
  }
}

/// Plug-in estimate next to the federation bootstrap of the same terms.
inline void write_bootstrap_table(std::ostream& out, std::string_view label,
                                  const EstimateResult& plug_in, const BootstrapResult& boot) {
  out << "# " << label << ": plug-in vs federation bootstrap (" << boot.replications
      << " replications, " << boot.redraws << " redraws)\n"
      << "term\testimate\tplug_in_se\tbootstrap_mean\tbootstrap_se\n";
  for (std::size_t i = 0; i < plug_in.names.size(); ++i) {
    const auto& n = plug_in.names[i];
    if (n == "intercept" || detail::is_fixed_effect(n)) continue;
    const auto k = static_cast<Eigen::Index>(i);
    out << n << '\t' << fixed(plug_in.coefficients[k]) << '\t' << fixed(plug_in.clustered_se[k]);
    const auto it = std::find(boot.names.begin(), boot.names.end(), n);
    if (it != boot.names.end())
      out << '\t' << fixed(boot.mean_of(n)) << '\t' << fixed(boot.sd_of(n));
    else
      out << "\t\t";
    out << '\n';
  }
}

inline void write_rank_change_table(std::ostream& out, const RankChangeTable& t) {
  out << "# Rank changes caused by each attempt (positive = moved up)\n"
      << "round\t<=-2\t-1\t0\t+1\t>=+2\n";
  for (std::size_t r = 0; r < 2; ++r) {
    out << r + 2;
    for (std::size_t b = 0; b < 5; ++b) out << '\t' << fixed(t.frequency[r][b]);
    out << '\n';
  }
}

}  // namespace benchpress
