#include "benchpress/pressure.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace benchpress;
using testing_support::expect_code;

namespace {

std::string data_path(const std::string& name) { return std::string(BENCHPRESS_DATA_DIR) + "/" + name; }

LifterProfile lifter(const std::string& id, double bw) {
  LifterProfile p;
  p.id = id;
  p.bodyweight = bw;
  return p;
}

const CategoryKey kCategory{Equipment::raw, "24-34", "83", Gender::male, "Open", "IPF"};

// Figure 1 through round 2: A good at 110, C misses 112.5, B good at 115;
// all third attempts missed.
CompetitionState figure_one() {
  CompetitionState s(kCategory, {lifter("A", 80), lifter("B", 81), lifter("C", 82)},
                     {{"A", 100}, {"B", 105}, {"C", 110}});
  s.record_outcome("A", true);
  s.declare_next("A", 110);
  s.record_outcome("B", true);
  s.declare_next("B", 115);
  s.record_outcome("C", true);
  s.declare_next("C", 112.5);
  s.record_outcome("A", true);
  s.declare_next("A", 115);
  s.record_outcome("C", false);
  s.declare_next("C", 112.5);
  s.record_outcome("B", true);
  s.declare_next("B", 117.5);
  for (const char* id : {"C", "A", "B"}) s.record_outcome(id, false);
  return s;
}

const ObservationRow& find(const std::vector<ObservationRow>& rows, const std::string& id, int round) {
  for (const auto& r : rows)
    if (r.lifter_id == id && r.round == round) return r;
  throw std::runtime_error("row not found");
}

}  // namespace

TEST(Pressures, FigureOneHandTrace) {
  const CompetitionState s = figure_one();
  const std::map<PredictionKey, double> predicted{{{"m", "B", 2}, 116.0}, {{"m", "C", 2}, 113.0}};
  const auto rows = compute_pressures(s, {"m", {}}, predicted);
  ASSERT_EQ(rows.size(), 6u);

  const auto& a = find(rows, "A", 2);
  EXPECT_EQ(a.interim_rank, 3);
  EXPECT_FALSE(a.z_lower);
  ASSERT_TRUE(a.z_higher);
  EXPECT_DOUBLE_EQ(*a.z_higher, 116.0 - 100.0);
  EXPECT_EQ(a.turned_around, 0);
  EXPECT_EQ(a.turning_around, 1);
  EXPECT_EQ(a.mismatch, 0);
  EXPECT_EQ(a.attempt_gap, 10.0);

  const auto& b = find(rows, "B", 2);
  EXPECT_EQ(b.interim_rank, 2);
  ASSERT_TRUE(b.z_lower);
  EXPECT_DOUBLE_EQ(*b.z_lower, 5.0);
  EXPECT_DOUBLE_EQ(*b.z_higher, 113.0 - 105.0);
  EXPECT_EQ(b.turned_around, 1);
  EXPECT_EQ(b.turning_around, 1);
  EXPECT_EQ(b.mismatch, 1);
  EXPECT_EQ(b.lower_rival, "A");
  EXPECT_EQ(b.higher_rival, "C");

  const auto& c = find(rows, "C", 2);
  EXPECT_EQ(c.interim_rank, 1);
  ASSERT_TRUE(c.z_lower);
  EXPECT_DOUBLE_EQ(*c.z_lower, 5.0);
  EXPECT_FALSE(c.z_higher);
  EXPECT_EQ(c.turned_around, 1);
  EXPECT_EQ(c.turning_around, 0);
  EXPECT_EQ(c.mismatch, 1);
  EXPECT_EQ(c.success, 0);

  // round 3: B 115 first, A and C tied on 110, A lighter
  EXPECT_EQ(find(rows, "B", 3).interim_rank, 1);
  EXPECT_EQ(find(rows, "A", 3).interim_rank, 2);
  EXPECT_EQ(find(rows, "C", 3).interim_rank, 3);
  EXPECT_EQ(find(rows, "C", 3).tie, 0);
  EXPECT_EQ(find(rows, "C", 3).previous_success, 0);
  EXPECT_GT(audit_information(s, rows), 0);
}

TEST(Pressures, SubtractionAndTurningAroundExamples) {
  CompetitionState s(kCategory, {lifter("X", 80), lifter("Y", 81), lifter("W", 82)},
                     {{"X", 100}, {"Y", 105}, {"W", 112.5}});
  s.record_outcome("X", true);
  s.declare_next("X", 107.5);
  s.record_outcome("Y", true);
  s.declare_next("Y", 115);
  s.record_outcome("W", true);
  s.declare_next("W", 117.5);
  for (const char* id : {"X", "Y", "W"}) {
    s.record_outcome(id, true);
    s.declare_next(id, 120);
  }
  for (const char* id : {"X", "Y", "W"}) s.record_outcome(id, false);
  const auto rows = compute_pressures(s, {"m", {}});
  const auto& y = find(rows, "Y", 2);
  EXPECT_DOUBLE_EQ(*y.z_lower, 2.5);
  EXPECT_EQ(y.turning_around, 1);
  EXPECT_EQ(find(rows, "X", 3).tie, 1);
}

TEST(Pressures, AuditCatchesTamperedRows) {
  const CompetitionState s = figure_one();
  auto rows = compute_pressures(s, {"m", {}});
  ObservationRow& a = const_cast<ObservationRow&>(find(rows, "A", 2));
  a.lower_rival = "C";
  a.z_lower = 112.5 - a.current_best;  // C's round-2 declaration, made after A declared
  expect_code(ErrorCode::information_leakage, [&] { audit_information(s, rows); });
}

TEST(Pressures, RandomMeetsNeverLeak) {
  std::mt19937_64 rng(17);
  std::bernoulli_distribution coin(0.7);
  for (int meet = 0; meet < 200; ++meet) {
    const int n = 2 + meet % 5;
    std::vector<LifterProfile> roster;
    std::map<LifterId, double> openers;
    for (int i = 0; i < n; ++i) {
      roster.push_back(lifter("L" + std::to_string(i), 70 + i));
      openers[roster.back().id] = 100 + 2.5 * std::uniform_int_distribution<int>(0, 8)(rng);
    }
    CompetitionState s(kCategory, roster, openers);
    while (!s.finished()) {
      const int k = s.current_round();
      for (const auto& id : s.current_order().lifters) {
        const bool ok = coin(rng);
        s.record_outcome(id, ok);
        if (k < kRounds) {
          const double w = s.attempt(s.index_of(id), k)->declared_weight;
          s.declare_next(id, w + 2.5 * std::uniform_int_distribution<int>(ok ? 1 : 0, 3)(rng));
        }
      }
    }
    std::map<PredictionKey, double> predicted;
    for (const auto& p : roster)
      for (int k = 2; k <= 3; ++k) predicted[{"m", p.id, k}] = 110;
    const auto rows = compute_pressures(s, {"m", {}}, predicted);
    EXPECT_NO_THROW(audit_information(s, rows));
    for (const auto& r : rows) {
      EXPECT_EQ(r.z_higher.has_value(), r.interim_rank > 1);
      EXPECT_EQ(r.lower_rival.empty(), r.interim_rank == n);
    }
  }
}

TEST(Csv, SignConventionAndQuoting) {
  std::ifstream in(data_path("format_fixture.csv"));
  const ParseResult p = parse_meet_csv(in);
  ASSERT_EQ(p.rows.size(), 4u);
  EXPECT_TRUE(p.issues.empty());
  const auto& ana = p.rows[0];
  EXPECT_EQ(ana.declared(1), 100);
  EXPECT_TRUE(ana.succeeded(1));
  EXPECT_EQ(ana.declared(2), 150);
  EXPECT_FALSE(ana.succeeded(2));
  EXPECT_EQ(ana.meet_name, "Spring Open, Day 1");
  EXPECT_FALSE(p.rows[1].bench[2]);
  EXPECT_EQ(p.rows[2].name, "Chen \"CJ\" Wu");
  EXPECT_EQ(parse_equipment(p.rows[2].equipment), Equipment::multi_ply);
  EXPECT_EQ(parse_equipment(p.rows[1].equipment), Equipment::raw);
}

TEST(Csv, MissingHeaderAndMalformedRows) {
  std::istringstream bad("Name,Sex\nx,M\n");
  expect_code(ErrorCode::missing_header, [&] { parse_meet_csv(bad); });
  std::ifstream in(data_path("meets_fixture.csv"));
  const ParseResult p = parse_meet_csv(in);
  EXPECT_EQ(p.rows.size(), 199u);
  ASSERT_EQ(p.issues.size(), 1u);
  EXPECT_EQ(p.issues[0].line, 201u);
}

TEST(Filter, ReasonsPartitionExclusions) {
  std::ifstream in(data_path("meets_fixture.csv"));
  const ParseResult p = parse_meet_csv(in);
  const FilterResult f = filter_sample(p.rows);
  int excluded = 0;
  for (const auto& [reason, n] : f.excluded) excluded += n;
  EXPECT_EQ(f.rows.size() + excluded, p.rows.size());
  EXPECT_EQ(f.excluded.at("not_bench_only"), 1);
  EXPECT_EQ(f.excluded.at("age_out_of_range"), 1);
  EXPECT_EQ(f.excluded.at("missing_age_or_bodyweight"), 1);
  EXPECT_EQ(f.excluded.at("missing_attempts"), 1);
  EXPECT_GE(f.excluded.at("non_monotone_attempts"), 1);
  EXPECT_GE(f.excluded.at("category_too_small"), 1);
  for (const auto& r : f.rows) {
    EXPECT_NE(r.name, "Old Timer");
    EXPECT_NE(r.name, "Lonely Lifter");
    EXPECT_NE(r.name, "Sbd Lifter");
  }
}

TEST(PersonalBest, Policies) {
  const std::vector<PriorResult> h{{"2019-05-01", 140}, {"2024-03-10", 130}};
  EXPECT_EQ(resolve_personal_best(h, {}, "2024-09-01", 0), 140);
  BestPolicy recent{BestPolicy::Mode::within_months, 12};
  EXPECT_EQ(resolve_personal_best(h, recent, "2024-09-01", 0), 130);
  EXPECT_EQ(resolve_personal_best({}, {}, "2024-09-01", 0.0), 0.0);
  EXPECT_EQ(resolve_personal_best({}, {}, "2024-09-01", 102.5), 102.5);
  EXPECT_EQ(resolve_personal_best(h, {}, "2019-05-01", 0), 0);
  const std::vector<PriorResult> unsorted{{"2024-03-10", 130}, {"2019-05-01", 140}};
  expect_code(ErrorCode::unsorted_history, [&] { resolve_personal_best(unsorted, {}, "2025-01-01", 0); });
}

TEST(PersonalBest, DebutantFailingOpenerCarriesZero) {
  CompetitionState s(kCategory, {lifter("A", 80), lifter("B", 81)}, {{"A", 100}, {"B", 105}});
  s.record_outcome("A", false);
  s.declare_next("A", 100);
  s.record_outcome("B", true);
  s.declare_next("B", 110);
  for (const char* id : {"A", "B"}) {
    s.record_outcome(id, true);
    s.declare_next(id, 115);
  }
  for (const char* id : {"A", "B"}) s.record_outcome(id, true);
  const auto rows = compute_pressures(s, {"m", {}});
  EXPECT_EQ(find(rows, "A", 2).current_best, 0.0);
  EXPECT_EQ(find(rows, "A", 2).attempt_gap, 100.0);
}

TEST(Summary, MomentsMatchTwoPass) {
  std::ifstream in(data_path("meets_fixture.csv"));
  ParseResult p = parse_meet_csv(in);
  p.rows.resize(50);
  const auto table = summarize_sample(p.rows, [](const RawMeetRow&) { return 120.0; });
  for (const auto& [eq, lines] : table) {
    EXPECT_EQ(lines[1].sd, 0.0);  // constant personal best
    std::vector<double> bw;
    for (const auto& r : p.rows)
      if (std::string(to_string(*parse_equipment(r.equipment))) == eq && r.bodyweight) bw.push_back(*r.bodyweight);
    double mean = 0;
    for (double x : bw) mean += x;
    mean /= bw.size();
    double ss = 0;
    for (double x : bw) ss += (x - mean) * (x - mean);
    EXPECT_EQ(lines[10].n, bw.size());
    EXPECT_NEAR(lines[10].mean, mean, 1e-10);
    if (bw.size() > 1) EXPECT_NEAR(lines[10].sd, std::sqrt(ss / (bw.size() - 1)), 1e-10);
  }
}

TEST(Ingest, GoldenObservationFile) {
  std::ifstream in(data_path("meets_fixture.csv"));
  const IngestResult result = ingest(in);
  EXPECT_GT(result.rows.size(), 200u);
  std::ostringstream first, second;
  write_observations(first, result.rows);
  std::ifstream again(data_path("meets_fixture.csv"));
  write_observations(second, ingest(again).rows);
  EXPECT_EQ(first.str(), second.str());

  if (std::getenv("BENCHPRESS_UPDATE_GOLDEN")) {
    std::ofstream(data_path("meets_fixture_observations.tsv")) << first.str();
  }
  std::ifstream golden(data_path("meets_fixture_observations.tsv"));
  ASSERT_TRUE(golden) << "golden file missing";
  std::stringstream expected;
  expected << golden.rdbuf();
  EXPECT_EQ(first.str(), expected.str());

  std::istringstream back(first.str());
  const auto parsed = read_observations(back);
  std::ostringstream third;
  write_observations(third, parsed);
  EXPECT_EQ(third.str(), first.str());
}

TEST(Observations, SchemaMismatch) {
  std::istringstream wrong("# bpress-observations v0\n");
  expect_code(ErrorCode::schema_mismatch, [&] { read_observations(wrong); });
}
