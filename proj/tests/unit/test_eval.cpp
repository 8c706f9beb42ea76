#include <doctest.h>

#include "../support/oracles.hpp"
#include "tiger/eval.hpp"
#include "tiger/util.hpp"

#include <cmath>
#include <filesystem>

using namespace tiger;

namespace {

RecallReport filled(int t1, int t2, double base) {
  RecallReport r;
  r.train_year = t1;
  r.test_year = t2;
  r.mentions = 10;
  for (std::size_t i = 0; i < r.recall.size(); ++i) r.recall[i] = std::min(1.0, base + 0.01 * static_cast<double>(i));
  return r;
}

GapMatrix sample_matrix() {
  const std::vector<int> years{2019, 2020, 2021, 2022};
  return temporal_matrix(years, [](int a, int b) { return filled(a, b, 0.5 + 0.03 * (a - 2019) + 0.011 * (b - 2019)); });
}

// Every element opened is closed in order; self-closing tags count as both.
bool tags_balanced(const std::string& xml) {
  std::vector<std::string> stack;
  for (std::size_t p = xml.find('<'); p != std::string::npos; p = xml.find('<', p + 1)) {
    const auto end = xml.find('>', p);
    if (end == std::string::npos) return false;
    const std::string tag = xml.substr(p + 1, end - p - 1);
    if (tag.empty() || tag[0] == '?') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find(' ')));
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("rank ties go to the lower row") {
  MatrixF table(3, 2);
  table << 1, 0, 0, 1, 1, 0;
  RowVector<float> m(2);
  m << 1, 0;
  CHECK(rank_candidates(m, table) == std::vector<std::int64_t>{0, 2, 1});
  CHECK(gold_rank(m, table, 0) == 1);
  CHECK(gold_rank(m, table, 2) == 2);
  m << 0, 1;
  CHECK(gold_rank(m, table, 1) == 1);
  CHECK_THROWS(rank_candidates(m, MatrixF(0, 2)));
}

TEST_CASE("ranking matches a full sort on random instances") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    MatrixF table(50, 6);
    RowVector<float> m(6);
    for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = static_cast<float>(rng.uniform(-1, 1));
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = static_cast<float>(rng.uniform(-1, 1));
    if (t % 10 == 0) table.row(7) = table.row(3);
    std::vector<double> scores(50);
    for (Eigen::Index e = 0; e < 50; ++e) scores[static_cast<std::size_t>(e)] = m.cast<double>().dot(table.row(e).cast<double>());
    CHECK(rank_candidates(m, table) == oracle::full_sort_ranking(scores));
  }
}

TEST_CASE("recall counting") {
  const std::vector<std::int64_t> ranks{1, 3, 70};
  CHECK(recall_at(ranks, 2) == doctest::Approx(1.0 / 3));
  CHECK(recall_at(ranks, 4) == doctest::Approx(2.0 / 3));
  CHECK(recall_at(ranks, 64) == doctest::Approx(2.0 / 3));
  CHECK(recall_at(ranks, 70) == 1.0);
  CHECK(recall_at({1, 1}, 1) == 1.0);
  const auto r = make_recall_report(ranks, 2019, 2020);
  CHECK(r.at(4) == doctest::Approx(2.0 / 3));
  CHECK(r.mentions == 3);
}

TEST_CASE("recall is non-decreasing on random rank lists") {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::int64_t> ranks(1 + rng.below(30));
    for (auto& x : ranks) x = 1 + static_cast<std::int64_t>(rng.below(100));
    double prev = -1;
    for (int n : kRecallCutoffs) {
      const double r = recall_at(ranks, n);
      CHECK(r >= prev);
      prev = r;
    }
  }
}

TEST_CASE("gap matrix shape") {
  const auto m = sample_matrix();
  CHECK(m.complete());
  CHECK(m.cell_count() == 16);
  CHECK(m.at(2019, 2022).test_year == 2022);
  GapMatrix partial({2019, 2020});
  partial.set(filled(2019, 2019, 0.1));
  CHECK_FALSE(partial.complete());
  CHECK_FALSE(partial.has(2020, 2019));
  CHECK_THROWS(partial.at(2020, 2019));
}

TEST_CASE("gap aggregation modes") {
  const auto m = sample_matrix();
  const auto fwd = aggregate_gap(m, AggregateMode::forward_only);
  const auto both = aggregate_gap(m, AggregateMode::forward_and_backward);
  REQUIRE(fwd.size() == 4);
  REQUIRE(both.size() == 4);
  for (std::size_t i = 0; i < kRecallCutoffs.size(); ++i) {
    CHECK(fwd[3].recall[i] == m.at(2019, 2022).recall[i]);
    CHECK(std::abs(both[3].recall[i] - 0.5 * (m.at(2019, 2022).recall[i] + m.at(2022, 2019).recall[i])) < 1e-12);
    CHECK(fwd[0].recall[i] == both[0].recall[i]);
    // Gap 1 in both directions: mean of the forward mean and the backward mean.
    const double f = (m.at(2019, 2020).recall[i] + m.at(2020, 2021).recall[i] + m.at(2021, 2022).recall[i]) / 3;
    const double b = (m.at(2020, 2019).recall[i] + m.at(2021, 2020).recall[i] + m.at(2022, 2021).recall[i]) / 3;
    CHECK(std::abs(both[1].recall[i] - 0.5 * (f + b)) < 1e-12);
  }
  CHECK(fwd[3].cells == 1);
  CHECK(both[3].cells == 2);
  CHECK(parse_aggregate_mode("forward_only") == AggregateMode::forward_only);
  CHECK_THROWS(parse_aggregate_mode("sideways"));
}

TEST_CASE("boost arithmetic") {
  CHECK(boost(0.290, 0.229).value() == doctest::Approx(26.6376).epsilon(1e-4));
  CHECK(boost(0.871, 0.820).value() == doctest::Approx(6.2195).epsilon(1e-4));
  CHECK(boost(0.4, 0.4).value() == 0.0);
  CHECK_FALSE(boost(0.4, 0.0).has_value());
  CHECK(average_boost({26.76, 26.31, 21.13, 15.11, 12.36, 10.24, 6.25}) == doctest::Approx(16.88).epsilon(1e-4));
  CHECK(average_boost({3.5}) == 3.5);
  CHECK_THROWS(average_boost({}));
}

TEST_CASE("degree buckets and slope") {
  const std::vector<std::int64_t> deg{0, 1, 1, 2, 4, 4, 12, 15};
  const auto flat = degree_bucket_report(std::vector<double>(deg.size(), 0.2), deg);
  CHECK(flat.slope.value() == doctest::Approx(0.0));
  std::vector<double> lin;
  for (auto d : deg) lin.push_back(0.1 + 0.05 * static_cast<double>(std::min<std::int64_t>(d, 10)) + (d >= 10 ? 5.0 : 0.0));
  const auto r = degree_bucket_report(lin, deg);
  // Bucket 3 is empty and absent; the capped bucket is reported but not fitted.
  REQUIRE(r.buckets.size() == 5);
  CHECK(r.buckets.back().label == "10+");
  CHECK(r.buckets.back().count == 2);
  const double want = oracle::ls_slope({0, 1, 2, 4}, {0.1, 0.15, 0.2, 0.3});
  CHECK(r.slope.value() == doctest::Approx(want).epsilon(1e-12));
  CHECK(r.slope.value() == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("results csv parsing") {
  const auto rows = parse_results_csv("model,metric,gap,category,value\nSpEL,@1,0,continual,0.229\nTIGER,@1,0,continual,0.290\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].model == "TIGER");
  CHECK(rows[1].value == 0.290);
  const auto four = parse_results_csv("@2,1,new,0.5\n", "base");
  REQUIRE(four.size() == 1);
  CHECK(four[0].model == "base");
  CHECK(four[0].gap == 1);
  try {
    parse_results_csv("metric,gap,category,value\n@1,0,continual,0.2\n@1,x,continual,0.3\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  CHECK(filter_model(rows, "SpEL").size() == 1);
  CHECK(metric_name(16) == "@16");
}

TEST_CASE("boost report pairs cells and averages") {
  std::vector<ResultEntry> ours, base, ref;
  for (int c : kRecallCutoffs) {
    ours.push_back({"TIGER", metric_name(c), 0, "continual", 0.5});
    base.push_back({"SpEL", metric_name(c), 0, "continual", 0.4});
    ref.push_back({"Boost", metric_name(c), 0, "continual", 25.0});
  }
  ref.push_back({"AveBoost", "ave", 0, "continual", 25.0});
  const auto rep = build_boost_report(ours, base, ref);
  REQUIRE(rep.cells.size() == 7);
  CHECK(rep.cells[0].boost_pct.value() == doctest::Approx(25.0));
  CHECK(rep.cells[0].delta_pp == doctest::Approx(10.0));
  REQUIRE(rep.averages.size() == 1);
  CHECK(rep.averages[0].recomputed_pct.value() == doctest::Approx(25.0));
  CHECK(rep.averages[0].printed_pct.value() == 25.0);
}

TEST_CASE("report files are stable and the plot is well formed") {
  const auto m = sample_matrix();
  const std::vector<CategoryResults> mats{{"continual", m}, {"new", m}};
  const std::vector<GapCurve> curves{{"continual", aggregate_gap(m, AggregateMode::forward_only)},
                                     {"new", aggregate_gap(m, AggregateMode::forward_and_backward)}};
  CHECK(format_gap_matrix_csv(mats) == format_gap_matrix_csv(mats));
  CHECK(format_aggregate_csv(curves, AggregateMode::forward_only).rfind("mode,category,gap", 0) == 0);
  const auto svg = render_recall_plot(curves, 0);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(tags_balanced(svg));
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  CHECK(lines == 2);

  const auto dir = std::filesystem::temp_directory_path() / "tiger_unit_report";
  std::filesystem::remove_all(dir);
  emit_report(mats, curves, AggregateMode::forward_only, nullptr, dir);
  const auto first = read_file(dir / "gap_matrix.csv");
  emit_report(mats, curves, AggregateMode::forward_only, nullptr, dir);
  CHECK(read_file(dir / "gap_matrix.csv") == first);
  CHECK(std::filesystem::exists(dir / "recall_vs_gap_at1.svg"));
  CHECK(std::filesystem::exists(dir / "recall_vs_gap_at64.svg"));
  CHECK_FALSE(std::filesystem::exists(dir / "boost.csv"));
}
