#pragma once

#include "tiger/model.hpp"
#include "tiger/snapshot.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tiger {

inline constexpr std::array<int, 7> kRecallCutoffs{1, 2, 4, 8, 16, 32, 64};
using RecallVector = std::array<double, kRecallCutoffs.size()>;

struct RecallReport {
  RecallVector recall{};
  std::size_t mentions = 0;
  int train_year = 0;
  int test_year = 0;

  double at(int n) const;
};

/// y_e for every entity, one row each. Inference never touches the GCN or fusion head.
MatrixF encode_entities(Model<float>& model, const Tokenizer& tok, const std::vector<EntityRecord>& entities,
                        int workers = 1);
MatrixF encode_mentions(Model<float>& model, const Tokenizer& tok, const std::vector<MentionRecord>& mentions,
                        int workers = 1);

/// Entity rows by descending score; equal scores keep the lower row first.
std::vector<std::int64_t> rank_candidates(const RowVector<float>& mention, const MatrixF& table);

/// 1-based position of `gold` in rank_candidates(mention, table).
std::int64_t gold_rank(const RowVector<float>& mention, const MatrixF& table, std::int64_t gold);

/// Fraction of ranks <= n.
double recall_at(const std::vector<std::int64_t>& ranks, std::int64_t n);

RecallReport make_recall_report(const std::vector<std::int64_t>& ranks, int train_year, int test_year);

struct EvalResult {
  RecallReport report;
  std::vector<std::int64_t> ranks;  // per mention, in input order
};

EvalResult evaluate(Model<float>& model, const Tokenizer& tok, const Snapshot& test,
                    const std::vector<MentionRecord>& mentions, int train_year, int workers = 1);

/// Train-year x test-year results.
class GapMatrix {
 public:
  GapMatrix() = default;
  explicit GapMatrix(std::vector<int> years);

  const std::vector<int>& years() const { return years_; }
  void set(const RecallReport& r);
  const RecallReport& at(int train_year, int test_year) const;
  bool has(int train_year, int test_year) const;
  bool complete() const;
  std::size_t cell_count() const { return cells_.size(); }

 private:
  std::size_t slot(int train_year, int test_year) const;

  std::vector<int> years_;
  std::vector<std::optional<RecallReport>> cells_;
};

GapMatrix temporal_matrix(const std::vector<int>& years,
                          const std::function<RecallReport(int train_year, int test_year)>& evaluate_cell);

enum class AggregateMode { forward_only, forward_and_backward };
std::string_view to_string(AggregateMode m);
AggregateMode parse_aggregate_mode(std::string_view s);

struct GapAggregate {
  int gap = 0;
  RecallVector recall{};
  std::size_t cells = 0;
};

/// Per-gap mean recall. forward_only uses test year >= train year;
/// forward_and_backward is the unweighted mean of the forward and backward means.
std::vector<GapAggregate> aggregate_gap(const GapMatrix& m, AggregateMode mode);

/// Percent improvement; nullopt when the baseline is not positive.
std::optional<double> boost(double ours, double baseline);
double average_boost(const std::vector<double>& boosts);

/// One row of a results table: model, metric ("@1".."@64" or "ave"), gap, category, value.
struct ResultEntry {
  std::string model;
  std::string metric;
  int gap = 0;
  std::string category;
  double value = 0;
};

/// Accepts "model,metric,gap,category,value" or "metric,gap,category,value"
/// (model then reads `default_model`). The header row is optional.
std::vector<ResultEntry> parse_results_csv(std::string_view text, const std::string& default_model = "baseline");
std::vector<ResultEntry> load_results_csv(const std::filesystem::path& path,
                                          const std::string& default_model = "baseline");
std::vector<ResultEntry> filter_model(const std::vector<ResultEntry>& rows, const std::string& model);

std::string metric_name(int cutoff);

/// Aggregates as result rows for one model and category.
std::vector<ResultEntry> aggregates_to_results(const std::vector<GapAggregate>& aggs, const std::string& model,
                                               const std::string& category);

struct BoostCell {
  std::string category;
  int gap = 0;
  std::string metric;
  double ours = 0;
  double baseline = 0;
  std::optional<double> boost_pct;   // relative, percent
  double delta_pp = 0;               // (ours - baseline) in percentage points
  std::optional<double> reference_pct;  // printed Boost cell, when supplied
};

struct BoostAverage {
  std::string category;
  int gap = 0;
  std::optional<double> recomputed_pct;  // mean of boost_pct over metrics
  double mean_delta_pp = 0;
  std::optional<double> reference_pct;   // mean of the printed Boost cells
  std::optional<double> printed_pct;     // printed Ave. Boost cell, when supplied
};

struct BoostReport {
  std::vector<BoostCell> cells;
  std::vector<BoostAverage> averages;
};

/// Pairs `ours` and `baseline` by (category, gap, metric). `reference` may
/// carry printed "Boost" and "AveBoost" rows.
BoostReport build_boost_report(const std::vector<ResultEntry>& ours, const std::vector<ResultEntry>& baseline,
                               const std::vector<ResultEntry>& reference = {});

struct DegreeBucket {
  std::string label;
  std::int64_t degree = 0;  // lower bound of the bucket
  std::size_t count = 0;
  double mean_delta = 0;
};

struct DegreeReport {
  std::vector<DegreeBucket> buckets;  // non-empty buckets only
  std::optional<double> slope;        // least squares over bucket means below the cap
};

/// Buckets per-mention deltas by gold degree; degrees >= cap share one "cap+" bucket
/// that is excluded from the fit.
DegreeReport degree_bucket_report(const std::vector<double>& deltas, const std::vector<std::int64_t>& degrees,
                                  std::int64_t cap = 10);

struct CategoryResults {
  std::string category;
  GapMatrix matrix;
};

struct GapCurve {
  std::string category;
  std::vector<GapAggregate> points;
};

std::string format_gap_matrix_csv(const std::vector<CategoryResults>& results);
std::string format_aggregate_csv(const std::vector<GapCurve>& curves, AggregateMode mode);
std::string format_boost_csv(const BoostReport& report);
std::string format_degree_csv(const DegreeReport& report);
std::string render_recall_plot(const std::vector<GapCurve>& curves, std::size_t cutoff_index);

/// Writes gap_matrix.csv (when matrices are given), gap_aggregate.csv,
/// boost.csv (when boosts are given) and one recall_vs_gap_at<N>.svg per cutoff.
void emit_report(const std::vector<CategoryResults>& matrices, const std::vector<GapCurve>& curves,
                 AggregateMode mode, const BoostReport* boosts, const std::filesystem::path& out_dir);

/// Per-gap curves from a results table (e.g. the TIGER rows of a transcribed table).
std::vector<GapCurve> curves_from_results(const std::vector<ResultEntry>& rows);

}  // namespace tiger
