#include "tiger/eval.hpp"

#include "tiger/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace tiger {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fixed(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : std::string(); }

std::size_t metric_order(const std::string& metric) {
  for (std::size_t i = 0; i < kRecallCutoffs.size(); ++i) {
    if (metric == metric_name(kRecallCutoffs[i])) return i;
  }
  return kRecallCutoffs.size();
}

std::vector<double> row_scores(const RowVector<float>& mention, const MatrixF& table) {
  if (table.rows() == 0) throw NumericError("rank_candidates: empty entity table");
  if (table.cols() != mention.cols()) {
    throw NumericError("rank_candidates: mention dim " + std::to_string(mention.cols()) + " vs table dim " +
                       std::to_string(table.cols()));
  }
  const Eigen::RowVectorXd m = mention.cast<double>();
  std::vector<double> s(static_cast<std::size_t>(table.rows()));
  for (Eigen::Index j = 0; j < table.rows(); ++j) s[static_cast<std::size_t>(j)] = table.row(j).cast<double>().dot(m);
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

double RecallReport::at(int n) const {
  for (std::size_t i = 0; i < kRecallCutoffs.size(); ++i) {
    if (kRecallCutoffs[i] == n) return recall[i];
  }
  throw std::invalid_argument("recall cutoff " + std::to_string(n) + " is not reported");
}

MatrixF encode_entities(Model<float>& model, const Tokenizer& tok, const std::vector<EntityRecord>& entities,
                        int workers) {
  MatrixF out(static_cast<Eigen::Index>(entities.size()), model.config().dim);
  auto& enc = model.entity_encoder();
  parallel_for(entities.size(), workers, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = enc.encode_value(tok.render_entity(entities[i]));
  });
  return out;
}

MatrixF encode_mentions(Model<float>& model, const Tokenizer& tok, const std::vector<MentionRecord>& mentions,
                        int workers) {
  MatrixF out(static_cast<Eigen::Index>(mentions.size()), model.config().dim);
  auto& enc = model.mention_encoder();
  parallel_for(mentions.size(), workers, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = enc.encode_value(tok.render_mention(mentions[i]));
  });
  return out;
}

std::vector<std::int64_t> rank_candidates(const RowVector<float>& mention, const MatrixF& table) {
  const auto s = row_scores(mention, table);
  std::vector<std::int64_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return s[static_cast<std::size_t>(a)] > s[static_cast<std::size_t>(b)];
  });
  return order;
}

std::int64_t gold_rank(const RowVector<float>& mention, const MatrixF& table, std::int64_t gold) {
  const auto s = row_scores(mention, table);
  if (gold < 0 || gold >= static_cast<std::int64_t>(s.size())) throw std::out_of_range("gold_rank: gold row out of range");
  const double g = s[static_cast<std::size_t>(gold)];
  std::int64_t ahead = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] > g || (s[j] == g && static_cast<std::int64_t>(j) < gold)) ++ahead;
  }
  return ahead + 1;
}

double recall_at(const std::vector<std::int64_t>& ranks, std::int64_t n) {
  if (ranks.empty()) return 0.0;
  std::size_t hit = 0;
  for (auto r : ranks) hit += (r >= 1 && r <= n) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(ranks.size());
}

RecallReport make_recall_report(const std::vector<std::int64_t>& ranks, int train_year, int test_year) {
  RecallReport r;
  for (std::size_t i = 0; i < kRecallCutoffs.size(); ++i) r.recall[i] = recall_at(ranks, kRecallCutoffs[i]);
  r.mentions = ranks.size();
  r.train_year = train_year;
  r.test_year = test_year;
  return r;
}

EvalResult evaluate(Model<float>& model, const Tokenizer& tok, const Snapshot& test,
                    const std::vector<MentionRecord>& mentions, int train_year, int workers) {
  const auto table = encode_entities(model, tok, test.entities, workers);
  const auto queries = encode_mentions(model, tok, mentions, workers);
  EvalResult out;
  out.ranks.resize(mentions.size());
  parallel_for(mentions.size(), workers, [&](std::size_t i) {
    auto row = test.index.row(mentions[i].gold_qid);
    if (!row) throw DataError("evaluate: gold qid " + mentions[i].gold_qid + " not in the test snapshot");
    out.ranks[i] = gold_rank(queries.row(static_cast<Eigen::Index>(i)), table, *row);
  });
  out.report = make_recall_report(out.ranks, train_year, test.year);
  return out;
}

GapMatrix::GapMatrix(std::vector<int> years) : years_(std::move(years)), cells_(years_.size() * years_.size()) {
  std::set<int> seen(years_.begin(), years_.end());
  if (seen.size() != years_.size()) throw std::invalid_argument("gap matrix: duplicate year");
  if (!std::is_sorted(years_.begin(), years_.end())) throw std::invalid_argument("gap matrix: years must be ascending");
}

std::size_t GapMatrix::slot(int train_year, int test_year) const {
  auto find = [&](int y) {
    auto it = std::find(years_.begin(), years_.end(), y);
    if (it == years_.end()) throw std::out_of_range("gap matrix: year " + std::to_string(y) + " not in matrix");
    return static_cast<std::size_t>(it - years_.begin());
  };
  return find(train_year) * years_.size() + find(test_year);
}

void GapMatrix::set(const RecallReport& r) { cells_[slot(r.train_year, r.test_year)] = r; }

bool GapMatrix::has(int train_year, int test_year) const { return cells_[slot(train_year, test_year)].has_value(); }

const RecallReport& GapMatrix::at(int train_year, int test_year) const {
  const auto& c = cells_[slot(train_year, test_year)];
  if (!c) {
    throw std::out_of_range("gap matrix: cell " + std::to_string(train_year) + "->" + std::to_string(test_year) +
                            " not computed");
  }
  return *c;
}

bool GapMatrix::complete() const {
  return std::all_of(cells_.begin(), cells_.end(), [](const auto& c) { return c.has_value(); });
}

GapMatrix temporal_matrix(const std::vector<int>& years,
                          const std::function<RecallReport(int train_year, int test_year)>& evaluate_cell) {
  GapMatrix m(years);
  for (int t1 : years) {
    for (int t2 : years) {
      auto r = evaluate_cell(t1, t2);
      r.train_year = t1;
      r.test_year = t2;
      m.set(r);
    }
  }
  return m;
}

std::string_view to_string(AggregateMode m) {
  return m == AggregateMode::forward_only ? "forward_only" : "forward_and_backward";
}

AggregateMode parse_aggregate_mode(std::string_view s) {
  if (s == "forward_only") return AggregateMode::forward_only;
  if (s == "forward_and_backward") return AggregateMode::forward_and_backward;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected forward_only or forward_and_backward)");
}

std::vector<GapAggregate> aggregate_gap(const GapMatrix& m, AggregateMode mode) {
  const auto& years = m.years();
  std::set<int> gaps;
  for (int a : years) {
    for (int b : years) {
      if (b >= a) gaps.insert(b - a);
    }
  }
  auto directed_mean = [&](int gap, int sign, std::size_t& cells) {
    RecallVector acc{};
    cells = 0;
    for (int t1 : years) {
      const int t2 = t1 + sign * gap;
      if (std::find(years.begin(), years.end(), t2) == years.end()) continue;
      const auto& r = m.at(t1, t2);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += r.recall[i];
      ++cells;
    }
    if (cells > 0) {
      for (auto& v : acc) v /= static_cast<double>(cells);
    }
    return acc;
  };
  std::vector<GapAggregate> out;
  for (int g : gaps) {
    GapAggregate agg;
    agg.gap = g;
    std::size_t fwd_cells = 0, bwd_cells = 0;
    const auto fwd = directed_mean(g, +1, fwd_cells);
    if (mode == AggregateMode::forward_only || g == 0) {
      agg.recall = fwd;
      agg.cells = fwd_cells;
    } else {
      const auto bwd = directed_mean(g, -1, bwd_cells);
      agg.cells = fwd_cells + bwd_cells;
      for (std::size_t i = 0; i < agg.recall.size(); ++i) {
        if (fwd_cells > 0 && bwd_cells > 0) {
          agg.recall[i] = 0.5 * (fwd[i] + bwd[i]);
        } else {
          agg.recall[i] = fwd_cells > 0 ? fwd[i] : bwd[i];
        }
      }
    }
    if (agg.cells > 0) out.push_back(agg);
  }
  return out;
}

std::optional<double> boost(double ours, double baseline) {
  if (!(baseline > 0) || !std::isfinite(baseline) || !std::isfinite(ours)) return std::nullopt;
  return 100.0 * (ours - baseline) / baseline;
}

double average_boost(const std::vector<double>& boosts) {
  if (boosts.empty()) throw std::invalid_argument("average_boost: no values");
  double s = 0;
  for (double b : boosts) s += b;
  return s / static_cast<double>(boosts.size());
}

std::string metric_name(int cutoff) { return "@" + std::to_string(cutoff); }

std::vector<ResultEntry> parse_results_csv(std::string_view text, const std::string& default_model) {
  std::vector<ResultEntry> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    auto fields = split(line, ',');
    for (auto& f : fields) f = trim(f);
    if (line_no == 1 && (fields.front() == "model" || fields.front() == "metric")) continue;
    auto fail = [&](const std::string& what) {
      throw DataError("results csv: row " + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != 4 && fields.size() != 5) {
      fail("expected 4 or 5 fields, got " + std::to_string(fields.size()));
    }
    const std::size_t o = fields.size() == 5 ? 1 : 0;
    ResultEntry e;
    e.model = o ? fields[0] : default_model;
    e.metric = fields[o];
    e.category = fields[o + 2];
    if (e.model.empty() || e.metric.empty() || e.category.empty()) fail("empty field");
    try {
      std::size_t used = 0;
      e.gap = std::stoi(fields[o + 1], &used);
      if (used != fields[o + 1].size()) fail("gap '" + fields[o + 1] + "' is not an integer");
      e.value = std::stod(fields[o + 3], &used);
      if (used != fields[o + 3].size()) fail("value '" + fields[o + 3] + "' is not a number");
    } catch (const std::logic_error&) {
      fail("unparsable gap or value");
    }
    if (e.gap < 0) fail("negative gap");
    if (!std::isfinite(e.value)) fail("non-finite value");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ResultEntry> load_results_csv(const std::filesystem::path& path, const std::string& default_model) {
  return parse_results_csv(read_file(path), default_model);
}

std::vector<ResultEntry> filter_model(const std::vector<ResultEntry>& rows, const std::string& model) {
  std::vector<ResultEntry> out;
  for (const auto& r : rows) {
    if (r.model == model) out.push_back(r);
  }
  return out;
}

std::vector<ResultEntry> aggregates_to_results(const std::vector<GapAggregate>& aggs, const std::string& model,
                                               const std::string& category) {
  std::vector<ResultEntry> out;
  for (const auto& a : aggs) {
    for (std::size_t i = 0; i < kRecallCutoffs.size(); ++i) {
      out.push_back({model, metric_name(kRecallCutoffs[i]), a.gap, category, a.recall[i]});
    }
  }
  return out;
}

BoostReport build_boost_report(const std::vector<ResultEntry>& ours, const std::vector<ResultEntry>& baseline,
                               const std::vector<ResultEntry>& reference) {
  using Key = std::tuple<std::string, int, std::size_t>;  // category, gap, metric order
  auto key = [](const ResultEntry& e) { return Key{e.category, e.gap, metric_order(e.metric)}; };
  std::map<Key, double> base, printed_boost;
  std::map<std::pair<std::string, int>, double> printed_ave;
  for (const auto& e : baseline) base[key(e)] = e.value;
  for (const auto& e : reference) {
    if (e.model == "Boost") printed_boost[key(e)] = e.value;
    if (e.model == "AveBoost") printed_ave[{e.category, e.gap}] = e.value;
  }
  std::map<Key, const ResultEntry*> sorted;
  for (const auto& e : ours) {
    if (metric_order(e.metric) < kRecallCutoffs.size()) sorted[key(e)] = &e;
  }
  BoostReport r;
  for (const auto& [k, e] : sorted) {
    auto b = base.find(k);
    if (b == base.end()) continue;
    BoostCell c;
    c.category = e->category;
    c.gap = e->gap;
    c.metric = e->metric;
    c.ours = e->value;
    c.baseline = b->second;
    c.boost_pct = boost(c.ours, c.baseline);
    c.delta_pp = 100.0 * (c.ours - c.baseline);
    if (auto p = printed_boost.find(k); p != printed_boost.end()) c.reference_pct = p->second;
    r.cells.push_back(std::move(c));
  }
  std::size_t i = 0;
  while (i < r.cells.size()) {
    std::size_t j = i;
    BoostAverage a;
    a.category = r.cells[i].category;
    a.gap = r.cells[i].gap;
    std::vector<double> recomputed, refs;
    double delta = 0;
    bool all_refs = true;
    for (; j < r.cells.size() && r.cells[j].category == a.category && r.cells[j].gap == a.gap; ++j) {
      if (r.cells[j].boost_pct) recomputed.push_back(*r.cells[j].boost_pct);
      if (r.cells[j].reference_pct) {
        refs.push_back(*r.cells[j].reference_pct);
      } else {
        all_refs = false;
      }
      delta += r.cells[j].delta_pp;
    }
    a.mean_delta_pp = delta / static_cast<double>(j - i);
    if (!recomputed.empty()) a.recomputed_pct = average_boost(recomputed);
    if (all_refs && !refs.empty()) a.reference_pct = average_boost(refs);
    if (auto p = printed_ave.find({a.category, a.gap}); p != printed_ave.end()) a.printed_pct = p->second;
    r.averages.push_back(std::move(a));
    i = j;
  }
  return r;
}

DegreeReport degree_bucket_report(const std::vector<double>& deltas, const std::vector<std::int64_t>& degrees,
                                  std::int64_t cap) {
  if (deltas.size() != degrees.size()) throw std::invalid_argument("degree_bucket_report: size mismatch");
  if (cap < 1) throw std::invalid_argument("degree_bucket_report: cap must be positive");
  std::vector<double> sums(static_cast<std::size_t>(cap) + 1, 0.0);
  std::vector<std::size_t> counts(sums.size(), 0);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (degrees[i] < 0) throw std::invalid_argument("degree_bucket_report: negative degree");
    const auto b = static_cast<std::size_t>(std::min(degrees[i], cap));
    sums[b] += deltas[i];
    ++counts[b];
  }
  DegreeReport r;
  std::vector<double> xs, ys;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    if (counts[b] == 0) continue;
    DegreeBucket k;
    k.degree = static_cast<std::int64_t>(b);
    k.label = k.degree == cap ? std::to_string(cap) + "+" : std::to_string(b);
    k.count = counts[b];
    k.mean_delta = sums[b] / static_cast<double>(counts[b]);
    if (k.degree < cap) {
      xs.push_back(static_cast<double>(b));
      ys.push_back(k.mean_delta);
    }
    r.buckets.push_back(std::move(k));
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    r.slope = sxy / sxx;
  }
  return r;
}

std::string format_gap_matrix_csv(const std::vector<CategoryResults>& results) {
  std::string out = "category,train_year,test_year,gap,mentions";
  for (int n : kRecallCutoffs) out += ",recall" + metric_name(n);
  out += "\n";
  for (const auto& cr : results) {
    for (int t1 : cr.matrix.years()) {
      for (int t2 : cr.matrix.years()) {
        const auto& r = cr.matrix.at(t1, t2);
        out += cr.category + "," + std::to_string(t1) + "," + std::to_string(t2) + "," + std::to_string(t2 - t1) +
               "," + std::to_string(r.mentions);
        for (double v : r.recall) out += "," + fixed(v, 6);
        out += "\n";
      }
    }
  }
  return out;
}

std::string format_aggregate_csv(const std::vector<GapCurve>& curves, AggregateMode mode) {
  std::string out = "mode,category,gap,cells";
  for (int n : kRecallCutoffs) out += ",recall" + metric_name(n);
  out += "\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += std::string(to_string(mode)) + "," + c.category + "," + std::to_string(p.gap) + "," +
             std::to_string(p.cells);
      for (double v : p.recall) out += "," + fixed(v, 6);
      out += "\n";
    }
  }
  return out;
}

std::string format_boost_csv(const BoostReport& report) {
  std::string out = "category,gap,metric,ours,baseline,boost_pct,delta_pp,reference_pct,printed_pct\n";
  std::size_t a = 0;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& c = report.cells[i];
    out += c.category + "," + std::to_string(c.gap) + "," + c.metric + "," + fixed(c.ours, 6) + "," +
           fixed(c.baseline, 6) + "," + fixed(c.boost_pct, 4) + "," + fixed(c.delta_pp, 4) + "," +
           fixed(c.reference_pct, 4) + ",\n";
    const bool group_end = i + 1 == report.cells.size() || report.cells[i + 1].category != c.category ||
                           report.cells[i + 1].gap != c.gap;
    if (group_end && a < report.averages.size()) {
      const auto& v = report.averages[a++];
      out += v.category + "," + std::to_string(v.gap) + ",ave,,," + fixed(v.recomputed_pct, 4) + "," +
             fixed(v.mean_delta_pp, 4) + "," + fixed(v.reference_pct, 4) + "," + fixed(v.printed_pct, 4) + "\n";
    }
  }
  return out;
}

std::string format_degree_csv(const DegreeReport& report) {
  std::string out = "bucket,count,mean_delta\n";
  for (const auto& b : report.buckets) out += b.label + "," + std::to_string(b.count) + "," + fixed(b.mean_delta, 6) + "\n";
  out += "slope," + std::string(report.slope ? fixed(*report.slope, 6) : "") + ",\n";
  return out;
}

std::string render_recall_plot(const std::vector<GapCurve>& curves, std::size_t cutoff_index) {
  if (cutoff_index >= kRecallCutoffs.size()) throw std::out_of_range("render_recall_plot: cutoff index");
  constexpr double W = 480, H = 320, L = 56, R = 120, T = 24, B = 44;
  int max_gap = 1;
  for (const auto& c : curves) {
    for (const auto& p : c.points) max_gap = std::max(max_gap, p.gap);
  }
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double gap) { return L + pw * gap / max_gap; };
  auto py = [&](double v) { return T + ph * (1.0 - std::clamp(v, 0.0, 1.0)); };
  const std::string title = "recall" + metric_name(kRecallCutoffs[cutoff_index]) + " vs year gap";
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\" viewBox=\"0 0 480 320\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"480\" height=\"320\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(L, 1) + "\" y=\"16\" font-size=\"12\">" + xml_escape(title) + "</text>\n";
  s += "<line x1=\"" + fixed(L, 1) + "\" y1=\"" + fixed(T + ph, 1) + "\" x2=\"" + fixed(L + pw, 1) + "\" y2=\"" +
       fixed(T + ph, 1) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed(L, 1) + "\" y1=\"" + fixed(T, 1) + "\" x2=\"" + fixed(L, 1) + "\" y2=\"" +
       fixed(T + ph, 1) + "\" stroke=\"black\"/>\n";
  for (int g = 0; g <= max_gap; ++g) {
    s += "<text x=\"" + fixed(px(g), 1) + "\" y=\"" + fixed(T + ph + 16, 1) +
         "\" font-size=\"10\" text-anchor=\"middle\">" + std::to_string(g) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = k / 4.0;
    s += "<text x=\"" + fixed(L - 6, 1) + "\" y=\"" + fixed(py(v) + 3, 1) + "\" font-size=\"10\" text-anchor=\"end\">" +
         fixed(v, 2) + "</text>\n";
  }
  s += "<text x=\"" + fixed(L + pw / 2, 1) + "\" y=\"" + fixed(H - 8, 1) +
       "\" font-size=\"11\" text-anchor=\"middle\">year gap</text>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto* color = colors[c % 4];
    const char* dash = c % 2 == 1 ? " stroke-dasharray=\"6 4\"" : "";
    std::string pts;
    for (const auto& p : curves[c].points) {
      if (!pts.empty()) pts += " ";
      pts += fixed(px(p.gap), 2) + "," + fixed(py(p.recall[cutoff_index]), 2);
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"" + dash + " points=\"" +
         pts + "\"/>\n";
    const double ly = T + 14 + 16 * static_cast<double>(c);
    s += "<line x1=\"" + fixed(L + pw + 10, 1) + "\" y1=\"" + fixed(ly, 1) + "\" x2=\"" + fixed(L + pw + 30, 1) +
         "\" y2=\"" + fixed(ly, 1) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" + dash + "/>\n";
    s += "<text x=\"" + fixed(L + pw + 34, 1) + "\" y=\"" + fixed(ly + 4, 1) + "\" font-size=\"10\">" +
         xml_escape(curves[c].category) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void emit_report(const std::vector<CategoryResults>& matrices, const std::vector<GapCurve>& curves,
                 AggregateMode mode, const BoostReport* boosts, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  if (!matrices.empty()) write_file_atomic(out_dir / "gap_matrix.csv", format_gap_matrix_csv(matrices));
  write_file_atomic(out_dir / "gap_aggregate.csv", format_aggregate_csv(curves, mode));
  if (boosts) write_file_atomic(out_dir / "boost.csv", format_boost_csv(*boosts));
  for (std::size_t i = 0; i < kRecallCutoffs.size(); ++i) {
    write_file_atomic(out_dir / ("recall_vs_gap_at" + std::to_string(kRecallCutoffs[i]) + ".svg"),
                      render_recall_plot(curves, i));
  }
}

std::vector<GapCurve> curves_from_results(const std::vector<ResultEntry>& rows) {
  std::map<std::string, std::map<int, GapAggregate>> by_cat;
  for (const auto& r : rows) {
    const auto m = metric_order(r.metric);
    if (m >= kRecallCutoffs.size()) continue;
    auto& agg = by_cat[r.category][r.gap];
    agg.gap = r.gap;
    agg.recall[m] = r.value;
    agg.cells = 1;
  }
  std::vector<GapCurve> out;
  for (auto& [cat, gaps] : by_cat) {
    GapCurve c{cat, {}};
    for (auto& [g, agg] : gaps) c.points.push_back(agg);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace tiger
