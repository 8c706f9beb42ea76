// tiger: command-line front end.
//
//   tiger ingest        --entities-in e.jsonl --mentions-in m.jsonl --year Y --out DIR
//   tiger build-graphs  --config run.cfg [--years A..B] [--k K] [--min-count N] [--max-count N]
//   tiger train         --config run.cfg --year Y [--category C]
//   tiger eval          --config run.cfg --checkpoint F --year Y [--category C]
//   tiger experiment    --config run.cfg [--years A..B] [--mode M]
//   tiger report        [--baseline table.csv] [--run DIR] --out DIR [--mode M]
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include "tiger/pipeline.hpp"
#include "tiger/util.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using namespace tiger;

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumeric = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> years;
  std::optional<int> k;
  std::optional<std::int64_t> min_count;
  std::optional<std::int64_t> max_count;
  std::optional<std::string> mode;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "config file (key = value with [sections])");
  app->add_option("--set", c.sets, "override one key, e.g. --set train.epochs=2");
  app->add_option("--out", c.out, "output directory (paths.out)");
  app->add_option("--seed", c.seed, "run.seed");
  app->add_option("--workers", c.workers, "worker threads (does not affect outputs)");
}

void add_graph_flags(CLI::App* app, Common& c) {
  app->add_option("--years", c.years, "years, A..B or a comma list");
  app->add_option("--k", c.k, "neighbours per entity in the feature graph");
  app->add_option("--min-count", c.min_count, "lowest kept token frequency (inclusive)");
  app->add_option("--max-count", c.max_count, "highest kept token frequency (inclusive)");
}

Config resolve_config(const Common& c) {
  auto cfg = Config::defaults();
  if (!c.config_path.empty()) cfg.merge(Config::load(c.config_path));
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }
  if (c.out) cfg.set("paths.out", std::filesystem::absolute(*c.out).lexically_normal().string());
  if (c.seed) cfg.set("run.seed", std::to_string(*c.seed));
  if (c.workers) cfg.set("run.workers", std::to_string(*c.workers));
  if (c.years) cfg.set("experiment.years", *c.years);
  if (c.k) cfg.set("graph.k", std::to_string(*c.k));
  if (c.min_count) cfg.set("graph.min_count", std::to_string(*c.min_count));
  if (c.max_count) cfg.set("graph.max_count", std::to_string(*c.max_count));
  if (c.mode) cfg.set("experiment.mode", *c.mode);
  return cfg;
}

int cmd_ingest(const std::string& entities_in, const std::string& mentions_in, const std::string& triples_in,
               int year, const std::string& out) {
  for (const auto& p : {entities_in, mentions_in}) {
    if (!std::filesystem::exists(p)) throw DataError("input file not found: " + p);
  }
  const auto entities = ingest_entities_jsonl(read_file(entities_in), year);
  const auto index = build_entity_index(entities);
  auto mentions = ingest_mentions_jsonl(read_file(mentions_in), year);
  auto [kept, dropped] = filter_mentions(std::move(mentions), index);
  std::filesystem::create_directories(out);
  write_file_atomic(std::filesystem::path(out) / "entities.tsv", serialize_entities(entities));
  write_file_atomic(std::filesystem::path(out) / "mentions.tsv", serialize_mentions(kept));
  std::size_t triples = 0;
  if (!triples_in.empty()) {
    if (!std::filesystem::exists(triples_in)) throw DataError("input file not found: " + triples_in);
    const auto t = load_triples(triples_in);
    write_file_atomic(std::filesystem::path(out) / "triples.tsv", serialize_triples(t));
    triples = t.size();
  }
  const auto split = split_by_category(kept);
  std::cout << "ingest " << year << ": " << entities.size() << " entities, " << kept.size() << " mentions ("
            << split.continual.size() << " continual, " << split.new_entities.size() << " new), " << dropped
            << " mentions dropped for unknown qids, " << triples << " triples\n";
  return 0;
}

int cmd_build_graphs(const Config& cfg) {
  const auto s = resolve_settings(cfg);
  OutputDir out(s.out, cfg);
  for (int y : s.years) {
    auto snap = load_year(s, y);
    build_graphs(snap, s, &std::cout);
    write_graph_artifacts(snap, snapshot_tokenizer(snap, s.train.max_len), s.out / "graphs" / std::to_string(y));
  }
  return 0;
}

int cmd_train(const Config& cfg, int year, const std::string& category) {
  const auto s = resolve_settings(cfg);
  OutputDir out(s.out, cfg);
  auto snap = load_year(s, year);
  build_graphs(snap, s, &std::cout);
  auto outcome = train_year(cfg, s, snap, category, &std::cout);
  std::cout << "checkpoint " << checkpoint_path(s, category, year).string() << (outcome.reused ? " (unchanged)" : "")
            << "\n";
  return 0;
}

int cmd_eval(const Config& cfg, const std::string& checkpoint, int year, const std::string& category) {
  const auto s = resolve_settings(cfg);
  if (!std::filesystem::exists(checkpoint)) throw DataError("checkpoint not found: " + checkpoint);
  if (s.test_mentions.empty()) throw ConfigError("paths.test_mentions is not set");
  OutputDir out(s.out, cfg);
  const auto ckpt = Checkpoint::load(checkpoint);
  auto loaded = load_model(ckpt);
  const auto snap = load_year(s, year);
  const int train_year = ckpt.meta.count("year") ? std::stoi(ckpt.meta.at("year")) : year;
  const auto mentions = select_category(snap.test_mentions, category);
  const auto r = evaluate(*loaded.model, loaded.tokenizer, snap, mentions, train_year, s.workers).report;
  std::string csv = "train_year,test_year,mentions";
  for (int n : kRecallCutoffs) csv += ",recall" + metric_name(n);
  csv += "\n" + std::to_string(r.train_year) + "," + std::to_string(r.test_year) + "," + std::to_string(r.mentions);
  for (double v : r.recall) {
    char buf[32];
    std::snprintf(buf, sizeof buf, ",%.6f", v);
    csv += buf;
  }
  csv += "\n";
  const auto path = s.out / "eval" / category / (std::to_string(r.train_year) + "_" + std::to_string(year) + ".csv");
  std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, csv);
  std::cout << csv;
  return 0;
}

int cmd_experiment(const Config& cfg) {
  const auto s = resolve_settings(cfg);
  OutputDir out(s.out, cfg);
  const auto r = run_experiment(cfg, s, &std::cout);
  bool complete = true;
  for (const auto& m : r.matrices) {
    complete = complete && m.matrix.complete();
    std::cout << m.category << ": " << m.matrix.cell_count() << " cells\n";
  }
  std::cout << r.trained << " checkpoints trained, " << r.reused << " reused\n";
  return complete ? 0 : kData;
}

int cmd_report(const Config& cfg, const std::string& baseline_path, const std::string& run_dir,
               const std::string& baseline_model, const std::string& ours_model) {
  const auto mode = parse_aggregate_mode(cfg.get("experiment.mode"));
  if (baseline_path.empty() && run_dir.empty()) throw ConfigError("report needs --baseline, --run, or both");
  const std::filesystem::path out_dir = cfg.get("paths.out");
  OutputDir out(out_dir, cfg);

  std::vector<ResultEntry> table;
  if (!baseline_path.empty()) {
    if (!std::filesystem::exists(baseline_path)) throw DataError("baseline file not found: " + baseline_path);
    table = load_results_csv(baseline_path);
  }
  std::vector<CategoryResults> matrices;
  std::vector<GapCurve> curves;
  std::vector<ResultEntry> ours;
  if (!run_dir.empty()) {
    const auto path = std::filesystem::path(run_dir) / "report" / "gap_matrix.csv";
    if (!std::filesystem::exists(path)) throw DataError("run has no report/gap_matrix.csv: " + run_dir);
    matrices = parse_gap_matrix_csv(read_file(path));
    for (const auto& m : matrices) {
      auto aggs = aggregate_gap(m.matrix, mode);
      auto rows = aggregates_to_results(aggs, ours_model, m.category);
      ours.insert(ours.end(), rows.begin(), rows.end());
      curves.push_back({m.category, std::move(aggs)});
    }
  } else {
    ours = filter_model(table, ours_model);
    curves = curves_from_results(ours);
  }
  if (table.empty()) {
    emit_report(matrices, curves, mode, nullptr, out_dir);
    std::cout << "recall-only report written to " << out_dir.string() << "\n";
    return 0;
  }
  auto base = filter_model(table, baseline_model);
  if (base.empty()) base = filter_model(table, "baseline");
  if (base.empty()) throw DataError("baseline file has no rows for model '" + baseline_model + "'");
  // Printed boost cells only describe the table's own model.
  const auto reference = run_dir.empty() ? table : std::vector<ResultEntry>{};
  const auto boosts = build_boost_report(ours, base, reference);
  emit_report(matrices, curves, mode, &boosts, out_dir);
  for (const auto& a : boosts.averages) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "ave boost %-9s gap %d: %8.4f%% (from printed cells: %s)\n", a.category.c_str(),
                  a.gap, a.recomputed_pct.value_or(0.0),
                  a.reference_pct ? std::to_string(*a.reference_pct).c_str() : "n/a");
    std::cout << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TIGER temporal entity linking"};
  app.require_subcommand(1);
  Common common;

  auto* ingest = app.add_subcommand("ingest", "convert JSON-lines dumps into TSV snapshot files");
  std::string entities_in, mentions_in, triples_in, ingest_out;
  int ingest_year = 0;
  ingest->add_option("--entities-in", entities_in, "entity JSON lines")->required();
  ingest->add_option("--mentions-in", mentions_in, "mention JSON lines")->required();
  ingest->add_option("--triples-in", triples_in, "triples TSV to normalize");
  ingest->add_option("--year", ingest_year, "snapshot year")->required();
  ingest->add_option("--out", ingest_out, "output directory")->required();

  auto* build = app.add_subcommand("build-graphs", "structure graph, feature graph and feature matrix per year");
  add_common(build, common);
  add_graph_flags(build, common);

  auto* train = app.add_subcommand("train", "train one year's model");
  add_common(train, common);
  add_graph_flags(train, common);
  int train_year_arg = 0;
  std::string category = "all";
  train->add_option("--year", train_year_arg, "training year")->required();
  train->add_option("--category", category, "training mentions: all, continual or new");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on one year");
  add_common(eval, common);
  std::string checkpoint;
  int eval_year = 0;
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--year", eval_year, "test year")->required();
  eval->add_option("--category", category, "test mentions: all, continual or new");

  auto* experiment = app.add_subcommand("experiment", "train every year, evaluate every year pair, report");
  add_common(experiment, common);
  add_graph_flags(experiment, common);
  experiment->add_option("--mode", common.mode, "forward_only or forward_and_backward");

  auto* report = app.add_subcommand("report", "CSV and plots, with boost against a baseline table");
  add_common(report, common);
  std::string baseline, run_dir, baseline_model = "SpEL", ours_model = "TIGER";
  report->add_option("--baseline", baseline, "results CSV: model,metric,gap,category,value");
  report->add_option("--run", run_dir, "experiment output directory");
  report->add_option("--mode", common.mode, "forward_only or forward_and_backward");
  report->add_option("--baseline-model", baseline_model, "baseline rows to compare against");
  report->add_option("--ours-model", ours_model, "rows treated as ours when no --run is given");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(entities_in, mentions_in, triples_in, ingest_year, ingest_out);
    const auto cfg = resolve_config(common);
    if (build->parsed()) return cmd_build_graphs(cfg);
    if (train->parsed()) return cmd_train(cfg, train_year_arg, category);
    if (eval->parsed()) return cmd_eval(cfg, checkpoint, eval_year, category);
    if (experiment->parsed()) return cmd_experiment(cfg);
    if (report->parsed()) return cmd_report(cfg, baseline, run_dir, baseline_model, ours_model);
  } catch (const ConfigError& e) {
    std::cerr << "tiger: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "tiger: numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "tiger: " << e.what() << "\n";
    return kData;
  } catch (const FormatError& e) {
    std::cerr << "tiger: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "tiger: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "tiger: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "tiger: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
