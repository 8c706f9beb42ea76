#include "tiger/pipeline.hpp"

#include "tiger/util.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace tiger {

namespace {

EncoderKind parse_encoder(const std::string& s) {
  if (s == "attention") return EncoderKind::attention;
  if (s == "average") return EncoderKind::average;
  throw ConfigError("model.encoder: expected attention or average, got '" + s + "'");
}

EmbedderKind parse_embedder(const std::string& s) {
  if (s == "hashing") return EmbedderKind::hashing;
  if (s == "encoder") return EmbedderKind::encoder;
  throw ConfigError("graph.embedder: expected hashing or encoder, got '" + s + "'");
}

NegativeMode parse_negatives(const std::string& s) {
  if (s == "in_batch") return NegativeMode::in_batch;
  if (s == "global") return NegativeMode::global;
  throw ConfigError("train.negatives: expected in_batch or global, got '" + s + "'");
}

std::string file_bytes_or_empty(const std::string& path) {
  if (path.empty() || !std::filesystem::exists(path)) return {};
  return read_file(path);
}

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << "\n";
}

}  // namespace

const std::vector<std::string>& runtime_only_keys() {
  static const std::vector<std::string> keys{"run.workers"};
  return keys;
}

RunSettings resolve_settings(const Config& cfg) {
  RunSettings s;
  s.entities = cfg.get("paths.entities");
  s.mentions = cfg.get("paths.mentions");
  s.test_mentions = cfg.get("paths.test_mentions");
  s.triples = cfg.get("paths.triples");
  s.out = cfg.get("paths.out");
  s.years = parse_years(cfg.get("experiment.years"));
  s.categories = cfg.get_list("experiment.categories");
  if (s.categories.empty()) throw ConfigError("experiment.categories is empty");
  for (const auto& c : s.categories) {
    if (c != "all" && c != "continual" && c != "new") {
      throw ConfigError("experiment.categories: unknown category '" + c + "'");
    }
  }
  try {
    s.mode = parse_aggregate_mode(cfg.get("experiment.mode"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment.mode: ") + e.what());
  }
  const auto seed = cfg.get_u64("run.seed");
  s.graph.k = cfg.get_int("graph.k");
  s.graph.min_count = cfg.get_int64("graph.min_count");
  s.graph.max_count = cfg.get_int64("graph.max_count");
  s.graph.embedder = parse_embedder(cfg.get("graph.embedder"));
  s.graph.embed_dim = cfg.get_int("graph.embed_dim");
  s.graph.seed = seed;
  s.graph.max_len = cfg.get_int("train.max_len");
  if (s.graph.k < 1) throw ConfigError("graph.k must be at least 1");
  if (s.graph.min_count < 0 || s.graph.max_count < s.graph.min_count) {
    throw ConfigError("graph.min_count/max_count must satisfy 0 <= min <= max");
  }
  if (s.graph.embed_dim < 1) throw ConfigError("graph.embed_dim must be positive");
  s.model.dim = cfg.get_int("model.dim");
  s.model.encoder = parse_encoder(cfg.get("model.encoder"));
  s.model.encoder_layers = cfg.get_int("model.encoder_layers");
  s.model.gcn_layers = cfg.get_int("model.gcn_layers");
  s.model.gcn_hidden = cfg.get_int("model.gcn_hidden");
  s.model.gcn_out = cfg.get_int("model.gcn_out");
  s.model.graph_branch = cfg.get_bool("model.graph_branch");
  if (s.model.dim < 1 || s.model.encoder_layers < 0 || s.model.gcn_layers < 1 || s.model.gcn_hidden < 1 ||
      s.model.gcn_out < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  auto& t = s.train;
  t.learning_rate = cfg.get_real("train.learning_rate");
  t.epochs = cfg.get_int("train.epochs");
  t.batch_size = cfg.get_int("train.batch_size");
  t.max_len = cfg.get_int("train.max_len");
  t.weights.a = cfg.get_real("train.a");
  t.weights.b = cfg.get_real("train.b");
  t.gram_sample = cfg.get_int("train.gram_sample");
  t.gram_full_max = cfg.get_int("train.gram_full_max");
  t.clip_norm = cfg.get_real("train.clip_norm");
  t.beta1 = cfg.get_real("train.beta1");
  t.beta2 = cfg.get_real("train.beta2");
  t.adam_eps = cfg.get_real("train.adam_eps");
  t.negatives = parse_negatives(cfg.get("train.negatives"));
  t.num_negatives = cfg.get_int("train.num_negatives");
  t.freeze_fusion_zero = cfg.get_bool("train.freeze_fusion_zero");
  t.seed = seed;
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  s.workers = cfg.get_int("run.workers");
  if (s.workers < 1) throw ConfigError("run.workers must be at least 1");
  return s;
}

OutputDir::OutputDir(const std::filesystem::path& dir, const Config& cfg) : dir_(dir), lock_(dir / ".lock") {
  std::filesystem::create_directories(dir_);
  std::FILE* f = std::fopen(lock_.c_str(), "wx");
  if (!f) {
    throw DataError("output directory " + dir_.string() + " is locked by another run (remove " + lock_.string() +
                    " if no run is active)");
  }
  std::fclose(f);
  try {
    write_file_atomic(dir_ / "config.resolved", cfg.serialize(runtime_only_keys()));
    write_file_atomic(dir_ / "VERSION", std::string(kVersion) + "\n");
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(lock_, ec);
    throw;
  }
}

OutputDir::~OutputDir() {
  std::error_code ec;
  std::filesystem::remove(lock_, ec);
}

Snapshot load_year(const RunSettings& s, int year) {
  if (s.entities.empty()) throw ConfigError("paths.entities is not set");
  if (s.mentions.empty()) throw ConfigError("paths.mentions is not set");
  SnapshotPaths p;
  p.entities = expand_year(s.entities, year);
  p.mentions = expand_year(s.mentions, year);
  if (!s.test_mentions.empty()) p.test_mentions = expand_year(s.test_mentions, year);
  if (!s.triples.empty()) p.triples = expand_year(s.triples, year);
  for (const auto* path : {&p.entities, &p.mentions, &p.test_mentions, &p.triples}) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw DataError("input file not found: " + path->string());
    }
  }
  return load_snapshot(year, p);
}

void build_graphs(Snapshot& snap, const RunSettings& s, std::ostream* log) {
  auto cfg = s.graph;
  cfg.workers = s.workers;
  StructureGraphStats stats;
  build_snapshot_graphs(snap, snapshot_tokenizer(snap, s.train.max_len), cfg, &stats);
  say(log, "year " + std::to_string(snap.year) + ": " + std::to_string(snap.entities.size()) + " entities, " +
               std::to_string(snap.graphs.structure.edges.size()) + " structure edges, " +
               std::to_string(snap.graphs.feature.edges.size()) + " feature edges, " +
               std::to_string(snap.graphs.features.m) + " feature columns");
}

void write_graph_artifacts(const Snapshot& snap, const Tokenizer& tok, const std::filesystem::path& dir) {
  save_graphs(snap.graphs, tok, dir);
  snap.index.save(dir / "index.manifest");
  std::string manifest;
  for (const char* name : {"structure.adj", "feature.adj", "feature.mat", "feature.columns", "index.manifest"}) {
    manifest += std::string(name) + "\t" + hex64(fnv1a64(read_file(dir / name))) + "\n";
  }
  write_file_atomic(dir / "manifest", manifest);
}

std::string input_hash(const Config& cfg, const RunSettings& s, int year, const std::string& category) {
  std::vector<std::string> skip = runtime_only_keys();
  for (const auto& [k, v] : cfg.values()) {
    if (k.rfind("paths.", 0) == 0) skip.push_back(k);
  }
  std::string blob = cfg.serialize(skip);
  blob += "\ncategory=" + category + "\nyear=" + std::to_string(year) + "\n";
  for (const auto* templ : {&s.entities, &s.mentions, &s.test_mentions, &s.triples}) {
    const auto bytes = templ->empty() ? std::string() : file_bytes_or_empty(expand_year(*templ, year));
    blob += std::to_string(bytes.size()) + ":" + hex64(fnv1a64(bytes)) + "\n";
  }
  return hex64(fnv1a64(blob));
}

std::filesystem::path checkpoint_path(const RunSettings& s, const std::string& category, int year) {
  return s.out / "checkpoints" / category / (std::to_string(year) + ".ckpt");
}

TrainOutcome train_year(const Config& cfg, const RunSettings& s, const Snapshot& snap, const std::string& category,
                        std::ostream* log) {
  const auto hash = input_hash(cfg, s, snap.year, category);
  const auto path = checkpoint_path(s, category, snap.year);
  if (std::filesystem::exists(path)) {
    try {
      auto existing = Checkpoint::load(path);
      auto it = existing.meta.find("input_hash");
      if (it != existing.meta.end() && it->second == hash) {
        say(log, "skip " + category + "/" + std::to_string(snap.year) + ": checkpoint up to date");
        return {std::move(existing), true, 0};
      }
    } catch (const FormatError&) {
      say(log, "retrain " + category + "/" + std::to_string(snap.year) + ": unreadable checkpoint");
    }
  }
  const auto mentions = select_category(snap.train_mentions, category);
  Trainer trainer(snap, mentions, s.model, s.train);
  const auto curve = trainer.train();
  auto ckpt = trainer.checkpoint();
  ckpt.meta["input_hash"] = hash;
  ckpt.meta["year"] = std::to_string(snap.year);
  ckpt.meta["category"] = category;
  std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path.parent_path() / (std::to_string(snap.year) + ".loss_curve.csv"), format_loss_curve(curve));
  ckpt.save(path);
  say(log, "trained " + category + "/" + std::to_string(snap.year) + ": " + std::to_string(mentions.size()) +
               " mentions, " + std::to_string(curve.size()) + " steps");
  return {std::move(ckpt), false, curve.size()};
}

ExperimentResult run_experiment(const Config& cfg, const RunSettings& s, std::ostream* log) {
  std::map<int, Snapshot> snaps;
  for (int y : s.years) {
    auto snap = load_year(s, y);
    if (s.test_mentions.empty()) throw ConfigError("paths.test_mentions is required for experiment");
    build_graphs(snap, s, log);
    write_graph_artifacts(snap, snapshot_tokenizer(snap, s.train.max_len), s.out / "graphs" / std::to_string(y));
    snaps.emplace(y, std::move(snap));
  }
  ExperimentResult result;
  for (const auto& cat : s.categories) {
    std::map<int, LoadedModel> models;
    for (int y : s.years) {
      auto outcome = train_year(cfg, s, snaps.at(y), cat, log);
      (outcome.reused ? result.reused : result.trained) += 1;
      models.emplace(y, load_model(outcome.checkpoint));
    }
    std::map<int, std::vector<MentionRecord>> tests;
    for (int y : s.years) tests[y] = select_category(snaps.at(y).test_mentions, cat);
    auto matrix = temporal_matrix(s.years, [&](int t1, int t2) {
      auto& m = models.at(t1);
      return evaluate(*m.model, m.tokenizer, snaps.at(t2), tests.at(t2), t1, s.workers).report;
    });
    result.curves.push_back({cat, aggregate_gap(matrix, s.mode)});
    result.matrices.push_back({cat, std::move(matrix)});
  }
  emit_report(result.matrices, result.curves, s.mode, nullptr, s.out / "report");
  return result;
}

std::vector<CategoryResults> parse_gap_matrix_csv(std::string_view text) {
  std::vector<CategoryResults> out;
  std::map<std::string, std::vector<RecallReport>> cells;
  std::vector<std::string> order;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line_no == 1) continue;
    const auto f = split(line, ',');
    if (f.size() != 5 + kRecallCutoffs.size()) {
      throw DataError("gap_matrix.csv: row " + std::to_string(line_no) + ": expected " +
                      std::to_string(5 + kRecallCutoffs.size()) + " fields");
    }
    RecallReport r;
    try {
      r.train_year = std::stoi(f[1]);
      r.test_year = std::stoi(f[2]);
      r.mentions = std::stoul(f[4]);
      for (std::size_t i = 0; i < kRecallCutoffs.size(); ++i) r.recall[i] = std::stod(f[5 + i]);
    } catch (const std::logic_error&) {
      throw DataError("gap_matrix.csv: row " + std::to_string(line_no) + ": unparsable number");
    }
    if (!cells.count(f[0])) order.push_back(f[0]);
    cells[f[0]].push_back(r);
  }
  for (const auto& cat : order) {
    std::set<int> years;
    for (const auto& r : cells[cat]) years.insert(r.train_year);
    GapMatrix m(std::vector<int>(years.begin(), years.end()));
    for (const auto& r : cells[cat]) m.set(r);
    if (!m.complete()) throw DataError("gap_matrix.csv: category " + cat + " is incomplete");
    out.push_back({cat, std::move(m)});
  }
  return out;
}

}  // namespace tiger
