#include "tiger/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tiger {

namespace {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_loss(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const std::string& need(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint: missing meta key '" + key + "'");
  return it->second;
}

int as_int(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto& s = need(meta, key);
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError("checkpoint: meta '" + key + "' is not an integer: '" + s + "'");
}

double as_real(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto& s = need(meta, key);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError("checkpoint: meta '" + key + "' is not a number: '" + s + "'");
}

bool as_bool(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto& s = need(meta, key);
  if (s == "true") return true;
  if (s == "false") return false;
  throw FormatError("checkpoint: meta '" + key + "' is not a boolean: '" + s + "'");
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
  if (!(learning_rate > 0) || !finite(learning_rate)) fail("learning_rate must be positive");
  if (epochs < 0) fail("epochs must be non-negative");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (max_len < 5) fail("max_len must be at least 5");
  if (!(weights.a >= 0) || !finite(weights.a) || !(weights.b >= 0) || !finite(weights.b)) {
    fail("loss weights must be finite and non-negative");
  }
  if (gram_sample < 2) fail("gram_sample must be at least 2");
  if (gram_full_max < 2) fail("gram_full_max must be at least 2");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) fail("adam betas must lie in [0, 1)");
  if (!(adam_eps > 0)) fail("adam_eps must be positive");
  if (num_negatives < 0) fail("num_negatives must be non-negative");
}

std::map<std::string, std::string> to_meta(const ModelConfig& m) {
  return {{"model.vocab_size", std::to_string(m.vocab_size)},
          {"model.max_len", std::to_string(m.max_len)},
          {"model.dim", std::to_string(m.dim)},
          {"model.encoder_layers", std::to_string(m.encoder_layers)},
          {"model.encoder", m.encoder == EncoderKind::attention ? "attention" : "average"},
          {"model.feature_dim", std::to_string(m.feature_dim)},
          {"model.gcn_layers", std::to_string(m.gcn_layers)},
          {"model.gcn_hidden", std::to_string(m.gcn_hidden)},
          {"model.gcn_out", std::to_string(m.gcn_out)},
          {"model.graph_branch", bool_str(m.graph_branch)}};
}

std::map<std::string, std::string> to_meta(const TrainConfig& t) {
  return {{"train.learning_rate", fmt_real(t.learning_rate)},
          {"train.epochs", std::to_string(t.epochs)},
          {"train.batch_size", std::to_string(t.batch_size)},
          {"train.max_len", std::to_string(t.max_len)},
          {"train.a", fmt_real(t.weights.a)},
          {"train.b", fmt_real(t.weights.b)},
          {"train.gram_sample", std::to_string(t.gram_sample)},
          {"train.gram_full_max", std::to_string(t.gram_full_max)},
          {"train.seed", std::to_string(t.seed)},
          {"train.clip_norm", fmt_real(t.clip_norm)},
          {"train.beta1", fmt_real(t.beta1)},
          {"train.beta2", fmt_real(t.beta2)},
          {"train.adam_eps", fmt_real(t.adam_eps)},
          {"train.negatives", t.negatives == NegativeMode::in_batch ? "in_batch" : "global"},
          {"train.num_negatives", std::to_string(t.num_negatives)},
          {"train.freeze_fusion_zero", bool_str(t.freeze_fusion_zero)}};
}

ModelConfig model_config_from_meta(const std::map<std::string, std::string>& meta) {
  ModelConfig m;
  m.vocab_size = as_int(meta, "model.vocab_size");
  m.max_len = as_int(meta, "model.max_len");
  m.dim = as_int(meta, "model.dim");
  m.encoder_layers = as_int(meta, "model.encoder_layers");
  const auto& kind = need(meta, "model.encoder");
  if (kind == "attention") {
    m.encoder = EncoderKind::attention;
  } else if (kind == "average") {
    m.encoder = EncoderKind::average;
  } else {
    throw FormatError("checkpoint: unknown encoder kind '" + kind + "'");
  }
  m.feature_dim = as_int(meta, "model.feature_dim");
  m.gcn_layers = as_int(meta, "model.gcn_layers");
  m.gcn_hidden = as_int(meta, "model.gcn_hidden");
  m.gcn_out = as_int(meta, "model.gcn_out");
  m.graph_branch = as_bool(meta, "model.graph_branch");
  return m;
}

TrainConfig train_config_from_meta(const std::map<std::string, std::string>& meta) {
  TrainConfig t;
  t.learning_rate = as_real(meta, "train.learning_rate");
  t.epochs = as_int(meta, "train.epochs");
  t.batch_size = as_int(meta, "train.batch_size");
  t.max_len = as_int(meta, "train.max_len");
  t.weights.a = as_real(meta, "train.a");
  t.weights.b = as_real(meta, "train.b");
  t.gram_sample = as_int(meta, "train.gram_sample");
  t.gram_full_max = as_int(meta, "train.gram_full_max");
  t.seed = std::stoull(need(meta, "train.seed"));
  t.clip_norm = as_real(meta, "train.clip_norm");
  t.beta1 = as_real(meta, "train.beta1");
  t.beta2 = as_real(meta, "train.beta2");
  t.adam_eps = as_real(meta, "train.adam_eps");
  const auto& neg = need(meta, "train.negatives");
  if (neg == "in_batch") {
    t.negatives = NegativeMode::in_batch;
  } else if (neg == "global") {
    t.negatives = NegativeMode::global;
  } else {
    throw FormatError("checkpoint: unknown negatives mode '" + neg + "'");
  }
  t.num_negatives = as_int(meta, "train.num_negatives");
  t.freeze_fusion_zero = as_bool(meta, "train.freeze_fusion_zero");
  return t;
}

std::vector<std::vector<int>> make_batches(std::size_t count, int batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be at least 1");
  std::vector<int> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> out;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t i = 0; i < count; i += bs) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(count, i + bs)));
  }
  return out;
}

std::string format_loss_curve(const std::vector<LossRecord>& records) {
  std::string out = "step,L_e,L_s,L_d,L_total\n";
  for (const auto& r : records) {
    out += std::to_string(r.step) + "," + fmt_loss(r.el) + "," + fmt_loss(r.shared) + "," + fmt_loss(r.distinct) +
           "," + fmt_loss(r.total) + "\n";
  }
  return out;
}

Trainer::Trainer(const Snapshot& snapshot, const std::vector<MentionRecord>& mentions, ModelConfig model_cfg,
                 TrainConfig train_cfg)
    : snapshot_(&snapshot), cfg_(std::move(train_cfg)) {
  cfg_.validate();
  tokenizer_ = snapshot_tokenizer(snapshot, cfg_.max_len);
  model_cfg.vocab_size = static_cast<int>(tokenizer_.vocab_size());
  model_cfg.max_len = cfg_.max_len;
  if (model_cfg.graph_branch) model_cfg.feature_dim = static_cast<int>(snapshot.graphs.features.m);
  model_ = std::make_unique<Model<float>>(model_cfg, cfg_.seed);
  if (model_cfg.graph_branch && cfg_.freeze_fusion_zero) model_->fusion().freeze_at_zero();
  for (auto* p : model_->parameters()) {
    adam_.m.push_back(MatrixF::Zero(p->value.rows(), p->value.cols()));
    adam_.v.push_back(MatrixF::Zero(p->value.rows(), p->value.cols()));
  }
  prepare(mentions);
}

Trainer::Trainer(const Snapshot& snapshot, const std::vector<MentionRecord>& mentions, const Checkpoint& ckpt)
    : snapshot_(&snapshot), cfg_(train_config_from_meta(ckpt.meta)) {
  auto loaded = load_model(ckpt);
  tokenizer_ = std::move(loaded.tokenizer);
  model_ = std::move(loaded.model);
  if (model_->config().graph_branch && cfg_.freeze_fusion_zero) model_->fusion().projection().trainable = false;
  for (auto* p : model_->parameters()) {
    const auto* m = ckpt.find("adam.m." + p->name);
    const auto* v = ckpt.find("adam.v." + p->name);
    if (!m || !v) throw FormatError("checkpoint: missing optimizer state for " + p->name);
    if (m->value.rows() != p->value.rows() || m->value.cols() != p->value.cols() ||
        v->value.rows() != p->value.rows() || v->value.cols() != p->value.cols()) {
      throw FormatError("checkpoint: optimizer state shape mismatch for " + p->name);
    }
    adam_.m.push_back(m->value);
    adam_.v.push_back(v->value);
  }
  step_ = std::stoll(ckpt.get("step"));
  epoch_ = std::stoll(ckpt.get("epoch"));
  prepare(mentions);
}

void Trainer::prepare(const std::vector<MentionRecord>& mentions) {
  const auto& snap = *snapshot_;
  if (model_->config().graph_branch) {
    const auto& g = snap.graphs;
    if (static_cast<int>(g.features.m) != model_->config().feature_dim) {
      throw DataError("trainer: feature matrix has " + std::to_string(g.features.m) + " columns, model expects " +
                      std::to_string(model_->config().feature_dim));
    }
    if (g.features.n != snap.index.size()) {
      throw DataError("trainer: graphs cover " + std::to_string(g.features.n) + " entities, snapshot has " +
                      std::to_string(snap.index.size()));
    }
    graphs_ = std::make_unique<GraphInputs<float>>(make_graph_inputs<float>(g.feature, g.structure, g.features));
  }
  entity_seqs_.clear();
  for (const auto& e : snap.entities) entity_seqs_.push_back(tokenizer_.render_entity(e));
  mention_seqs_.clear();
  gold_rows_.clear();
  for (const auto& m : mentions) {
    auto row = snap.index.row(m.gold_qid);
    if (!row) throw DataError("trainer: gold qid " + m.gold_qid + " not in the snapshot");
    mention_seqs_.push_back(tokenizer_.render_mention(m));
    gold_rows_.push_back(static_cast<int>(*row));
  }
}

BatchInputs Trainer::assemble(const std::vector<int>& batch, Rng& rng) const {
  BatchInputs in;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto i = static_cast<std::size_t>(batch[k]);
    if (i >= mention_seqs_.size()) throw std::out_of_range("train_step: mention position out of range");
    const int row = gold_rows_[i];
    in.mentions.push_back(mention_seqs_[i]);
    in.candidates.push_back(entity_seqs_[static_cast<std::size_t>(row)]);
    in.candidate_rows.push_back(row);
    in.gold.push_back(static_cast<int>(k));
  }
  if (cfg_.negatives == NegativeMode::global) {
    const auto n = static_cast<std::uint64_t>(entity_seqs_.size());
    for (int j = 0; j < cfg_.num_negatives; ++j) {
      const int row = static_cast<int>(rng.below(n));
      in.candidates.push_back(entity_seqs_[static_cast<std::size_t>(row)]);
      in.candidate_rows.push_back(row);
    }
  }
  const auto n = static_cast<std::size_t>(snapshot_->index.size());
  if (graphs_ && n > static_cast<std::size_t>(cfg_.gram_full_max)) {
    std::vector<int> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
    const auto take = std::min(n, static_cast<std::size_t>(cfg_.gram_sample));
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(all[i], all[j]);
    }
    all.resize(take);
    std::sort(all.begin(), all.end());
    in.gram_rows = std::move(all);
  }
  return in;
}

LossTerms<float> Trainer::forward(Tape<float>& tape, const std::vector<int>& batch, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  auto inputs = assemble(batch, rng);
  return compute_losses(tape, *model_, graphs_.get(), inputs, cfg_.weights);
}

LossRecord Trainer::train_step(const std::vector<int>& batch) {
  Rng rng(derive_seed(cfg_.seed, "step." + std::to_string(step_)));
  for (auto* p : model_->parameters()) p->zero_grad();
  Tape<float> tape;
  auto t = forward(tape, batch, rng);
  LossRecord rec;
  rec.step = step_;
  rec.el = t.el.scalar();
  rec.shared = t.shared.scalar();
  rec.distinct = t.distinct.scalar();
  rec.total = t.total.scalar();
  const std::pair<const char*, double> terms[] = {{"L_e", rec.el},
                                                   {"L_s", rec.shared},
                                                   {"L_dr", t.distinct_r.scalar()},
                                                   {"L_df", t.distinct_f.scalar()},
                                                   {"L_total", rec.total}};
  for (const auto& [name, value] : terms) {
    if (!finite(value)) {
      std::string dump;
      for (const auto& [n2, v2] : terms) dump += std::string(" ") + n2 + "=" + fmt_loss(v2);
      throw NumericError(std::string("non-finite loss term ") + name + " at step " + std::to_string(step_) + ":" +
                         dump);
    }
  }
  tape.backward(t.total);
  apply_update();
  ++step_;
  return rec;
}

void Trainer::apply_update() {
  auto params = model_->parameters();
  double norm_sq = 0;
  for (auto* p : params) {
    if (!p->trainable) continue;
    norm_sq += p->grad.template cast<double>().squaredNorm();
  }
  if (!finite(norm_sq)) {
    for (auto* p : params) {
      if (p->trainable && !p->grad.allFinite()) {
        throw NumericError("non-finite gradient in " + p->name + " at step " + std::to_string(step_));
      }
    }
    throw NumericError("gradient norm overflow at step " + std::to_string(step_));
  }
  const double norm = std::sqrt(norm_sq);
  const double clip = (cfg_.clip_norm > 0 && norm > cfg_.clip_norm) ? cfg_.clip_norm / norm : 1.0;
  const double t = static_cast<double>(step_ + 1);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    if (!p->trainable) continue;
    auto& m = adam_.m[k];
    auto& v = adam_.v[k];
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double g = static_cast<double>(p->grad.data()[i]) * clip;
      const double mi = cfg_.beta1 * m.data()[i] + (1.0 - cfg_.beta1) * g;
      const double vi = cfg_.beta2 * v.data()[i] + (1.0 - cfg_.beta2) * g * g;
      m.data()[i] = static_cast<float>(mi);
      v.data()[i] = static_cast<float>(vi);
      const double update = cfg_.learning_rate * (mi / c1) / (std::sqrt(vi / c2) + cfg_.adam_eps);
      p->value.data()[i] = static_cast<float>(p->value.data()[i] - update);
    }
  }
}

std::vector<LossRecord> Trainer::train(int epochs) {
  const int total = epochs < 0 ? cfg_.epochs : epochs;
  std::vector<LossRecord> curve;
  for (int e = 0; e < total; ++e) {
    auto batches = make_batches(mention_seqs_.size(), cfg_.batch_size,
                                derive_seed(cfg_.seed, "epoch." + std::to_string(epoch_)));
    for (const auto& b : batches) curve.push_back(train_step(b));
    ++epoch_;
  }
  return curve;
}

LossRecord Trainer::evaluate_losses(const std::vector<int>& batch) {
  Rng rng(derive_seed(cfg_.seed, "evaluate"));
  Tape<float> tape(false);
  auto t = forward(tape, batch, rng);
  return {step_, t.el.scalar(), t.shared.scalar(), t.distinct.scalar(), t.total.scalar()};
}

void store_parameters(Model<float>& model, Checkpoint& ckpt) {
  for (auto* p : model.parameters()) ckpt.tensors.push_back({p->name, p->value});
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.meta = to_meta(model_->config());
  c.meta.merge(to_meta(cfg_));
  c.meta["step"] = std::to_string(step_);
  c.meta["epoch"] = std::to_string(epoch_);
  c.vocabulary = tokenizer_.vocabulary();
  auto params = model_->parameters();
  store_parameters(*model_, c);
  for (std::size_t k = 0; k < params.size(); ++k) c.tensors.push_back({"adam.m." + params[k]->name, adam_.m[k]});
  for (std::size_t k = 0; k < params.size(); ++k) c.tensors.push_back({"adam.v." + params[k]->name, adam_.v[k]});
  return c;
}

LoadedModel load_model(const Checkpoint& ckpt) {
  const auto cfg = model_config_from_meta(ckpt.meta);
  const int max_len = as_int(ckpt.meta, "model.max_len");
  LoadedModel out;
  out.tokenizer = Tokenizer::from_vocabulary(ckpt.vocabulary, max_len);
  if (static_cast<int>(out.tokenizer.vocab_size()) != cfg.vocab_size) {
    throw FormatError("checkpoint: vocabulary has " + std::to_string(out.tokenizer.vocab_size()) +
                      " tokens, config says " + std::to_string(cfg.vocab_size));
  }
  // Seed 0 only shapes the tensors; every value is overwritten below.
  out.model = std::make_unique<Model<float>>(cfg, 0);
  for (auto* p : out.model->parameters()) {
    const auto* t = ckpt.find(p->name);
    if (!t) throw FormatError("checkpoint: missing tensor " + p->name);
    if (t->value.rows() != p->value.rows() || t->value.cols() != p->value.cols()) {
      throw FormatError("checkpoint: tensor " + p->name + " has shape " + shape_str(t->value.rows(), t->value.cols()) + ", expected " +
                        shape_str(p->value.rows(), p->value.cols()));
    }
    p->value = t->value;
    p->zero_grad();
  }
  return out;
}

}  // namespace tiger
