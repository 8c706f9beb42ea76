#pragma once

#include "tiger/checkpoint.hpp"
#include "tiger/model.hpp"
#include "tiger/snapshot.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace tiger {

enum class NegativeMode { in_batch, global };

struct TrainConfig {
  double learning_rate = 1e-5;
  int epochs = 1;
  int batch_size = 32;
  int max_len = 128;
  LossWeights weights;
  int gram_sample = 1024;    // rows per step when n exceeds gram_full_max
  int gram_full_max = 2048;  // use every node up to this size
  std::uint64_t seed = 0;
  double clip_norm = 1.0;    // <= 0 disables clipping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  NegativeMode negatives = NegativeMode::in_batch;
  int num_negatives = 0;     // extra random entities per batch in global mode
  bool freeze_fusion_zero = false;

  void validate() const;
};

std::map<std::string, std::string> to_meta(const ModelConfig& m);
std::map<std::string, std::string> to_meta(const TrainConfig& t);
ModelConfig model_config_from_meta(const std::map<std::string, std::string>& meta);
TrainConfig train_config_from_meta(const std::map<std::string, std::string>& meta);

/// Shuffles [0, count) with the seed and cuts it into consecutive batches.
std::vector<std::vector<int>> make_batches(std::size_t count, int batch_size, std::uint64_t seed);

struct LossRecord {
  std::int64_t step = 0;
  double el = 0, shared = 0, distinct = 0, total = 0;
};

/// CSV with header "step,L_e,L_s,L_d,L_total".
std::string format_loss_curve(const std::vector<LossRecord>& records);

struct AdamState {
  std::vector<MatrixF> m, v;
};

/// Single-writer training loop over one snapshot.
class Trainer {
 public:
  /// Fresh model. The snapshot must outlive the trainer.
  Trainer(const Snapshot& snapshot, const std::vector<MentionRecord>& mentions, ModelConfig model_cfg,
          TrainConfig train_cfg);
  /// Restores model, optimizer state and counters from a checkpoint.
  Trainer(const Snapshot& snapshot, const std::vector<MentionRecord>& mentions, const Checkpoint& ckpt);

  /// One forward/backward/update over the mentions at the given positions.
  LossRecord train_step(const std::vector<int>& batch);
  /// Runs `epochs` full passes (config epochs when negative).
  std::vector<LossRecord> train(int epochs = -1);

  /// Mean losses over the given mentions without updating anything.
  LossRecord evaluate_losses(const std::vector<int>& batch);

  Checkpoint checkpoint() const;

  Model<float>& model() { return *model_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  const TrainConfig& config() const { return cfg_; }
  std::int64_t step() const { return step_; }
  std::int64_t epoch() const { return epoch_; }
  std::size_t mention_count() const { return mention_seqs_.size(); }

 private:
  void prepare(const std::vector<MentionRecord>& mentions);
  BatchInputs assemble(const std::vector<int>& batch, Rng& rng) const;
  LossTerms<float> forward(Tape<float>& tape, const std::vector<int>& batch, Rng& rng);
  void apply_update();

  const Snapshot* snapshot_;
  TrainConfig cfg_;
  Tokenizer tokenizer_;
  std::unique_ptr<Model<float>> model_;
  std::unique_ptr<GraphInputs<float>> graphs_;
  std::vector<TokenSeq> mention_seqs_;
  std::vector<int> gold_rows_;
  std::vector<TokenSeq> entity_seqs_;
  AdamState adam_;
  std::int64_t step_ = 0;
  std::int64_t epoch_ = 0;
};

/// Rebuilds model and tokenizer from a checkpoint (inference only).
struct LoadedModel {
  Tokenizer tokenizer;
  std::unique_ptr<Model<float>> model;
};
LoadedModel load_model(const Checkpoint& ckpt);

/// Writes every model parameter into the checkpoint tensors.
void store_parameters(Model<float>& model, Checkpoint& ckpt);

}  // namespace tiger
