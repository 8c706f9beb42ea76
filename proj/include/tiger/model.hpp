#pragma once

// Bi-encoder with a three-stack GCN branch. Two text encoders (mention and
// entity) score candidates by dot product; during training the entity vector
// is fused with the entity's four graph embeddings, and the graph stacks are
// regularized by the consistency (shared) and HSIC (distinct) terms.

#include "tiger/numerics/gradcheck.hpp"
#include "tiger/numerics/ops.hpp"
#include "tiger/tokenizer.hpp"
#include "tiger/util.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace tiger {

enum class EncoderKind { attention, average };

struct ModelConfig {
  int vocab_size = Tokenizer::kNumSpecial;
  int max_len = 128;
  int dim = 64;
  int encoder_layers = 2;
  EncoderKind encoder = EncoderKind::attention;
  int feature_dim = 0;  // columns of X
  int gcn_layers = 2;
  int gcn_hidden = 32;
  int gcn_out = 16;
  bool graph_branch = true;
};

struct LossWeights {
  double a = 0.5;   // consistency
  double b = 0.01;  // distinct
};

inline double total_loss(double el, double shared, double distinct, const LossWeights& w) {
  return el + w.a * shared + w.b * distinct;
}

template <typename Scalar>
Scalar score(const RowVector<Scalar>& mention, const RowVector<Scalar>& entity) {
  return static_cast<Scalar>(mention.template cast<double>().dot(entity.template cast<double>()));
}

namespace detail {

/// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from a stream keyed by the name.
template <typename Scalar>
Parameter<Scalar> init_param(std::string name, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                             std::uint64_t seed) {
  Rng rng(derive_seed(seed, name));
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
  return Parameter<Scalar>(std::move(name), std::move(m));
}

}  // namespace detail

template <typename Scalar>
class TextEncoder {
 public:
  struct Layer {
    Parameter<Scalar> wq, wk, wv;
  };

  TextEncoder() = default;
  TextEncoder(const std::string& prefix, const ModelConfig& cfg, std::uint64_t seed) : kind_(cfg.encoder), dim_(cfg.dim) {
    // Embedding tables take fan_in = dim; a one-hot fan_in would shrink them to nothing.
    tokens_ = detail::init_param<Scalar>(prefix + ".tok_embed", cfg.vocab_size, cfg.dim, cfg.dim, seed);
    positions_ = detail::init_param<Scalar>(prefix + ".pos_embed", cfg.max_len, cfg.dim, cfg.dim, seed);
    if (kind_ == EncoderKind::attention) {
      for (int l = 0; l < cfg.encoder_layers; ++l) {
        const std::string p = prefix + ".layer" + std::to_string(l);
        layers_.push_back({detail::init_param<Scalar>(p + ".wq", cfg.dim, cfg.dim, cfg.dim, seed),
                           detail::init_param<Scalar>(p + ".wk", cfg.dim, cfg.dim, cfg.dim, seed),
                           detail::init_param<Scalar>(p + ".wv", cfg.dim, cfg.dim, cfg.dim, seed)});
      }
    }
  }

  /// Position-0 output vector (1 x dim). [PAD] positions are masked out.
  Var<Scalar> encode(Tape<Scalar>& tape, const TokenSeq& seq) {
    std::vector<int> ids;
    ids.reserve(seq.size());
    for (auto t : seq) {
      if (t == Tokenizer::kPad) continue;
      if (t < 0 || t >= tokens_.value.rows()) throw NumericError("encode: token id out of vocabulary range");
      ids.push_back(t);
    }
    if (ids.empty()) throw NumericError("encode: empty sequence");
    if (static_cast<Eigen::Index>(ids.size()) > positions_.value.rows()) {
      throw NumericError("encode: sequence longer than max_len");
    }
    std::vector<int> pos(ids.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);
    auto h = gather_rows(tape.leaf(tokens_), std::move(ids)) + gather_rows(tape.leaf(positions_), std::move(pos));
    if (kind_ == EncoderKind::average) return mean_rows(h);
    const Scalar inv_sqrt_d = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(dim_)));
    for (auto& layer : layers_) {
      auto q = matmul(h, tape.leaf(layer.wq));
      auto k = matmul(h, tape.leaf(layer.wk));
      auto v = matmul(h, tape.leaf(layer.wv));
      auto attn = softmax_rows(scale(matmul_nt(q, k), inv_sqrt_d));
      h = h + tanh(matmul(attn, v));
    }
    return row(h, 0);
  }

  RowVector<Scalar> encode_value(const TokenSeq& seq) {
    Tape<Scalar> tape(false);
    return encode(tape, seq).value();
  }

  std::vector<Parameter<Scalar>*> parameters() {
    std::vector<Parameter<Scalar>*> out{&tokens_, &positions_};
    for (auto& l : layers_) {
      out.push_back(&l.wq);
      out.push_back(&l.wk);
      out.push_back(&l.wv);
    }
    return out;
  }

 private:
  EncoderKind kind_ = EncoderKind::attention;
  int dim_ = 0;
  Parameter<Scalar> tokens_, positions_;
  std::vector<Layer> layers_;
};

/// Normalized adjacencies and sparse features of one snapshot.
template <typename Scalar>
struct GraphInputs {
  SparseMatrix<Scalar> feature_adj;    // S_f
  SparseMatrix<Scalar> structure_adj;  // S_r
  SparseMatrix<Scalar> features;       // X

  std::int64_t n() const { return features.rows(); }
};

template <typename Scalar>
GraphInputs<Scalar> make_graph_inputs(const AdjacencyMatrix& feature, const AdjacencyMatrix& structure,
                                      const FeatureMatrix& x) {
  if (feature.n != structure.n || feature.n != x.n) {
    throw NumericError("graph inputs: node counts differ (feature " + std::to_string(feature.n) + ", structure " +
                       std::to_string(structure.n) + ", X " + std::to_string(x.n) + ")");
  }
  return {sym_normalize<Scalar>(feature), sym_normalize<Scalar>(structure), to_sparse<Scalar>(x)};
}

template <typename Scalar>
struct GcnOutputs {
  Var<Scalar> zf, zr, zsf, zsr;
};

template <typename Scalar>
class GcnStack {
 public:
  GcnStack() = default;
  GcnStack(const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.gcn_layers < 1) throw std::invalid_argument("gcn: at least one layer required");
    std::vector<int> dims{cfg.feature_dim};
    for (int l = 0; l + 1 < cfg.gcn_layers; ++l) dims.push_back(cfg.gcn_hidden);
    dims.push_back(cfg.gcn_out);
    for (int l = 0; l < cfg.gcn_layers; ++l) {
      const auto in = dims[static_cast<std::size_t>(l)], out = dims[static_cast<std::size_t>(l) + 1];
      const std::string sfx = std::to_string(l);
      wf_.push_back(detail::init_param<Scalar>("gcn.wf" + sfx, in, out, in, seed));
      wr_.push_back(detail::init_param<Scalar>("gcn.wr" + sfx, in, out, in, seed));
      ws_.push_back(detail::init_param<Scalar>("gcn.ws" + sfx, in, out, in, seed));
    }
  }

  /// Z_f from (S_f, W_f), Z_r from (S_r, W_r), and the shared W_s applied to
  /// both graphs; relu after every layer.
  GcnOutputs<Scalar> forward(Tape<Scalar>& tape, const GraphInputs<Scalar>& g) {
    if (g.feature_adj.rows() != g.n() || g.structure_adj.rows() != g.n()) {
      throw NumericError("gcn_forward: adjacency and feature row counts differ");
    }
    if (!wf_.empty() && g.features.cols() != wf_.front().value.rows()) {
      throw NumericError("gcn_forward: X has " + std::to_string(g.features.cols()) + " columns, stack expects " +
                         std::to_string(wf_.front().value.rows()));
    }
    return {propagate(tape, g.feature_adj, g.features, wf_), propagate(tape, g.structure_adj, g.features, wr_),
            propagate(tape, g.feature_adj, g.features, ws_), propagate(tape, g.structure_adj, g.features, ws_)};
  }

  std::vector<Parameter<Scalar>*> parameters() {
    std::vector<Parameter<Scalar>*> out;
    for (auto* stack : {&wf_, &wr_, &ws_}) {
      for (auto& p : *stack) out.push_back(&p);
    }
    return out;
  }

 private:
  static Var<Scalar> propagate(Tape<Scalar>& tape, const SparseMatrix<Scalar>& s, const SparseMatrix<Scalar>& x,
                               std::vector<Parameter<Scalar>>& weights) {
    auto z = relu(spmm(s, spmm(x, tape.leaf(weights.front()))));
    for (std::size_t l = 1; l < weights.size(); ++l) z = relu(spmm(s, matmul(z, tape.leaf(weights[l]))));
    return z;
  }

  std::vector<Parameter<Scalar>> wf_, wr_, ws_;
};

template <typename Scalar>
class FusionHead {
 public:
  FusionHead() = default;
  FusionHead(const ModelConfig& cfg, std::uint64_t seed)
      : proj_(detail::init_param<Scalar>("fusion.p", 4 * cfg.gcn_out, cfg.dim, 4 * cfg.gcn_out, seed)) {}

  /// y_e + concat(z_r, z_f, z_sr, z_sf) * P, one row per entity.
  Var<Scalar> fuse(Tape<Scalar>& tape, const Var<Scalar>& ye, const Var<Scalar>& zf, const Var<Scalar>& zr,
                   const Var<Scalar>& zsf, const Var<Scalar>& zsr) {
    return ye + matmul(concat_cols<Scalar>({zr, zf, zsr, zsf}), tape.leaf(proj_));
  }

  Parameter<Scalar>& projection() { return proj_; }

  /// Zeroes P and excludes it from updates.
  void freeze_at_zero() {
    proj_.value.setZero();
    proj_.trainable = false;
  }

 private:
  Parameter<Scalar> proj_;
};

template <typename Scalar>
class Model {
 public:
  Model() = default;
  Model(const ModelConfig& cfg, std::uint64_t seed)
      : config_(cfg), mention_(TextEncoder<Scalar>("mention_encoder", cfg, seed)),
        entity_(TextEncoder<Scalar>("entity_encoder", cfg, seed)) {
    if (cfg.graph_branch) {
      gcn_ = GcnStack<Scalar>(cfg, seed);
      fusion_ = FusionHead<Scalar>(cfg, seed);
    }
  }

  const ModelConfig& config() const { return config_; }
  TextEncoder<Scalar>& mention_encoder() { return mention_; }
  TextEncoder<Scalar>& entity_encoder() { return entity_; }
  GcnStack<Scalar>& gcn() { return gcn_; }
  FusionHead<Scalar>& fusion() { return fusion_; }

  /// Every parameter in a fixed order: encoders, GCN stacks, fusion.
  std::vector<Parameter<Scalar>*> parameters() {
    auto out = text_parameters();
    if (config_.graph_branch) {
      for (auto* p : gcn_.parameters()) out.push_back(p);
      out.push_back(&fusion_.projection());
    }
    return out;
  }

  std::vector<Parameter<Scalar>*> text_parameters() {
    auto out = mention_.parameters();
    for (auto* p : entity_.parameters()) out.push_back(p);
    return out;
  }

  Parameter<Scalar>* find(const std::string& name) {
    for (auto* p : parameters()) {
      if (p->name == name) return p;
    }
    return nullptr;
  }

 private:
  ModelConfig config_;
  TextEncoder<Scalar> mention_;
  TextEncoder<Scalar> entity_;
  GcnStack<Scalar> gcn_;
  FusionHead<Scalar> fusion_;
};

template <typename Scalar>
Var<Scalar> consistency_loss(const Var<Scalar>& zsr, const Var<Scalar>& zsf) {
  return frob_sq_diff(gram(zsr), gram(zsf));
}

template <typename Scalar>
Var<Scalar> distinct_loss(const Var<Scalar>& zr, const Var<Scalar>& zsr, const Var<Scalar>& zf,
                          const Var<Scalar>& zsf) {
  return hsic(zr, zsr) + hsic(zf, zsf);
}

template <typename Scalar>
Var<Scalar> total_loss(const Var<Scalar>& el, const Var<Scalar>& shared, const Var<Scalar>& distinct,
                       const LossWeights& w) {
  return el + scale(shared, static_cast<Scalar>(w.a)) + scale(distinct, static_cast<Scalar>(w.b));
}

/// One batch of the joint objective.
struct BatchInputs {
  std::vector<TokenSeq> mentions;
  std::vector<TokenSeq> candidates;       // entity-side sequences
  std::vector<int> candidate_rows;        // snapshot rows of the candidates
  std::vector<int> gold;                  // gold candidate column per mention
  std::vector<int> gram_rows;             // rows for L_s / L_d; empty = all nodes
};

template <typename Scalar>
struct LossTerms {
  Var<Scalar> el, shared, distinct_r, distinct_f, distinct, total;
};

/// Forward pass of the full objective: encode, run the GCN stacks, fuse,
/// score, and assemble L = L_e + a L_s + b (L_dr + L_df). Without a graph
/// branch (or graphs == nullptr) the graph terms are constant zero.
template <typename Scalar>
LossTerms<Scalar> compute_losses(Tape<Scalar>& tape, Model<Scalar>& model, const GraphInputs<Scalar>* graphs,
                                 const BatchInputs& batch, const LossWeights& weights) {
  if (batch.mentions.empty()) throw NumericError("compute_losses: empty batch");
  std::vector<Var<Scalar>> ym, ye;
  ym.reserve(batch.mentions.size());
  ye.reserve(batch.candidates.size());
  for (const auto& s : batch.mentions) ym.push_back(model.mention_encoder().encode(tape, s));
  for (const auto& s : batch.candidates) ye.push_back(model.entity_encoder().encode(tape, s));
  auto mentions = stack_rows(ym);
  auto entities = stack_rows(ye);

  LossTerms<Scalar> t;
  Matrix<Scalar> zero = Matrix<Scalar>::Zero(1, 1);
  if (model.config().graph_branch && graphs != nullptr) {
    auto z = model.gcn().forward(tape, *graphs);
    auto pick = [&](const Var<Scalar>& v) { return gather_rows(v, batch.candidate_rows); };
    entities = model.fusion().fuse(tape, entities, pick(z.zf), pick(z.zr), pick(z.zsf), pick(z.zsr));
    GcnOutputs<Scalar> zs = z;
    if (!batch.gram_rows.empty()) {
      zs = {gather_rows(z.zf, batch.gram_rows), gather_rows(z.zr, batch.gram_rows),
            gather_rows(z.zsf, batch.gram_rows), gather_rows(z.zsr, batch.gram_rows)};
    }
    t.shared = consistency_loss(zs.zsr, zs.zsf);
    t.distinct_r = hsic(zs.zr, zs.zsr);
    t.distinct_f = hsic(zs.zf, zs.zsf);
    t.distinct = t.distinct_r + t.distinct_f;
  } else {
    t.shared = tape.constant(zero);
    t.distinct_r = tape.constant(zero);
    t.distinct_f = tape.constant(zero);
    t.distinct = tape.constant(zero);
  }
  t.el = softmax_xent(matmul_nt(mentions, entities), batch.gold);
  t.total = total_loss(t.el, t.shared, t.distinct, weights);
  return t;
}

}  // namespace tiger
