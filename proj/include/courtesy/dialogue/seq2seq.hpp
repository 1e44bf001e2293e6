#pragma once

#include <memory>
#include <span>
#include <vector>

#include "courtesy/corpus/vocab.hpp"
#include "courtesy/dialogue/common.hpp"
#include "courtesy/dialogue/train.hpp"
#include "courtesy/numerics/layers.hpp"

namespace courtesy::dialogue {

struct Seq2seqConfig {
  Index embedding_dim = 300;
  Index hidden = 128;  // encoder (per direction) and decoder
  Index attention = 128;
  int encoder_layers = 2;
  int decoder_layers = 4;
  double dropout = 0.2;
  std::size_t max_len = kDefaultMaxLen;
  TrainOptions train;

  void validate() const;
};

template <typename Scalar>
using DecoderState = std::vector<numerics::LstmState<Scalar>>;

template <typename Scalar>
struct Encoded {
  numerics::Var<Scalar> memory;  // 2H x (T*B), time-major
  numerics::Var<Scalar> keys;    // attention projection of memory, A x (T*B)
  numerics::Matrix<Scalar> pad_offsets;  // T x B, 0 or a large negative; empty when nothing is padded
  Index steps = 0;
  Index batch = 0;
  DecoderState<Scalar> initial;
};

// Bidirectional multi-layer LSTM encoder, multi-layer LSTM decoder with
// additive attention from the top decoder layer, output layer
// tanh(W [s; c]) followed by the vocabulary projection.
template <typename Scalar = float>
class Seq2seqModel {
 public:
  using Tape = numerics::Tape<Scalar>;
  using Var = numerics::Var<Scalar>;
  using Matrix = numerics::Matrix<Scalar>;

  Seq2seqModel() = default;
  Seq2seqModel(Seq2seqConfig config, corpus::Vocab vocab, numerics::Rng& rng,
               const numerics::Matrix<float>* embeddings = nullptr);

  const Seq2seqConfig& config() const { return config_; }
  const corpus::Vocab& vocab() const { return vocab_; }
  const numerics::Tensor<Scalar>& embedding_table() const { return embedding_; }

  numerics::NamedParams<Scalar> named_parameters();

  Encoded<Scalar> encode(Tape& tape, std::span<const SourceInput* const> sources, bool training,
                         numerics::Rng* dropout_rng) const;

  // One decoder step for a batch of previous tokens; returns logits (|V| x B).
  Var step(Tape& tape, const Encoded<Scalar>& enc, DecoderState<Scalar>& state, std::span<const int> prev,
           bool training, numerics::Rng* dropout_rng) const;

  // Teacher-forced sum of -log p over counted target tokens (1 x 1) and the
  // number of counted tokens.
  std::pair<Var, std::size_t> target_nll(Tape& tape, const Encoded<Scalar>& enc,
                                          std::span<const TrainExample* const> batch, bool training,
                                          numerics::Rng* dropout_rng) const;

  // Mean -log p per counted token over the batch; a constant 0 when nothing
  // is counted.
  Var loss(Tape& tape, std::span<const TrainExample* const> batch, bool training, numerics::Rng* dropout_rng) const;

 private:
  Seq2seqConfig config_;
  corpus::Vocab vocab_;
  numerics::Tensor<Scalar> embedding_;
  std::vector<numerics::Lstm<Scalar>> enc_forward_;
  std::vector<numerics::Lstm<Scalar>> enc_backward_;
  std::vector<numerics::Lstm<Scalar>> decoder_;
  std::vector<numerics::Linear<Scalar>> bridge_;
  numerics::Linear<Scalar> attn_memory_;
  numerics::Linear<Scalar> attn_query_;
  numerics::Tensor<Scalar> attn_v_;
  numerics::Linear<Scalar> combine_;
  numerics::Linear<Scalar> output_;
};

extern template class Seq2seqModel<float>;
extern template class Seq2seqModel<double>;

using Seq2seq = Seq2seqModel<float>;

// Incremental decoding for one source; used by decode and by fusion.
class Seq2seqStepper {
 public:
  Seq2seqStepper(const Seq2seq& model, const SourceInput& source, TokenMask mask);

  VocabDistribution next();
  void push(int token);

 private:
  const Seq2seq* model_;
  TokenMask mask_;
  std::unique_ptr<numerics::Tape<float>> tape_;
  Encoded<float> enc_;
  DecoderState<float> state_;
  int prev_ = corpus::Vocab::kEos;
};

struct DecodeOptions {
  DecodeMode mode = DecodeMode::greedy;
  std::size_t max_len = kDefaultMaxLen;
  TokenMask mask;  // loss mask; structural tokens are added automatically
};

Decoded decode(const Seq2seq& model, const SourceInput& source, const DecodeOptions& options,
               numerics::Rng* rng = nullptr);

// Mean -log p per counted token for one example (the reported MLE loss).
double mle_loss(const Seq2seq& model, const TrainExample& example);

struct PerplexityResult {
  double perplexity = 0;
  double total_nll = 0;
  std::size_t tokens = 0;
};

// exp(total NLL / counted tokens), accumulated in double in example order.
PerplexityResult perplexity(const Seq2seq& model, std::span<const TrainExample> examples);

// Greedy hypotheses against targets; reference tokens masked out of the loss
// (and the final EOS) are dropped before scoring.
WerResult wer(const Seq2seq& model, std::span<const TrainExample> examples, const DecodeOptions& options);

Seq2seq train_dialogue(Seq2seq model, const std::vector<TrainExample>& data, const numerics::Rng& rng,
                       TrainLog* log = nullptr);

}  // namespace courtesy::dialogue
