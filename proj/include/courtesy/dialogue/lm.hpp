#pragma once

#include <memory>
#include <span>
#include <vector>

#include "courtesy/corpus/vocab.hpp"
#include "courtesy/dialogue/common.hpp"
#include "courtesy/dialogue/train.hpp"
#include "courtesy/numerics/layers.hpp"

namespace courtesy::dialogue {

struct LmConfig {
  Index embedding_dim = 300;
  Index hidden = 128;
  int layers = 2;
  double dropout = 0.2;
  std::size_t max_len = kDefaultMaxLen;
  int patience = 2;  // epochs without dev improvement before stopping
  TrainOptions train;

  void validate() const;
};

// Word-level LSTM language model; every sequence starts from EOS.
template <typename Scalar = float>
class LanguageModelT {
 public:
  using Tape = numerics::Tape<Scalar>;
  using Var = numerics::Var<Scalar>;
  using Matrix = numerics::Matrix<Scalar>;
  using State = std::vector<numerics::LstmState<Scalar>>;

  LanguageModelT() = default;
  LanguageModelT(LmConfig config, corpus::Vocab vocab, numerics::Rng& rng,
                 const numerics::Matrix<float>* embeddings = nullptr);

  const LmConfig& config() const { return config_; }
  const corpus::Vocab& vocab() const { return vocab_; }

  numerics::NamedParams<Scalar> named_parameters();

  State initial(Tape& tape, Index batch) const;
  Var step(Tape& tape, State& state, std::span<const int> prev, bool training, numerics::Rng* dropout_rng) const;

  // Mean -log p per counted target token; constant 0 when nothing is counted.
  // Only the target side of each example is used.
  Var loss(Tape& tape, std::span<const TrainExample* const> batch, bool training, numerics::Rng* dropout_rng) const;

 private:
  LmConfig config_;
  corpus::Vocab vocab_;
  numerics::Tensor<Scalar> embedding_;
  std::vector<numerics::Lstm<Scalar>> layers_;
  numerics::Linear<Scalar> output_;
};

extern template class LanguageModelT<float>;
extern template class LanguageModelT<double>;

using LanguageModel = LanguageModelT<float>;

class LmStepper {
 public:
  LmStepper(const LanguageModel& model, TokenMask mask);

  VocabDistribution next();
  void push(int token);

 private:
  const LanguageModel* model_;
  TokenMask mask_;
  std::unique_ptr<numerics::Tape<float>> tape_;
  LanguageModel::State state_;
  int prev_ = corpus::Vocab::kEos;
};

// Continuation from the start symbol.
Decoded lm_decode(const LanguageModel& model, DecodeMode mode, std::size_t max_len, const TokenMask& mask,
                  numerics::Rng* rng = nullptr);

double lm_perplexity(const LanguageModel& model, std::span<const TrainExample> examples);

// LM examples: target = utterance + EOS with the loss mask applied; no source.
std::vector<TrainExample> lm_examples(const corpus::Vocab& vocab, const std::vector<corpus::TokenSeq>& utterances,
                                      const TokenMask& mask, std::size_t max_len = kDefaultMaxLen);

struct LmReport {
  TrainLog log;
  std::vector<double> dev_perplexity;  // one per finished epoch
  int best_epoch = -1;
  std::size_t dev_size = 0;
};

// Trains on a seeded 90/10 train/dev split (dev = train below 10 utterances)
// and returns the parameters of the epoch with the lowest dev perplexity,
// stopping after `patience` epochs without improvement.
LanguageModel train_lm(const std::vector<corpus::TokenSeq>& utterances, const corpus::Vocab& vocab,
                       const LmConfig& config, const TokenMask& mask, const numerics::Rng& rng,
                       LmReport* report = nullptr);

}  // namespace courtesy::dialogue
