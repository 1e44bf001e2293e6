#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtesy/corpus/dataset.hpp"
#include "courtesy/corpus/vocab.hpp"
#include "courtesy/numerics/layers.hpp"

namespace courtesy::classifier {

using numerics::Index;

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct ClassifierConfig {
  Index embedding_dim = 300;
  Index hidden = 128;  // per direction
  std::vector<Index> widths{3, 4, 5};
  Index filters = 75;  // per width
  Activation activation = Activation::relu;
  double dropout = 0.2;
  int epochs = 3;
  int batch_size = 96;
  double lr = 0.001;
  double clip_norm = 5.0;

  Index max_width() const;
  void validate() const;
};

// Probability of the Polite class.
class StyleScore {
 public:
  explicit StyleScore(double value);
  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  double value_;
};

inline constexpr int kRudeClass = 0;
inline constexpr int kPoliteClass = 1;

// Bidirectional LSTM over word embeddings, a convolution over windows of the
// concatenated hidden states for each filter width, max-pooling over time and
// a two-way softmax (rude, polite).
template <typename Scalar = float>
class ClassifierModel {
 public:
  using Tape = numerics::Tape<Scalar>;
  using Var = numerics::Var<Scalar>;
  using Matrix = numerics::Matrix<Scalar>;

  ClassifierModel() = default;
  // `embeddings`, when given, must be |V| x embedding_dim.
  ClassifierModel(ClassifierConfig config, corpus::Vocab vocab, numerics::Rng& rng,
                  const numerics::Matrix<float>* embeddings = nullptr);

  const ClassifierConfig& config() const { return config_; }
  const corpus::Vocab& vocab() const { return vocab_; }
  const numerics::Tensor<Scalar>& embedding_table() const { return embedding_; }

  numerics::NamedParams<Scalar> named_parameters();

  // Ids padded with <pad> on the right up to the largest filter width.
  std::vector<int> prepare(const corpus::TokenSeq& tokens) const;

  // Logits (2 x B) for a batch of prepared id sequences.
  Var logits(Tape& tape, std::span<const std::vector<int>> batch, bool training, numerics::Rng* dropout_rng) const;

  // Logits (2 x 1) for one sentence given as embedded columns (d x n), n >= max width.
  Var logits_from_embedded(Tape& tape, const Var& embedded) const;

  // Mean cross-entropy over the batch.
  Var loss(Tape& tape, std::span<const std::vector<int>> batch, std::span<const int> labels, bool training,
           numerics::Rng* dropout_rng) const;

 private:
  Var forward_steps(Tape& tape, std::vector<Var> steps, std::span<const Index> lengths, bool training,
                    numerics::Rng* dropout_rng) const;

  ClassifierConfig config_;
  corpus::Vocab vocab_;
  numerics::Tensor<Scalar> embedding_;
  numerics::Lstm<Scalar> forward_;
  numerics::Lstm<Scalar> backward_;
  std::vector<numerics::Linear<Scalar>> convs_;
  numerics::Linear<Scalar> output_;
};

extern template class ClassifierModel<float>;
extern template class ClassifierModel<double>;

using Classifier = ClassifierModel<float>;

struct TrainReport {
  std::vector<double> epoch_losses;
  double train_accuracy = 0;
};

// Cross-entropy training with Adam. The visiting order is a seeded shuffle of
// the examples sorted by content, so it depends only on the data set and the
// seed, not on the order the examples arrive in.
Classifier train_classifier(const std::vector<corpus::StyledUtterance>& data, const ClassifierConfig& config,
                            const corpus::Vocab& vocab, numerics::Rng& rng, TrainReport* report = nullptr,
                            const numerics::Matrix<float>* embeddings = nullptr);

// P(polite). Throws UsageError on empty input.
StyleScore score(const Classifier& model, const corpus::TokenSeq& tokens);

// Batched scoring; results match score() element by element up to float rounding.
std::vector<double> score_batch(const Classifier& model, std::span<const corpus::TokenSeq> texts,
                                std::size_t batch_size = 96);

// Per-token L2 norm over embedding dimensions of |d P(polite) / d embedding|.
std::vector<double> saliency(const Classifier& model, const corpus::TokenSeq& tokens);

// The utterances scoring strictly above `threshold`, in input order.
std::vector<corpus::TokenSeq> filter_polite(const Classifier& model, std::span<const corpus::TokenSeq> utterances,
                                            double threshold = 0.8);

double accuracy(const Classifier& model, const std::vector<corpus::StyledUtterance>& data);

struct Split {
  std::vector<corpus::StyledUtterance> train;
  std::vector<corpus::StyledUtterance> validation;
  std::vector<corpus::StyledUtterance> test;
};

// Seeded 7:1:2 train/validation/test split.
Split split_712(const std::vector<corpus::StyledUtterance>& data, std::uint64_t seed);

}  // namespace courtesy::classifier
