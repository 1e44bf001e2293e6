#include "courtesy/classifier/classifier.hpp"

#include <algorithm>
#include <numeric>

#include "courtesy/corpus/embeddings.hpp"
#include "courtesy/errors.hpp"

namespace courtesy::classifier {

using namespace numerics;

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw UsageError("unknown activation '" + name + "'");
}

Index ClassifierConfig::max_width() const { return *std::max_element(widths.begin(), widths.end()); }

void ClassifierConfig::validate() const {
  if (embedding_dim <= 0 || hidden <= 0) throw UsageError("classifier: dims must be positive");
  if (widths.empty()) throw UsageError("classifier: at least one filter width");
  for (Index w : widths) {
    if (w < 1) throw UsageError("classifier: filter widths must be >= 1");
  }
  if (filters < 1) throw UsageError("classifier: filters must be >= 1");
  if (dropout < 0 || dropout >= 1) throw UsageError("classifier: dropout must be in [0, 1)");
  if (epochs < 0 || batch_size < 1) throw UsageError("classifier: bad epochs/batch size");
}

StyleScore::StyleScore(double value) : value_(value) {
  if (!(value >= 0 && value <= 1)) throw UsageError("style score must lie in [0, 1]");
}

template <typename Scalar>
ClassifierModel<Scalar>::ClassifierModel(ClassifierConfig config, corpus::Vocab vocab, Rng& rng,
                                         const numerics::Matrix<float>* embeddings)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  const Index v = static_cast<Index>(vocab_.size());
  if (embeddings != nullptr) {
    if (embeddings->rows() != v || embeddings->cols() != config_.embedding_dim) {
      throw DimensionError("classifier: embedding table must be |V| x embedding_dim");
    }
    embedding_ = Tensor<Scalar>(embeddings->template cast<Scalar>());
  } else {
    embedding_ = Tensor<Scalar>(corpus::random_embeddings(vocab_, config_.embedding_dim, rng).template cast<Scalar>());
  }
  embedding_.value.row(corpus::Vocab::kPad).setZero();
  forward_ = Lstm<Scalar>(config_.embedding_dim, config_.hidden, rng);
  backward_ = Lstm<Scalar>(config_.embedding_dim, config_.hidden, rng);
  for (Index w : config_.widths) convs_.emplace_back(w * 2 * config_.hidden, config_.filters, rng);
  output_ = Linear<Scalar>(static_cast<Index>(config_.widths.size()) * config_.filters, 2, rng);
}

template <typename Scalar>
NamedParams<Scalar> ClassifierModel<Scalar>::named_parameters() {
  NamedParams<Scalar> out;
  out.emplace_back("embedding", &embedding_);
  forward_.collect(out, "lstm.forward");
  backward_.collect(out, "lstm.backward");
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    convs_[k].collect(out, "conv" + std::to_string(config_.widths[k]));
  }
  output_.collect(out, "output");
  return out;
}

template <typename Scalar>
std::vector<int> ClassifierModel<Scalar>::prepare(const corpus::TokenSeq& tokens) const {
  if (tokens.empty()) throw UsageError("classifier: empty input");
  std::vector<int> ids = vocab_.encode(tokens);
  while (static_cast<Index>(ids.size()) < config_.max_width()) ids.push_back(corpus::Vocab::kPad);
  return ids;
}

template <typename Scalar>
auto ClassifierModel<Scalar>::forward_steps(Tape& tape, std::vector<Var> steps, std::span<const Index> lengths,
                                            bool training, Rng* dropout_rng) const -> Var {
  const Index time = static_cast<Index>(steps.size());
  const Index batch = static_cast<Index>(lengths.size());
  const bool ragged = std::any_of(lengths.begin(), lengths.end(), [&](Index l) { return l != time; });
  std::vector<Matrix> keep;
  if (ragged) {
    for (Index t = 0; t < time; ++t) {
      Matrix live(1, batch);
      for (Index b = 0; b < batch; ++b) live(0, b) = t < lengths[static_cast<std::size_t>(b)] ? Scalar(1) : Scalar(0);
      keep.push_back(std::move(live));
    }
  }
  if (training && config_.dropout > 0) {
    for (auto& s : steps) s = dropout(s, config_.dropout, true, *dropout_rng);
  }
  auto bi = run_bidirectional(tape, forward_, backward_, std::span<const Var>(steps), std::span<const Matrix>(keep));

  std::vector<Var> pooled;
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    const Index width = config_.widths[k];
    std::vector<Var> windows;
    for (Index start = 0; start + width <= time; ++start) {
      std::vector<Var> stacked(bi.outputs.begin() + start, bi.outputs.begin() + start + width);
      Var feature = convs_[k](tape, concat_rows(std::span<const Var>(stacked)));
      feature = config_.activation == Activation::relu ? relu(feature) : numerics::tanh(feature);
      if (ragged) {
        // Windows running past an example's end must never win the max.
        Matrix offset = Matrix::Zero(config_.filters, batch);
        bool any = false;
        for (Index b = 0; b < batch; ++b) {
          if (start + width > lengths[static_cast<std::size_t>(b)]) {
            offset.col(b).setConstant(Scalar(-1e6));
            any = true;
          }
        }
        if (any) feature = add_constant(feature, offset);
      }
      windows.push_back(feature);
    }
    pooled.push_back(max_over(std::span<const Var>(windows)));
  }
  Var features = concat_rows(std::span<const Var>(pooled));
  if (training && config_.dropout > 0) features = dropout(features, config_.dropout, true, *dropout_rng);
  return output_(tape, features);
}

template <typename Scalar>
auto ClassifierModel<Scalar>::logits(Tape& tape, std::span<const std::vector<int>> batch, bool training,
                                     Rng* dropout_rng) const -> Var {
  if (batch.empty()) throw UsageError("classifier: empty batch");
  std::vector<Index> lengths;
  Index time = 0;
  for (const auto& ids : batch) {
    if (static_cast<Index>(ids.size()) < config_.max_width()) throw UsageError("classifier: input shorter than max width");
    lengths.push_back(static_cast<Index>(ids.size()));
    time = std::max(time, lengths.back());
  }
  Var table = tape.leaf(embedding_);
  std::vector<Var> steps;
  std::vector<int> column(batch.size());
  for (Index t = 0; t < time; ++t) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      column[b] = t < lengths[b] ? batch[b][static_cast<std::size_t>(t)] : corpus::Vocab::kPad;
    }
    steps.push_back(embedding(table, std::span<const int>(column)));
  }
  return forward_steps(tape, std::move(steps), lengths, training, dropout_rng);
}

template <typename Scalar>
auto ClassifierModel<Scalar>::logits_from_embedded(Tape& tape, const Var& embedded) const -> Var {
  const Index n = embedded.cols();
  if (embedded.rows() != config_.embedding_dim || n < config_.max_width()) {
    throw DimensionError("classifier: embedded input must be d x n with n >= max width");
  }
  std::vector<Var> steps;
  for (Index t = 0; t < n; ++t) steps.push_back(slice_cols(embedded, t, 1));
  const std::vector<Index> lengths{n};
  return forward_steps(tape, std::move(steps), lengths, false, nullptr);
}

template <typename Scalar>
auto ClassifierModel<Scalar>::loss(Tape& tape, std::span<const std::vector<int>> batch, std::span<const int> labels,
                                   bool training, Rng* dropout_rng) const -> Var {
  if (labels.size() != batch.size()) throw DimensionError("classifier: one label per example");
  Var logp = log_softmax(logits(tape, batch, training, dropout_rng));
  return scale(sum(pick(logp, labels)), Scalar(-1) / static_cast<Scalar>(batch.size()));
}

template class ClassifierModel<float>;
template class ClassifierModel<double>;

Classifier train_classifier(const std::vector<corpus::StyledUtterance>& data, const ClassifierConfig& config,
                            const corpus::Vocab& vocab, Rng& rng, TrainReport* report,
                            const Matrix<float>* embeddings) {
  if (data.empty()) throw UsageError("train_classifier: empty data");
  const bool has_polite = std::any_of(data.begin(), data.end(), [](const auto& u) { return u.label == corpus::Politeness::polite; });
  const bool has_rude = std::any_of(data.begin(), data.end(), [](const auto& u) { return u.label == corpus::Politeness::rude; });
  if (!has_polite || !has_rude) throw UsageError("train_classifier: both classes must be present");

  Rng init_rng = rng.fork(1);
  Rng shuffle_rng = rng.fork(2);
  Rng dropout_rng = rng.fork(3);
  Classifier model(config, vocab, init_rng, embeddings);

  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
  std::vector<std::string> keys;
  for (const auto& u : data) {
    ids.push_back(model.prepare(u.text));
    labels.push_back(static_cast<int>(u.label));
    keys.push_back(corpus::join(u.text) + '\t' + std::to_string(labels.back()));
  }
  std::vector<std::size_t> canonical(data.size());
  std::iota(canonical.begin(), canonical.end(), 0);
  std::stable_sort(canonical.begin(), canonical.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  auto named = model.named_parameters();
  auto params = unnamed(named);
  auto adam = make_adam(params, AdamOptions{.lr = config.lr});
  Tensor<float>* table = named.front().second;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order = canonical;
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double total = 0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<std::vector<int>> batch;
      std::vector<int> batch_labels;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(ids[order[k]]);
        batch_labels.push_back(labels[order[k]]);
      }
      zero_grads(params);
      Tape<float> tape;
      auto loss = model.loss(tape, batch, batch_labels, true, &dropout_rng);
      total += loss.scalar();
      ++batches;
      tape.backward(loss);
      table->grad.row(corpus::Vocab::kPad).setZero();
      clip_grad_norm(params, config.clip_norm);
      adam_step(params, adam);
    }
    if (report != nullptr) report->epoch_losses.push_back(total / std::max(batches, 1));
  }
  if (report != nullptr) report->train_accuracy = accuracy(model, data);
  return model;
}

StyleScore score(const Classifier& model, const corpus::TokenSeq& tokens) {
  const std::vector<std::vector<int>> batch{model.prepare(tokens)};
  Tape<float> tape(false);
  auto p = softmax(model.logits(tape, batch, false, nullptr));
  return StyleScore(std::clamp(static_cast<double>(p.value()(kPoliteClass, 0)), 0.0, 1.0));
}

std::vector<double> score_batch(const Classifier& model, std::span<const corpus::TokenSeq> texts,
                                std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size) {
    const std::size_t end = std::min(texts.size(), start + batch_size);
    std::vector<std::vector<int>> batch;
    for (std::size_t k = start; k < end; ++k) batch.push_back(model.prepare(texts[k]));
    Tape<float> tape(false);
    auto p = softmax(model.logits(tape, batch, false, nullptr));
    for (Index b = 0; b < p.cols(); ++b) out.push_back(std::clamp(static_cast<double>(p.value()(kPoliteClass, b)), 0.0, 1.0));
  }
  return out;
}

std::vector<double> saliency(const Classifier& model, const corpus::TokenSeq& tokens) {
  const std::vector<int> ids = model.prepare(tokens);
  Tape<float> tape;
  tape.freeze_leaves();
  Var<float> table = tape.leaf(model.embedding_table());
  Tensor<float> embedded(embedding(table, std::span<const int>(ids)).value());
  auto p = softmax(model.logits_from_embedded(tape, tape.input(embedded)));
  tape.backward(slice_rows(p, kPoliteClass, 1));
  std::vector<double> out;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    out.push_back(embedded.grad.col(static_cast<Index>(t)).template cast<double>().norm());
  }
  return out;
}

std::vector<corpus::TokenSeq> filter_polite(const Classifier& model, std::span<const corpus::TokenSeq> utterances,
                                            double threshold) {
  if (threshold < 0 || threshold > 1) throw UsageError("filter_polite: threshold must lie in [0, 1]");
  std::vector<corpus::TokenSeq> out;
  for (const auto& u : utterances) {
    if (score(model, u).value() > threshold) out.push_back(u);
  }
  return out;
}

double accuracy(const Classifier& model, const std::vector<corpus::StyledUtterance>& data) {
  if (data.empty()) return 0;
  std::vector<corpus::TokenSeq> texts;
  for (const auto& u : data) texts.push_back(u.text);
  const auto scores = score_batch(model, texts);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool predicted_polite = scores[i] > 0.5;
    correct += predicted_polite == (data[i].label == corpus::Politeness::polite);
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Split split_712(const std::vector<corpus::StyledUtterance>& data, std::uint64_t seed) {
  const auto order = corpus::shuffled_order(data.size(), seed);
  const std::size_t n_train = data.size() * 7 / 10;
  const std::size_t n_val = data.size() / 10;
  Split split;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& bucket = k < n_train ? split.train : (k < n_train + n_val ? split.validation : split.test);
    bucket.push_back(data[order[k]]);
  }
  return split;
}

}  // namespace courtesy::classifier
