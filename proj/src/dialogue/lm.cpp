#include "courtesy/dialogue/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "courtesy/corpus/dataset.hpp"
#include "courtesy/corpus/embeddings.hpp"
#include "courtesy/errors.hpp"

namespace courtesy::dialogue {

using namespace numerics;
using corpus::Vocab;

void LmConfig::validate() const {
  if (embedding_dim <= 0 || hidden <= 0 || layers < 1) throw UsageError("lm: dims and layers must be positive");
  if (dropout < 0 || dropout >= 1) throw UsageError("lm: dropout must be in [0, 1)");
  if (patience < 1) throw UsageError("lm: patience must be >= 1");
  train.validate();
}

template <typename Scalar>
LanguageModelT<Scalar>::LanguageModelT(LmConfig config, Vocab vocab, Rng& rng, const numerics::Matrix<float>* embeddings)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  const Index v = static_cast<Index>(vocab_.size());
  if (embeddings != nullptr) {
    if (embeddings->rows() != v || embeddings->cols() != config_.embedding_dim) {
      throw DimensionError("lm: embedding table must be |V| x d");
    }
    embedding_ = Tensor<Scalar>(embeddings->template cast<Scalar>());
  } else {
    embedding_ = Tensor<Scalar>(corpus::random_embeddings(vocab_, config_.embedding_dim, rng).template cast<Scalar>());
  }
  for (int l = 0; l < config_.layers; ++l) {
    layers_.emplace_back(l == 0 ? config_.embedding_dim : config_.hidden, config_.hidden, rng);
  }
  output_ = Linear<Scalar>(config_.hidden, v, rng);
}

template <typename Scalar>
NamedParams<Scalar> LanguageModelT<Scalar>::named_parameters() {
  NamedParams<Scalar> out;
  out.emplace_back("embedding", &embedding_);
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].collect(out, "lstm." + std::to_string(l));
  output_.collect(out, "output");
  return out;
}

template <typename Scalar>
auto LanguageModelT<Scalar>::initial(Tape& tape, Index batch) const -> State {
  State s;
  for (const auto& layer : layers_) s.push_back(layer.initial(tape, batch));
  return s;
}

template <typename Scalar>
auto LanguageModelT<Scalar>::step(Tape& tape, State& state, std::span<const int> prev, bool training,
                                  Rng* dropout_rng) const -> Var {
  Var x = embedding(tape.leaf(embedding_), prev);
  if (training && config_.dropout > 0) x = dropout(x, config_.dropout, true, *dropout_rng);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    state[l] = layers_[l].step(tape, x, state[l]);
    x = state[l].h;
  }
  if (training && config_.dropout > 0) x = dropout(x, config_.dropout, true, *dropout_rng);
  return output_(tape, x);
}

template <typename Scalar>
auto LanguageModelT<Scalar>::loss(Tape& tape, std::span<const TrainExample* const> batch, bool training,
                                  Rng* dropout_rng) const -> Var {
  if (batch.empty()) throw UsageError("lm loss: empty batch");
  std::size_t longest = 0, counted = 0;
  for (const auto* ex : batch) {
    if (ex->target.empty()) throw UsageError("empty target");
    if (ex->counted.size() != ex->target.size()) throw DimensionError("target/mask length");
    longest = std::max(longest, ex->target.size());
    counted += ex->counted_tokens();
  }
  Var total = tape.constant(Matrix::Zero(1, 1));
  if (counted == 0) return total;
  const Index b_count = static_cast<Index>(batch.size());
  State state = initial(tape, b_count);
  std::vector<int> prev(batch.size(), Vocab::kEos), gold(batch.size());
  for (std::size_t t = 0; t < longest; ++t) {
    Matrix weight(1, b_count);
    bool any = false;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& ex = *batch[b];
      const bool live = t < ex.target.size() && ex.counted[t] != 0;
      gold[b] = t < ex.target.size() ? ex.target[t] : Vocab::kPad;
      weight(0, static_cast<Index>(b)) = live ? Scalar(1) : Scalar(0);
      any = any || live;
    }
    Var logits = step(tape, state, prev, training, dropout_rng);
    if (any) total = add(total, sum(mul_constant(pick(log_softmax(logits), std::span<const int>(gold)), weight)));
    prev = gold;
  }
  return scale(total, Scalar(-1) / static_cast<Scalar>(counted));
}

template class LanguageModelT<float>;
template class LanguageModelT<double>;

LmStepper::LmStepper(const LanguageModel& model, TokenMask mask)
    : model_(&model), mask_(std::move(mask)), tape_(std::make_unique<Tape<float>>(false)) {
  state_ = model.initial(*tape_, 1);
}

VocabDistribution LmStepper::next() {
  const int prev[] = {prev_};
  auto logits = model_->step(*tape_, state_, prev, false, nullptr);
  return masked_distribution(logits.value(), mask_);
}

void LmStepper::push(int token) { prev_ = token; }

Decoded lm_decode(const LanguageModel& model, DecodeMode mode, std::size_t max_len, const TokenMask& mask, Rng* rng) {
  LmStepper stepper(model, decode_mask(mask, model.vocab()));
  return run_decode([&] { return stepper.next(); }, [&](int token) { stepper.push(token); }, mode, max_len, rng);
}

double lm_perplexity(const LanguageModel& model, std::span<const TrainExample> examples) {
  if (examples.empty()) throw UsageError("perplexity: empty data set");
  double nll = 0;
  std::size_t tokens = 0;
  for (const auto& ex : examples) {
    Tape<float> tape(false);
    auto state = model.initial(tape, 1);
    int prev = Vocab::kEos;
    for (std::size_t t = 0; t < ex.target.size(); ++t) {
      const int p[] = {prev};
      const auto& z = model.step(tape, state, p, false, nullptr).value();
      if (ex.counted[t] != 0) {
        const double top = static_cast<double>(z.maxCoeff());
        double norm = 0;
        for (Index i = 0; i < z.rows(); ++i) norm += std::exp(static_cast<double>(z(i, 0)) - top);
        nll += top + std::log(norm) - static_cast<double>(z(ex.target[t], 0));
        ++tokens;
      }
      prev = ex.target[t];
    }
  }
  return tokens == 0 ? 1.0 : std::exp(nll / static_cast<double>(tokens));
}

std::vector<TrainExample> lm_examples(const Vocab& vocab, const std::vector<corpus::TokenSeq>& utterances,
                                      const TokenMask& mask, std::size_t max_len) {
  std::vector<TrainExample> out;
  for (const auto& u : utterances) {
    if (u.empty()) continue;
    out.push_back(make_example(SourceInput{}, encode_target(vocab, u, max_len), mask));
  }
  return out;
}

LanguageModel train_lm(const std::vector<corpus::TokenSeq>& utterances, const Vocab& vocab, const LmConfig& config,
                       const TokenMask& mask, const Rng& rng, LmReport* report) {
  auto examples = lm_examples(vocab, utterances, mask, config.max_len);
  if (examples.empty()) throw UsageError("train_lm: empty corpus");
  std::vector<TrainExample> train, dev;
  if (examples.size() < 10) {
    train = examples;
    dev = examples;
  } else {
    const auto order = corpus::shuffled_order(examples.size(), rng.fork(4).seed());
    const std::size_t n_dev = examples.size() / 10;
    for (std::size_t k = 0; k < order.size(); ++k) (k < n_dev ? dev : train).push_back(examples[order[k]]);
  }

  Rng init_rng = rng.fork(3);
  LanguageModel model(config, vocab, init_rng);
  auto named = model.named_parameters();
  auto params = unnamed(named);

  LmReport local;
  LmReport& r = report != nullptr ? *report : local;
  r.dev_size = dev.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<Matrix<float>> best_values;
  for (auto* p : params) best_values.push_back(p->value);
  int since_best = 0;

  run_training(
      params, train.size(), config.train, rng,
      [&](Tape<float>& tape, std::span<const std::size_t> idx, Rng& dropout_rng) {
        std::vector<const TrainExample*> batch;
        for (auto i : idx) batch.push_back(&train[i]);
        return model.loss(tape, batch, true, &dropout_rng);
      },
      &r.log,
      [&](int epoch) {
        const double ppl = lm_perplexity(model, dev);
        r.dev_perplexity.push_back(ppl);
        if (ppl < best) {
          best = ppl;
          r.best_epoch = epoch;
          since_best = 0;
          for (std::size_t k = 0; k < params.size(); ++k) best_values[k] = params[k]->value;
        } else {
          ++since_best;
        }
        return since_best < config.patience;
      });
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k]->value = best_values[k];
    params[k]->grad.resize(0, 0);
  }
  return model;
}

}  // namespace courtesy::dialogue
