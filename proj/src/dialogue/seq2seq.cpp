#include "courtesy/dialogue/seq2seq.hpp"

#include <algorithm>
#include <cmath>

#include "courtesy/corpus/embeddings.hpp"
#include "courtesy/errors.hpp"

namespace courtesy::dialogue {

using namespace numerics;
using corpus::Vocab;

namespace {

constexpr double kPadScore = -1e6;

}  // namespace

void Seq2seqConfig::validate() const {
  if (embedding_dim <= 0 || hidden <= 0 || attention <= 0) throw UsageError("seq2seq: dims must be positive");
  if (encoder_layers < 1 || decoder_layers < 1) throw UsageError("seq2seq: at least one layer each side");
  if (dropout < 0 || dropout >= 1) throw UsageError("seq2seq: dropout must be in [0, 1)");
  if (max_len < 1) throw UsageError("seq2seq: max_len must be >= 1");
  train.validate();
}

template <typename Scalar>
Seq2seqModel<Scalar>::Seq2seqModel(Seq2seqConfig config, Vocab vocab, Rng& rng,
                                   const numerics::Matrix<float>* embeddings)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  const Index v = static_cast<Index>(vocab_.size());
  const Index d = config_.embedding_dim, h = config_.hidden;
  if (embeddings != nullptr) {
    if (embeddings->rows() != v || embeddings->cols() != d) throw DimensionError("seq2seq: embedding table must be |V| x d");
    embedding_ = Tensor<Scalar>(embeddings->template cast<Scalar>());
  } else {
    embedding_ = Tensor<Scalar>(corpus::random_embeddings(vocab_, d, rng).template cast<Scalar>());
  }
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const Index in = l == 0 ? d : 2 * h;
    enc_forward_.emplace_back(in, h, rng);
    enc_backward_.emplace_back(in, h, rng);
  }
  for (int l = 0; l < config_.decoder_layers; ++l) {
    decoder_.emplace_back(l == 0 ? d : h, h, rng);
    bridge_.emplace_back(2 * h, h, rng);
  }
  attn_memory_ = Linear<Scalar>(2 * h, config_.attention, rng);
  attn_query_ = Linear<Scalar>(h, config_.attention, rng);
  attn_v_ = Tensor<Scalar>(xavier<Scalar>(1, config_.attention, rng));
  combine_ = Linear<Scalar>(3 * h, h, rng);
  output_ = Linear<Scalar>(h, v, rng);
}

template <typename Scalar>
NamedParams<Scalar> Seq2seqModel<Scalar>::named_parameters() {
  NamedParams<Scalar> out;
  out.emplace_back("embedding", &embedding_);
  for (std::size_t l = 0; l < enc_forward_.size(); ++l) {
    enc_forward_[l].collect(out, "encoder." + std::to_string(l) + ".forward");
    enc_backward_[l].collect(out, "encoder." + std::to_string(l) + ".backward");
  }
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    decoder_[l].collect(out, "decoder." + std::to_string(l));
    bridge_[l].collect(out, "bridge." + std::to_string(l));
  }
  attn_memory_.collect(out, "attention.memory");
  attn_query_.collect(out, "attention.query");
  out.emplace_back("attention.v", &attn_v_);
  combine_.collect(out, "combine");
  output_.collect(out, "output");
  return out;
}

template <typename Scalar>
Encoded<Scalar> Seq2seqModel<Scalar>::encode(Tape& tape, std::span<const SourceInput* const> sources, bool training,
                                             Rng* dropout_rng) const {
  if (sources.empty()) throw UsageError("encode: empty batch");
  const Index batch = static_cast<Index>(sources.size());
  Index steps = 0;
  bool ragged = false;
  for (const auto* s : sources) {
    if (s->ids.empty()) throw UsageError("encode: empty source");
    if (!s->scales.empty() && s->scales.size() != s->ids.size()) throw DimensionError("encode: scales/ids length");
    if (steps != 0 && static_cast<Index>(s->ids.size()) != steps) ragged = true;
    steps = std::max(steps, static_cast<Index>(s->ids.size()));
  }
  ragged = ragged || std::any_of(sources.begin(), sources.end(),
                                 [&](const SourceInput* s) { return static_cast<Index>(s->ids.size()) != steps; });

  Var table = tape.leaf(embedding_);
  std::vector<Var> inputs;
  std::vector<Matrix> keep;
  std::vector<int> column(sources.size());
  std::vector<Scalar> scales(sources.size());
  for (Index t = 0; t < steps; ++t) {
    bool scaled = false;
    Matrix live(1, batch);
    for (std::size_t b = 0; b < sources.size(); ++b) {
      const auto& s = *sources[b];
      const bool in_range = t < static_cast<Index>(s.ids.size());
      column[b] = in_range ? s.ids[static_cast<std::size_t>(t)] : Vocab::kPad;
      scales[b] = in_range && !s.scales.empty() ? static_cast<Scalar>(s.scales[static_cast<std::size_t>(t)]) : Scalar(1);
      scaled = scaled || scales[b] != Scalar(1);
      live(0, static_cast<Index>(b)) = in_range ? Scalar(1) : Scalar(0);
    }
    Var x = scaled ? embedding(table, std::span<const int>(column), std::span<const Scalar>(scales))
                   : embedding(table, std::span<const int>(column));
    if (training && config_.dropout > 0) x = dropout(x, config_.dropout, true, *dropout_rng);
    inputs.push_back(x);
    if (ragged) keep.push_back(std::move(live));
  }

  BiLstmOutput<Scalar> layer;
  for (std::size_t l = 0; l < enc_forward_.size(); ++l) {
    layer = run_bidirectional(tape, enc_forward_[l], enc_backward_[l], std::span<const Var>(inputs),
                              std::span<const Matrix>(keep));
    inputs = layer.outputs;
  }

  Encoded<Scalar> enc;
  enc.steps = steps;
  enc.batch = batch;
  enc.memory = concat_cols(std::span<const Var>(layer.outputs));
  enc.keys = attn_memory_(tape, enc.memory);
  if (ragged) {
    enc.pad_offsets = Matrix::Zero(steps, batch);
    for (Index b = 0; b < batch; ++b) {
      for (Index t = static_cast<Index>(sources[static_cast<std::size_t>(b)]->ids.size()); t < steps; ++t) {
        enc.pad_offsets(t, b) = static_cast<Scalar>(kPadScore);
      }
    }
  }
  Var summary = concat_rows({layer.forward_final.h, layer.backward_final.h});
  Var zero = tape.constant(Matrix::Zero(config_.hidden, batch));
  for (const auto& bridge : bridge_) enc.initial.push_back({bridge(tape, summary), zero});
  return enc;
}

template <typename Scalar>
auto Seq2seqModel<Scalar>::step(Tape& tape, const Encoded<Scalar>& enc, DecoderState<Scalar>& state,
                                std::span<const int> prev, bool training, Rng* dropout_rng) const -> Var {
  if (static_cast<Index>(prev.size()) != enc.batch) throw DimensionError("decoder step: batch size");
  if (state.size() != decoder_.size()) throw DimensionError("decoder step: state layers");
  Var x = embedding(tape.leaf(embedding_), prev);
  if (training && config_.dropout > 0) x = dropout(x, config_.dropout, true, *dropout_rng);
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    state[l] = decoder_[l].step(tape, x, state[l]);
    x = state[l].h;
  }
  Var query = attn_query_(tape, x);
  Var energy = matmul(tape.leaf(attn_v_), numerics::tanh(add(enc.keys, tile_cols(query, enc.steps))));
  Var scores = fold_time(energy, enc.steps);
  if (enc.pad_offsets.size() != 0) scores = add_constant(scores, enc.pad_offsets);
  Var context = weighted_sum_over_time(enc.memory, softmax(scores));
  Var out = numerics::tanh(combine_(tape, concat_rows({x, context})));
  if (training && config_.dropout > 0) out = dropout(out, config_.dropout, true, *dropout_rng);
  return output_(tape, out);
}

template <typename Scalar>
auto Seq2seqModel<Scalar>::target_nll(Tape& tape, const Encoded<Scalar>& enc,
                                      std::span<const TrainExample* const> batch, bool training,
                                      Rng* dropout_rng) const -> std::pair<Var, std::size_t> {
  if (static_cast<Index>(batch.size()) != enc.batch) throw DimensionError("target_nll: batch size");
  std::size_t longest = 0, counted = 0;
  for (const auto* ex : batch) {
    if (ex->target.empty()) throw UsageError("empty target");
    if (ex->counted.size() != ex->target.size()) throw DimensionError("target/mask length");
    longest = std::max(longest, ex->target.size());
    counted += ex->counted_tokens();
  }
  DecoderState<Scalar> state = enc.initial;
  std::vector<int> prev(batch.size(), Vocab::kEos), gold(batch.size());
  Var total = tape.constant(Matrix::Zero(1, 1));
  if (counted == 0) return {total, 0};
  for (std::size_t t = 0; t < longest; ++t) {
    Matrix weight(1, enc.batch);
    bool any = false;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& ex = *batch[b];
      const bool live = t < ex.target.size() && ex.counted[t] != 0;
      gold[b] = t < ex.target.size() ? ex.target[t] : Vocab::kPad;
      weight(0, static_cast<Index>(b)) = live ? Scalar(1) : Scalar(0);
      any = any || live;
    }
    Var logits = step(tape, enc, state, prev, training, dropout_rng);
    if (any) total = add(total, sum(mul_constant(pick(log_softmax(logits), std::span<const int>(gold)), weight)));
    prev = gold;
  }
  return {scale(total, Scalar(-1)), counted};
}

template <typename Scalar>
auto Seq2seqModel<Scalar>::loss(Tape& tape, std::span<const TrainExample* const> batch, bool training,
                                Rng* dropout_rng) const -> Var {
  std::vector<const SourceInput*> sources;
  for (const auto* ex : batch) sources.push_back(&ex->source);
  auto enc = encode(tape, sources, training, dropout_rng);
  auto [nll, counted] = target_nll(tape, enc, batch, training, dropout_rng);
  if (counted == 0) return nll;
  return scale(nll, Scalar(1) / static_cast<Scalar>(counted));
}

template class Seq2seqModel<float>;
template class Seq2seqModel<double>;

Seq2seqStepper::Seq2seqStepper(const Seq2seq& model, const SourceInput& source, TokenMask mask)
    : model_(&model), mask_(std::move(mask)), tape_(std::make_unique<Tape<float>>(false)) {
  const SourceInput* sources[] = {&source};
  enc_ = model.encode(*tape_, sources, false, nullptr);
  state_ = enc_.initial;
}

VocabDistribution Seq2seqStepper::next() {
  const int prev[] = {prev_};
  auto logits = model_->step(*tape_, enc_, state_, prev, false, nullptr);
  return masked_distribution(logits.value(), mask_);
}

void Seq2seqStepper::push(int token) { prev_ = token; }

Decoded decode(const Seq2seq& model, const SourceInput& source, const DecodeOptions& options, Rng* rng) {
  Seq2seqStepper stepper(model, source, decode_mask(options.mask, model.vocab()));
  return run_decode([&] { return stepper.next(); }, [&](int token) { stepper.push(token); }, options.mode,
                    options.max_len, rng);
}

double mle_loss(const Seq2seq& model, const TrainExample& example) {
  Tape<float> tape(false);
  const TrainExample* batch[] = {&example};
  return model.loss(tape, batch, false, nullptr).scalar();
}

PerplexityResult perplexity(const Seq2seq& model, std::span<const TrainExample> examples) {
  if (examples.empty()) throw UsageError("perplexity: empty data set");
  PerplexityResult r;
  for (const auto& ex : examples) {
    Tape<float> tape(false);
    const SourceInput* sources[] = {&ex.source};
    auto enc = model.encode(tape, sources, false, nullptr);
    DecoderState<float> state = enc.initial;
    int prev = Vocab::kEos;
    for (std::size_t t = 0; t < ex.target.size(); ++t) {
      const int p[] = {prev};
      auto logits = model.step(tape, enc, state, p, false, nullptr);
      if (ex.counted[t] != 0) {
        const auto& z = logits.value();
        const double top = static_cast<double>(z.maxCoeff());
        double norm = 0;
        for (Index i = 0; i < z.rows(); ++i) norm += std::exp(static_cast<double>(z(i, 0)) - top);
        r.total_nll += top + std::log(norm) - static_cast<double>(z(ex.target[t], 0));
        ++r.tokens;
      }
      prev = ex.target[t];
    }
  }
  r.perplexity = r.tokens == 0 ? 1.0 : std::exp(r.total_nll / static_cast<double>(r.tokens));
  return r;
}

WerResult wer(const Seq2seq& model, std::span<const TrainExample> examples, const DecodeOptions& options) {
  std::vector<std::vector<int>> hyps, refs;
  for (const auto& ex : examples) {
    DecodeOptions greedy = options;
    greedy.mode = DecodeMode::greedy;
    hyps.push_back(decode(model, ex.source, greedy).tokens);
    std::vector<int> ref;
    for (std::size_t t = 0; t < ex.target.size(); ++t) {
      if (ex.target[t] != Vocab::kEos && ex.counted[t] != 0) ref.push_back(ex.target[t]);
    }
    refs.push_back(std::move(ref));
  }
  return wer(hyps, refs);
}

Seq2seq train_dialogue(Seq2seq model, const std::vector<TrainExample>& data, const Rng& rng, TrainLog* log) {
  auto params = unnamed(model.named_parameters());
  run_training(
      params, data.size(), model.config().train, rng,
      [&](Tape<float>& tape, std::span<const std::size_t> idx, Rng& dropout_rng) {
        std::vector<const TrainExample*> batch;
        for (auto i : idx) batch.push_back(&data[i]);
        return model.loss(tape, batch, true, &dropout_rng);
      },
      log);
  return model;
}

}  // namespace courtesy::dialogue
