#include "courtesy/style/style.hpp"

#include <cmath>

#include "courtesy/errors.hpp"

namespace courtesy::style {

using namespace numerics;
using corpus::Vocab;
using dialogue::Seq2seq;

void FusionConfig::validate() const {
  if (!(alpha >= 0 && alpha <= 1)) throw UsageError("fusion alpha must lie in [0, 1]");
}

VocabDistribution fuse_step(const VocabDistribution& p_s2s, const VocabDistribution& p_lm, const FusionConfig& cfg) {
  cfg.validate();
  if (p_s2s.size() != p_lm.size()) throw UsageError("fuse_step: vocabulary sizes differ");
  if (cfg.alpha == 1.0) return p_s2s;
  if (cfg.alpha == 0.0) return p_lm;
  return cfg.alpha * p_s2s + (1.0 - cfg.alpha) * p_lm;
}

Decoded fusion_decode(const Seq2seq& s2s, const dialogue::LanguageModel& lm, const SourceInput& source,
                      const FusionConfig& cfg, const DecodeOptions& options, Rng* rng) {
  cfg.validate();
  if (s2s.vocab().all_tokens() != lm.vocab().all_tokens()) throw UsageError("fusion: models must share a vocabulary");
  const auto mask = dialogue::decode_mask(options.mask, s2s.vocab());
  dialogue::Seq2seqStepper decoder(s2s, source, mask);
  dialogue::LmStepper language(lm, mask);
  return dialogue::run_decode([&] { return fuse_step(decoder.next(), language.next(), cfg); },
                              [&](int token) {
                                decoder.push(token);
                                language.push(token);
                              },
                              options.mode, options.max_len, rng);
}

std::string to_string(LftMode mode) { return mode == LftMode::continuous ? "continuous" : "discrete"; }

LftMode parse_lft_mode(const std::string& name) {
  if (name == "continuous") return LftMode::continuous;
  if (name == "discrete") return LftMode::discrete;
  throw UsageError("unknown LFT mode '" + name + "' (continuous | discrete)");
}

void LftConfig::validate() const {
  if (!(test_score >= 0 && test_score <= 1)) throw UsageError("LFT score must lie in [0, 1]");
  if (!(neutral_from > 0 && neutral_from < polite_from && polite_from <= 1)) {
    throw UsageError("LFT bins need 0 < neutral_from < polite_from <= 1");
  }
}

int bin_label(double score, const LftConfig& cfg) {
  if (score >= cfg.polite_from) return Vocab::kLabelPolite;
  if (score >= cfg.neutral_from) return Vocab::kLabelNeutral;
  return Vocab::kLabelRude;
}

SourceInput label_source(const SourceInput& source, double score, const LftConfig& cfg) {
  if (!(score >= 0 && score <= 1)) throw UsageError("LFT score must lie in [0, 1]");
  SourceInput out;
  if (cfg.mode == LftMode::continuous) {
    out.ids.push_back(Vocab::kLabel);
    out.scales.push_back(static_cast<float>(score));
    if (source.scales.empty()) {
      out.scales.resize(source.ids.size() + 1, 1.0f);
    } else {
      out.scales.insert(out.scales.end(), source.scales.begin(), source.scales.end());
    }
  } else {
    out.ids.push_back(bin_label(score, cfg));
    out.scales = source.scales;
    if (!out.scales.empty()) out.scales.insert(out.scales.begin(), 1.0f);
  }
  out.ids.insert(out.ids.end(), source.ids.begin(), source.ids.end());
  return out;
}

TrainExample lft_prepare(const TrainExample& example, double score, const LftConfig& cfg) {
  TrainExample out = example;
  out.source = label_source(example.source, score, cfg);
  return out;
}

TrainExample lft_prepare(const TrainExample& example, const classifier::Classifier& clf, const Vocab& vocab,
                         const LftConfig& cfg) {
  std::vector<int> text(example.target.begin(), example.target.end());
  if (!text.empty() && text.back() == Vocab::kEos) text.pop_back();
  const double s = text.empty() ? 0.5 : classifier::score(clf, vocab.decode(text)).value();
  return lft_prepare(example, s, cfg);
}

Decoded lft_decode(const Seq2seq& model, const SourceInput& source, double target_score, const LftConfig& cfg,
                   const DecodeOptions& options, Rng* rng) {
  if (!(target_score >= 0 && target_score <= 1)) throw UsageError("LFT target score must lie in [0, 1]");
  return dialogue::decode(model, label_source(source, target_score, cfg), options, rng);
}

std::string to_string(RewardSign sign) {
  return sign == RewardSign::encourage_polite ? "encourage-polite" : "encourage-rude";
}

RewardSign parse_reward_sign(const std::string& name) {
  if (name == "encourage-polite") return RewardSign::encourage_polite;
  if (name == "encourage-rude") return RewardSign::encourage_rude;
  throw UsageError("unknown reward sign '" + name + "' (encourage-polite | encourage-rude)");
}

void RlConfig::validate() const {
  if (!std::isfinite(beta) || beta < 0) throw UsageError("RL beta must be finite and >= 0");
  if (!(baseline >= 0 && baseline <= 1)) throw UsageError("RL baseline must lie in [0, 1]");
  if (samples_per_context < 1) throw UsageError("RL needs at least one sample per context");
}

double reward(const classifier::Classifier& clf, const Vocab& vocab, const std::vector<int>& tokens,
              const RlConfig& cfg) {
  if (tokens.empty()) return cfg.baseline;
  const double s = classifier::score(clf, vocab.decode(tokens)).value();
  return cfg.sign == RewardSign::encourage_polite ? s : 1.0 - s;
}

double rl_loss(const SampledResponse& sample, const RlConfig& cfg) {
  double total = 0;
  for (double lp : sample.log_probs) total += lp;
  return -(sample.reward - cfg.baseline) * total;
}

Var<float> sample_batch(Tape<float>& tape, const Seq2seq& model, const dialogue::Encoded<float>& enc,
                        const dialogue::TokenMask& decode_mask, std::size_t max_len, bool training, Rng* dropout_rng,
                        Rng& sample_rng, std::vector<SampledResponse>& samples, bool normalize_length) {
  const Index batch = enc.batch;
  const Index v = static_cast<Index>(model.vocab().size());
  if (static_cast<Index>(decode_mask.size()) != v) throw DimensionError("sample_batch: mask size");
  Matrix<float> offsets = Matrix<float>::Zero(v, batch);
  for (Index i = 0; i < v; ++i) {
    if (decode_mask.blocked(static_cast<int>(i))) offsets.row(i).setConstant(-1e6f);
  }
  samples.assign(static_cast<std::size_t>(batch), SampledResponse{});
  std::vector<bool> alive(static_cast<std::size_t>(batch), true);
  std::vector<int> prev(static_cast<std::size_t>(batch), Vocab::kEos), chosen(static_cast<std::size_t>(batch));
  auto state = enc.initial;
  Var<float> total = tape.constant(Matrix<float>::Zero(1, batch));
  VocabDistribution p(v);
  for (std::size_t t = 0; t < max_len; ++t) {
    Var<float> logp = log_softmax(add_constant(model.step(tape, enc, state, prev, training, dropout_rng), offsets));
    Matrix<float> live(1, batch);
    bool any = false;
    for (Index b = 0; b < batch; ++b) {
      const auto k = static_cast<std::size_t>(b);
      live(0, b) = alive[k] ? 1.0f : 0.0f;
      if (!alive[k]) {
        chosen[k] = Vocab::kPad;
        continue;
      }
      any = true;
      for (Index i = 0; i < v; ++i) p(i) = decode_mask.blocked(static_cast<int>(i)) ? 0.0 : std::exp(double(logp.value()(i, b)));
      chosen[k] = static_cast<int>(sample_rng.categorical(p));
      samples[k].log_probs.push_back(static_cast<double>(logp.value()(chosen[k], b)));
      if (chosen[k] == Vocab::kEos) {
        alive[k] = false;
      } else {
        samples[k].tokens.push_back(chosen[k]);
      }
    }
    if (!any) break;
    total = add(total, mul_constant(pick(logp, std::span<const int>(chosen)), live));
    prev = chosen;
    if (std::none_of(alive.begin(), alive.end(), [](bool a) { return a; })) break;
  }
  if (normalize_length) {
    Matrix<float> inv(1, batch);
    for (Index b = 0; b < batch; ++b) {
      inv(0, b) = 1.0f / static_cast<float>(samples[static_cast<std::size_t>(b)].log_probs.size());
    }
    total = mul_constant(total, inv);
  }
  return total;
}

Seq2seq train_rl(Seq2seq model, const std::vector<TrainExample>& data, const classifier::Classifier& clf,
                 const RlConfig& cfg, const dialogue::TokenMask& mask, const Rng& rng, RlLog* log) {
  cfg.validate();
  auto params = unnamed(model.named_parameters());
  RlLog local;
  RlLog& out = log != nullptr ? *log : local;
  Rng sample_rng = rng.fork(3);
  const auto dmask = dialogue::decode_mask(mask, model.vocab());

  dialogue::run_training(
      params, data.size(), model.config().train, rng,
      [&](Tape<float>& tape, std::span<const std::size_t> idx, Rng& dropout_rng) {
        std::vector<const TrainExample*> batch;
        for (auto i : idx) batch.push_back(&data[i]);
        if (cfg.beta == 0) return model.loss(tape, batch, true, &dropout_rng);

        std::vector<const SourceInput*> sources;
        for (const auto* ex : batch) sources.push_back(&ex->source);
        auto enc = model.encode(tape, sources, true, &dropout_rng);
        auto [nll, counted] = model.target_nll(tape, enc, batch, true, &dropout_rng);
        Var<float> total = counted == 0 ? nll : scale(nll, 1.0f / static_cast<float>(counted));

        double reward_sum = 0, score_sum = 0;
        std::size_t n = 0;
        const float per_sample = static_cast<float>(cfg.beta) /
                                 static_cast<float>(batch.size() * static_cast<std::size_t>(cfg.samples_per_context));
        for (int k = 0; k < cfg.samples_per_context; ++k) {
          std::vector<SampledResponse> samples;
          Var<float> logp = sample_batch(tape, model, enc, dmask, model.config().max_len, true, &dropout_rng,
                                         sample_rng, samples, cfg.normalize_length);
          Matrix<float> coef(1, static_cast<Index>(samples.size()));
          for (std::size_t b = 0; b < samples.size(); ++b) {
            samples[b].reward = reward(clf, model.vocab(), samples[b].tokens, cfg);
            const double raw = cfg.sign == RewardSign::encourage_polite ? samples[b].reward : 1.0 - samples[b].reward;
            coef(0, static_cast<Index>(b)) = static_cast<float>(-(samples[b].reward - cfg.baseline)) * per_sample;
            reward_sum += samples[b].reward;
            score_sum += raw;
            ++n;
          }
          total = add(total, sum(mul_constant(logp, coef)));
        }
        out.batch_reward.push_back(reward_sum / static_cast<double>(n));
        out.batch_score.push_back(score_sum / static_cast<double>(n));
        return total;
      },
      &out.train);
  return model;
}

}  // namespace courtesy::style
