#pragma once

#include <string>
#include <vector>

#include "courtesy/classifier/classifier.hpp"
#include "courtesy/dialogue/lm.hpp"
#include "courtesy/dialogue/seq2seq.hpp"

namespace courtesy::style {

using dialogue::Decoded;
using dialogue::DecodeOptions;
using dialogue::SourceInput;
using dialogue::TrainExample;
using dialogue::VocabDistribution;

// ---- fusion

struct FusionConfig {
  double alpha = 0.5;
  void validate() const;
};

// alpha * p_s2s + (1 - alpha) * p_lm.
VocabDistribution fuse_step(const VocabDistribution& p_s2s, const VocabDistribution& p_lm, const FusionConfig& cfg);

// The language model consumes the same emitted prefix as the decoder and
// never sees the source.
Decoded fusion_decode(const dialogue::Seq2seq& s2s, const dialogue::LanguageModel& lm, const SourceInput& source,
                      const FusionConfig& cfg, const DecodeOptions& options, numerics::Rng* rng = nullptr);

// ---- label fine-tuning

enum class LftMode { continuous, discrete };
std::string to_string(LftMode mode);
LftMode parse_lft_mode(const std::string& name);

struct LftConfig {
  LftMode mode = LftMode::continuous;
  double test_score = 1.0;
  double polite_from = 0.8;   // [polite_from, 1] is polite
  double neutral_from = 0.2;  // [neutral_from, polite_from) is neutral, below is rude
  void validate() const;
};

// Discrete label token for a score.
int bin_label(double score, const LftConfig& cfg);

// LABEL (scaled by `score`) or the bin label, followed by the source.
SourceInput label_source(const SourceInput& source, double score, const LftConfig& cfg);

// Prepends the label for the classifier's score of the target text.
TrainExample lft_prepare(const TrainExample& example, const classifier::Classifier& clf, const corpus::Vocab& vocab,
                         const LftConfig& cfg);
TrainExample lft_prepare(const TrainExample& example, double score, const LftConfig& cfg);

// target_score outside [0, 1] is a UsageError.
Decoded lft_decode(const dialogue::Seq2seq& model, const SourceInput& source, double target_score,
                   const LftConfig& cfg, const DecodeOptions& options, numerics::Rng* rng = nullptr);

// ---- polite RL

enum class RewardSign { encourage_polite, encourage_rude };
std::string to_string(RewardSign sign);
RewardSign parse_reward_sign(const std::string& name);

struct RlConfig {
  double beta = 2.0;
  double baseline = 0.5;
  RewardSign sign = RewardSign::encourage_polite;
  int samples_per_context = 1;
  bool normalize_length = false;  // divide the summed log-prob by the sample length
  void validate() const;
};

struct SampledResponse {
  std::vector<int> tokens;      // without EOS
  std::vector<double> log_probs;  // one per sampling step, EOS step included
  double reward = 0;            // after the sign is applied
};

// Reward for a sampled response: the classifier's polite probability (or its
// complement when encouraging rudeness). EOS is not part of the scored text;
// an empty response earns the baseline, so it carries no signal.
double reward(const classifier::Classifier& clf, const corpus::Vocab& vocab, const std::vector<int>& tokens,
              const RlConfig& cfg);

// -(R - R_b) * sum_t log p(y_t).
double rl_loss(const SampledResponse& sample, const RlConfig& cfg);

template <typename Scalar>
numerics::Var<Scalar> rl_loss(const numerics::Var<Scalar>& sum_log_prob, double reward, const RlConfig& cfg) {
  return numerics::scale(sum_log_prob, static_cast<Scalar>(-(reward - cfg.baseline)));
}

struct RlLog {
  dialogue::TrainLog train;
  std::vector<double> batch_reward;  // mean sampled reward per step (after the sign)
  std::vector<double> batch_score;   // mean raw classifier score per step
};

// Mixed objective L_ML + beta * L_RL with one sampled response per context
// per step. With beta == 0 no sampling happens at all and the run matches
// dialogue::train_dialogue exactly.
dialogue::Seq2seq train_rl(dialogue::Seq2seq model, const std::vector<TrainExample>& data,
                           const classifier::Classifier& clf, const RlConfig& cfg, const dialogue::TokenMask& mask,
                           const numerics::Rng& rng, RlLog* log = nullptr);

// Batched multinomial sampling on `tape` from the masked decoder
// distribution. Returns the summed log-probabilities (1 x B) with gradient,
// and fills `samples` (tokens and per-step log-probs).
numerics::Var<float> sample_batch(numerics::Tape<float>& tape, const dialogue::Seq2seq& model,
                                  const dialogue::Encoded<float>& enc, const dialogue::TokenMask& decode_mask,
                                  std::size_t max_len, bool training, numerics::Rng* dropout_rng,
                                  numerics::Rng& sample_rng, std::vector<SampledResponse>& samples,
                                  bool normalize_length = false);

}  // namespace courtesy::style
