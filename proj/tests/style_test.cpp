#include <cmath>

#include "doctest.h"
#include "toy_policy.hpp"

#include "courtesy/corpus/synthetic.hpp"
#include "courtesy/errors.hpp"
#include "courtesy/style/style.hpp"

using namespace courtesy;
using namespace courtesy::style;
using courtesy::corpus::Vocab;
using courtesy::numerics::Index;
using courtesy::numerics::Rng;

namespace {

struct Fixture {
  corpus::SyntheticCorpus data;
  Vocab vocab;
  dialogue::TokenMask mask;
  std::vector<TrainExample> examples;

  Fixture() {
    Rng rng(3);
    data = corpus::gen_synthetic(corpus::default_markers(), 1, 40, rng);
    auto seqs = corpus::all_sequences(data.triples);
    for (const auto& u : data.politeness) seqs.push_back(u.text);
    vocab = Vocab::build(seqs);
    mask = dialogue::loss_mask(vocab, {"idiot"});
    examples = dialogue::make_examples(vocab, data.triples, mask);
  }
};

dialogue::Seq2seqConfig tiny_s2s() {
  dialogue::Seq2seqConfig c;
  c.embedding_dim = 8;
  c.hidden = 8;
  c.attention = 8;
  c.dropout = 0.2;
  c.train.epochs = 2;
  c.train.batch_size = 8;
  return c;
}

dialogue::LmConfig tiny_lm() {
  dialogue::LmConfig c;
  c.embedding_dim = 8;
  c.hidden = 8;
  c.dropout = 0;
  return c;
}

classifier::ClassifierConfig tiny_classifier() {
  classifier::ClassifierConfig c;
  c.embedding_dim = 8;
  c.hidden = 6;
  c.filters = 4;
  c.epochs = 1;
  return c;
}

VocabDistribution random_distribution(Index n, Rng& rng) {
  VocabDistribution p(n);
  for (Index i = 0; i < n; ++i) p(i) = rng.uniform();
  return p / p.sum();
}

}  // namespace

TEST_CASE("fuse_step: examples and convexity") {
  VocabDistribution p(2), q(2);
  p << 0.8, 0.2;
  q << 0.2, 0.8;
  CHECK(fuse_step(p, q, {1.0}) == p);
  CHECK(fuse_step(p, q, {0.0}) == q);
  auto half = fuse_step(p, q, {0.5});
  CHECK(half(0) == doctest::Approx(0.5));
  CHECK(half(1) == doctest::Approx(0.5));
  CHECK(FusionConfig{}.alpha == 0.5);
  CHECK_THROWS_AS(fuse_step(p, VocabDistribution(3), {0.5}), UsageError);
  CHECK_THROWS_AS(fuse_step(p, q, {1.5}), UsageError);

  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(20));
    auto a = random_distribution(n, rng), b = random_distribution(n, rng);
    const double alpha = rng.uniform();
    auto f = fuse_step(a, b, {alpha});
    CHECK(std::abs(f.cast<float>().sum() - 1.0f) < 1e-5f);
    CHECK(f.minCoeff() >= 0);
    CHECK(dialogue::argmax(fuse_step(a, b, {1.0})) == dialogue::argmax(a));
  }
}

TEST_CASE("fusion decode reduces to either model at the endpoints") {
  Fixture f;
  Rng r1(5), r2(6);
  dialogue::Seq2seq s2s(tiny_s2s(), f.vocab, r1);
  dialogue::LanguageModel lm(tiny_lm(), f.vocab, r2);
  DecodeOptions opts;
  opts.mask = f.mask;
  const auto lm_only = dialogue::lm_decode(lm, dialogue::DecodeMode::greedy, opts.max_len, f.mask);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& src = f.examples[i].source;
    CHECK(fusion_decode(s2s, lm, src, {1.0}, opts).tokens == dialogue::decode(s2s, src, opts).tokens);
    CHECK(fusion_decode(s2s, lm, src, {0.0}, opts).tokens == lm_only.tokens);
  }
  auto fused = fusion_decode(s2s, lm, f.examples[0].source, {0.5}, opts);
  for (const auto& p : fused.steps) CHECK(std::abs(p.sum() - 1.0) < 1e-9);

  Vocab other = Vocab::build(std::vector<corpus::TokenSeq>{{"x"}});
  Rng r3(7);
  dialogue::LanguageModel mismatched(tiny_lm(), other, r3);
  CHECK_THROWS_AS(fusion_decode(s2s, mismatched, f.examples[0].source, {0.5}, opts), UsageError);
}

TEST_CASE("lft: label placement, scaling and bins") {
  Fixture f;
  LftConfig cfg;
  const SourceInput src{{10, 11, 12}, {}};
  auto zero = label_source(src, 0.0, cfg);
  CHECK(zero.ids == std::vector<int>{Vocab::kLabel, 10, 11, 12});
  CHECK(zero.scales == std::vector<float>{0.0f, 1.0f, 1.0f, 1.0f});

  LftConfig discrete = cfg;
  discrete.mode = LftMode::discrete;
  CHECK(label_source(src, 0.85, discrete).ids.front() == Vocab::kLabelPolite);
  CHECK(bin_label(0.8, discrete) == Vocab::kLabelPolite);
  CHECK(bin_label(0.5, discrete) == Vocab::kLabelNeutral);
  CHECK(bin_label(0.2, discrete) == Vocab::kLabelNeutral);
  CHECK(bin_label(0.1999, discrete) == Vocab::kLabelRude);
  CHECK(label_source(src, 0.3, discrete).scales.empty());
  CHECK_THROWS_AS(label_source(src, 1.2, cfg), UsageError);

  // Only the label column of the looked-up embeddings depends on the score.
  Rng rng(8);
  dialogue::Seq2seq model(tiny_s2s(), f.vocab, rng);
  numerics::Tape<float> tape(false);
  auto table = tape.leaf(model.embedding_table());
  auto lookup = [&](double s) {
    auto in = label_source(src, s, cfg);
    return numerics::embedding(table, std::span<const int>(in.ids), std::span<const float>(in.scales)).value();
  };
  const auto e0 = lookup(0.0), e1 = lookup(1.0), e3 = lookup(0.3);
  CHECK(e0.col(0).isZero());
  CHECK(e1.col(0) == model.embedding_table().value.row(Vocab::kLabel).transpose());
  CHECK(e3.col(0).isApprox(0.3f * e1.col(0)));
  for (Index c = 1; c < e0.cols(); ++c) {
    CHECK(e0.col(c) == e1.col(c));
    CHECK(e3.col(c) == e1.col(c));
  }

  auto ex = lft_prepare(f.examples[0], 0.6, cfg);
  CHECK(ex.target == f.examples[0].target);
  CHECK(ex.source.ids.size() == f.examples[0].source.ids.size() + 1);

  DecodeOptions opts;
  opts.mask = f.mask;
  auto a = lft_decode(model, f.examples[1].source, 0.5, cfg, opts);
  auto b = lft_decode(model, f.examples[1].source, 0.5, cfg, opts);
  CHECK(a.tokens == b.tokens);
  CHECK_THROWS_AS(lft_decode(model, f.examples[1].source, -0.1, cfg, opts), UsageError);
}

TEST_CASE("rl_loss: arithmetic, zero advantage and linearity") {
  RlConfig cfg;
  CHECK(cfg.beta == 2.0);
  CHECK(cfg.baseline == 0.5);
  SampledResponse s{{4, 5}, {-1.5, -0.5}, 1.0};
  CHECK(rl_loss(s, cfg) == doctest::Approx(1.0));
  s.reward = 0.5;
  CHECK(rl_loss(s, cfg) == 0.0);

  numerics::Tensor<double> logits(numerics::Matrix<double>::Constant(3, 1, 0.2));
  logits.value(1, 0) = -0.4;
  numerics::Tape<double> tape;
  const int pick_one[] = {1};
  auto lp = numerics::pick(numerics::log_softmax(tape.leaf(logits)), pick_one);
  auto zero = rl_loss(lp, 0.5, cfg);
  CHECK(zero.scalar() == 0.0);
  tape.backward(zero);
  CHECK(logits.grad.isZero());

  const double fixed_sum = -2.0;
  const double l1 = rl_loss(SampledResponse{{}, {fixed_sum}, 0.2}, cfg);
  const double l2 = rl_loss(SampledResponse{{}, {fixed_sum}, 0.6}, cfg);
  const double l3 = rl_loss(SampledResponse{{}, {fixed_sum}, 0.9}, cfg);
  CHECK((l2 - l1) / 0.4 == doctest::Approx((l3 - l2) / 0.3));
  CHECK((l2 - l1) / 0.4 == doctest::Approx(-fixed_sum));
  RlConfig bad;
  bad.baseline = 1.5;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("reinforce estimator is unbiased on an enumerable policy") {
  Rng rng(17);
  testing::ToyPolicy toy(rng);
  RlConfig cfg;
  cfg.baseline = 0.5;
  const auto exact = toy.exact_gradient();
  Rng draws(18);
  const auto mc = toy.reinforce_gradient(100000, cfg, draws);
  // The loss is -(R - R_b) log p, so its expected gradient is -grad E[R].
  CHECK(testing::cosine(-mc, exact) > 0.99);
}

TEST_CASE("sampled log-probs match the masked step distributions") {
  Fixture f;
  Rng rng(9);
  dialogue::Seq2seqConfig cfg = tiny_s2s();
  cfg.dropout = 0;
  dialogue::Seq2seq model(cfg, f.vocab, rng);
  const auto dmask = dialogue::decode_mask(f.mask, f.vocab);
  numerics::Tape<float> tape;
  const SourceInput* sources[] = {&f.examples[0].source, &f.examples[1].source, &f.examples[2].source};
  auto enc = model.encode(tape, sources, false, nullptr);
  std::vector<SampledResponse> samples;
  Rng sample_rng(4);
  auto total = sample_batch(tape, model, enc, dmask, 30, false, nullptr, sample_rng, samples);
  REQUIRE(samples.size() == 3);
  for (std::size_t b = 0; b < 3; ++b) {
    const auto& s = samples[b];
    for (int t : s.tokens) CHECK(!dmask.blocked(t));
    double sum = 0;
    for (double lp : s.log_probs) sum += lp;
    CHECK(total.value()(0, static_cast<Index>(b)) == doctest::Approx(sum).epsilon(1e-5));
    dialogue::Seq2seqStepper stepper(model, *sources[b], dmask);
    for (std::size_t t = 0; t < s.log_probs.size(); ++t) {
      auto p = stepper.next();
      const int token = t < s.tokens.size() ? s.tokens[t] : Vocab::kEos;
      CHECK(std::log(p(token)) == doctest::Approx(s.log_probs[t]).epsilon(1e-4));
      stepper.push(token);
    }
  }
}

TEST_CASE("train_rl with beta 0 follows train_dialogue exactly") {
  Fixture f;
  Rng c_rng(2);
  std::vector<corpus::StyledUtterance> labelled(f.data.politeness.begin(), f.data.politeness.end());
  auto clf = classifier::train_classifier(labelled, tiny_classifier(), f.vocab, c_rng);
  dialogue::Seq2seqConfig cfg = tiny_s2s();
  Rng a(11), b(11);
  dialogue::Seq2seq base(cfg, f.vocab, a);
  RlConfig off;
  off.beta = 0;
  RlLog log;
  auto plain = dialogue::train_dialogue(base, f.examples, Rng(12));
  auto rl = train_rl(dialogue::Seq2seq(cfg, f.vocab, b), f.examples, clf, off, f.mask, Rng(12), &log);
  CHECK(log.batch_reward.empty());
  auto p1 = plain.named_parameters(), p2 = rl.named_parameters();
  for (std::size_t k = 0; k < p1.size(); ++k) CHECK(p1[k].second->value == p2[k].second->value);

  RlConfig on;
  RlLog on_log;
  Rng c(11);
  auto mixed = train_rl(dialogue::Seq2seq(cfg, f.vocab, c), f.examples, clf, on, f.mask, Rng(12), &on_log);
  CHECK(on_log.batch_reward.size() == on_log.train.steps);
  for (double r : on_log.batch_reward) {
    CHECK(r >= 0);
    CHECK(r <= 1);
  }
  auto p3 = mixed.named_parameters();
  bool differs = false;
  for (std::size_t k = 0; k < p1.size(); ++k) differs = differs || p1[k].second->value != p3[k].second->value;
  CHECK(differs);
}
