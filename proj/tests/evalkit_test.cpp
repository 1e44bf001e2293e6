#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"

#include "courtesy/corpus/synthetic.hpp"
#include "courtesy/errors.hpp"
#include "courtesy/evalkit/evalkit.hpp"
#include "courtesy/numerics/rng.hpp"

using namespace courtesy;
using namespace courtesy::evalkit;
using corpus::tokenize;
using courtesy::numerics::Rng;

namespace {

std::vector<TokenSeq> toks(std::initializer_list<const char*> lines) {
  std::vector<TokenSeq> out;
  for (const char* l : lines) out.push_back(tokenize(l));
  return out;
}

// Straight from the definition: joined-string n-gram counts, pooled.
double bleu_oracle(const std::vector<TokenSeq>& hyp, const std::vector<TokenSeq>& ref, int order) {
  double c = 0, r = 0, log_sum = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    c += static_cast<double>(hyp[i].size());
    r += static_cast<double>(ref[i].size());
  }
  for (int n = 1; n <= order; ++n) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      std::map<std::string, int> h, rf;
      auto grams = [n](const TokenSeq& s, std::map<std::string, int>& into) {
        for (std::size_t k = 0; k + static_cast<std::size_t>(n) <= s.size(); ++k) {
          std::string g;
          for (int m = 0; m < n; ++m) g += s[k + static_cast<std::size_t>(m)] + "\x1f";
          ++into[g];
        }
      };
      grams(hyp[i], h);
      grams(ref[i], rf);
      for (auto& [g, cnt] : h) {
        num += std::min(cnt, rf[g]);
        den += cnt;
      }
    }
    if (num == 0) return 0;
    log_sum += std::log(num / den);
  }
  const double bp = c < r ? std::exp(1 - r / c) : 1.0;
  return 100 * bp * std::exp(log_sum / order);
}

TokenSeq random_sentence(Rng& rng, std::size_t vocab, std::size_t min_len, std::size_t max_len) {
  TokenSeq s;
  const auto len = min_len + rng.below(max_len - min_len + 1);
  for (std::size_t i = 0; i < len; ++i) s.push_back("t" + std::to_string(rng.below(vocab)));
  return s;
}

}  // namespace

TEST_CASE("bleu: hand computed cases") {
  const auto hyp = toks({"the cat sat on the mat"});
  const auto ref = toks({"the cat is on the mat"});
  auto s = ngram_stats(hyp, ref, 4);
  CHECK(s.matches == std::vector<double>{5, 3, 1, 0});
  CHECK(s.totals == std::vector<double>{6, 5, 4, 3});
  CHECK(bleu4(hyp, ref) == 0.0);
  // (5/6 * 3/5 * 1/4)^(1/3) = 0.5
  CHECK(std::abs(bleu(hyp, ref, {3, false}) - 50.0) < 1e-6);

  CHECK(bleu4(toks({"a b c d e"}), toks({"a b c d e"})) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bleu4(toks({"a b c d"}), toks({"d c b a"})) == 0.0);

  // Brevity: hyp 4 tokens, ref 8, all hyp n-grams match.
  const double bp = std::exp(1.0 - 8.0 / 4.0);
  CHECK(std::abs(bleu4(toks({"a b c d"}), toks({"a b c d e f g h"})) - 100 * bp) < 1e-6);

  // Clipping: "the the the the" vs "the cat": p1 = 1/4.
  auto clip = ngram_stats(toks({"the the the the"}), toks({"the cat"}), 1);
  CHECK(clip.matches[0] == 1);
  CHECK(std::abs(bleu(toks({"the the the the"}), toks({"the cat"}), {1, false}) - 25.0) < 1e-6);

  CHECK_THROWS_AS(bleu4(toks({"a"}), {}), UsageError);
  CHECK(bleu4({}, {}) == 0.0);
}

TEST_CASE("bleu: smoothed sentence variant stays positive") {
  const auto hyp = toks({"the cat sat on the mat"});
  const auto ref = toks({"the cat is on the mat"});
  // (5/6 * 4/6 * 2/5 * 1/4)^(1/4)
  const double expected = 100 * std::pow(5.0 / 6 * 4.0 / 6 * 2.0 / 5 * 1.0 / 4, 0.25);
  CHECK(std::abs(sentence_bleu(hyp, ref) - expected) < 1e-6);
  CHECK(sentence_bleu(hyp, ref) > 0);
}

TEST_CASE("bleu: oracle agreement, identity and order invariance") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<TokenSeq> hyp, ref;
    const auto n = 1 + rng.below(12);
    for (std::uint64_t i = 0; i < n; ++i) {
      hyp.push_back(random_sentence(rng, 6, 1, 12));
      ref.push_back(random_sentence(rng, 6, 4, 12));
    }
    CHECK(std::abs(bleu4(hyp, ref) - bleu_oracle(hyp, ref, 4)) < 1e-9);
    CHECK(bleu4(ref, ref) == doctest::Approx(100.0).epsilon(1e-12));

    std::vector<std::size_t> order(hyp.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<TokenSeq> h2, r2;
    for (auto i : order) {
      h2.push_back(hyp[i]);
      r2.push_back(ref[i]);
    }
    CHECK(bleu4(h2, r2) == bleu4(hyp, ref));
    const double b = bleu4(hyp, ref);
    CHECK(b >= 0.0);
    CHECK(b <= 100.0);
  }
}

TEST_CASE("correlation: extremes and the rank example") {
  const std::vector<double> a = {0.3, 1.2, -4.0, 2.5, 7.0};
  std::vector<double> neg;
  for (double x : a) neg.push_back(-x);
  CHECK(pearson(a, a) == 1.0);
  CHECK(spearman(a, a) == 1.0);
  CHECK(pearson(a, neg) == -1.0);
  CHECK(spearman(a, neg) == -1.0);
  CHECK(std::abs(spearman({1, 2, 3, 4}, {1, 3, 2, 4}) - 0.8) < 1e-9);
  CHECK(average_ranks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});

  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), UndefinedError);
  CHECK_THROWS_AS(spearman({1, 2, 3}, {4, 4, 4}), UndefinedError);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), UsageError);
  CHECK_THROWS_AS(pearson({1, 2, 3}, {1, 2}), UsageError);
  auto c = correlate(a, a, CorrelationKind::spearman);
  CHECK(c.n == 5);
  CHECK(parse_correlation("pearson") == CorrelationKind::pearson);
  CHECK_THROWS_AS(parse_correlation("kendall"), UsageError);
}

TEST_CASE("correlation properties") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 3 + rng.below(20);
    std::vector<double> a, b;
    for (std::uint64_t i = 0; i < n; ++i) {
      a.push_back(static_cast<double>(rng.below(6)));  // ties on purpose
      b.push_back(rng.uniform(-3, 3));
    }
    if (std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; })) continue;
    const double p = pearson(a, b), s = spearman(a, b);
    CHECK(std::abs(p) <= 1.0);
    CHECK(std::abs(s) <= 1.0);
    std::vector<double> ea, cb;
    for (double x : a) ea.push_back(std::exp(x));
    for (double x : b) cb.push_back(x * x * x + 2 * x);
    CHECK(spearman(ea, cb) == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("cohen kappa: formula and bucketing") {
  CHECK(std::abs(cohen_kappa({{20, 5}, {10, 15}}) - 0.4) < 1e-9);
  CHECK(cohen_kappa({{3, 0}, {0, 7}}) == 1.0);
  CHECK_THROWS_AS(cohen_kappa({{9, 0}, {0, 0}}), UndefinedError);
  CHECK_THROWS_AS(cohen_kappa({{1, 2}}), UsageError);

  AnnotationTable t;
  // Annotator B always says 5 where A says 4: disagreement raw, agreement collapsed.
  const int a_ratings[] = {1, 2, 3, 4, 4, 5};
  const int b_ratings[] = {1, 2, 3, 5, 5, 5};
  for (int i = 0; i < 6; ++i) {
    t.add("i" + std::to_string(i), "A", a_ratings[i]);
    t.add("i" + std::to_string(i), "B", b_ratings[i]);
  }
  CHECK(cohen_kappa(t, true) == 1.0);
  // Raw: p_o = 4/6, marginals A {1,1,1,2,1}, B {1,1,1,0,3}.
  const double po = 4.0 / 6, pe = (1 + 1 + 1 + 0 + 3) / 36.0;
  CHECK(std::abs(cohen_kappa(t, false) - (po - pe) / (1 - pe)) < 1e-12);
  CHECK(collapse(2) == 0);
  CHECK(collapse(3) == 1);
  CHECK(collapse(4) == 2);

  CHECK_THROWS_AS(t.add("i9", "A", 6), UsageError);
  CHECK_THROWS_AS(t.add("i0", "A", 2), UsageError);
  t.add("lonely", "A", 3);
  CHECK_THROWS_AS(cohen_kappa(t, false), UsageError);
}

TEST_CASE("cohen kappa never exceeds one and equals one only on full agreement") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    AnnotationTable t;
    const auto n = 2 + rng.below(15);
    bool all_agree = true;
    std::set<int> labels;
    for (std::uint64_t i = 0; i < n; ++i) {
      const int a = 1 + static_cast<int>(rng.below(5));
      const int b = rng.uniform() < 0.5 ? a : 1 + static_cast<int>(rng.below(5));
      all_agree = all_agree && a == b;
      labels.insert(a);
      labels.insert(b);
      t.add(std::to_string(i), "x", a);
      t.add(std::to_string(i), "y", b);
    }
    if (labels.size() == 1) continue;
    const double k = cohen_kappa(t, false);
    CHECK(k <= 1.0);
    CHECK((k == 1.0) == all_agree);
  }
}

TEST_CASE("annotation csv") {
  const auto path = std::filesystem::temp_directory_path() / "courtesy_ratings.csv";
  {
    std::ofstream out(path);
    out << "item_id,annotator_id,rating\n1,a,5\n1,b,4\n2,a,1\n2,b,2\n3,a,3\n3,b,5\n";
  }
  auto t = AnnotationTable::load_csv(path);
  CHECK(t.items() == 3);
  CHECK(t.annotators() == std::vector<std::string>{"a", "b"});
  CHECK(t.pairs() == std::vector<std::pair<int, int>>{{5, 4}, {1, 2}, {3, 5}});
  {
    std::ofstream out(path);
    out << "item_id,annotator_id,rating\n1,a,five\n";
  }
  CHECK_THROWS_AS(AnnotationTable::load_csv(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("mean politeness and report") {
  Rng rng(2);
  auto data = corpus::gen_synthetic(corpus::default_markers(), 1, 60, rng);
  auto vocab = corpus::Vocab::build(corpus::all_sequences(data.politeness));
  classifier::ClassifierConfig cfg;
  cfg.embedding_dim = 8;
  cfg.hidden = 4;
  cfg.filters = 3;
  cfg.epochs = 1;
  Rng train_rng(3);
  auto clf = classifier::train_classifier(data.politeness, cfg, vocab, train_rng);
  std::vector<TokenSeq> texts;
  for (int i = 0; i < 10; ++i) texts.push_back(data.politeness[static_cast<std::size_t>(i)].text);
  const auto m = mean_politeness(clf, texts);
  double total = 0;
  for (const auto& t : texts) total += classifier::score(clf, t).value();
  CHECK(m.mean == doctest::Approx(total / 10).epsilon(1e-12));
  CHECK(m.count == 10);
  std::vector<TokenSeq> same(5, texts[0]);
  CHECK(mean_politeness(clf, same).mean == doctest::Approx(classifier::score(clf, texts[0]).value()));
  std::reverse(texts.begin(), texts.end());
  CHECK(mean_politeness(clf, texts).mean == doctest::Approx(m.mean).epsilon(1e-12));
  auto with_empty = mean_politeness(clf, {TokenSeq{}});
  CHECK(with_empty.mean == kEmptyScore);
  CHECK(with_empty.empty == 1);
  CHECK_THROWS_AS(mean_politeness(clf, {}), UsageError);

  EvalReport report;
  report.seed = 7;
  report.dataset = "synthetic";
  report.models.push_back({"base", {0.4, 10}, {1.5, 10}, Scored{12.0, 80}, std::nullopt, std::nullopt, std::nullopt});
  report.models.push_back({"lft", {0.7, 10}, {1.1, 10}, {}, {}, {}, {}});
  report.correlations.push_back({"quality-vs-bleu", "pearson", correlate({1, 2, 3}, {1, 2, 4}, CorrelationKind::pearson)});
  auto j = report.to_json();
  CHECK(j["schema_version"] == 1);
  REQUIRE(j["models"].size() == 2);
  for (const auto& row : j["models"]) {
    CHECK(row.contains("politeness"));
    CHECK(row["politeness"].contains("count"));
    CHECK(row["bleu4"].contains("count"));
  }
  CHECK(j["models"][0]["ppl"]["count"] == 80);
  CHECK_FALSE(j["models"][1].contains("ppl"));
  CHECK(j["metadata"]["seed"] == 7);
  const auto text = report.to_text();
  CHECK(text.find("lft") != std::string::npos);
  CHECK(text.find("PPL=12.000") != std::string::npos);
}
