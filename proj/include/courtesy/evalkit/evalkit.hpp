#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "courtesy/classifier/classifier.hpp"
#include "courtesy/corpus/vocab.hpp"

namespace courtesy::evalkit {

using corpus::TokenSeq;

// ---- BLEU

struct BleuOptions {
  int max_order = 4;
  // Add-one smoothing on orders above 1. Meant for sentence-level debugging;
  // reported corpus scores leave it off.
  bool smooth = false;
};

// Corpus-level BLEU in [0, 100]: geometric mean of clipped n-gram precisions
// (counts pooled over the corpus) times the brevity penalty. Any zero
// precision numerator gives 0 unless smoothing is on.
double bleu(const std::vector<TokenSeq>& hypotheses, const std::vector<TokenSeq>& references,
            const BleuOptions& opts = {});
inline double bleu4(const std::vector<TokenSeq>& hypotheses, const std::vector<TokenSeq>& references) {
  return bleu(hypotheses, references);
}
// Mean of per-pair BLEU scores.
double sentence_bleu(const std::vector<TokenSeq>& hypotheses, const std::vector<TokenSeq>& references,
                     const BleuOptions& opts = {4, true});

struct NgramStats {
  std::vector<double> matches;  // clipped, per order
  std::vector<double> totals;   // hypothesis n-grams, per order
  double hyp_length = 0;
  double ref_length = 0;
};
NgramStats ngram_stats(const std::vector<TokenSeq>& hypotheses, const std::vector<TokenSeq>& references,
                       int max_order);

// ---- politeness

struct MeanScore {
  double mean = 0;
  std::size_t count = 0;
  std::size_t empty = 0;  // empty responses, scored as kEmptyScore
};
inline constexpr double kEmptyScore = 0.5;

// Arithmetic mean of classifier::score. Empty responses count as kEmptyScore.
MeanScore mean_politeness(const classifier::Classifier& clf, const std::vector<TokenSeq>& responses);

// ---- correlation

enum class CorrelationKind { pearson, spearman };
std::string to_string(CorrelationKind kind);
CorrelationKind parse_correlation(const std::string& name);

struct Correlation {
  double r = 0;
  std::size_t n = 0;
  std::string note;
};

// Needs equal lengths >= 3. Zero variance raises UndefinedError. Spearman
// is Pearson on average ranks.
Correlation correlate(const std::vector<double>& a, const std::vector<double>& b, CorrelationKind kind);
double pearson(const std::vector<double>& a, const std::vector<double>& b);
double spearman(const std::vector<double>& a, const std::vector<double>& b);
// 1-based ranks, ties share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& x);

// ---- agreement

// Likert ratings, item -> annotator -> rating in 1..5.
class AnnotationTable {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 5;

  void add(const std::string& item, const std::string& annotator, int rating);
  // CSV with header item_id,annotator_id,rating.
  static AnnotationTable load_csv(const std::filesystem::path& path);

  std::vector<std::string> annotators() const;
  std::size_t items() const { return ratings_.size(); }
  // Rating pairs for the two annotators, in item order. Needs exactly two
  // annotators and every item rated by both.
  std::vector<std::pair<int, int>> pairs() const;

 private:
  std::map<std::string, std::map<std::string, int>> ratings_;
};

// {1,2} -> 0 (low), 3 -> 1 (mid), {4,5} -> 2 (high).
int collapse(int rating);

// Square confusion counts, rows = first annotator.
double cohen_kappa(const std::vector<std::vector<double>>& confusion);
double cohen_kappa(const AnnotationTable& table, bool collapsed);

// ---- reports

struct Scored {
  double value = 0;
  std::size_t count = 0;
};

struct ModelRow {
  std::string id;
  Scored politeness;
  Scored bleu4;
  std::optional<Scored> ppl, wer, ppl_last, wer_last;
};

struct EvalReport {
  static constexpr int kSchemaVersion = 1;
  std::vector<ModelRow> models;
  struct CorrelationRow {
    std::string name;
    std::string kind;
    Correlation value;
  };
  std::vector<CorrelationRow> correlations;
  std::uint64_t seed = 0;
  std::string dataset;
  std::vector<std::string> checkpoints;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

}  // namespace courtesy::evalkit
