#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "courtesy/classifier/classifier.hpp"
#include "courtesy/corpus/vocab.hpp"

namespace courtesy::retrieval {

using corpus::TokenSeq;

// (term id, weight) pairs sorted by term id.
struct SparseVector {
  std::vector<std::pair<int, double>> entries;
  double norm = 0;
};

// Sums products in increasing term order. 0 when either vector is zero.
double cosine(const SparseVector& a, const SparseVector& b);

struct Retrieved {
  std::size_t index = 0;
  TokenSeq response;
  double similarity = 0;
};

// tf = raw count, idf = ln((1 + N) / (1 + df)). Term ids follow first
// appearance over the candidates in order. Query terms that never occur in a
// candidate are dropped.
class TfIdfIndex {
 public:
  TfIdfIndex() = default;
  explicit TfIdfIndex(std::vector<TokenSeq> candidates);

  std::size_t size() const { return candidates_.size(); }
  const std::vector<TokenSeq>& candidates() const { return candidates_; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t df(int term) const { return df_.at(static_cast<std::size_t>(term)); }
  double idf(int term) const;
  int term_id(const std::string& term) const;  // -1 when unknown

  const SparseVector& vector(std::size_t i) const { return vectors_.at(i); }
  SparseVector vectorize(const TokenSeq& document) const;

  // Highest cosine; ties go to the lowest candidate index.
  Retrieved retrieve(const TokenSeq& context) const;

  nlohmann::json to_json() const;
  static TfIdfIndex from_json(const nlohmann::json& j);

 private:
  std::vector<TokenSeq> candidates_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, int> term_ids_;
  std::vector<std::size_t> df_;
  std::vector<SparseVector> vectors_;
};

// With a classifier only candidates scoring strictly above `threshold` are
// kept. An empty candidate set is a UsageError.
TfIdfIndex build_index(const std::vector<TokenSeq>& candidates, const classifier::Classifier* clf = nullptr,
                       double threshold = 0.8);

// u1 followed by u2 as one query document.
TokenSeq context_document(const TokenSeq& u1, const TokenSeq& u2);
TokenSeq context_document(const std::vector<TokenSeq>& history);

inline constexpr std::array<const char*, 10> kGeneric10 = {
    "thanks.",      "can you help?",          "can you clarify?",       "no problem.",         "you're welcome.",
    "interesting question.", "thanks for the answer.", "could you help please?", "can you elaborate?", "nice.",
};

TfIdfIndex generic10_index();

}  // namespace courtesy::retrieval
