#include "courtesy/retrieval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "courtesy/errors.hpp"

namespace courtesy::retrieval {

double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.norm == 0 || b.norm == 0) return 0;
  double dot = 0;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      dot += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return std::clamp(dot / (a.norm * b.norm), 0.0, 1.0);
}

TfIdfIndex::TfIdfIndex(std::vector<TokenSeq> candidates) : candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw UsageError("retrieval index needs at least one candidate");
  for (const auto& doc : candidates_) {
    std::vector<int> seen;
    for (const auto& tok : doc) {
      auto [it, added] = term_ids_.emplace(tok, static_cast<int>(terms_.size()));
      if (added) {
        terms_.push_back(tok);
        df_.push_back(0);
      }
      seen.push_back(it->second);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (int t : seen) ++df_[static_cast<std::size_t>(t)];
  }
  vectors_.reserve(candidates_.size());
  for (const auto& doc : candidates_) vectors_.push_back(vectorize(doc));
}

double TfIdfIndex::idf(int term) const {
  const double n = static_cast<double>(candidates_.size());
  return std::log((1.0 + n) / (1.0 + static_cast<double>(df(term))));
}

int TfIdfIndex::term_id(const std::string& term) const {
  auto it = term_ids_.find(term);
  return it == term_ids_.end() ? -1 : it->second;
}

SparseVector TfIdfIndex::vectorize(const TokenSeq& document) const {
  std::map<int, int> counts;
  for (const auto& tok : document) {
    const int t = term_id(tok);
    if (t >= 0) ++counts[t];
  }
  SparseVector v;
  double sq = 0;
  for (auto [t, c] : counts) {
    const double w = c * idf(t);
    if (w == 0) continue;
    v.entries.emplace_back(t, w);
    sq += w * w;
  }
  v.norm = std::sqrt(sq);
  return v;
}

Retrieved TfIdfIndex::retrieve(const TokenSeq& context) const {
  const auto q = vectorize(context);
  Retrieved best;
  best.similarity = -1;
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const double s = cosine(q, vectors_[i]);
    if (s > best.similarity) {
      best.index = i;
      best.similarity = s;
    }
  }
  best.response = candidates_[best.index];
  return best;
}

nlohmann::json TfIdfIndex::to_json() const {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& c : candidates_) docs.push_back(c);
  return {{"candidates", docs}};
}

TfIdfIndex TfIdfIndex::from_json(const nlohmann::json& j) {
  return TfIdfIndex(j.at("candidates").get<std::vector<TokenSeq>>());
}

TfIdfIndex build_index(const std::vector<TokenSeq>& candidates, const classifier::Classifier* clf, double threshold) {
  if (clf == nullptr) {
    if (candidates.empty()) throw UsageError("retrieval index needs at least one candidate");
    return TfIdfIndex(candidates);
  }
  std::vector<TokenSeq> nonempty;
  for (const auto& c : candidates) {
    if (!c.empty()) nonempty.push_back(c);
  }
  auto kept = classifier::filter_polite(*clf, nonempty, threshold);
  if (kept.empty()) throw UsageError("no candidate scores above the politeness threshold");
  return TfIdfIndex(std::move(kept));
}

TokenSeq context_document(const TokenSeq& u1, const TokenSeq& u2) {
  TokenSeq doc = u1;
  doc.insert(doc.end(), u2.begin(), u2.end());
  return doc;
}

TokenSeq context_document(const std::vector<TokenSeq>& history) {
  if (history.empty()) return {};
  if (history.size() == 1) return history.front();
  return context_document(history[history.size() - 2], history.back());
}

TfIdfIndex generic10_index() {
  std::vector<TokenSeq> docs;
  for (const char* s : kGeneric10) docs.push_back(corpus::tokenize(s));
  return TfIdfIndex(std::move(docs));
}

}  // namespace courtesy::retrieval
