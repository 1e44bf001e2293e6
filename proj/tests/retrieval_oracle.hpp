#pragma once

// Dense brute-force TF-IDF: every document is a full-length vector over all
// terms, cosine computed directly.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "courtesy/corpus/vocab.hpp"
#include "courtesy/numerics/rng.hpp"

namespace courtesy::testing {

using corpus::TokenSeq;

struct DenseOracle {
  std::vector<std::string> terms;
  std::vector<std::vector<double>> docs;
  std::vector<double> idf;

  explicit DenseOracle(const std::vector<TokenSeq>& candidates) {
    for (const auto& d : candidates)
      for (const auto& t : d)
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    const double n = static_cast<double>(candidates.size());
    for (const auto& t : terms) {
      double df = 0;
      for (const auto& d : candidates) df += std::count(d.begin(), d.end(), t) > 0 ? 1 : 0;
      idf.push_back(std::log((1 + n) / (1 + df)));
    }
    for (const auto& d : candidates) docs.push_back(vec(d));
  }

  std::vector<double> vec(const TokenSeq& d) const {
    std::vector<double> v(terms.size(), 0.0);
    for (std::size_t k = 0; k < terms.size(); ++k)
      v[k] = static_cast<double>(std::count(d.begin(), d.end(), terms[k])) * idf[k];
    return v;
  }

  static double cos(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] != 0 && b[k] != 0) dot += a[k] * b[k];
      if (a[k] != 0) na += a[k] * a[k];
      if (b[k] != 0) nb += b[k] * b[k];
    }
    if (na == 0 || nb == 0) return 0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
  }

  std::pair<std::size_t, double> argmax(const TokenSeq& q) const {
    const auto qv = vec(q);
    std::size_t best = 0;
    double s = cos(qv, docs[0]);
    for (std::size_t i = 1; i < docs.size(); ++i) {
      const double c = cos(qv, docs[i]);
      if (c > s) {
        s = c;
        best = i;
      }
    }
    return {best, s};
  }
};

inline TokenSeq random_doc(numerics::Rng& rng, std::size_t vocab, std::size_t max_len) {
  TokenSeq d;
  const auto len = 1 + rng.below(max_len);
  for (std::uint64_t i = 0; i < len; ++i) d.push_back("w" + std::to_string(rng.below(vocab)));
  return d;
}

}  // namespace courtesy::testing
