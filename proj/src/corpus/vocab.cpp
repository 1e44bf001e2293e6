#include "courtesy/corpus/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "courtesy/errors.hpp"

namespace courtesy::corpus {

namespace {

bool is_placeholder(std::string_view chunk) {
  if (chunk.size() < 3 || chunk.front() != '<' || chunk.back() != '>') return false;
  return std::all_of(chunk.begin() + 1, chunk.end() - 1, [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == ':' || c == '/';
  });
}

bool splits_off(unsigned char c) { return c < 0x80 && std::ispunct(c) && c != '\''; }

}  // namespace

TokenSeq tokenize(std::string_view raw) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t end = i;
    while (end < raw.size() && !std::isspace(static_cast<unsigned char>(raw[end]))) ++end;
    if (end == i) break;
    std::string chunk(raw.substr(i, end - i));
    for (auto& c : chunk) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    i = end;
    if (is_placeholder(chunk)) {
      out.push_back(std::move(chunk));
      continue;
    }
    std::string word;
    for (char c : chunk) {
      if (splits_off(static_cast<unsigned char>(c))) {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
        out.emplace_back(1, c);
      } else {
        word.push_back(c);
      }
    }
    if (!word.empty()) out.push_back(std::move(word));
  }
  return out;
}

std::string join(const TokenSeq& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<unk>", "</s>", "<sep>", "<label>", "<label:rude>", "<label:neutral>", "<label:polite>"}) {
    add(t);
  }
}

void Vocab::add(std::string token) {
  if (ids_.count(token) != 0) throw UsageError("vocab: duplicate token '" + token + "'");
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(std::span<const TokenSeq> sequences, std::size_t max_size) {
  Vocab vocab;
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : sequences) {
    for (const auto& t : seq) {
      if (vocab.ids_.count(t) == 0) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (max_size != 0 && ranked.size() > max_size) ranked.resize(max_size);
  for (auto& [token, _] : ranked) vocab.add(token);
  return vocab;
}

Vocab Vocab::from_tokens(std::span<const std::string> tokens) {
  Vocab vocab;
  for (const auto& t : tokens) vocab.add(t);
  return vocab;
}

bool Vocab::contains(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw UsageError("vocab: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(const TokenSeq& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

TokenSeq Vocab::decode(std::span<const int> ids) const {
  TokenSeq out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

std::vector<std::string> Vocab::regular_tokens() const {
  return {tokens_.begin() + kReserved, tokens_.end()};
}

}  // namespace courtesy::corpus
