#include "courtesy/corpus/dataset.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "courtesy/errors.hpp"
#include "courtesy/numerics/rng.hpp"

namespace courtesy::corpus {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line_no, const std::string& why) {
  throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
}

std::string string_field(const json& obj, const char* key, const std::filesystem::path& path, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) malformed(path, line_no, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed(path, line_no, e.what());
    }
    if (!obj.is_object()) malformed(path, line_no, "expected a JSON object");
    fn(obj, line_no);
  }
}

}  // namespace

CorpusFormat parse_format(std::string_view name) {
  if (name == "triples-jsonl") return CorpusFormat::triples_jsonl;
  if (name == "politeness-jsonl") return CorpusFormat::politeness_jsonl;
  if (name == "lm-text") return CorpusFormat::lm_text;
  throw UsageError("unknown corpus format '" + std::string(name) + "'");
}

std::vector<DialogueTriple> load_triples(const std::filesystem::path& path) {
  std::vector<DialogueTriple> out;
  for_each_json_line(path, [&](const json& obj, std::size_t line_no) {
    DialogueTriple t{tokenize(string_field(obj, "u1", path, line_no)), tokenize(string_field(obj, "u2", path, line_no)),
                     tokenize(string_field(obj, "u3", path, line_no))};
    if (t.u3.empty()) malformed(path, line_no, "empty u3");
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<StyledUtterance> load_politeness(const std::filesystem::path& path) {
  std::vector<StyledUtterance> out;
  for_each_json_line(path, [&](const json& obj, std::size_t line_no) {
    auto label = obj.find("label");
    if (label == obj.end() || !label->is_number_integer()) malformed(path, line_no, "missing integer field 'label'");
    const int value = label->get<int>();
    if (value != 0 && value != 1) malformed(path, line_no, "label must be 0 or 1");
    out.push_back({tokenize(string_field(obj, "text", path, line_no)), static_cast<Politeness>(value)});
  });
  return out;
}

std::vector<TokenSeq> load_lm_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<TokenSeq> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!blank(line)) out.push_back(tokenize(line));
  }
  return out;
}

Dataset load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::triples_jsonl:
      return load_triples(path);
    case CorpusFormat::politeness_jsonl:
      return load_politeness(path);
    case CorpusFormat::lm_text:
      return load_lm_text(path);
  }
  throw UsageError("unknown corpus format");
}

void save_triples(const std::filesystem::path& path, const std::vector<DialogueTriple>& triples) {
  auto out = open_out(path);
  for (const auto& t : triples) out << json{{"u1", join(t.u1)}, {"u2", join(t.u2)}, {"u3", join(t.u3)}}.dump() << '\n';
}

void save_politeness(const std::filesystem::path& path, const std::vector<StyledUtterance>& utterances) {
  auto out = open_out(path);
  for (const auto& u : utterances) {
    out << json{{"text", join(u.text)}, {"label", static_cast<int>(u.label)}}.dump() << '\n';
  }
}

void save_lm_text(const std::filesystem::path& path, const std::vector<TokenSeq>& utterances) {
  auto out = open_out(path);
  for (const auto& u : utterances) out << join(u) << '\n';
}

void save_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  auto out = open_out(path);
  for (const auto& t : vocab.regular_tokens()) out << t << '\n';
}

Vocab load_vocab(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocab::from_tokens(tokens);
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (auto& t : tokenize(line)) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  numerics::Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

std::vector<TokenSeq> all_sequences(const std::vector<DialogueTriple>& triples) {
  std::vector<TokenSeq> out;
  out.reserve(triples.size() * 3);
  for (const auto& t : triples) {
    out.push_back(t.u1);
    out.push_back(t.u2);
    out.push_back(t.u3);
  }
  return out;
}

std::vector<TokenSeq> all_sequences(const std::vector<StyledUtterance>& utterances) {
  std::vector<TokenSeq> out;
  out.reserve(utterances.size());
  for (const auto& u : utterances) out.push_back(u.text);
  return out;
}

}  // namespace courtesy::corpus
