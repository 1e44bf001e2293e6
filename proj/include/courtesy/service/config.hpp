#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "courtesy/classifier/classifier.hpp"
#include "courtesy/dialogue/common.hpp"
#include "courtesy/dialogue/lm.hpp"
#include "courtesy/dialogue/seq2seq.hpp"
#include "courtesy/style/style.hpp"

namespace courtesy::service {

// Every tunable default in one place. Files are INI ("[section]" then
// "key = value"); keys are addressed as section.key. Unknown keys are a
// UsageError.
struct RunConfig {
  // [run]
  std::uint64_t seed = 1;
  std::size_t max_vocab = 10000;
  std::string profanity = "data/profanity.txt";  // empty: no profanity mask
  std::string embeddings;                        // optional word-vector text file
  // [synthetic]
  std::size_t synth_n = 10000;
  std::uint64_t grammar_seed = 1;
  double test_fraction = 0.1;

  classifier::ClassifierConfig classifier;
  dialogue::Seq2seqConfig dialogue;
  dialogue::Scope train_scope = dialogue::Scope::last_turn;
  dialogue::LmConfig lm;
  style::FusionConfig fusion;
  style::LftConfig lft;
  style::RlConfig rl;
  double retrieval_threshold = 0.8;
  // [serve]
  std::string host = "127.0.0.1";
  int port = 8080;

  // Throws UsageError for an unknown key or a value that does not parse.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static std::vector<std::string> keys();

  // Applies every key in the file on top of the current values.
  void merge_file(const std::filesystem::path& path);
  static RunConfig load(const std::filesystem::path& path);

  // Sorted "section.key = value" lines; the hash is FNV-1a 64 over them.
  // Passing sections restricts both to keys under those sections.
  std::string canonical(const std::vector<std::string>& sections = {}) const;
  std::string hash(const std::vector<std::string>& sections = {}) const;
  void write(const std::filesystem::path& path) const;

  void validate() const;
};

inline constexpr const char* kConfigEnv = "COURTESY_CONFIG";

// --config when given, else $COURTESY_CONFIG, else built-in defaults.
RunConfig resolve_config(const std::string& explicit_path);

}  // namespace courtesy::service
