#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "courtesy/classifier/classifier.hpp"
#include "courtesy/dialogue/lm.hpp"
#include "courtesy/dialogue/seq2seq.hpp"
#include "courtesy/retrieval/retrieval.hpp"
#include "courtesy/style/style.hpp"

namespace courtesy::service {

// Byte layout is described in docs/checkpoint-format.md.
inline constexpr char kMagic[4] = {'P', 'D', 'L', 'G'};
inline constexpr std::uint32_t kFormatVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<float> data;  // row-major
};

struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
  // Same bytes on disk, i.e. identical metadata and tensors.
  bool operator==(const Checkpoint& other) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
// Bad magic, a different version or truncated data raise ParseError.
Checkpoint decode_checkpoint(std::string_view bytes);

// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

enum class ModelKind { classifier, seq2seq, lm, retrieval };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
ModelKind kind_of(const Checkpoint& ckpt);

// ---- configs as JSON

nlohmann::json to_json(const classifier::ClassifierConfig& c);
nlohmann::json to_json(const dialogue::TrainOptions& c);
nlohmann::json to_json(const dialogue::Seq2seqConfig& c);
nlohmann::json to_json(const dialogue::LmConfig& c);
classifier::ClassifierConfig classifier_config(const nlohmann::json& j);
dialogue::TrainOptions train_options(const nlohmann::json& j);
dialogue::Seq2seqConfig seq2seq_config(const nlohmann::json& j);
dialogue::LmConfig lm_config(const nlohmann::json& j);

// ---- decoding strategies recorded with a seq2seq checkpoint

nlohmann::json base_strategy();
nlohmann::json lft_strategy(const style::LftConfig& cfg);
nlohmann::json rl_strategy(const style::RlConfig& cfg);
std::string strategy_name(const Checkpoint& ckpt);
style::LftConfig lft_config(const nlohmann::json& strategy);

// ---- models <-> checkpoints

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
};

Checkpoint pack(classifier::Classifier& model, const Provenance& prov);
// `profanity` is stored so decoding can rebuild the same token mask.
Checkpoint pack(dialogue::Seq2seq& model, const nlohmann::json& strategy, const std::vector<std::string>& profanity,
                const Provenance& prov);
Checkpoint pack(dialogue::LanguageModel& model, const std::vector<std::string>& profanity, const Provenance& prov);
Checkpoint pack(const retrieval::TfIdfIndex& index, const nlohmann::json& filter, const Provenance& prov);

classifier::Classifier unpack_classifier(const Checkpoint& ckpt);
dialogue::Seq2seq unpack_seq2seq(const Checkpoint& ckpt);
dialogue::LanguageModel unpack_lm(const Checkpoint& ckpt);
retrieval::TfIdfIndex unpack_index(const Checkpoint& ckpt);

corpus::Vocab vocab_of(const Checkpoint& ckpt);
std::vector<std::string> profanity_of(const Checkpoint& ckpt);

}  // namespace courtesy::service
