#include "courtesy/service/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "courtesy/errors.hpp"

namespace courtesy::service {

using nlohmann::json;

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "checkpoints store IEEE-754 binary32");

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw ParseError("checkpoint truncated at byte " + std::to_string(pos_));
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t uint(int width) {
    auto b = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  return encode_checkpoint(*this) == encode_checkpoint(other);
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, 4);
  put_u32(out, kFormatVersion);
  const std::string meta = ckpt.metadata.dump();
  put_u64(out, meta.size());
  out += meta;
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    std::uint64_t count = 1;
    for (auto d : t.dims) count *= d;
    if (count != t.data.size()) throw DimensionError("tensor '" + t.name + "': dims do not match data");
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u64(out, d);
    for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4) != std::string_view(kMagic, 4)) throw ParseError("not a checkpoint (bad magic)");
  const auto version = in.uint(4);
  if (version != kFormatVersion) {
    throw ParseError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                     std::to_string(kFormatVersion) + ")");
  }
  const auto meta_len = in.uint(8);
  if (meta_len > in.remaining()) throw ParseError("checkpoint truncated in metadata");
  Checkpoint ckpt;
  try {
    ckpt.metadata = json::parse(in.take(static_cast<std::size_t>(meta_len)));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  const auto count = in.uint(4);
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = std::string(in.take(static_cast<std::size_t>(in.uint(4))));
    const auto rank = in.uint(4);
    std::uint64_t n = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      t.dims.push_back(in.uint(8));
      n *= t.dims.back();
    }
    if (n > in.remaining() / 4) throw ParseError("checkpoint truncated in tensor '" + t.name + "'");
    t.data.resize(static_cast<std::size_t>(n));
    for (auto& f : t.data) f = std::bit_cast<float>(static_cast<std::uint32_t>(in.uint(4)));
    ckpt.tensors.push_back(std::move(t));
  }
  if (in.remaining() != 0) throw ParseError("trailing bytes after checkpoint tensors");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_checkpoint(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::classifier: return "classifier";
    case ModelKind::seq2seq: return "seq2seq";
    case ModelKind::lm: return "lm";
    case ModelKind::retrieval: return "retrieval";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto k : {ModelKind::classifier, ModelKind::seq2seq, ModelKind::lm, ModelKind::retrieval}) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown model kind '" + name + "'");
}

ModelKind kind_of(const Checkpoint& ckpt) {
  if (!ckpt.metadata.contains("kind")) throw ParseError("checkpoint metadata has no kind");
  return parse_model_kind(ckpt.metadata["kind"].get<std::string>());
}

// ---- configs

json to_json(const classifier::ClassifierConfig& c) {
  return {{"embedding_dim", c.embedding_dim}, {"hidden", c.hidden},   {"widths", c.widths},
          {"filters", c.filters},             {"activation", classifier::to_string(c.activation)},
          {"dropout", c.dropout},             {"epochs", c.epochs},   {"batch_size", c.batch_size},
          {"lr", c.lr},                       {"clip_norm", c.clip_norm}};
}

json to_json(const dialogue::TrainOptions& c) {
  return {{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"lr", c.lr}, {"clip_norm", c.clip_norm}};
}

json to_json(const dialogue::Seq2seqConfig& c) {
  return {{"embedding_dim", c.embedding_dim},
          {"hidden", c.hidden},
          {"attention", c.attention},
          {"encoder_layers", c.encoder_layers},
          {"decoder_layers", c.decoder_layers},
          {"dropout", c.dropout},
          {"max_len", c.max_len},
          {"train", to_json(c.train)}};
}

json to_json(const dialogue::LmConfig& c) {
  return {{"embedding_dim", c.embedding_dim}, {"hidden", c.hidden},   {"layers", c.layers},
          {"dropout", c.dropout},             {"max_len", c.max_len}, {"patience", c.patience},
          {"train", to_json(c.train)}};
}

classifier::ClassifierConfig classifier_config(const json& j) {
  classifier::ClassifierConfig c;
  j.at("embedding_dim").get_to(c.embedding_dim);
  j.at("hidden").get_to(c.hidden);
  j.at("widths").get_to(c.widths);
  j.at("filters").get_to(c.filters);
  c.activation = classifier::parse_activation(j.at("activation").get<std::string>());
  j.at("dropout").get_to(c.dropout);
  j.at("epochs").get_to(c.epochs);
  j.at("batch_size").get_to(c.batch_size);
  j.at("lr").get_to(c.lr);
  j.at("clip_norm").get_to(c.clip_norm);
  return c;
}

dialogue::TrainOptions train_options(const json& j) {
  dialogue::TrainOptions c;
  j.at("epochs").get_to(c.epochs);
  j.at("batch_size").get_to(c.batch_size);
  j.at("lr").get_to(c.lr);
  j.at("clip_norm").get_to(c.clip_norm);
  return c;
}

dialogue::Seq2seqConfig seq2seq_config(const json& j) {
  dialogue::Seq2seqConfig c;
  j.at("embedding_dim").get_to(c.embedding_dim);
  j.at("hidden").get_to(c.hidden);
  j.at("attention").get_to(c.attention);
  j.at("encoder_layers").get_to(c.encoder_layers);
  j.at("decoder_layers").get_to(c.decoder_layers);
  j.at("dropout").get_to(c.dropout);
  j.at("max_len").get_to(c.max_len);
  c.train = train_options(j.at("train"));
  return c;
}

dialogue::LmConfig lm_config(const json& j) {
  dialogue::LmConfig c;
  j.at("embedding_dim").get_to(c.embedding_dim);
  j.at("hidden").get_to(c.hidden);
  j.at("layers").get_to(c.layers);
  j.at("dropout").get_to(c.dropout);
  j.at("max_len").get_to(c.max_len);
  j.at("patience").get_to(c.patience);
  c.train = train_options(j.at("train"));
  return c;
}

// ---- strategies

json base_strategy() { return {{"name", "base"}}; }

json lft_strategy(const style::LftConfig& cfg) {
  return {{"name", "lft"},
          {"mode", style::to_string(cfg.mode)},
          {"test_score", cfg.test_score},
          {"polite_from", cfg.polite_from},
          {"neutral_from", cfg.neutral_from}};
}

json rl_strategy(const style::RlConfig& cfg) {
  return {{"name", "rl"},
          {"beta", cfg.beta},
          {"baseline", cfg.baseline},
          {"sign", style::to_string(cfg.sign)},
          {"samples_per_context", cfg.samples_per_context},
          {"normalize_length", cfg.normalize_length}};
}

std::string strategy_name(const Checkpoint& ckpt) {
  const auto& m = ckpt.metadata;
  if (!m.contains("strategy") || !m["strategy"].contains("name")) return "none";
  return m["strategy"]["name"].get<std::string>();
}

style::LftConfig lft_config(const json& strategy) {
  style::LftConfig c;
  c.mode = style::parse_lft_mode(strategy.at("mode").get<std::string>());
  strategy.at("test_score").get_to(c.test_score);
  strategy.at("polite_from").get_to(c.polite_from);
  strategy.at("neutral_from").get_to(c.neutral_from);
  c.validate();
  return c;
}

// ---- models

namespace {

json base_metadata(ModelKind kind, const corpus::Vocab& vocab, const Provenance& prov) {
  return {{"kind", to_string(kind)},
          {"vocab", vocab.regular_tokens()},
          {"seed", prov.seed},
          {"config_hash", prov.config_hash}};
}

std::vector<NamedTensor> dump(const numerics::NamedParams<float>& params) {
  std::vector<NamedTensor> out;
  for (const auto& [name, t] : params) {
    NamedTensor nt;
    nt.name = name;
    const auto& v = t->value;
    nt.dims = {static_cast<std::uint64_t>(v.rows()), static_cast<std::uint64_t>(v.cols())};
    nt.data.reserve(static_cast<std::size_t>(v.size()));
    for (numerics::Index r = 0; r < v.rows(); ++r)
      for (numerics::Index c = 0; c < v.cols(); ++c) nt.data.push_back(v(r, c));
    out.push_back(std::move(nt));
  }
  return out;
}

void restore(const numerics::NamedParams<float>& params, const Checkpoint& ckpt) {
  if (params.size() != ckpt.tensors.size()) {
    throw ParseError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, model expects " +
                     std::to_string(params.size()));
  }
  for (const auto& [name, t] : params) {
    const auto* nt = ckpt.find(name);
    if (nt == nullptr) throw ParseError("checkpoint is missing tensor '" + name + "'");
    auto& v = t->value;
    if (nt->dims.size() != 2 || nt->dims[0] != static_cast<std::uint64_t>(v.rows()) ||
        nt->dims[1] != static_cast<std::uint64_t>(v.cols())) {
      throw ParseError("tensor '" + name + "' has the wrong shape for the stored config");
    }
    std::size_t k = 0;
    for (numerics::Index r = 0; r < v.rows(); ++r)
      for (numerics::Index c = 0; c < v.cols(); ++c) v(r, c) = nt->data[k++];
  }
}

void expect_kind(const Checkpoint& ckpt, ModelKind kind) {
  if (kind_of(ckpt) != kind) {
    throw UsageError("expected a " + to_string(kind) + " checkpoint, got " + to_string(kind_of(ckpt)));
  }
}

}  // namespace

corpus::Vocab vocab_of(const Checkpoint& ckpt) {
  return corpus::Vocab::from_tokens(ckpt.metadata.at("vocab").get<std::vector<std::string>>());
}

std::vector<std::string> profanity_of(const Checkpoint& ckpt) {
  if (!ckpt.metadata.contains("profanity")) return {};
  return ckpt.metadata["profanity"].get<std::vector<std::string>>();
}

Checkpoint pack(classifier::Classifier& model, const Provenance& prov) {
  Checkpoint ckpt;
  ckpt.metadata = base_metadata(ModelKind::classifier, model.vocab(), prov);
  ckpt.metadata["config"] = to_json(model.config());
  ckpt.metadata["strategy"] = {{"name", "none"}};
  ckpt.tensors = dump(model.named_parameters());
  return ckpt;
}

Checkpoint pack(dialogue::Seq2seq& model, const json& strategy, const std::vector<std::string>& profanity,
                const Provenance& prov) {
  Checkpoint ckpt;
  ckpt.metadata = base_metadata(ModelKind::seq2seq, model.vocab(), prov);
  ckpt.metadata["config"] = to_json(model.config());
  ckpt.metadata["strategy"] = strategy;
  ckpt.metadata["profanity"] = profanity;
  ckpt.tensors = dump(model.named_parameters());
  return ckpt;
}

Checkpoint pack(dialogue::LanguageModel& model, const std::vector<std::string>& profanity, const Provenance& prov) {
  Checkpoint ckpt;
  ckpt.metadata = base_metadata(ModelKind::lm, model.vocab(), prov);
  ckpt.metadata["config"] = to_json(model.config());
  ckpt.metadata["strategy"] = {{"name", "none"}};
  ckpt.metadata["profanity"] = profanity;
  ckpt.tensors = dump(model.named_parameters());
  return ckpt;
}

Checkpoint pack(const retrieval::TfIdfIndex& index, const json& filter, const Provenance& prov) {
  Checkpoint ckpt;
  ckpt.metadata = {{"kind", to_string(ModelKind::retrieval)},
                   {"seed", prov.seed},
                   {"config_hash", prov.config_hash},
                   {"strategy", {{"name", "tfidf"}, {"filter", filter}}},
                   {"index", index.to_json()}};
  return ckpt;
}

classifier::Classifier unpack_classifier(const Checkpoint& ckpt) {
  expect_kind(ckpt, ModelKind::classifier);
  numerics::Rng rng(0);
  classifier::Classifier model(classifier_config(ckpt.metadata.at("config")), vocab_of(ckpt), rng);
  restore(model.named_parameters(), ckpt);
  return model;
}

dialogue::Seq2seq unpack_seq2seq(const Checkpoint& ckpt) {
  expect_kind(ckpt, ModelKind::seq2seq);
  numerics::Rng rng(0);
  dialogue::Seq2seq model(seq2seq_config(ckpt.metadata.at("config")), vocab_of(ckpt), rng);
  restore(model.named_parameters(), ckpt);
  return model;
}

dialogue::LanguageModel unpack_lm(const Checkpoint& ckpt) {
  expect_kind(ckpt, ModelKind::lm);
  numerics::Rng rng(0);
  dialogue::LanguageModel model(lm_config(ckpt.metadata.at("config")), vocab_of(ckpt), rng);
  restore(model.named_parameters(), ckpt);
  return model;
}

retrieval::TfIdfIndex unpack_index(const Checkpoint& ckpt) {
  expect_kind(ckpt, ModelKind::retrieval);
  return retrieval::TfIdfIndex::from_json(ckpt.metadata.at("index"));
}

}  // namespace courtesy::service
