#include "courtesy/service/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "courtesy/errors.hpp"

namespace courtesy::service {

namespace {

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
std::string show(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  } else {
    return boost::lexical_cast<std::string>(v);
  }
}

template <typename T>
T parse(const std::string& key, const std::string& raw) {
  if constexpr (std::is_same_v<T, bool>) {
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw UsageError(key + ": expected true or false, got '" + raw + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    return raw;
  } else {
    if constexpr (std::is_unsigned_v<T>) {
      if (!raw.empty() && raw.front() == '-') throw UsageError(key + ": must not be negative");
    }
    try {
      return boost::lexical_cast<T>(raw);
    } catch (const boost::bad_lexical_cast&) {
      throw UsageError(key + ": cannot parse '" + raw + "'");
    }
  }
}

template <typename T, typename Get>
Field field(Get getter) {
  return {[getter](const RunConfig& c) { return show(getter(const_cast<RunConfig&>(c))); },
          [getter](RunConfig& c, const std::string& v) { getter(c) = parse<T>("", v); }};
}

#define COURTESY_FIELD(type, expr) field<type>([](RunConfig& c) -> type& { return expr; })

std::string show_widths(const std::vector<numerics::Index>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "," : "") + std::to_string(w[i]);
  return out;
}

const std::map<std::string, Field>& fields() {
  using numerics::Index;
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> m;
    m["run.seed"] = COURTESY_FIELD(std::uint64_t, c.seed);
    m["run.max_vocab"] = COURTESY_FIELD(std::size_t, c.max_vocab);
    m["run.profanity"] = COURTESY_FIELD(std::string, c.profanity);
    m["run.embeddings"] = COURTESY_FIELD(std::string, c.embeddings);
    m["synthetic.n"] = COURTESY_FIELD(std::size_t, c.synth_n);
    m["synthetic.grammar_seed"] = COURTESY_FIELD(std::uint64_t, c.grammar_seed);
    m["synthetic.test_fraction"] = COURTESY_FIELD(double, c.test_fraction);

    m["classifier.embedding_dim"] = COURTESY_FIELD(Index, c.classifier.embedding_dim);
    m["classifier.hidden"] = COURTESY_FIELD(Index, c.classifier.hidden);
    m["classifier.widths"] = {
        [](const RunConfig& c) { return show_widths(c.classifier.widths); },
        [](RunConfig& c, const std::string& v) {
          std::vector<Index> w;
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ',')) w.push_back(parse<Index>("classifier.widths", item));
          c.classifier.widths = w;
        }};
    m["classifier.filters"] = COURTESY_FIELD(Index, c.classifier.filters);
    m["classifier.activation"] = {
        [](const RunConfig& c) { return classifier::to_string(c.classifier.activation); },
        [](RunConfig& c, const std::string& v) { c.classifier.activation = classifier::parse_activation(v); }};
    m["classifier.dropout"] = COURTESY_FIELD(double, c.classifier.dropout);
    m["classifier.epochs"] = COURTESY_FIELD(int, c.classifier.epochs);
    m["classifier.batch_size"] = COURTESY_FIELD(int, c.classifier.batch_size);
    m["classifier.lr"] = COURTESY_FIELD(double, c.classifier.lr);
    m["classifier.clip_norm"] = COURTESY_FIELD(double, c.classifier.clip_norm);

    m["dialogue.embedding_dim"] = COURTESY_FIELD(Index, c.dialogue.embedding_dim);
    m["dialogue.hidden"] = COURTESY_FIELD(Index, c.dialogue.hidden);
    m["dialogue.attention"] = COURTESY_FIELD(Index, c.dialogue.attention);
    m["dialogue.encoder_layers"] = COURTESY_FIELD(int, c.dialogue.encoder_layers);
    m["dialogue.decoder_layers"] = COURTESY_FIELD(int, c.dialogue.decoder_layers);
    m["dialogue.dropout"] = COURTESY_FIELD(double, c.dialogue.dropout);
    m["dialogue.max_len"] = COURTESY_FIELD(std::size_t, c.dialogue.max_len);
    m["dialogue.epochs"] = COURTESY_FIELD(int, c.dialogue.train.epochs);
    m["dialogue.batch_size"] = COURTESY_FIELD(int, c.dialogue.train.batch_size);
    m["dialogue.lr"] = COURTESY_FIELD(double, c.dialogue.train.lr);
    m["dialogue.clip_norm"] = COURTESY_FIELD(double, c.dialogue.train.clip_norm);
    m["dialogue.scope"] = {
        [](const RunConfig& c) {
          return std::string(c.train_scope == dialogue::Scope::all_turns ? "all-turns" : "last-turn");
        },
        [](RunConfig& c, const std::string& v) { c.train_scope = dialogue::parse_scope(v); }};

    m["lm.embedding_dim"] = COURTESY_FIELD(Index, c.lm.embedding_dim);
    m["lm.hidden"] = COURTESY_FIELD(Index, c.lm.hidden);
    m["lm.layers"] = COURTESY_FIELD(int, c.lm.layers);
    m["lm.dropout"] = COURTESY_FIELD(double, c.lm.dropout);
    m["lm.max_len"] = COURTESY_FIELD(std::size_t, c.lm.max_len);
    m["lm.patience"] = COURTESY_FIELD(int, c.lm.patience);
    m["lm.epochs"] = COURTESY_FIELD(int, c.lm.train.epochs);
    m["lm.batch_size"] = COURTESY_FIELD(int, c.lm.train.batch_size);
    m["lm.lr"] = COURTESY_FIELD(double, c.lm.train.lr);
    m["lm.clip_norm"] = COURTESY_FIELD(double, c.lm.train.clip_norm);

    m["fusion.alpha"] = COURTESY_FIELD(double, c.fusion.alpha);

    m["lft.mode"] = {[](const RunConfig& c) { return style::to_string(c.lft.mode); },
                     [](RunConfig& c, const std::string& v) { c.lft.mode = style::parse_lft_mode(v); }};
    m["lft.test_score"] = COURTESY_FIELD(double, c.lft.test_score);
    m["lft.polite_from"] = COURTESY_FIELD(double, c.lft.polite_from);
    m["lft.neutral_from"] = COURTESY_FIELD(double, c.lft.neutral_from);

    m["rl.beta"] = COURTESY_FIELD(double, c.rl.beta);
    m["rl.baseline"] = COURTESY_FIELD(double, c.rl.baseline);
    m["rl.sign"] = {[](const RunConfig& c) { return style::to_string(c.rl.sign); },
                    [](RunConfig& c, const std::string& v) { c.rl.sign = style::parse_reward_sign(v); }};
    m["rl.samples_per_context"] = COURTESY_FIELD(int, c.rl.samples_per_context);
    m["rl.normalize_length"] = COURTESY_FIELD(bool, c.rl.normalize_length);

    m["retrieval.threshold"] = COURTESY_FIELD(double, c.retrieval_threshold);

    m["serve.host"] = COURTESY_FIELD(std::string, c.host);
    m["serve.port"] = COURTESY_FIELD(int, c.port);
    return m;
  }();
  return table;
}

#undef COURTESY_FIELD

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw UsageError("unknown config key '" + key + "'");
  try {
    it->second.set(*this, value);
  } catch (const UsageError& e) {
    throw UsageError(key + ": " + e.what());
  }
}

std::string RunConfig::get(const std::string& key) const {
  auto it = fields().find(key);
  if (it == fields().end()) throw UsageError("unknown config key '" + key + "'");
  return it->second.get(*this);
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, f] : fields()) out.push_back(k);
  return out;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw UsageError(path.string() + ": key '" + section + "' is outside any section");
    for (const auto& [key, value] : body) set(section + "." + key, value.get_value<std::string>());
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
  RunConfig c;
  c.merge_file(path);
  return c;
}

std::string RunConfig::canonical(const std::vector<std::string>& sections) const {
  std::string out;
  for (const auto& [k, f] : fields()) {
    const auto section = k.substr(0, k.find('.'));
    if (!sections.empty() && std::find(sections.begin(), sections.end(), section) == sections.end()) continue;
    out += k + " = " + f.get(*this) + "\n";
  }
  return out;
}

std::string RunConfig::hash(const std::vector<std::string>& sections) const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical(sections)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void RunConfig::write(const std::filesystem::path& path) const {
  boost::property_tree::ptree tree;
  for (const auto& [k, f] : fields()) tree.put(boost::property_tree::ptree::path_type(k, '.'), f.get(*this));
  boost::property_tree::ini_parser::write_ini(path.string(), tree);
}

void RunConfig::validate() const {
  classifier.validate();
  dialogue.validate();
  lm.validate();
  fusion.validate();
  lft.validate();
  rl.validate();
  if (!(retrieval_threshold >= 0 && retrieval_threshold <= 1)) throw UsageError("retrieval.threshold must lie in [0, 1]");
  if (!(test_fraction >= 0 && test_fraction < 1)) throw UsageError("synthetic.test_fraction must lie in [0, 1)");
  if (port < 0 || port > 65535) throw UsageError("serve.port out of range");
}

RunConfig resolve_config(const std::string& explicit_path) {
  if (!explicit_path.empty()) return RunConfig::load(explicit_path);
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return RunConfig::load(env);
  return RunConfig{};
}

}  // namespace courtesy::service
