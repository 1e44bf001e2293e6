#include "courtesy/service/api.hpp"

#include <httplib.h>

#include "courtesy/errors.hpp"

namespace courtesy::service {

using nlohmann::json;

std::string LoadedModel::strategy_name() const {
  return strategy.is_object() && strategy.contains("name") ? strategy["name"].get<std::string>() : "none";
}

LoadedModel load_model(const std::string& id, const Checkpoint& ckpt) {
  LoadedModel m;
  m.id = id;
  m.kind = kind_of(ckpt);
  m.strategy = ckpt.metadata.value("strategy", json::object());
  m.profanity = profanity_of(ckpt);
  switch (m.kind) {
    case ModelKind::classifier:
      m.classifier = std::make_shared<const classifier::Classifier>(unpack_classifier(ckpt));
      break;
    case ModelKind::seq2seq:
      m.seq2seq = std::make_shared<const dialogue::Seq2seq>(unpack_seq2seq(ckpt));
      if (m.strategy_name() == "lft") lft_config(m.strategy);
      break;
    case ModelKind::lm:
      m.lm = std::make_shared<const dialogue::LanguageModel>(unpack_lm(ckpt));
      break;
    case ModelKind::retrieval:
      m.index = std::make_shared<const retrieval::TfIdfIndex>(unpack_index(ckpt));
      break;
  }
  return m;
}

void ModelRegistry::add(LoadedModel model) {
  const std::string id = model.id;
  if (!models_.emplace(id, std::move(model)).second) throw UsageError("duplicate model id '" + id + "'");
}

void ModelRegistry::add_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("checkpoint not found: " + path.string());
  add(load_model(path.stem().string(), load_checkpoint(path)));
}

const LoadedModel* ModelRegistry::find(const std::string& id) const {
  auto it = models_.find(id);
  return it == models_.end() ? nullptr : &it->second;
}

const LoadedModel* ModelRegistry::first(ModelKind kind) const {
  for (const auto& [id, m] : models_) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

const LoadedModel* ModelRegistry::lm_for(const corpus::Vocab& vocab) const {
  for (const auto& [id, m] : models_) {
    if (m.kind == ModelKind::lm && m.lm->vocab().all_tokens() == vocab.all_tokens()) return &m;
  }
  return nullptr;
}

namespace {

struct RequestError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void reject(std::string message, int status = 400, std::string code = "invalid_request") {
  throw RequestError{status, std::move(code), std::move(message)};
}

ApiResponse error_response(const RequestError& e) {
  return {e.status, {{"error", {{"code", e.code}, {"message", e.message}}}}};
}

template <typename F>
ApiResponse guarded(F&& f) {
  try {
    return {200, f()};
  } catch (const RequestError& e) {
    return error_response(e);
  } catch (const UsageError& e) {
    return error_response({400, "invalid_request", e.what()});
  } catch (const std::exception& e) {
    return error_response({500, "internal", e.what()});
  }
}

void require_object(const json& request) {
  if (!request.is_object()) reject("request body must be a JSON object");
}

std::optional<double> unit_field(const json& request, const char* name) {
  if (!request.contains(name) || request[name].is_null()) return std::nullopt;
  if (!request[name].is_number()) reject(std::string(name) + " must be a number");
  const double v = request[name].get<double>();
  if (!(v >= 0 && v <= 1)) reject(std::string(name) + " must lie in [0, 1]", 422, "out_of_range");
  return v;
}

std::vector<corpus::TokenSeq> history_field(const json& request) {
  if (!request.contains("history") || !request["history"].is_array() || request["history"].empty()) {
    reject("history must be a non-empty array of strings");
  }
  std::vector<corpus::TokenSeq> turns;
  for (const auto& turn : request["history"]) {
    if (!turn.is_string()) reject("history must be a non-empty array of strings");
    turns.push_back(corpus::tokenize(turn.get<std::string>()));
  }
  return turns;
}

const LoadedModel& model_field(const ModelRegistry& reg, const json& request, const char* name, ModelKind kind,
                               bool required) {
  const LoadedModel* m = nullptr;
  if (request.contains(name) && !request[name].is_null()) {
    if (!request[name].is_string()) reject(std::string(name) + " must be a string");
    const auto id = request[name].get<std::string>();
    m = reg.find(id);
    if (m == nullptr) reject("unknown model '" + id + "'", 404, "unknown_model");
    if (m->kind != kind) reject("model '" + id + "' is a " + to_string(m->kind) + ", not a " + to_string(kind));
  } else if (required) {
    reject(std::string(name) + " is required");
  } else {
    m = reg.first(kind);
    if (m == nullptr) reject("no " + to_string(kind) + " model is loaded", 400, "no_model");
  }
  return *m;
}

json score_fields(const classifier::Classifier& clf, const corpus::TokenSeq& tokens) {
  if (tokens.empty()) return {{"politeness_score", 0.5}, {"saliency", json::array()}};
  return {{"politeness_score", classifier::score(clf, tokens).value()},
          {"saliency", classifier::saliency(clf, tokens)}};
}

}  // namespace

ApiResponse Api::models() const {
  return guarded([&] {
    json out = json::array();
    for (const auto& [id, m] : registry_->models()) {
      json row = {{"id", id}, {"kind", to_string(m.kind)}, {"strategy", m.strategy_name()}};
      out.push_back(row);
    }
    return out;
  });
}

ApiResponse Api::classify(const json& request) const {
  return guarded([&] {
    require_object(request);
    if (!request.contains("text") || !request["text"].is_string()) reject("text must be a string");
    const auto tokens = corpus::tokenize(request["text"].get<std::string>());
    if (tokens.empty()) reject("text has no tokens");
    const auto& m = model_field(*registry_, request, "model_id", ModelKind::classifier, false);
    return json{{"model_id", m.id},
                {"polite_prob", classifier::score(*m.classifier, tokens).value()},
                {"tokens", tokens},
                {"saliency", classifier::saliency(*m.classifier, tokens)}};
  });
}

ApiResponse Api::chat(const json& request) const {
  return guarded([&] {
    require_object(request);
    const auto& m = model_field(*registry_, request, "model_id", ModelKind::seq2seq, true);
    const auto turns = history_field(request);
    const auto style_score = unit_field(request, "style_score");
    const auto alpha = unit_field(request, "alpha");

    dialogue::DecodeMode mode = dialogue::DecodeMode::greedy;
    if (request.contains("mode")) {
      if (!request["mode"].is_string()) reject("mode must be \"greedy\" or \"sample\"");
      const auto name = request["mode"].get<std::string>();
      if (name != "greedy" && name != "sample") reject("mode must be \"greedy\" or \"sample\"");
      mode = dialogue::parse_decode_mode(name);
    }
    std::uint64_t seed = 0;
    if (request.contains("seed") && !request["seed"].is_null()) {
      const auto& v = request["seed"];
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        reject("seed must be a non-negative integer");
      }
      seed = request["seed"].get<std::uint64_t>();
    }

    const auto& model = *m.seq2seq;
    const auto& vocab = model.vocab();
    dialogue::DecodeOptions opts;
    opts.mode = mode;
    opts.max_len = model.config().max_len;
    opts.mask = dialogue::loss_mask(vocab, m.profanity);

    const std::size_t keep = std::min<std::size_t>(2, turns.size());
    std::vector<corpus::TokenSeq> context(turns.end() - static_cast<std::ptrdiff_t>(keep), turns.end());
    auto source = dialogue::encode_context(vocab, context, model.config().max_len);

    json used = json::object();
    if (m.strategy_name() == "lft") {
      const auto lft = lft_config(m.strategy);
      const double s = style_score.value_or(lft.test_score);
      source = style::label_source(source, s, lft);
      used["style_score"] = s;
    }

    numerics::Rng rng(seed);
    dialogue::Decoded decoded;
    if (alpha) {
      const auto* lm = registry_->lm_for(vocab);
      if (lm == nullptr) reject("alpha needs a loaded language model with the same vocabulary", 400, "no_model");
      decoded = style::fusion_decode(model, *lm->lm, source, {*alpha}, opts, &rng);
      used["alpha"] = *alpha;
      used["lm_id"] = lm->id;
    } else {
      decoded = dialogue::decode(model, source, opts, &rng);
    }
    const auto tokens = vocab.decode(decoded.tokens);

    json out = {{"model_id", m.id},
                {"strategy", m.strategy_name()},
                {"response", corpus::join(tokens)},
                {"tokens", tokens},
                {"politeness_score", nullptr},
                {"saliency", nullptr},
                {"seed", seed},
                {"used", used}};
    const bool has_clf = request.contains("classifier_id") || registry_->first(ModelKind::classifier) != nullptr;
    if (has_clf) {
      const auto& clf = model_field(*registry_, request, "classifier_id", ModelKind::classifier, false);
      out.update(score_fields(*clf.classifier, tokens));
    }
    return out;
  });
}

ApiResponse Api::retrieve(const json& request) const {
  return guarded([&] {
    require_object(request);
    const auto turns = history_field(request);
    const std::string mode = request.value("mode", std::string("classifier"));
    const auto context = retrieval::context_document(turns);
    if (context.empty()) reject("history has no tokens");
    json out;
    retrieval::Retrieved hit;
    if (mode == "generic10") {
      static const retrieval::TfIdfIndex generic = retrieval::generic10_index();
      hit = generic.retrieve(context);
    } else if (mode == "classifier") {
      const auto& m = model_field(*registry_, request, "model_id", ModelKind::retrieval, false);
      hit = m.index->retrieve(context);
      out["model_id"] = m.id;
    } else {
      reject("mode must be \"classifier\" or \"generic10\"");
    }
    out["mode"] = mode;
    out["response"] = corpus::join(hit.response);
    out["tokens"] = hit.response;
    out["similarity"] = hit.similarity;
    out["index"] = hit.index;
    return out;
  });
}

ApiResponse Api::handle(const std::string& method, const std::string& path, const std::string& body) const {
  struct Route {
    const char* method;
    const char* path;
  };
  static const Route routes[] = {
      {"GET", "/api/models"}, {"POST", "/api/classify"}, {"POST", "/api/chat"}, {"POST", "/api/retrieve"}};
  bool known = false;
  for (const auto& r : routes) {
    if (path != r.path) continue;
    known = true;
    if (method != r.method) continue;
    if (path == "/api/models") return models();
    json request;
    try {
      request = json::parse(body);
    } catch (const json::parse_error&) {
      return error_response({400, "bad_json", "request body is not valid JSON"});
    }
    if (path == "/api/classify") return classify(request);
    if (path == "/api/chat") return chat(request);
    return retrieve(request);
  }
  if (known) return error_response({405, "method_not_allowed", method + " not allowed on " + path});
  return error_response({404, "not_found", "no route " + path});
}

struct HttpServer::Impl {
  const Api* api;
  httplib::Server server;
};

HttpServer::HttpServer(const Api& api) : impl_(std::make_unique<Impl>()) {
  impl_->api = &api;
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // server share a busy port
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto out = impl_->api->handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  for (const char* path : {"/api/models", "/api/classify", "/api/chat", "/api/retrieve"}) {
    impl_->server.Get(path, handler);
    impl_->server.Post(path, handler);
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace courtesy::service
