#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "courtesy/service/checkpoint.hpp"

namespace courtesy::service {

// One loaded checkpoint. Exactly one of the model pointers is set.
struct LoadedModel {
  std::string id;
  ModelKind kind = ModelKind::classifier;
  nlohmann::json strategy;
  std::vector<std::string> profanity;
  std::shared_ptr<const classifier::Classifier> classifier;
  std::shared_ptr<const dialogue::Seq2seq> seq2seq;
  std::shared_ptr<const dialogue::LanguageModel> lm;
  std::shared_ptr<const retrieval::TfIdfIndex> index;

  std::string strategy_name() const;
};

LoadedModel load_model(const std::string& id, const Checkpoint& ckpt);

// Immutable once built; shared read-only by request handlers.
class ModelRegistry {
 public:
  // Ids are file stems; a duplicate id is a UsageError.
  void add(LoadedModel model);
  void add_file(const std::filesystem::path& path);

  const LoadedModel* find(const std::string& id) const;
  const std::map<std::string, LoadedModel>& models() const { return models_; }
  // First classifier / retrieval index by id order.
  const LoadedModel* first(ModelKind kind) const;
  // First language model whose vocabulary equals `vocab`.
  const LoadedModel* lm_for(const corpus::Vocab& vocab) const;

 private:
  std::map<std::string, LoadedModel> models_;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Request handlers as plain functions of (registry, request body). Errors
// come back as {"error": {"code", "message"}} with a 4xx status.
class Api {
 public:
  explicit Api(std::shared_ptr<const ModelRegistry> registry) : registry_(std::move(registry)) {}

  ApiResponse models() const;
  ApiResponse classify(const nlohmann::json& request) const;
  ApiResponse chat(const nlohmann::json& request) const;
  ApiResponse retrieve(const nlohmann::json& request) const;

  // Raw body in, JSON out; malformed JSON is a 400.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

  const ModelRegistry& registry() const { return *registry_; }

 private:
  std::shared_ptr<const ModelRegistry> registry_;
};

class HttpServer {
 public:
  explicit HttpServer(const Api& api);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Throws std::runtime_error when the port is busy.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace courtesy::service
