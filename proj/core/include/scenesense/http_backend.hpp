#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "scenesense/lm_backend.hpp"

namespace scenesense {

/// Connection settings for the scoring/embedding service.
///
/// Wire protocol:
///   POST {endpoint}/score  {"model", "prompts": [..]} -> {"scores": [..]}
///   POST {endpoint}/embed  {"model", "texts": [..]}   -> {"embeddings": [[..]]}
/// With `per_token_normalized`, /score must also return "token_counts" and
/// each score is divided by its count.
struct HttpBackendConfig {
  std::string endpoint;  // http://host:port[/prefix]
  std::string model;
  std::string api_key;   // sent as a bearer token when non-empty
  std::size_t max_in_flight = 4;
  std::size_t batch_size = 32;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds timeout{30000};
  bool per_token_normalized = false;

  /// Reads SCENESENSE_API_KEY.
  static std::string api_key_from_env();
  /// Overlays any of: endpoint, model, max_in_flight, batch_size,
  /// max_attempts, initial_backoff_ms, timeout_ms, per_token_normalized.
  void apply_json(const nlohmann::json& doc);
};

class HttpTransport;

class HttpScorer final : public LmScorer {
 public:
  explicit HttpScorer(HttpBackendConfig config);
  ~HttpScorer() override;

  std::vector<double> batch_score(std::span<const std::string> texts) const override;
  BackendInfo info() const override;

 private:
  HttpBackendConfig config_;
  std::unique_ptr<HttpTransport> transport_;
};

class HttpEmbedder final : public TextEmbedder {
 public:
  explicit HttpEmbedder(HttpBackendConfig config);
  ~HttpEmbedder() override;

  std::vector<Embedding> batch_embed(std::span<const std::string> texts) const override;
  std::size_t dimension() const override { return dimension_.load(); }
  std::string name() const override { return config_.model; }

 private:
  HttpBackendConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  mutable std::atomic<std::size_t> dimension_{0};
  mutable std::mutex dimension_mutex_;
};

std::shared_ptr<HttpScorer> http_scorer(const std::string& endpoint, const std::string& model,
                                        const std::string& api_key);
std::shared_ptr<HttpEmbedder> http_embedder(const std::string& endpoint, const std::string& model,
                                            const std::string& api_key);

}  // namespace scenesense
