#include "scenesense/http_backend.hpp"

#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <regex>
#include <thread>
#include <vector>

#include <httplib.h>

#include "scenesense/error.hpp"

namespace scenesense {

std::string HttpBackendConfig::api_key_from_env() {
  const char* key = std::getenv("SCENESENSE_API_KEY");
  return key ? std::string(key) : std::string();
}

void HttpBackendConfig::apply_json(const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorKind::kConfig, "backend config must be an object");
  try {
    if (doc.contains("endpoint")) endpoint = doc.at("endpoint").get<std::string>();
    if (doc.contains("model")) model = doc.at("model").get<std::string>();
    if (doc.contains("max_in_flight")) max_in_flight = doc.at("max_in_flight").get<std::size_t>();
    if (doc.contains("batch_size")) batch_size = doc.at("batch_size").get<std::size_t>();
    if (doc.contains("max_attempts")) max_attempts = doc.at("max_attempts").get<int>();
    if (doc.contains("initial_backoff_ms"))
      initial_backoff = std::chrono::milliseconds(doc.at("initial_backoff_ms").get<long long>());
    if (doc.contains("timeout_ms")) timeout = std::chrono::milliseconds(doc.at("timeout_ms").get<long long>());
    if (doc.contains("per_token_normalized")) per_token_normalized = doc.at("per_token_normalized").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("bad backend config: ") + e.what());
  }
}

/// POSTs JSON with retry/backoff while holding one of `max_in_flight` slots.
class HttpTransport {
 public:
  explicit HttpTransport(const HttpBackendConfig& config) : config_(config) {
    static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config.endpoint, m, kUrl))
      fail(ErrorKind::kConfig, "endpoint must look like http://host:port[/prefix], got '" + config.endpoint + "'");
    base_ = m[1].str();
    prefix_ = m[2].matched ? m[2].str() : std::string();
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    if (config.max_in_flight < 1) fail(ErrorKind::kConfig, "max_in_flight must be at least 1");
    if (config.batch_size < 1) fail(ErrorKind::kConfig, "batch_size must be at least 1");
    if (config.max_attempts < 1) fail(ErrorKind::kConfig, "max_attempts must be at least 1");
  }

  nlohmann::json post(const std::string& route, const nlohmann::json& body) {
    Slot slot(*this);
    const std::string request_id = next_request_id();
    const std::string payload = body.dump();
    httplib::Headers headers{{"X-Request-Id", request_id}};
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto backoff = config_.initial_backoff;
    std::string last_failure;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
      httplib::Client client(base_);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      auto res = client.Post(prefix_ + route, headers, payload, "application/json");
      if (!res) {
        last_failure = "transport failure: " + httplib::to_string(res.error());
      } else if (res->status == 200) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error&) {
          throw BackendError(ErrorKind::kProtocol, "response from " + route + " is not JSON", request_id);
        }
      } else if (res->status == 401 || res->status == 403) {
        throw BackendError(ErrorKind::kAuth, "service rejected credentials (HTTP " + std::to_string(res->status) + ")",
                           request_id);
      } else if (is_transient(res->status)) {
        last_failure = "HTTP " + std::to_string(res->status);
      } else {
        throw BackendError(ErrorKind::kBackend, "HTTP " + std::to_string(res->status) + " from " + route, request_id);
      }
      if (attempt < config_.max_attempts) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
    throw BackendError(ErrorKind::kBackend,
                       last_failure + " after " + std::to_string(config_.max_attempts) + " attempts", request_id);
  }

  /// Runs `task(chunk_index)` for every chunk with at most max_in_flight
  /// workers; the first exception wins.
  template <typename Task>
  void for_each_chunk(std::size_t chunks, Task&& task) {
    const std::size_t workers = std::min(chunks, config_.max_in_flight);
    if (workers <= 1) {
      for (std::size_t c = 0; c < chunks; ++c) task(c);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
          {
            std::lock_guard lock(error_mutex);
            if (error) return;
          }
          try {
            task(c);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::size_t batch_size() const { return config_.batch_size; }

 private:
  static bool is_transient(int status) {
    return status == 408 || status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
  }

  std::string next_request_id() {
    return "ss-" + std::to_string(reinterpret_cast<std::uintptr_t>(this) & 0xffffff) + "-" +
           std::to_string(request_counter_++);
  }

  class Slot {
   public:
    explicit Slot(HttpTransport& t) : t_(t) {
      std::unique_lock lock(t_.gate_mutex_);
      t_.gate_cv_.wait(lock, [&] { return t_.in_flight_ < t_.config_.max_in_flight; });
      ++t_.in_flight_;
    }
    ~Slot() {
      {
        std::lock_guard lock(t_.gate_mutex_);
        --t_.in_flight_;
      }
      t_.gate_cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    HttpTransport& t_;
  };

  HttpBackendConfig config_;
  std::string base_;
  std::string prefix_;
  std::mutex gate_mutex_;
  std::condition_variable gate_cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::uint64_t> request_counter_{0};
};

namespace {

std::size_t chunk_count(std::size_t n, std::size_t batch) { return (n + batch - 1) / batch; }

}  // namespace

HttpScorer::HttpScorer(HttpBackendConfig config)
    : config_(std::move(config)), transport_(std::make_unique<HttpTransport>(config_)) {}

HttpScorer::~HttpScorer() = default;

BackendInfo HttpScorer::info() const {
  return {config_.model, config_.per_token_normalized ? ScoreSemantics::kMeanLogProb : ScoreSemantics::kSumLogProb};
}

std::vector<double> HttpScorer::batch_score(std::span<const std::string> texts) const {
  std::vector<double> scores(texts.size());
  const std::size_t batch = transport_->batch_size();
  transport_->for_each_chunk(chunk_count(texts.size(), batch), [&](std::size_t c) {
    const std::size_t first = c * batch;
    const std::size_t last = std::min(texts.size(), first + batch);
    nlohmann::json body{{"model", config_.model},
                        {"prompts", std::vector<std::string>(texts.begin() + first, texts.begin() + last)}};
    const auto reply = transport_->post("/score", body);
    if (!reply.is_object() || !reply.contains("scores") || !reply.at("scores").is_array() ||
        reply.at("scores").size() != last - first)
      throw BackendError(ErrorKind::kProtocol, "/score reply must carry one score per prompt", {});
    const auto& js = reply.at("scores");
    const nlohmann::json* counts = nullptr;
    if (config_.per_token_normalized) {
      if (!reply.contains("token_counts") || !reply.at("token_counts").is_array() ||
          reply.at("token_counts").size() != last - first)
        throw BackendError(ErrorKind::kProtocol, "per-token scoring needs 'token_counts' in /score replies", {});
      counts = &reply.at("token_counts");
    }
    for (std::size_t i = 0; i < last - first; ++i) {
      if (!js[i].is_number()) throw BackendError(ErrorKind::kProtocol, "non-numeric score in /score reply", {});
      double s = js[i].get<double>();
      if (counts) {
        const auto& n = (*counts)[i];
        if (!n.is_number() || n.get<double>() <= 0)
          throw BackendError(ErrorKind::kProtocol, "token counts must be positive", {});
        s /= n.get<double>();
      }
      scores[first + i] = s;
    }
  });
  return scores;
}

HttpEmbedder::HttpEmbedder(HttpBackendConfig config)
    : config_(std::move(config)), transport_(std::make_unique<HttpTransport>(config_)) {}

HttpEmbedder::~HttpEmbedder() = default;

std::vector<Embedding> HttpEmbedder::batch_embed(std::span<const std::string> texts) const {
  std::vector<Embedding> out(texts.size());
  const std::size_t batch = transport_->batch_size();
  transport_->for_each_chunk(chunk_count(texts.size(), batch), [&](std::size_t c) {
    const std::size_t first = c * batch;
    const std::size_t last = std::min(texts.size(), first + batch);
    nlohmann::json body{{"model", config_.model},
                        {"texts", std::vector<std::string>(texts.begin() + first, texts.begin() + last)}};
    const auto reply = transport_->post("/embed", body);
    if (!reply.is_object() || !reply.contains("embeddings") || !reply.at("embeddings").is_array() ||
        reply.at("embeddings").size() != last - first)
      throw BackendError(ErrorKind::kProtocol, "/embed reply must carry one vector per text", {});
    for (std::size_t i = 0; i < last - first; ++i) {
      const auto& jv = reply.at("embeddings")[i];
      if (!jv.is_array() || jv.empty()) throw BackendError(ErrorKind::kProtocol, "embedding must be a nonempty array", {});
      Embedding v;
      v.reserve(jv.size());
      for (const auto& x : jv) {
        if (!x.is_number()) throw BackendError(ErrorKind::kProtocol, "non-numeric embedding entry", {});
        v.push_back(x.get<double>());
      }
      {
        std::lock_guard lock(dimension_mutex_);
        if (dimension_ == 0) dimension_ = v.size();
      }
      if (v.size() != dimension_)
        throw BackendError(ErrorKind::kProtocol,
                           "embedding has length " + std::to_string(v.size()) + ", expected " +
                               std::to_string(dimension_.load()),
                           {});
      out[first + i] = std::move(v);
    }
  });
  return out;
}

namespace {

HttpBackendConfig make_config(const std::string& endpoint, const std::string& model, const std::string& api_key) {
  HttpBackendConfig cfg;
  cfg.endpoint = endpoint;
  cfg.model = model;
  cfg.api_key = api_key;
  return cfg;
}

}  // namespace

std::shared_ptr<HttpScorer> http_scorer(const std::string& endpoint, const std::string& model,
                                        const std::string& api_key) {
  return std::make_shared<HttpScorer>(make_config(endpoint, model, api_key));
}

std::shared_ptr<HttpEmbedder> http_embedder(const std::string& endpoint, const std::string& model,
                                            const std::string& api_key) {
  return std::make_shared<HttpEmbedder>(make_config(endpoint, model, api_key));
}

}  // namespace scenesense
