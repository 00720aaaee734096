#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "tough/qa.hpp"

namespace tough {

std::string sha256_hex(std::string_view data);

// Content-addressed, append-only answer cache. One JSON record per line:
// {"key": <sha256 hex>, "model_id": ..., "answer": <ModelAnswer>}. On reload
// the last record for a key wins. A corrupt file is reported and bypassed
// for the session (no reads, no writes); a torn final line is ignored.
class QueryCache {
 public:
  // In-memory only.
  QueryCache() = default;
  explicit QueryCache(std::filesystem::path path);

  static std::string key_for(std::string_view model_id, std::string_view context,
                             std::string_view question);

  std::optional<ModelAnswer> get(const std::string& key) const;
  // Keeps the existing value if the key is already present and returns it.
  ModelAnswer put(const std::string& key, const std::string& model_id,
                  const ModelAnswer& answer);

  bool bypassed() const { return bypassed_; }
  const std::string& warning() const { return warning_; }
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> values_;  // key -> serialized answer
  std::ofstream log_;
  bool bypassed_ = false;
  std::string warning_;
};

// Wraps a provider with a cache. Provider errors are not cached.
class CachedProvider : public AnswerProvider {
 public:
  CachedProvider(const AnswerProvider& inner, QueryCache& cache);

  std::string model_id() const override { return model_id_; }
  long provider_calls() const { return provider_calls_.load(); }
  long cache_hits() const { return cache_hits_.load(); }

 protected:
  ModelAnswer do_answer(std::string_view context, std::string_view question) const override;

 private:
  const AnswerProvider& inner_;
  QueryCache& cache_;
  std::string model_id_;
  mutable std::atomic<long> provider_calls_{0};
  mutable std::atomic<long> cache_hits_{0};
};

}  // namespace tough
