#pragma once

#include <atomic>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tough/qa.hpp"

namespace tough {

struct ModelEndpointConfig {
  std::string url;  // e.g. http://127.0.0.1:8080 (an optional path prefix is kept)
  int timeout_ms = 30000;
  int retries = 2;
  int initial_backoff_ms = 100;
};

struct AnswerRequest {
  std::optional<std::string> id;
  std::string context;
  std::string question;
  bool operator==(const AnswerRequest&) const = default;
};

// Exact key order: id (when present), context, question.
Json to_json(const AnswerRequest& request);
AnswerRequest request_from_json(const Json& j);

struct HealthInfo {
  std::string status;
  std::string model_id;
};

// Client for the /v1 wire protocol. Transport failures and 5xx responses
// are retried with exponential backoff; 4xx and schema violations are not.
class HttpProvider : public AnswerProvider {
 public:
  explicit HttpProvider(ModelEndpointConfig config);

  // Queries /v1/health once and remembers the model id.
  HealthInfo health() const;
  std::string model_id() const override;

  std::vector<ModelAnswer> answer_batch(const std::vector<AnswerRequest>& items) const;

  // Total HTTP attempts made so far, retries included.
  long attempts() const { return attempts_.load(); }

 protected:
  ModelAnswer do_answer(std::string_view context, std::string_view question) const override;

 private:
  // body empty => GET
  Json request(const std::string& path, const std::string& body) const;

  ModelEndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  mutable std::mutex model_id_mutex_;
  mutable std::string model_id_;
  mutable std::atomic<long> attempts_{0};
};

}  // namespace tough
