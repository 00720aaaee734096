#include "tough/http_provider.hpp"

#include <chrono>
#include <memory>
#include <thread>

#include <httplib.h>

#include "tough/errors.hpp"

namespace tough {
namespace {

Json parse_payload(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error&) {
    throw SchemaError("response is not valid JSON", excerpt(body));
  }
}

}  // namespace

Json to_json(const AnswerRequest& request) {
  Json j;
  if (request.id) j["id"] = *request.id;
  j["context"] = request.context;
  j["question"] = request.question;
  return j;
}

AnswerRequest request_from_json(const Json& j) {
  auto fail = [&](const std::string& what) {
    return SchemaError("request schema violation: " + what, excerpt(j.dump()));
  };
  if (!j.is_object()) throw fail("expected a JSON object");
  AnswerRequest r;
  if (auto it = j.find("id"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw fail("'id' must be a string");
    r.id = it->get<std::string>();
  }
  for (const char* key : {"context", "question"}) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw fail(std::string("missing string '") + key + "'");
  }
  r.context = j["context"].get<std::string>();
  r.question = j["question"].get<std::string>();
  return r;
}

HttpProvider::HttpProvider(ModelEndpointConfig config) : config_(std::move(config)) {
  const std::string prefix = "http://";
  if (config_.url.rfind(prefix, 0) != 0)
    throw ConfigError("model URL must start with http:// (got '" + config_.url + "')");
  auto slash = config_.url.find('/', prefix.size());
  scheme_host_port_ = config_.url.substr(0, slash);
  if (slash != std::string::npos) {
    path_prefix_ = config_.url.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (config_.retries < 0) throw ConfigError("retries must be >= 0");
  if (config_.timeout_ms <= 0) throw ConfigError("timeout must be positive");
}

Json HttpProvider::request(const std::string& path, const std::string& body) const {
  const std::string full_path = path_prefix_ + path;
  const int max_attempts = config_.retries + 1;
  std::unique_ptr<ProviderError> last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      auto delay = std::chrono::milliseconds(static_cast<long>(config_.initial_backoff_ms)
                                             << (attempt - 2));
      std::this_thread::sleep_for(delay);
    }
    ++attempts_;

    httplib::Client client(scheme_host_port_);
    auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = body.empty() ? client.Get(full_path)
                            : client.Post(full_path, body, "application/json");
    if (!res) {
      auto err = res.error();
      std::string what = "request to " + scheme_host_port_ + full_path +
                         " failed: " + httplib::to_string(err) + " (attempt " +
                         std::to_string(attempt) + "/" + std::to_string(max_attempts) + ")";
      if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
        last = std::make_unique<TimeoutError>(what, attempt);
      else
        last = std::make_unique<TransportError>(what, attempt);
      continue;
    }
    if (res->status >= 500) {
      last = std::make_unique<HttpStatusError>(res->status, excerpt(res->body), attempt);
      continue;
    }
    if (res->status != 200) throw HttpStatusError(res->status, excerpt(res->body), attempt);
    return parse_payload(res->body);
  }
  if (auto* t = dynamic_cast<TimeoutError*>(last.get())) throw TimeoutError(*t);
  if (auto* t = dynamic_cast<TransportError*>(last.get())) throw TransportError(*t);
  if (auto* h = dynamic_cast<HttpStatusError*>(last.get())) throw HttpStatusError(*h);
  throw TransportError("request failed", max_attempts);
}

HealthInfo HttpProvider::health() const {
  auto j = request("/v1/health", "");
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string() ||
      !j.contains("model_id") || !j["model_id"].is_string())
    throw SchemaError("health response needs string 'status' and 'model_id'", excerpt(j.dump()));
  HealthInfo h{j["status"].get<std::string>(), j["model_id"].get<std::string>()};
  if (h.status != "ok") throw TransportError("model endpoint reports status '" + h.status + "'");
  return h;
}

std::string HttpProvider::model_id() const {
  std::lock_guard lock(model_id_mutex_);
  if (model_id_.empty()) model_id_ = health().model_id;
  return model_id_;
}

ModelAnswer HttpProvider::do_answer(std::string_view context, std::string_view question) const {
  AnswerRequest req{std::nullopt, std::string(context), std::string(question)};
  return answer_from_json(request("/v1/answer", to_json(req).dump()));
}

std::vector<ModelAnswer> HttpProvider::answer_batch(
    const std::vector<AnswerRequest>& items) const {
  Json body;
  body["items"] = Json::array();
  for (const auto& it : items) body["items"].push_back(to_json(it));
  auto j = request("/v1/answer_batch", body.dump());
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array())
    throw SchemaError("batch response needs an 'items' array", excerpt(j.dump()));
  if (j["items"].size() != items.size())
    throw SchemaError("batch response has " + std::to_string(j["items"].size()) +
                          " items, expected " + std::to_string(items.size()),
                      excerpt(j.dump()));
  std::vector<ModelAnswer> out;
  for (const auto& a : j["items"]) out.push_back(answer_from_json(a));
  return out;
}

}  // namespace tough
