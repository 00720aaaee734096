#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

namespace tough::testing {

// The reference stub model: the context sentence sharing the most
// case-folded tokens with the question, first on ties.
std::string stub_predict(const std::string& context, const std::string& question);

// In-process HTTP model server on an ephemeral localhost port.
class StubServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Default behaviour: the wire protocol backed by stub_predict.
  StubServer();
  explicit StubServer(Handler handler);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int port() const { return port_; }

  // Raw bodies of every request received, in arrival order.
  std::vector<std::string> bodies() const;
  std::vector<std::string> paths() const;
  int request_count() const { return count_.load(); }

 private:
  void start(Handler handler);

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::vector<std::string> bodies_, paths_;
  std::atomic<int> count_{0};
};

// Conformant handler for /v1/answer, /v1/answer_batch and /v1/health.
StubServer::Handler protocol_handler(std::string model_id = "stub-echo-v1");

}  // namespace tough::testing
