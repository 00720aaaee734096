#include <catch_amalgamated.hpp>

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "stub_server.hpp"
#include "tough/errors.hpp"
#include "tough/http_provider.hpp"

using namespace tough;
using tough::testing::StubServer;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(TOUGH_SOURCE_DIR) + "/tests/fixtures/protocol/" + name,
                   std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelEndpointConfig endpoint(const std::string& url, int retries = 0, int timeout_ms = 5000) {
  ModelEndpointConfig c;
  c.url = url;
  c.retries = retries;
  c.timeout_ms = timeout_ms;
  c.initial_backoff_ms = 5;
  return c;
}

StubServer::Handler fixed(int status, std::string body) {
  return [status, body](const httplib::Request&, httplib::Response& res) {
    res.status = status;
    res.set_content(body, "application/json");
  };
}

}  // namespace

TEST_CASE("single request body and response match the golden bytes") {
  for (std::string name : {"answer", "answer_unicode"}) {
    StubServer server;
    HttpProvider provider(endpoint(server.url()));
    auto req = request_from_json(Json::parse(fixture(name + ".request.json")));
    auto got = provider.answer(req.context, req.question);

    REQUIRE(server.bodies().size() == 1);
    REQUIRE(server.bodies()[0] == fixture(name + ".request.json"));
    REQUIRE(server.paths()[0] == "/v1/answer");
    REQUIRE(to_json(got).dump() == fixture(name + ".response.json"));
  }
}

TEST_CASE("batch round trip") {
  StubServer server;
  HttpProvider provider(endpoint(server.url()));
  auto body = Json::parse(fixture("batch.request.json"));
  std::vector<AnswerRequest> items;
  for (const auto& it : body["items"]) items.push_back(request_from_json(it));
  auto answers = provider.answer_batch(items);

  REQUIRE(server.bodies()[0] == fixture("batch.request.json"));
  Json out;
  out["items"] = Json::array();
  for (const auto& a : answers) out["items"].push_back(to_json(a));
  REQUIRE(out.dump() == fixture("batch.response.json"));
}

TEST_CASE("health reports the model id") {
  StubServer server;
  HttpProvider provider(endpoint(server.url()));
  auto h = provider.health();
  REQUIRE(h.status == "ok");
  REQUIRE(Json{{"status", h.status}, {"model_id", h.model_id}}.dump() ==
          fixture("health.response.json"));
  REQUIRE(provider.model_id() == "stub-echo-v1");
  REQUIRE(provider.model_id() == "stub-echo-v1");
  REQUIRE(server.request_count() == 2);
}

TEST_CASE("optional response fields") {
  auto scored = answer_from_json(Json::parse(fixture("scored.response.json")));
  REQUIRE(scored.answer_text == "Vistula");
  REQUIRE(*scored.score == 0.25);
  REQUIRE(*scored.span == CharSpan{49, 56});
  REQUIRE(to_json(scored).dump() == fixture("scored.response.json"));

  auto bare = answer_from_json(Json::parse(R"({"answer":""})"));
  REQUIRE(bare.answer_text.empty());
  REQUIRE_FALSE(bare.span);
}

TEST_CASE("request JSON keeps key order and optional id") {
  AnswerRequest r{std::nullopt, "c", "q"};
  REQUIRE(to_json(r).dump() == R"({"context":"c","question":"q"})");
  r.id = "x";
  REQUIRE(to_json(r).dump() == R"({"id":"x","context":"c","question":"q"})");
  REQUIRE(request_from_json(to_json(r)) == r);
  REQUIRE_THROWS_AS(request_from_json(Json::parse(R"({"context":"c"})")), SchemaError);
}

TEST_CASE("schema violations are not retried") {
  StubServer server(fixed(200, fixture("missing_answer.response.json")));
  HttpProvider provider(endpoint(server.url(), 3));
  try {
    provider.answer("c.", "q?");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    REQUIRE(e.excerpt().find("score") != std::string::npos);
  }
  REQUIRE(server.request_count() == 1);

  for (const char* bad : {R"({"answer":3})", R"({"answer":"a","span":{"start_char":5,"end_char":2}})",
                          R"({"answer":"a","score":"high"})", "not json"}) {
    StubServer s(fixed(200, bad));
    HttpProvider p(endpoint(s.url()));
    REQUIRE_THROWS_AS(p.answer("c.", "q?"), SchemaError);
  }
}

TEST_CASE("4xx fails at once, 5xx is retried") {
  {
    StubServer server(fixed(422, R"({"error":"nope"})"));
    HttpProvider provider(endpoint(server.url(), 3));
    try {
      provider.answer("c.", "q?");
      FAIL("expected HttpStatusError");
    } catch (const HttpStatusError& e) {
      REQUIRE(e.status() == 422);
      REQUIRE(e.excerpt().find("nope") != std::string::npos);
    }
    REQUIRE(server.request_count() == 1);
  }
  {
    StubServer server(fixed(503, "busy"));
    HttpProvider provider(endpoint(server.url(), 2));
    REQUIRE_THROWS_AS(provider.answer("c.", "q?"), HttpStatusError);
    REQUIRE(server.request_count() == 3);
    REQUIRE(provider.attempts() == 3);
  }
  {
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
      if (++calls < 3) {
        res.status = 500;
        return;
      }
      res.set_content(R"({"answer":"ok"})", "application/json");
    });
    HttpProvider provider(endpoint(server.url(), 2));
    REQUIRE(provider.answer("c.", "q?").answer_text == "ok");
  }
}

TEST_CASE("unreachable endpoint exhausts the retries") {
  int port = 0;
  {
    StubServer closed;
    port = closed.port();
  }
  HttpProvider provider(endpoint("http://127.0.0.1:" + std::to_string(port), 2));
  try {
    provider.answer("c.", "q?");
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    REQUIRE(e.attempts() == 3);
  }
  REQUIRE(provider.attempts() == 3);
}

TEST_CASE("slow endpoint times out") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"answer":"late"})", "application/json");
  });
  HttpProvider provider(endpoint(server.url(), 0, 150));
  REQUIRE_THROWS_AS(provider.answer("c.", "q?"), TimeoutError);
}

TEST_CASE("URL path prefix is kept") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    if (req.path == "/model/v1/answer")
      res.set_content(R"({"answer":"ok"})", "application/json");
    else
      res.status = 404;
  });
  HttpProvider provider(endpoint(server.url() + "/model/"));
  REQUIRE(provider.answer("c.", "q?").answer_text == "ok");
  REQUIRE(server.paths()[0] == "/model/v1/answer");
}

TEST_CASE("bad endpoint configuration") {
  REQUIRE_THROWS_AS(HttpProvider(endpoint("https://x")), ConfigError);
  REQUIRE_THROWS_AS(HttpProvider(endpoint("http://x", -1)), ConfigError);
  REQUIRE_THROWS_AS(HttpProvider(endpoint("http://x", 0, 0)), ConfigError);
}

TEST_CASE("empty inputs never reach the wire") {
  StubServer server;
  HttpProvider provider(endpoint(server.url()));
  REQUIRE_THROWS_AS(provider.answer("  ", "q?"), PreconditionError);
  REQUIRE_THROWS_AS(provider.answer("c.", ""), PreconditionError);
  REQUIRE(server.request_count() == 0);
}
