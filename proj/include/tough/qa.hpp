#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tough {

using Json = nlohmann::ordered_json;

struct Gold {
  std::string text;
  long answer_start = -1;  // character offset into context, -1 when unknown
  bool offset_mismatch = false;
  bool operator==(const Gold&) const = default;
};

struct QAExample {
  std::string id;
  std::string context;
  std::string question;
  std::vector<Gold> golds;
  bool operator==(const QAExample&) const = default;

  std::vector<std::string> gold_texts() const;
};

struct CharSpan {
  long start_char = 0;
  long end_char = 0;
  bool operator==(const CharSpan&) const = default;
};

struct ModelAnswer {
  std::string answer_text;
  std::optional<CharSpan> span;
  std::optional<double> score;
  bool operator==(const ModelAnswer&) const = default;
};

// Wire form: {"answer": ..., "score"?: ..., "span"?: {"start_char", "end_char"}}
Json to_json(const ModelAnswer& answer);
// Throws SchemaError (with a payload excerpt) on any schema violation.
ModelAnswer answer_from_json(const Json& j);

std::string excerpt(std::string_view payload, std::size_t max_len = 200);

// The black-box model contract. Implementations must be deterministic and
// safe to call concurrently.
class AnswerProvider {
 public:
  virtual ~AnswerProvider() = default;

  // Checks preconditions, then forwards to do_answer().
  ModelAnswer answer(std::string_view context, std::string_view question) const;
  virtual std::string model_id() const = 0;

 protected:
  virtual ModelAnswer do_answer(std::string_view context,
                                std::string_view question) const = 0;
};

// Answers with the first sentence of the context, ignoring the question.
class EchoStub : public AnswerProvider {
 public:
  std::string model_id() const override { return "echo-stub-v1"; }

 protected:
  ModelAnswer do_answer(std::string_view context, std::string_view question) const override;
};

}  // namespace tough
