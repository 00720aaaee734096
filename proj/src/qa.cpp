#include "tough/qa.hpp"

#include <cctype>

#include "tough/errors.hpp"
#include "tough/text.hpp"

namespace tough {

std::vector<std::string> QAExample::gold_texts() const {
  std::vector<std::string> out;
  out.reserve(golds.size());
  for (const auto& g : golds) out.push_back(g.text);
  return out;
}

Json to_json(const ModelAnswer& answer) {
  Json j;
  j["answer"] = answer.answer_text;
  if (answer.score) j["score"] = *answer.score;
  if (answer.span) {
    Json s;
    s["start_char"] = answer.span->start_char;
    s["end_char"] = answer.span->end_char;
    j["span"] = std::move(s);
  }
  return j;
}

std::string excerpt(std::string_view payload, std::size_t max_len) {
  if (payload.size() <= max_len) return std::string(payload);
  return std::string(payload.substr(0, max_len)) + "...";
}

ModelAnswer answer_from_json(const Json& j) {
  auto fail = [&](const std::string& what) -> SchemaError {
    return SchemaError("response schema violation: " + what, excerpt(j.dump()));
  };
  if (!j.is_object()) throw fail("expected a JSON object");
  auto it = j.find("answer");
  if (it == j.end()) throw fail("missing 'answer'");
  if (!it->is_string()) throw fail("'answer' must be a string");

  ModelAnswer out;
  out.answer_text = it->get<std::string>();
  if (auto s = j.find("score"); s != j.end() && !s->is_null()) {
    if (!s->is_number()) throw fail("'score' must be a number");
    out.score = s->get<double>();
  }
  if (auto sp = j.find("span"); sp != j.end() && !sp->is_null()) {
    if (!sp->is_object()) throw fail("'span' must be an object");
    auto st = sp->find("start_char");
    auto en = sp->find("end_char");
    if (st == sp->end() || en == sp->end() || !st->is_number_integer() ||
        !en->is_number_integer())
      throw fail("'span' needs integer 'start_char' and 'end_char'");
    CharSpan span{st->get<long>(), en->get<long>()};
    if (span.end_char <= span.start_char || span.start_char < 0)
      throw fail("'span' must satisfy 0 <= start_char < end_char");
    out.span = span;
  }
  return out;
}

ModelAnswer AnswerProvider::answer(std::string_view context,
                                   std::string_view question) const {
  if (trim(context).empty()) throw PreconditionError("answer: empty context");
  if (trim(question).empty()) throw PreconditionError("answer: empty question");
  return do_answer(context, question);
}

ModelAnswer EchoStub::do_answer(std::string_view context, std::string_view) const {
  std::size_t begin = 0;
  while (begin < context.size() && std::isspace(static_cast<unsigned char>(context[begin])))
    ++begin;
  std::size_t end = context.size();
  for (std::size_t i = begin; i < context.size(); ++i) {
    char c = context[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == context.size() || std::isspace(static_cast<unsigned char>(context[i + 1])))) {
      end = i + 1;
      break;
    }
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(context[end - 1]))) --end;
  ModelAnswer a;
  a.answer_text = std::string(context.substr(begin, end - begin));
  a.span = CharSpan{static_cast<long>(byte_to_char_offset(context, begin)),
                    static_cast<long>(byte_to_char_offset(context, end))};
  return a;
}

}  // namespace tough
