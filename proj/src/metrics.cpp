#include "tough/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <unordered_map>

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "tough/errors.hpp"

namespace tough {
namespace {

bool is_ascii_punct(UChar32 c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

// Python's str.isspace(), which str.split() uses.
bool is_py_space(UChar32 c) {
  return (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x20) || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000;
}

// Python's re \w for str patterns: alphanumerics (letters and any numeric
// category) plus underscore.
bool is_word_char(UChar32 c) {
  if (c == '_' || u_isalpha(c)) return true;
  auto t = u_charType(c);
  return t == U_DECIMAL_DIGIT_NUMBER || t == U_LETTER_NUMBER || t == U_OTHER_NUMBER;
}

std::u32string to_code_points(const icu::UnicodeString& s) {
  std::u32string out;
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

std::string to_utf8(const std::u32string& s) {
  icu::UnicodeString u;
  for (char32_t c : s) u.append(static_cast<UChar32>(c));
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Input is already normalised, so single ASCII spaces separate tokens.
std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t b = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string_view, long> counts;
  for (const auto& t : gold) ++counts[t];
  long same = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return 0.0;
  double precision = double(same) / double(pred.size());
  double recall = double(same) / double(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

void require_golds(std::span<const std::string> golds, const char* fn) {
  if (golds.empty()) throw PreconditionError(std::string(fn) + ": gold answer list is empty");
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  auto lowered = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  lowered.toLower(icu::Locale::getRoot());
  auto cps = to_code_points(lowered);

  std::u32string s;
  s.reserve(cps.size());
  for (char32_t c : cps)
    if (!is_ascii_punct(static_cast<UChar32>(c))) s.push_back(c);

  std::u32string no_articles;
  no_articles.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (!is_word_char(static_cast<UChar32>(s[i]))) {
      no_articles.push_back(s[i++]);
      continue;
    }
    std::size_t b = i;
    while (i < s.size() && is_word_char(static_cast<UChar32>(s[i]))) ++i;
    std::u32string_view word(s.data() + b, i - b);
    if (word == U"a" || word == U"an" || word == U"the")
      no_articles.push_back(U' ');
    else
      no_articles.append(word);
  }

  std::u32string out;
  for (std::size_t i = 0; i < no_articles.size();) {
    while (i < no_articles.size() && is_py_space(static_cast<UChar32>(no_articles[i]))) ++i;
    std::size_t b = i;
    while (i < no_articles.size() && !is_py_space(static_cast<UChar32>(no_articles[i]))) ++i;
    if (i > b) {
      if (!out.empty()) out.push_back(U' ');
      out.append(no_articles, b, i - b);
    }
  }
  return to_utf8(out);
}

int exact_match(std::string_view prediction, std::span<const std::string> golds) {
  require_golds(golds, "exact_match");
  auto p = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (normalize_answer(g) == p) return 1;
  }
  return 0;
}

double token_f1(std::string_view prediction, std::span<const std::string> golds) {
  require_golds(golds, "token_f1");
  auto p = split_ws(normalize_answer(prediction));
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, f1_single(p, split_ws(normalize_answer(g))));
  return best;
}

Correctness Correctness::parse(std::string_view text) {
  if (text == "em") return em();
  if (text.starts_with("f1:")) {
    auto v = text.substr(3);
    double t = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), t);
    if (ec == std::errc() && ptr == v.data() + v.size() && t > 0.0 && t <= 1.0)
      return f1_at_least(t);
  }
  throw ConfigError("correctness must be 'em' or 'f1:<threshold in (0,1]>', got '" +
                    std::string(text) + "'");
}

std::string Correctness::describe() const {
  if (kind == Kind::exact_match) return "em";
  auto s = std::to_string(threshold);
  return "f1:" + s;
}

bool Correctness::is_correct(std::string_view prediction,
                             std::span<const std::string> golds) const {
  if (kind == Kind::exact_match) return exact_match(prediction, golds) == 1;
  return token_f1(prediction, golds) >= threshold;
}

std::size_t mode_slot(Mode mode) {
  switch (mode) {
    case Mode::numeric:
      return 0;
    case Mode::synonym:
      return 1;
    case Mode::random:
      return 2;
  }
  return 0;
}

std::optional<double> EvalReport::accuracy(Mode mode) const {
  switch (mode) {
    case Mode::numeric:
      return numeric_accuracy;
    case Mode::synonym:
      return synonym_accuracy;
    case Mode::random:
      return random_accuracy;
  }
  return std::nullopt;
}

namespace {

std::unordered_map<std::string, bool> originally_correct(
    std::span<const AnsweredOriginal> originals, const Correctness& correctness) {
  std::unordered_map<std::string, bool> out;
  for (const auto& [ex, ans] : originals) {
    auto golds = ex.gold_texts();
    if (!out.emplace(ex.id, correctness.is_correct(ans.answer_text, golds)).second)
      throw ValidationError("duplicate example id '" + ex.id + "' among originals");
  }
  return out;
}

}  // namespace

DecisionChange decision_change_rate(std::span<const AnsweredPerturbed> perturbed,
                                    std::span<const AnsweredOriginal> originals,
                                    const Correctness& correctness) {
  auto correct = originally_correct(originals, correctness);
  DecisionChange dc;
  for (const auto& [px, ans] : perturbed) {
    if (px.mode != Mode::numeric || px.semantic_ok != false) continue;
    auto it = correct.find(px.base.id);
    if (it == correct.end())
      throw ValidationError("perturbed example references unknown id '" + px.base.id + "'");
    if (!it->second) continue;
    ++dc.flagged;
    if (!correctness.is_correct(ans.answer_text, px.base.gold_texts())) ++dc.changed;
  }
  if (dc.flagged > 0) dc.rate = double(dc.changed) / double(dc.flagged);
  return dc;
}

EvalReport evaluate(std::string model_id, std::span<const AnsweredOriginal> originals,
                    std::span<const AnsweredPerturbed> perturbed,
                    const Correctness& correctness, const PerMode& generation_skips) {
  if (originals.empty()) throw ValidationError("evaluate: no original examples");
  auto correct = originally_correct(originals, correctness);

  EvalReport r;
  r.model_id = std::move(model_id);
  r.counts.total = originals.size();
  double em = 0.0, f1 = 0.0;
  for (const auto& [ex, ans] : originals) {
    auto golds = ex.gold_texts();
    em += exact_match(ans.answer_text, golds);
    f1 += token_f1(ans.answer_text, golds);
  }
  r.original_em = em / double(originals.size());
  r.original_f1 = f1 / double(originals.size());

  PerMode hits{};
  r.counts.skipped_per_mode = generation_skips;
  for (const auto& [px, ans] : perturbed) {
    auto it = correct.find(px.base.id);
    if (it == correct.end())
      throw ValidationError("perturbed example references unknown id '" + px.base.id + "'");
    auto slot = mode_slot(px.mode);
    if (!it->second) {
      ++r.counts.skipped_per_mode[slot];
      continue;
    }
    ++r.counts.evaluated_per_mode[slot];
    if (correctness.is_correct(ans.answer_text, px.base.gold_texts())) ++hits[slot];
  }
  auto rate = [&](Mode m) -> std::optional<double> {
    auto n = r.counts.evaluated_per_mode[mode_slot(m)];
    if (n == 0) return std::nullopt;
    return double(hits[mode_slot(m)]) / double(n);
  };
  r.numeric_accuracy = rate(Mode::numeric);
  r.synonym_accuracy = rate(Mode::synonym);
  r.random_accuracy = rate(Mode::random);
  r.decision_change_rate = decision_change_rate(perturbed, originals, correctness).rate;

  auto verdict = stability_verdict(r);
  r.stability_margin = verdict.margin;
  r.semantically_stable = verdict.semantically_stable;
  return r;
}

StabilityVerdict stability_verdict(const EvalReport& report) {
  if (!report.synonym_accuracy || !report.numeric_accuracy) return {};
  double margin = *report.synonym_accuracy - *report.numeric_accuracy;
  return {margin, margin > 0.0};
}

}  // namespace tough
