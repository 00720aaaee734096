#include "tough/perturb.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>

#include "tough/csv.hpp"
#include "tough/errors.hpp"
#include "tough/rng.hpp"

namespace tough {
namespace {

const std::vector<std::string> kReviewHeader = {
    "id",          "mode",        "question",    "keyword_index", "keyword",
    "candidate_1", "candidate_2", "candidate_3", "chosen",        "semantic_ok"};

// A replacement must stay a single non-punctuation token so that the token
// count of the question is preserved.
bool swappable(std::string_view word) {
  auto toks = tokenize(word);
  return toks.size() == 1 && toks[0].text.size() == word.size() && !is_punctuation(word);
}

std::vector<Token> checked_tokens(const QAExample& example, std::size_t keyword_index) {
  auto tokens = tokenize(example.question);
  if (keyword_index >= tokens.size())
    throw PreconditionError("keyword index " + std::to_string(keyword_index) +
                            " out of range for question '" + example.id + "' (" +
                            std::to_string(tokens.size()) + " tokens)");
  return tokens;
}

PerturbedExample make_perturbed(const QAExample& example, Mode mode, std::size_t keyword_index,
                                const std::string& keyword, std::string replacement) {
  PerturbedExample p;
  p.base = example;
  p.mode = mode;
  p.keyword_index = keyword_index;
  p.keyword = keyword;
  p.perturbed_question = apply_swap(example.question, keyword_index, replacement);
  p.replacement = std::move(replacement);
  return p;
}

std::vector<double> to_double(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::synonym:
      return "synonym";
    case Mode::numeric:
      return "numeric";
    case Mode::random:
      return "random";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "synonym") return Mode::synonym;
  if (s == "numeric") return Mode::numeric;
  if (s == "random") return Mode::random;
  throw ValidationError("unknown mode '" + std::string(s) +
                        "' (expected synonym, numeric or random)");
}

SynonymLexicon SynonymLexicon::load(std::istream& in) {
  SynonymLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("lexicon line lacks a TAB", line_no);
    auto head = to_lower(trim(std::string_view(line).substr(0, tab)));
    if (head.empty()) throw FormatError("empty lexicon headword", line_no);
    if (lex.entries_.contains(head))
      throw FormatError("duplicate lexicon headword '" + head + "'", line_no);
    std::vector<std::string> cands;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (true) {
      auto comma = rest.find(',');
      cands.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    lex.add(head, std::move(cands));
  }
  return lex;
}

void SynonymLexicon::add(std::string_view headword, std::vector<std::string> candidates) {
  auto head = to_lower(headword);
  std::vector<std::string> kept;
  std::set<std::string> seen;
  for (auto& c : candidates) {
    if (c.empty() || to_lower(c) == head || !seen.insert(to_lower(c)).second) continue;
    kept.push_back(std::move(c));
  }
  entries_[head] = std::move(kept);
}

const std::vector<std::string>* SynonymLexicon::find(std::string_view word) const {
  auto it = entries_.find(to_lower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

std::string apply_swap(std::string_view question, std::size_t keyword_index,
                       std::string_view replacement) {
  auto tokens = tokenize(question);
  if (keyword_index >= tokens.size())
    throw PreconditionError("apply_swap: token index " + std::to_string(keyword_index) +
                            " out of range (" + std::to_string(tokens.size()) + " tokens)");
  const auto& tok = tokens[keyword_index];
  bool sentence_initial = keyword_index == 0;
  if (!sentence_initial) {
    const auto& prev = tokens[keyword_index - 1].text;
    sentence_initial = prev == "." || prev == "?" || prev == "!";
  }
  std::string repl(replacement);
  if (sentence_initial && is_capitalized(tok.text)) repl = capitalize(repl);

  std::string out(question.substr(0, tok.begin));
  out += repl;
  out += question.substr(tok.end);
  return out;
}

Generated gen_numeric(const QAExample& example, std::size_t keyword_index,
                      const EmbeddingTable& table) {
  auto tokens = checked_tokens(example, keyword_index);
  const std::string keyword = tokens[keyword_index].text;
  if (!table.contains(keyword))
    return SkipRecord{example.id, Mode::numeric, "oov: keyword '" + keyword + "'"};

  std::vector<Neighbor> neighbors;
  try {
    const std::string excl[] = {keyword};
    neighbors = table.nearest_neighbors(keyword, kNumericCandidates * 5, excl);
  } catch (const UndefinedSimilarityError&) {
    return SkipRecord{example.id, Mode::numeric, "zero vector: keyword '" + keyword + "'"};
  }
  std::vector<Candidate> cands;
  for (auto& n : neighbors) {
    if (!swappable(n.word)) continue;
    cands.push_back({std::move(n.word), n.similarity});
    if (cands.size() == kNumericCandidates) break;
  }
  if (cands.empty())
    return SkipRecord{example.id, Mode::numeric, "no usable neighbor for '" + keyword + "'"};

  auto p = make_perturbed(example, Mode::numeric, keyword_index, keyword, cands.front().word);
  p.candidates = std::move(cands);
  return p;
}

Generated gen_synonym(const QAExample& example, std::size_t keyword_index,
                      const SynonymLexicon& lexicon, const EmbeddingTable& table,
                      const StopwordSet& stopwords) {
  auto tokens = checked_tokens(example, keyword_index);
  const std::string keyword = tokens[keyword_index].text;
  const auto* entry = lexicon.find(keyword);
  if (!entry || entry->empty())
    return SkipRecord{example.id, Mode::synonym, "no lexicon entry for '" + keyword + "'"};

  std::vector<std::string> usable;
  for (const auto& c : *entry)
    if (swappable(c)) usable.push_back(c);
  if (usable.empty())
    return SkipRecord{example.id, Mode::synonym,
                      "no single-token synonym for '" + keyword + "'"};

  // context = mean vector of the other in-vocabulary content words
  std::vector<double> context(table.dimension(), 0.0);
  std::size_t n_context = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == keyword_index || !is_content_token(tokens[i].text, stopwords)) continue;
    auto r = table.find(tokens[i].text);
    if (!r) continue;
    auto v = table.vector(*r);
    for (std::size_t d = 0; d < v.size(); ++d) context[d] += v[d];
    ++n_context;
  }
  bool context_usable = n_context > 0 &&
                        std::any_of(context.begin(), context.end(), [](double x) { return x != 0.0; });

  std::vector<Candidate> scored, unscored;
  for (const auto& c : usable) {
    auto r = table.find(c);
    if (context_usable && r) {
      try {
        scored.push_back({c, cosine(std::span<const double>(to_double(table.vector(*r))),
                                    std::span<const double>(context))});
        continue;
      } catch (const UndefinedSimilarityError&) {
      }
    }
    unscored.push_back({c, std::nullopt});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Candidate& a, const Candidate& b) {
    return *a.context_score > *b.context_score;
  });

  std::vector<Candidate> ranked = std::move(scored);
  ranked.insert(ranked.end(), unscored.begin(), unscored.end());
  auto p = make_perturbed(example, Mode::synonym, keyword_index, keyword, ranked.front().word);
  p.lexicon_order_fallback = !ranked.front().context_score.has_value();
  p.candidates = std::move(ranked);
  return p;
}

Generated gen_random(const QAExample& example, std::size_t keyword_index, RandomPolicy policy,
                     const EmbeddingTable* table, std::uint64_t seed) {
  auto tokens = checked_tokens(example, keyword_index);
  const std::string keyword = tokens[keyword_index].text;
  if (policy == RandomPolicy::literal)
    return make_perturbed(example, Mode::random, keyword_index, keyword, "random");

  if (!table) throw ConfigError("sampled random policy needs an embedding table");
  Rng rng(seed);
  const auto lower_kw = to_lower(keyword);
  // bounded so that a table with no admissible word cannot loop forever
  for (std::size_t attempt = 0; attempt < 64 * table->size() + 64; ++attempt) {
    const auto& w = table->word(uniform_below(rng, table->size()));
    if (to_lower(w) == lower_kw || !swappable(w)) continue;
    return make_perturbed(example, Mode::random, keyword_index, keyword, w);
  }
  return SkipRecord{example.id, Mode::random, "no admissible random word in table"};
}

std::size_t export_review(std::span<const PerturbedExample> perturbed, std::ostream& sink) {
  csv::write_row(sink, kReviewHeader);
  for (const auto& p : perturbed) {
    std::vector<std::string> row = {p.base.id, std::string(to_string(p.mode)),
                                    p.perturbed_question, std::to_string(p.keyword_index),
                                    p.keyword};
    for (std::size_t i = 0; i < 3; ++i)
      row.push_back(i < p.candidates.size() ? p.candidates[i].word : std::string());
    row.push_back(p.replacement);
    row.push_back(p.semantic_ok ? (*p.semantic_ok ? "yes" : "no") : "");
    csv::write_row(sink, row);
  }
  if (!sink) throw Error("export_review: write failed");
  return perturbed.size();
}

std::vector<PerturbedExample> import_review(std::istream& source,
                                            std::span<const PerturbedExample> originals) {
  std::map<std::pair<std::string, Mode>, const PerturbedExample*> by_key;
  for (const auto& p : originals) {
    if (!by_key.emplace(std::pair{p.base.id, p.mode}, &p).second)
      throw ValidationError("duplicate perturbed example '" + p.base.id + "' (" +
                            std::string(to_string(p.mode)) + ")");
  }

  csv::Reader reader(source);
  auto header = reader.next();
  if (!header || *header != kReviewHeader)
    throw FormatError("review CSV header does not match the expected columns", 1);

  std::vector<PerturbedExample> out;
  std::set<std::pair<std::string, Mode>> done;
  std::size_t row_no = 0;
  while (auto row = reader.next()) {
    ++row_no;
    auto fail = [&](const std::string& what) {
      return FormatError("review row " + std::to_string(row_no) + ": " + what, reader.line());
    };
    if (row->size() == 1 && (*row)[0].empty()) continue;  // blank line
    if (row->size() != kReviewHeader.size())
      throw fail("expected " + std::to_string(kReviewHeader.size()) + " fields, got " +
                 std::to_string(row->size()));
    const auto& r = *row;
    Mode mode;
    try {
      mode = parse_mode(r[1]);
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
    auto it = by_key.find({r[0], mode});
    if (it == by_key.end())
      throw ValidationError("review row " + std::to_string(row_no) + ": unknown id '" + r[0] +
                            "' for mode " + r[1]);
    if (!done.insert(it->first).second) throw fail("duplicate row for id '" + r[0] + "'");

    PerturbedExample p = *it->second;
    std::size_t kidx = 0;
    auto [ptr, ec] = std::from_chars(r[3].data(), r[3].data() + r[3].size(), kidx);
    if (ec != std::errc() || ptr != r[3].data() + r[3].size() || kidx != p.keyword_index)
      throw fail("keyword_index '" + r[3] + "' does not match the generated example");

    const std::string& chosen = r[8];
    if (!chosen.empty() && chosen != p.replacement) {
      if (!swappable(chosen)) throw fail("chosen replacement '" + chosen + "' is not one token");
      p.replacement = chosen;
      p.perturbed_question = apply_swap(p.base.question, p.keyword_index, chosen);
    }
    if (r[9].empty())
      p.semantic_ok.reset();
    else if (r[9] == "yes")
      p.semantic_ok = true;
    else if (r[9] == "no")
      p.semantic_ok = false;
    else
      throw fail("semantic_ok must be empty, 'yes' or 'no', got '" + r[9] + "'");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace tough
