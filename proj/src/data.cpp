#include "tough/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "tough/csv.hpp"
#include "tough/errors.hpp"
#include "tough/rng.hpp"
#include "tough/text.hpp"

namespace tough {
namespace {

const Json& require(const Json& j, const std::string& key, const std::string& path,
                    Json::value_t type) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError("SQuAD schema: missing '" + key + "' at " + path);
  bool ok = it->type() == type ||
            (type == Json::value_t::number_integer && it->is_number_unsigned());
  if (!ok) throw FormatError("SQuAD schema: wrong type for " + path + "." + key);
  return *it;
}

bool offsets_match(const std::string& context, const Gold& g) {
  if (g.answer_start < 0) return false;
  auto b = char_to_byte_offset(context, static_cast<std::size_t>(g.answer_start));
  if (b == std::string_view::npos || b > context.size()) return false;
  return context.compare(b, g.text.size(), g.text) == 0;
}

Json gold_json(const Gold& g) {
  Json j;
  j["text"] = g.text;
  j["answer_start"] = g.answer_start;
  return j;
}

// Positions where the two token sequences differ; nullopt if lengths differ.
std::optional<std::vector<std::size_t>> token_diff(const std::vector<std::string>& a,
                                                   const std::vector<std::string>& b) {
  if (a.size() != b.size()) return std::nullopt;
  std::vector<std::size_t> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diff.push_back(i);
  return diff;
}

std::vector<Gold> parse_golds_cell(const std::string& cell) {
  std::vector<Gold> golds;
  auto t = trim(cell);
  if (!t.empty() && t.front() == '[') {
    Json j = Json::parse(t);  // parse_error is reported by the caller
    for (const auto& g : j) {
      if (g.is_string()) {
        golds.push_back({g.get<std::string>(), -1});
      } else if (g.is_object() && g.contains("text") && g["text"].is_string()) {
        Gold gold{g["text"].get<std::string>(), -1};
        if (g.contains("answer_start") && g["answer_start"].is_number_integer())
          gold.answer_start = g["answer_start"].get<long>();
        golds.push_back(std::move(gold));
      } else {
        throw ValidationError("gold entries must be strings or {\"text\", \"answer_start\"}");
      }
    }
  } else if (!t.empty()) {
    golds.push_back({t, -1});
  }
  if (golds.empty()) throw ValidationError("no gold answers");
  return golds;
}

std::optional<bool> parse_flag(const std::string& cell) {
  auto v = to_lower(trim(cell));
  if (v.empty()) return std::nullopt;
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ValidationError("semantic_ok must be true/false/yes/no/1/0 or empty, got '" + cell + "'");
}

std::string json_string(const std::string& s) { return Json(s).dump(); }

std::optional<double> opt_number(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw FormatError(std::string("report field '") + key + "' is not a number");
  return it->get<double>();
}

std::string md_cell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out.push_back(c);
  }
  return out;
}

}  // namespace

SquadLoad load_squad(std::istream& source) {
  Json root;
  try {
    root = Json::parse(source);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("SQuAD file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw FormatError("SQuAD schema: root must be an object");
  const auto& data = require(root, "data", "$", Json::value_t::array);

  SquadLoad out;
  std::set<std::string> ids;
  for (std::size_t a = 0; a < data.size(); ++a) {
    const std::string apath = "$.data[" + std::to_string(a) + "]";
    if (!data[a].is_object()) throw FormatError("SQuAD schema: " + apath + " must be an object");
    const auto& paragraphs = require(data[a], "paragraphs", apath, Json::value_t::array);
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string ppath = apath + ".paragraphs[" + std::to_string(p) + "]";
      if (!paragraphs[p].is_object())
        throw FormatError("SQuAD schema: " + ppath + " must be an object");
      const auto context =
          require(paragraphs[p], "context", ppath, Json::value_t::string).get<std::string>();
      const auto& qas = require(paragraphs[p], "qas", ppath, Json::value_t::array);
      for (std::size_t q = 0; q < qas.size(); ++q) {
        const std::string qpath = ppath + ".qas[" + std::to_string(q) + "]";
        if (!qas[q].is_object()) throw FormatError("SQuAD schema: " + qpath + " must be an object");
        QAExample ex;
        ex.context = context;
        ex.id = require(qas[q], "id", qpath, Json::value_t::string).get<std::string>();
        ex.question = require(qas[q], "question", qpath, Json::value_t::string).get<std::string>();
        const auto& answers = require(qas[q], "answers", qpath, Json::value_t::array);
        if (answers.empty())
          throw FormatError("SQuAD schema: " + qpath + ".answers is empty (SQuAD v2 "
                            "unanswerable questions are not supported)");
        bool mismatch = false;
        for (std::size_t k = 0; k < answers.size(); ++k) {
          const std::string apath2 = qpath + ".answers[" + std::to_string(k) + "]";
          if (!answers[k].is_object())
            throw FormatError("SQuAD schema: " + apath2 + " must be an object");
          Gold g;
          g.text = require(answers[k], "text", apath2, Json::value_t::string).get<std::string>();
          g.answer_start =
              require(answers[k], "answer_start", apath2, Json::value_t::number_integer)
                  .get<long>();
          g.offset_mismatch = !offsets_match(context, g);
          mismatch = mismatch || g.offset_mismatch;
          ex.golds.push_back(std::move(g));
        }
        if (!ids.insert(ex.id).second)
          throw FormatError("SQuAD schema: duplicate id '" + ex.id + "' at " + qpath);
        if (mismatch) out.offset_mismatches.push_back(ex.id);
        out.examples.push_back(std::move(ex));
      }
    }
  }
  return out;
}

SquadLoad load_squad_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open SQuAD file " + path);
  return load_squad(in);
}

void write_squad(std::ostream& sink, std::span<const QAExample> examples) {
  Json paragraphs = Json::array();
  for (const auto& ex : examples) {
    Json qa;
    qa["id"] = ex.id;
    qa["question"] = ex.question;
    qa["answers"] = Json::array();
    for (const auto& g : ex.golds) qa["answers"].push_back(gold_json(g));
    Json para;
    para["context"] = ex.context;
    para["qas"] = Json::array({qa});
    paragraphs.push_back(std::move(para));
  }
  Json article;
  article["title"] = "tough";
  article["paragraphs"] = std::move(paragraphs);
  Json root;
  root["version"] = "1.1";
  root["data"] = Json::array({article});
  sink << root.dump() << '\n';
}

PerturbedDatasetRecord to_record(const PerturbedExample& p) {
  PerturbedDatasetRecord r;
  r.id = p.base.id;
  r.mode = p.mode;
  r.context = p.base.context;
  r.question_original = p.base.question;
  r.question_perturbed = p.perturbed_question;
  r.keyword_index = p.keyword_index;
  r.keyword = p.keyword;
  r.replacement = p.replacement;
  r.semantic_ok = p.semantic_ok;
  r.golds = p.base.golds;
  for (auto& g : r.golds) g.offset_mismatch = false;
  return r;
}

PerturbedExample from_record(const PerturbedDatasetRecord& r) {
  PerturbedExample p;
  p.base = QAExample{r.id, r.context, r.question_original, r.golds};
  p.mode = r.mode;
  p.keyword_index = r.keyword_index;
  p.keyword = r.keyword;
  p.replacement = r.replacement;
  p.perturbed_question = r.question_perturbed;
  p.semantic_ok = r.semantic_ok;
  return p;
}

void validate_record(const PerturbedDatasetRecord& r) {
  if (r.golds.empty()) throw ValidationError("record '" + r.id + "' has no gold answers");
  auto a = token_texts(r.question_original);
  auto b = token_texts(r.question_perturbed);
  auto diff = token_diff(a, b);
  if (!diff)
    throw ValidationError("record '" + r.id + "': perturbed question has " +
                          std::to_string(b.size()) + " tokens, original has " +
                          std::to_string(a.size()));
  if (diff->size() != 1)
    throw ValidationError("record '" + r.id + "': questions differ at " +
                          std::to_string(diff->size()) + " token positions, expected exactly 1");
  if (diff->front() != r.keyword_index)
    throw ValidationError("record '" + r.id + "': questions differ at token " +
                          std::to_string(diff->front()) + " but keyword_index is " +
                          std::to_string(r.keyword_index));
}

void write_perturbed(std::ostream& sink, std::span<const PerturbedDatasetRecord> records) {
  for (const auto& r : records) {
    Json j;
    j["id"] = r.id;
    j["mode"] = std::string(to_string(r.mode));
    j["context"] = r.context;
    j["question_original"] = r.question_original;
    j["question_perturbed"] = r.question_perturbed;
    j["keyword_index"] = r.keyword_index;
    j["keyword"] = r.keyword;
    j["replacement"] = r.replacement;
    j["semantic_ok"] = r.semantic_ok ? Json(*r.semantic_ok) : Json(nullptr);
    j["golds"] = Json::array();
    for (const auto& g : r.golds) j["golds"].push_back(gold_json(g));
    sink << j.dump() << '\n';
  }
  if (!sink) throw Error("write_perturbed: write failed");
}

std::vector<PerturbedDatasetRecord> read_perturbed(std::istream& source) {
  std::vector<PerturbedDatasetRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    PerturbedDatasetRecord r;
    try {
      auto j = Json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.mode = parse_mode(j.at("mode").get<std::string>());
      r.context = j.at("context").get<std::string>();
      r.question_original = j.at("question_original").get<std::string>();
      r.question_perturbed = j.at("question_perturbed").get<std::string>();
      r.keyword_index = j.at("keyword_index").get<std::size_t>();
      r.keyword = j.at("keyword").get<std::string>();
      r.replacement = j.at("replacement").get<std::string>();
      const auto& ok = j.at("semantic_ok");
      if (!ok.is_null()) r.semantic_ok = ok.get<bool>();
      for (const auto& g : j.at("golds"))
        r.golds.push_back({g.at("text").get<std::string>(), g.at("answer_start").get<long>()});
    } catch (const Json::exception& e) {
      throw FormatError(std::string("malformed perturbed record: ") + e.what(), line_no);
    } catch (const ValidationError& e) {
      throw FormatError(std::string("malformed perturbed record: ") + e.what(), line_no);
    }
    try {
      validate_record(r);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_explanations(std::ostream& sink, std::span<const ExplanationRecord> records) {
  for (const auto& r : records) {
    const auto& e = r.explanation;
    Json j;
    j["id"] = r.id;
    j["question"] = r.question;
    j["tokens"] = e.tokens;
    j["coefficients"] = e.coefficients;
    j["intercept"] = e.intercept;
    j["r_squared"] = e.r_squared;
    j["keyword_index"] = e.keyword_index;
    j["keyword"] = e.keyword();
    j["n_samples"] = e.n_samples;
    j["seed"] = e.seed;
    j["ridge_lambda"] = e.ridge_lambda;
    sink << j.dump() << '\n';
  }
  if (!sink) throw Error("write_explanations: write failed");
}

std::vector<ExplanationRecord> read_explanations(std::istream& source) {
  std::vector<ExplanationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ExplanationRecord r;
    try {
      auto j = Json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.question = j.at("question").get<std::string>();
      auto& e = r.explanation;
      e.tokens = j.at("tokens").get<std::vector<std::string>>();
      e.coefficients = j.at("coefficients").get<std::vector<double>>();
      e.intercept = j.at("intercept").get<double>();
      e.r_squared = j.at("r_squared").get<double>();
      e.keyword_index = j.at("keyword_index").get<std::size_t>();
      e.n_samples = j.at("n_samples").get<std::size_t>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.ridge_lambda = j.at("ridge_lambda").get<double>();
    } catch (const Json::exception& e) {
      throw FormatError(std::string("malformed explanation record: ") + e.what(), line_no);
    }
    const auto& e = r.explanation;
    if (e.tokens.empty() || e.tokens.size() != e.coefficients.size() ||
        e.keyword_index >= e.tokens.size())
      throw FormatError("explanation record '" + r.id + "' is inconsistent", line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QAExample> augment_rem(std::span<const QAExample> dataset, std::size_t copies,
                                   std::uint64_t seed) {
  if (copies == 0) throw PreconditionError("augment_rem: copies must be >= 1");
  std::vector<QAExample> out;
  for (const auto& ex : dataset) {
    out.push_back(ex);
    auto tokens = tokenize(ex.question);
    const std::size_t n = tokens.size();
    if (n < 2) continue;
    const std::size_t m = std::min(copies, n - 1);
    Rng rng(derive_seed(seed, "augment-rem", ex.id));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t j = k + uniform_below(rng, n - k);
      std::swap(order[k], order[j]);
      std::vector<std::uint8_t> keep(n, 1);
      keep[order[k]] = 0;
      QAExample variant = ex;
      variant.id = ex.id + "#rem" + std::to_string(k + 1);
      variant.question = render_kept(ex.question, tokens, keep);
      out.push_back(std::move(variant));
    }
  }
  return out;
}

CsvImport import_external_csv(std::istream& source, const ColumnMapping& mapping) {
  csv::Reader reader(source);
  auto header = reader.next();
  if (!header) throw FormatError("CSV import: missing header row");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col.emplace(trim((*header)[i]), i);
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = col.find(name);
    if (it == col.end()) throw ValidationError("CSV import: missing mapped column '" + name + "'");
    return it->second;
  };
  const auto c_id = column(mapping.id);
  const auto c_ctx = column(mapping.context);
  const auto c_qo = column(mapping.question_original);
  const auto c_qp = column(mapping.question_perturbed);
  const auto c_mode = column(mapping.mode);
  const auto c_golds = column(mapping.golds);
  auto optional_column = [&](const std::optional<std::string>& name) -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    return column(*name);
  };
  const auto c_kidx = optional_column(mapping.keyword_index);
  const auto c_kw = optional_column(mapping.keyword);
  const auto c_repl = optional_column(mapping.replacement);
  const auto c_ok = optional_column(mapping.semantic_ok);

  CsvImport out;
  std::size_t row_no = 0;
  while (auto row = reader.next()) {
    ++row_no;
    if (row->size() == 1 && (*row)[0].empty()) continue;
    try {
      if (row->size() != header->size())
        throw ValidationError("expected " + std::to_string(header->size()) + " fields, got " +
                              std::to_string(row->size()));
      const auto& f = *row;
      PerturbedDatasetRecord r;
      r.id = trim(f[c_id]);
      r.context = f[c_ctx];
      r.question_original = f[c_qo];
      r.question_perturbed = f[c_qp];
      if (r.id.empty()) throw ValidationError("empty id");
      if (trim(r.context).empty()) throw ValidationError("empty context");
      if (trim(r.question_original).empty()) throw ValidationError("empty original question");
      if (trim(r.question_perturbed).empty()) throw ValidationError("empty perturbed question");
      r.mode = parse_mode(to_lower(trim(f[c_mode])));
      try {
        r.golds = parse_golds_cell(f[c_golds]);
      } catch (const Json::exception& e) {
        throw ValidationError(std::string("golds cell is not valid JSON: ") + e.what());
      }

      auto a = token_texts(r.question_original);
      auto b = token_texts(r.question_perturbed);
      auto diff = token_diff(a, b);
      std::optional<std::size_t> position;
      if (diff && diff->size() == 1) position = diff->front();
      if (c_kidx && !trim(f[*c_kidx]).empty()) {
        auto s = trim(f[*c_kidx]);
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
          throw ValidationError("keyword_index '" + s + "' is not a non-negative integer");
        r.keyword_index = v;
      } else if (position) {
        r.keyword_index = *position;
      } else {
        throw ValidationError("cannot locate the swapped token: questions differ at " +
                              (diff ? std::to_string(diff->size()) : std::string("a different number of")) +
                              " positions");
      }
      if (r.keyword_index < a.size()) r.keyword = a[r.keyword_index];
      if (r.keyword_index < b.size()) r.replacement = b[r.keyword_index];
      if (c_kw && !f[*c_kw].empty()) r.keyword = f[*c_kw];
      if (c_repl && !f[*c_repl].empty()) r.replacement = f[*c_repl];
      if (c_ok) r.semantic_ok = parse_flag(f[*c_ok]);
      validate_record(r);
      out.records.push_back(std::move(r));
    } catch (const Error& e) {
      out.failures.push_back({row_no, e.what()});
    }
  }
  return out;
}

std::string format_rate(std::optional<double> value, int decimals) {
  if (!value) return "null";
  char buf[64];
  double scale = std::pow(10.0, decimals);
  double v = std::round(*value * scale) / scale;
  if (v == 0.0) v = 0.0;  // no "-0.00"
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void write_report_json(std::ostream& sink, const EvalReport& r) {
  auto per_mode = [](const PerMode& m) {
    return "{\"numeric\": " + std::to_string(m[0]) + ", \"synonym\": " + std::to_string(m[1]) +
           ", \"random\": " + std::to_string(m[2]) + "}";
  };
  sink << "{\n";
  sink << "  \"model_id\": " << json_string(r.model_id) << ",\n";
  sink << "  \"counts\": {\"total\": " << r.counts.total
       << ", \"evaluated_per_mode\": " << per_mode(r.counts.evaluated_per_mode)
       << ", \"skipped_per_mode\": " << per_mode(r.counts.skipped_per_mode) << "},\n";
  sink << "  \"original_em\": " << format_rate(r.original_em, 4) << ",\n";
  sink << "  \"original_f1\": " << format_rate(r.original_f1, 4) << ",\n";
  sink << "  \"numeric_accuracy\": " << format_rate(r.numeric_accuracy, 4) << ",\n";
  sink << "  \"synonym_accuracy\": " << format_rate(r.synonym_accuracy, 4) << ",\n";
  sink << "  \"random_accuracy\": " << format_rate(r.random_accuracy, 4) << ",\n";
  sink << "  \"decision_change_rate\": " << format_rate(r.decision_change_rate, 4) << ",\n";
  sink << "  \"stability_margin\": " << format_rate(r.stability_margin, 4) << ",\n";
  sink << "  \"semantically_stable\": " << (r.semantically_stable ? "true" : "false") << "\n";
  sink << "}\n";
  if (!sink) throw Error("write_report_json: write failed");
}

EvalReport read_report_json(std::istream& source) {
  Json j;
  try {
    j = Json::parse(source);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("report is not valid JSON: ") + e.what());
  }
  EvalReport r;
  try {
    r.model_id = j.at("model_id").get<std::string>();
    const auto& c = j.at("counts");
    r.counts.total = c.at("total").get<std::size_t>();
    for (std::size_t k = 0; k < 3; ++k) {
      const char* name = k == 0 ? "numeric" : k == 1 ? "synonym" : "random";
      r.counts.evaluated_per_mode[k] = c.at("evaluated_per_mode").at(name).get<std::size_t>();
      r.counts.skipped_per_mode[k] = c.at("skipped_per_mode").at(name).get<std::size_t>();
    }
    r.original_em = j.at("original_em").get<double>();
    r.original_f1 = j.at("original_f1").get<double>();
    r.semantically_stable = j.at("semantically_stable").get<bool>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("report schema: ") + e.what());
  }
  r.numeric_accuracy = opt_number(j, "numeric_accuracy");
  r.synonym_accuracy = opt_number(j, "synonym_accuracy");
  r.random_accuracy = opt_number(j, "random_accuracy");
  r.decision_change_rate = opt_number(j, "decision_change_rate");
  r.stability_margin = opt_number(j, "stability_margin");
  return r;
}

void write_report_markdown(std::ostream& sink, const EvalReport& report,
                           const EvalReport* baseline) {
  auto cell = [](std::optional<double> v) { return v ? format_rate(v, 2) : std::string("n/a"); };
  auto delta_cell = [&](std::optional<double> v, std::optional<double> base) {
    std::string s = cell(v);
    if (!v || !base) return s;
    long d = std::lround(*v * 100.0) - std::lround(*base * 100.0);
    char buf[32];
    std::snprintf(buf, sizeof buf, " (%c%ld.%02ld)", d < 0 ? '-' : '+', std::labs(d) / 100,
                  std::labs(d) % 100);
    return s + buf;
  };
  auto row = [&](const EvalReport& r, const EvalReport* base) {
    sink << "| " << md_cell(r.model_id);
    const std::optional<double> accs[] = {r.numeric_accuracy, r.synonym_accuracy,
                                          r.random_accuracy};
    const std::optional<double> base_accs[] = {
        base ? base->numeric_accuracy : std::nullopt,
        base ? base->synonym_accuracy : std::nullopt,
        base ? base->random_accuracy : std::nullopt};
    for (int k = 0; k < 3; ++k)
      sink << " | " << (base ? delta_cell(accs[k], base_accs[k]) : cell(accs[k]));
    sink << " | " << cell(r.original_em) << " | " << cell(r.original_f1) << " |\n";
  };
  sink << "| Architecture | Numeric accuracy | Synonym accuracy | Rand accuracy | Original EM | "
          "Original F1 |\n";
  sink << "|---|---|---|---|---|---|\n";
  if (baseline) row(*baseline, nullptr);
  row(report, baseline);
  if (!sink) throw Error("write_report_markdown: write failed");
}

}  // namespace tough
