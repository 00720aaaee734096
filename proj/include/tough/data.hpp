#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tough/lime.hpp"
#include "tough/metrics.hpp"
#include "tough/perturb.hpp"
#include "tough/qa.hpp"

namespace tough {

// ---- SQuAD v1.1 ----

struct SquadLoad {
  std::vector<QAExample> examples;
  // ids whose (answer_start, text) pair does not match the context
  std::vector<std::string> offset_mismatches;
};

// Schema violations throw FormatError naming the JSON path.
SquadLoad load_squad(std::istream& source);
SquadLoad load_squad_file(const std::string& path);
// One article, one paragraph per example.
void write_squad(std::ostream& sink, std::span<const QAExample> examples);

// ---- perturbed-dataset interchange (one JSON object per line) ----

struct PerturbedDatasetRecord {
  std::string id;
  Mode mode = Mode::numeric;
  std::string context;
  std::string question_original;
  std::string question_perturbed;
  std::size_t keyword_index = 0;
  std::string keyword;
  std::string replacement;
  std::optional<bool> semantic_ok;
  std::vector<Gold> golds;
  bool operator==(const PerturbedDatasetRecord&) const = default;
};

PerturbedDatasetRecord to_record(const PerturbedExample& p);
PerturbedExample from_record(const PerturbedDatasetRecord& r);

// Throws ValidationError unless the questions differ at exactly one token.
void validate_record(const PerturbedDatasetRecord& r);

void write_perturbed(std::ostream& sink, std::span<const PerturbedDatasetRecord> records);
std::vector<PerturbedDatasetRecord> read_perturbed(std::istream& source);

// ---- explanations (one JSON object per line) ----

struct ExplanationRecord {
  std::string id;
  std::string question;
  Explanation explanation;
  bool operator==(const ExplanationRecord&) const = default;
};

void write_explanations(std::ostream& sink, std::span<const ExplanationRecord> records);
std::vector<ExplanationRecord> read_explanations(std::istream& source);

// ---- REM augmentation ----

// Each original followed by min(copies, n-1) variants with one token
// removed (distinct positions, seeded per example id). Ids get #rem1, ...
std::vector<QAExample> augment_rem(std::span<const QAExample> dataset, std::size_t copies,
                                   std::uint64_t seed);

// ---- external CSV import ----

struct ColumnMapping {
  std::string id = "id";
  std::string context = "context";
  std::string question_original = "question_original";
  std::string question_perturbed = "question_perturbed";
  std::string mode = "mode";
  // Cell is a JSON array ([{"text", "answer_start"}] or ["text", ...]) or plain text.
  std::string golds = "golds";
  std::optional<std::string> keyword_index;
  std::optional<std::string> keyword;
  std::optional<std::string> replacement;
  std::optional<std::string> semantic_ok;
};

struct RowFailure {
  std::size_t row = 0;  // 1-based data row
  std::string reason;
};

struct CsvImport {
  std::vector<PerturbedDatasetRecord> records;
  std::vector<RowFailure> failures;
};

// Unmapped keyword fields are recovered from the token diff of the two
// questions. Row-level problems are collected, not thrown.
CsvImport import_external_csv(std::istream& source, const ColumnMapping& mapping);

// ---- reports ----

// Fixed key order, rates with 4 decimals, absent values as null.
void write_report_json(std::ostream& sink, const EvalReport& report);
EvalReport read_report_json(std::istream& source);

// Architecture | Numeric accuracy | Synonym accuracy | Rand accuracy |
// Original EM | Original F1, 2 decimals. With a baseline, its row comes
// first and accuracy cells carry signed deltas, e.g. "0.77 (+0.08)".
void write_report_markdown(std::ostream& sink, const EvalReport& report,
                           const EvalReport* baseline = nullptr);

std::string format_rate(std::optional<double> value, int decimals);

}  // namespace tough
