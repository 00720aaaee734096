#include "tough/csv.hpp"

#include <istream>
#include <ostream>

#include "tough/errors.hpp"

namespace tough::csv {

std::optional<Row> Reader::next() {
  int c = in_.peek();
  if (c == std::char_traits<char>::eof()) return std::nullopt;
  row_line_ = line_;

  Row row;
  std::string field;
  bool quoted = false;
  bool after_quote = false;
  for (;;) {
    c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw FormatError("unterminated quoted field", row_line_);
      row.push_back(std::move(field));
      return row;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in_.peek() == '\n') in_.get();
      ++line_;
      row.push_back(std::move(field));
      return row;
    } else if (ch == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else {
      if (after_quote)
        throw FormatError("unexpected character after closing quote", row_line_);
      field.push_back(ch);
    }
  }
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace tough::csv
