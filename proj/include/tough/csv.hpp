#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tough::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Accepts LF or CRLF. Returns nullopt at end of input.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::optional<Row> next();
  // Physical line on which the last returned row started (1-based).
  std::size_t line() const { return row_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t row_line_ = 0;
};

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(const std::string& field);
void write_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace tough::csv
