#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dyadic/dyad.hpp"
#include "dyadic/errors.hpp"

namespace dyadic {

/// Raised for malformed CSV input; `line` is 1-based (the header is line 1).
class CsvError : public DataError {
 public:
  CsvError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parsed CSV table: header plus records with their starting line numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines,
/// CRLF or LF line endings, optional UTF-8 byte-order mark.
CsvTable parse_csv(std::istream& in);

/// Which columns hold what. Empty `regressors` means "every other column".
struct CsvSchema {
  std::string unit_i;
  std::string unit_j;
  std::string outcome;
  std::vector<std::string> regressors;
  std::optional<std::string> time;
  std::optional<std::string> weight;
  bool intercept = true;
  // Treat (sender, receiver) rows as repeated observations of the
  // undirected pair: the direction becomes part of the time index.
  bool directed = false;
};

struct IngestResult {
  DyadDataset data;
  std::vector<std::string> unit_labels;  // dense id -> original label
};

IngestResult ingest_csv(std::istream& in, const CsvSchema& schema);
IngestResult ingest_csv(const std::string& path, const CsvSchema& schema);

/// Writes a dataset in the layout ingest_csv reads back with
/// {unit_i, unit_j, t, [weight], y, regressors...}. A leading "(Intercept)"
/// column is omitted. Values are written with shortest round-trip precision.
void write_csv(std::ostream& out, const DyadDataset& data, const std::vector<std::string>& unit_labels = {});

/// Shortest decimal representation that parses back to exactly v.
std::string format_double(double v);

}  // namespace dyadic
