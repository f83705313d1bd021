#include "dyadic/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

namespace dyadic {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view cell, std::size_t line, const std::string& column) {
  const std::string_view t = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw CsvError(line, "column '" + column + "': non-numeric value '" + std::string(cell) + "'");
  }
  return v;
}

std::int64_t parse_integer(std::string_view cell, std::size_t line, const std::string& column) {
  const std::string_view t = trim(cell);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw CsvError(line, "column '" + column + "': expected an integer, got '" + std::string(cell) + "'");
  }
  if (v < 0) throw CsvError(line, "column '" + column + "': time index must be non-negative");
  return v;
}

std::size_t column_of(const CsvTable& table, const std::string& name) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw CsvError(1, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - table.header.begin());
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::size_t pos = 0;
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) pos = 3;

  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_started = false;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record.front().empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw CsvError(record_line, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                          std::to_string(record.size()));
        }
        table.records.push_back(std::move(record));
        table.record_lines.push_back(record_line);
      }
    }
    record.clear();
  };

  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !trim(field).empty()) throw CsvError(line, "unexpected quote inside field");
        field.clear();
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw CsvError(record_line, "unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  if (table.header.empty()) throw CsvError(1, "file has no header");
  return table;
}

IngestResult ingest_csv(std::istream& in, const CsvSchema& schema) {
  const CsvTable table = parse_csv(in);
  if (schema.unit_i == schema.unit_j) throw CsvError(1, "unit columns must be distinct");

  const std::size_t col_i = column_of(table, schema.unit_i);
  const std::size_t col_j = column_of(table, schema.unit_j);
  const std::size_t col_y = column_of(table, schema.outcome);
  const std::optional<std::size_t> col_t =
      schema.time ? std::optional(column_of(table, *schema.time)) : std::nullopt;
  const std::optional<std::size_t> col_w =
      schema.weight ? std::optional(column_of(table, *schema.weight)) : std::nullopt;

  std::vector<std::size_t> reg_cols;
  if (schema.regressors.empty()) {
    std::set<std::size_t> used = {col_i, col_j, col_y};
    if (col_t) used.insert(*col_t);
    if (col_w) used.insert(*col_w);
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (!used.count(c)) reg_cols.push_back(c);
    }
  } else {
    for (const auto& name : schema.regressors) reg_cols.push_back(column_of(table, name));
  }

  std::vector<std::string> names;
  if (schema.intercept) names.emplace_back("(Intercept)");
  for (std::size_t c : reg_cols) names.push_back(table.header[c]);
  if (names.empty()) throw CsvError(1, "no regressors selected and intercept disabled");

  const std::size_t n = table.records.size();
  if (n == 0) throw CsvError(1, "file has no data rows");

  std::unordered_map<std::string, UnitId> ids;
  std::vector<std::string> labels;
  auto id_of = [&](const std::string& raw) {
    const std::string label(trim(raw));
    const auto [it, fresh] = ids.try_emplace(label, static_cast<UnitId>(labels.size()));
    if (fresh) labels.push_back(label);
    return it->second;
  };

  std::vector<Observation> rows;
  rows.reserve(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(names.size()));
  std::map<std::pair<DyadKey, std::int64_t>, std::size_t> seen;

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = table.records[r];
    const std::size_t line = table.record_lines[r];
    if (trim(rec[col_i]).empty() || trim(rec[col_j]).empty()) throw CsvError(line, "empty unit label");
    const UnitId a = id_of(rec[col_i]);
    const UnitId b = id_of(rec[col_j]);
    if (a == b) {
      throw CsvError(line, "self-dyad: unit '" + labels[a] + "' appears in both unit columns");
    }
    Observation o;
    o.dyad = DyadKey::of(a, b);
    o.t = col_t ? parse_integer(rec[*col_t], line, *schema.time) : 0;
    if (schema.directed) o.t = 2 * o.t + (a < b ? 0 : 1);
    o.y = parse_number(rec[col_y], line, schema.outcome);
    if (col_w) {
      o.w = parse_number(rec[*col_w], line, *schema.weight);
      if (o.w <= 0.0) throw CsvError(line, "weight must be positive, got " + std::string(rec[*col_w]));
    }
    const auto [it, inserted] = seen.emplace(std::make_pair(o.dyad, o.t), line);
    if (!inserted) {
      throw CsvError(line, "duplicate observation for dyad (" + labels[o.dyad.i] + ", " + labels[o.dyad.j] +
                               ") and time " + std::to_string(o.t) + ", first on line " +
                               std::to_string(it->second));
    }
    Eigen::Index c = 0;
    if (schema.intercept) x(static_cast<Eigen::Index>(r), c++) = 1.0;
    for (std::size_t col : reg_cols) {
      x(static_cast<Eigen::Index>(r), c++) = parse_number(rec[col], line, table.header[col]);
    }
    rows.push_back(o);
  }

  return {DyadDataset(labels.size(), std::move(rows), std::move(x), std::move(names)), std::move(labels)};
}

IngestResult ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return ingest_csv(in, schema);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const DyadDataset& data, const std::vector<std::string>& unit_labels) {
  const auto& names = data.regressor_names();
  const Eigen::Index first = !names.empty() && names.front() == "(Intercept)" ? 1 : 0;
  auto label = [&](UnitId u) { return unit_labels.empty() ? std::to_string(u) : unit_labels.at(u); };

  out << "unit_i,unit_j,t";
  if (data.has_nonunit_weights()) out << ",weight";
  out << ",y";
  for (auto c = static_cast<std::size_t>(first); c < names.size(); ++c) out << ',' << names[c];
  out << '\n';
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    const Observation& o = data.row(r);
    out << label(o.dyad.i) << ',' << label(o.dyad.j) << ',' << o.t;
    if (data.has_nonunit_weights()) out << ',' << format_double(o.w);
    out << ',' << format_double(o.y);
    for (Eigen::Index c = first; c < data.x().cols(); ++c) {
      out << ',' << format_double(data.x()(static_cast<Eigen::Index>(r), c));
    }
    out << '\n';
  }
}

}  // namespace dyadic
