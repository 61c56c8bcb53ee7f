#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "lae/data.hpp"

namespace lae {

DatasetFormat parse_dataset_format(const std::string& name) {
  if (name == "csv") return DatasetFormat::csv;
  if (name == "idx") return DatasetFormat::idx;
  throw std::invalid_argument("unknown dataset format '" + name + "' (expected csv or idx)");
}

namespace {

std::vector<char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool parse_double(std::string_view field, double& out) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

DataMatrix load_csv(const std::string& path) {
  std::vector<char> bytes = read_all(path);
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t width = 0;
  bool first_line = true;
  while (pos < bytes.size()) {
    std::size_t line_start = pos;
    std::size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    std::string_view line(bytes.data() + pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<double> row;
    bool numeric = true;
    std::size_t field_start = 0;
    std::size_t bad_offset = 0;
    while (true) {
      std::size_t comma = line.find(',', field_start);
      std::string_view field = line.substr(field_start, comma == std::string_view::npos ? std::string_view::npos
                                                                                         : comma - field_start);
      double v = 0;
      if (!parse_double(field, v) || !std::isfinite(v)) {
        if (numeric) bad_offset = line_start + field_start;
        numeric = false;
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      field_start = comma + 1;
    }
    if (!numeric) {
      if (first_line) {
        first_line = false;
        width = row.size();
        continue;
      }
      throw FormatError("csv: non-numeric field in " + path, bad_offset);
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw FormatError("csv: dimension mismatch, expected " + std::to_string(width) + " columns, got " +
                            std::to_string(row.size()),
                        line_start);
    first_line = false;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("csv: no data rows in " + path, bytes.size());

  DataMatrix X;
  X.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) X.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  X.provenance = "csv:" + path;
  return X;
}

DataMatrix load_idx(const std::string& path) {
  std::vector<char> bytes = read_all(path);
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(bytes[i]); };
  if (bytes.size() < 4) throw FormatError("idx: truncated magic number", bytes.size());
  if (byte(0) != 0 || byte(1) != 0) throw FormatError("idx: malformed magic number", 0);
  if (byte(2) != 0x08) throw FormatError("idx: only unsigned-byte payloads are supported", 2);
  const std::size_t ndim = byte(3);
  if (ndim < 1) throw FormatError("idx: zero dimensions", 3);
  const std::size_t header = 4 + 4 * ndim;
  if (bytes.size() < header) throw FormatError("idx: truncated dimension header", bytes.size());
  std::vector<std::size_t> dims(ndim);
  for (std::size_t d = 0; d < ndim; ++d) {
    std::size_t o = 4 + 4 * d;
    dims[d] = (std::size_t{byte(o)} << 24) | (std::size_t{byte(o + 1)} << 16) | (std::size_t{byte(o + 2)} << 8) |
              std::size_t{byte(o + 3)};
    if (dims[d] == 0) throw FormatError("idx: zero-length dimension", o);
  }
  const std::size_t n = dims[0];
  std::size_t m = 1;
  for (std::size_t d = 1; d < ndim; ++d) m *= dims[d];
  const std::size_t expected = header + n * m;
  if (bytes.size() < expected) throw FormatError("idx: truncated payload, expected " + std::to_string(expected) +
                                                     " bytes", bytes.size());
  if (bytes.size() > expected) throw FormatError("idx: trailing bytes after payload", expected);

  DataMatrix X;
  X.values.resize(static_cast<Index>(m), static_cast<Index>(n));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t f = 0; f < m; ++f)
      X.values(static_cast<Index>(f), static_cast<Index>(s)) = static_cast<double>(byte(header + s * m + f));
  X.provenance = "idx:" + path;
  return X;
}

}  // namespace

DataMatrix load_dataset(const std::string& path, DatasetFormat format) {
  return format == DatasetFormat::csv ? load_csv(path) : load_idx(path);
}

}  // namespace lae
