#include "mm1game/report.hpp"

#include <cmath>
#include <cstdio>

#include "mm1game/errors.hpp"

namespace mm1game::report {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string format_list(std::span<const double> values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ';';
    out += format_number(values[k]);
  }
  return out;
}

nlohmann::ordered_json json_number(double value) {
  if (!std::isfinite(value)) return format_number(value);
  // Round-trip through the CSV formatting so both outputs carry the same digits.
  return std::stod(format_number(value));
}

nlohmann::ordered_json json_list(std::span<const double> values) {
  auto arr = nlohmann::ordered_json::array();
  for (double v : values) arr.push_back(json_number(v));
  return arr;
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  out_ << "# schema_version: " << kSchemaVersion << '\n';
  for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(double value) {
  row_.push_back(format_number(value));
  return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t value) {
  row_.push_back(std::to_string(value));
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& value) {
  row_.push_back(quote_if_needed(value));
  return *this;
}

CsvWriter& CsvWriter::cell(std::span<const double> values) {
  row_.push_back(format_list(values));
  return *this;
}

void CsvWriter::end_row() {
  if (row_.size() != columns_) {
    throw Error("CSV row has " + std::to_string(row_.size()) + " cells, header has " +
                std::to_string(columns_));
  }
  for (std::size_t k = 0; k < row_.size(); ++k) out_ << (k ? "," : "") << row_[k];
  out_ << '\n';
  row_.clear();
}

}  // namespace mm1game::report
