#pragma once

// Plot-ready output: CSV with a schema comment line and a header row, or JSON.

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mm1game::report {

inline constexpr int kSchemaVersion = 1;

/// 12 significant digits, '.' decimal separator; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double value);

/// Numbers joined with ';' for a single CSV cell.
std::string format_list(std::span<const double> values);

/// JSON number, or the strings "inf" / "-inf" / "nan" where JSON has no literal.
nlohmann::ordered_json json_number(double value);
nlohmann::ordered_json json_list(std::span<const double> values);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& cell(double value);
  CsvWriter& cell(std::uint64_t value);
  CsvWriter& cell(const std::string& value);
  CsvWriter& cell(std::span<const double> values);
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::vector<std::string> row_;
};

}  // namespace mm1game::report
