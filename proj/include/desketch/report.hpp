#pragma once
// Experiment reports: a config echo plus a rectangular table, rendered as
// CSV (RFC-4180-style, '#'-prefixed config prelude, LF endings) or JSON.
// Floats print with 17 significant digits so identical runs are
// byte-identical. Files are written to a temp path and renamed into place.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace desketch {

using Cell = std::variant<std::int64_t, double, std::string>;

struct ExperimentReport {
  std::vector<std::pair<std::string, std::string>> config;  // echoed key=value
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_config(const std::string& key, const std::string& value);
  void add_config(const std::string& key, double value);
  void add_config(const std::string& key, std::int64_t value);
};

enum class ReportFormat { csv, json };

ReportFormat report_format_from_string(const std::string& s);

std::string format_double(double v);  // %.17g

std::string render_csv(const ExperimentReport& report);
std::string render_json(const ExperimentReport& report);

// Parses render_csv output back (config prelude, header, typed cells:
// integer-looking fields as int64, numeric as double, rest as string).
ExperimentReport parse_csv_report(const std::string& text);

void emit_report(const ExperimentReport& report, const std::filesystem::path& path,
                 ReportFormat format);

}  // namespace desketch
