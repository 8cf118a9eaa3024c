#include "desketch/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "desketch/errors.hpp"

namespace desketch {

void ExperimentReport::add_config(const std::string& key, const std::string& value) {
  config.emplace_back(key, value);
}

void ExperimentReport::add_config(const std::string& key, double value) {
  config.emplace_back(key, format_double(value));
}

void ExperimentReport::add_config(const std::string& key, std::int64_t value) {
  config.emplace_back(key, std::to_string(value));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string csv_escape(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_to_string(const Cell& cell) {
  if (std::holds_alternative<std::int64_t>(cell)) {
    return std::to_string(std::get<std::int64_t>(cell));
  }
  if (std::holds_alternative<double>(cell)) {
    return format_double(std::get<double>(cell));
  }
  return std::get<std::string>(cell);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  // Integer?
  {
    std::size_t pos = 0;
    try {
      const long long v = std::stoll(s, &pos);
      if (pos == s.size()) return static_cast<std::int64_t>(v);
    } catch (const std::exception&) {
    }
  }
  {
    std::size_t pos = 0;
    try {
      const double v = std::stod(s, &pos);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  return s;
}

}  // namespace

std::string render_csv(const ExperimentReport& report) {
  std::string out;
  for (const auto& [k, v] : report.config) {
    out += "# " + k + "=" + v + "\n";
  }
  for (std::size_t j = 0; j < report.columns.size(); ++j) {
    if (j) out += ',';
    out += csv_escape(report.columns[j]);
  }
  out += '\n';
  for (const auto& row : report.rows) {
    if (row.size() != report.columns.size()) {
      throw InputError("render_csv: row width does not match header");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += csv_escape(cell_to_string(row[j]));
    }
    out += '\n';
  }
  return out;
}

std::string render_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config) j["config"][k] = v;
  j["columns"] = report.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    auto jr = nlohmann::ordered_json::array();
    for (const auto& cell : row) {
      if (std::holds_alternative<std::int64_t>(cell)) {
        jr.push_back(std::get<std::int64_t>(cell));
      } else if (std::holds_alternative<double>(cell)) {
        // Serialize through the 17-digit text form so CSV and JSON agree.
        jr.push_back(nlohmann::ordered_json::parse(format_double(std::get<double>(cell))));
      } else {
        jr.push_back(std::get<std::string>(cell));
      }
    }
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

ExperimentReport parse_csv_report(const std::string& text) {
  ExperimentReport report;
  std::stringstream ss(text);
  std::string line;
  bool have_header = false;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        report.config.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      }
      continue;
    }
    if (!have_header) {
      report.columns = split_csv_line(line);
      have_header = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_cell(f));
    report.rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError("parse_csv_report: missing header row");
  return report;
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  const std::string body = format == ReportFormat::csv ? render_csv(report)
                                                       : render_json(report);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out << body;
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError(tmp.string(), "write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(path.string(), "rename failed: " + ec.message());
  }
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw InputError("unknown report format: " + s);
}

}  // namespace desketch
