#pragma once

// Tabular results, CSV with shortest round-trip doubles, and the JSON sidecar.

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

namespace mhc::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table '" + name + "': row width mismatch");
    rows.push_back(std::move(row));
  }
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("parse_double: not a number: '" + s + "'");
  }
  return v;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_field(std::get<std::string>(c));
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

/// Splits CSV text into rows of raw fields; the first row is the header.
inline std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json cell_to_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_double(*d);
    return *d;
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

/// Array of records keyed by column name.
inline nlohmann::json table_to_json(const Table& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json rec = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) rec[t.columns[i]] = cell_to_json(row[i]);
    arr.push_back(std::move(rec));
  }
  return arr;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// Everything an experiment emits.
struct RunOutput {
  std::vector<Table> tables;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> warnings;
};

struct Sidecar {
  nlohmann::json config;
  std::string version;
  std::uint64_t seed = 0;
  std::string experiment;
  std::string timestamp;
  bool complete = false;
  std::string error;
};

/// Writes <dir>/<table>.csv (and .json records when requested) plus
/// <dir>/<experiment>.meta.json. Returns the written paths.
inline std::vector<std::filesystem::path> emit_results(const std::filesystem::path& dir, const RunOutput& out,
                                                       const Sidecar& meta, const std::vector<std::string>& formats) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const bool csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
  const bool json = std::find(formats.begin(), formats.end(), "json") != formats.end();
  nlohmann::json files = nlohmann::json::array();
  for (const auto& t : out.tables) {
    if (csv) {
      const auto p = dir / (t.name + ".csv");
      write_text_file(p, to_csv(t));
      written.push_back(p);
      files.push_back(p.filename().string());
    }
    if (json) {
      const auto p = dir / (t.name + ".json");
      write_text_file(p, table_to_json(t).dump(2) + "\n");
      written.push_back(p);
      files.push_back(p.filename().string());
    }
  }
  nlohmann::json side = nlohmann::json::object();
  side["experiment"] = meta.experiment;
  side["version"] = meta.version;
  side["seed"] = meta.seed;
  side["timestamp"] = meta.timestamp;
  side["complete"] = meta.complete;
  if (!meta.error.empty()) side["error"] = meta.error;
  side["config"] = meta.config;
  side["results"] = out.results;
  side["warnings"] = out.warnings;
  side["files"] = files;
  const auto p = dir / (meta.experiment + ".meta.json");
  write_text_file(p, side.dump(2) + "\n");
  written.push_back(p);
  return written;
}

}  // namespace mhc::cli
