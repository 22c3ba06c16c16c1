#pragma once

// Scenario reports: checked quantities, data tables and their emission as
// CSV, JSON and gnuplot files. Output is a pure function of the report
// contents, so reruns produce identical bytes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "matherlab/error.hpp"
#include "matherlab/integrate.hpp"

namespace matherlab {

struct ReportRow {
  std::string quantity;
  double value = 0.0;
  std::string value_text;  // symbolic form when there is one
  std::string target;
  double tolerance = 0.0;
  std::string relation;
  bool pass = false;
  std::string source;  // where the target comes from
};

/// Column data emitted as CSV and as a gnuplot figure.
struct DataTable {
  std::string name;
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::size_t x_column = 0;
  std::vector<std::size_t> y_columns;
};

namespace sources {
inline constexpr const char* kPublished = "published value";
inline constexpr const char* kOracle = "closed-form oracle";
inline constexpr const char* kDefinition = "definition";
inline constexpr const char* kCrossCheck = "independent cross-check";
}  // namespace sources

struct ScenarioReport {
  std::string scenario;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  nlohmann::ordered_json results;  // operation outputs, optional
  std::vector<ReportRow> rows;
  std::vector<DataTable> tables;
  std::vector<std::string> notes;
  std::vector<std::string> artifacts;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }

  ReportRow& near(std::string quantity, double value, double target, double tol, const char* source) {
    ReportRow r{std::move(quantity), value, {}, format_number(target), tol, "|value - target| <= tol",
                std::abs(value - target) <= tol, source};
    rows.push_back(std::move(r));
    return rows.back();
  }

  ReportRow& relative(std::string quantity, double value, double target, double rel_tol, const char* source) {
    ReportRow r{std::move(quantity), value, {}, format_number(target), rel_tol, "|value - target| <= tol |target|",
                std::abs(value - target) <= rel_tol * std::abs(target), source};
    rows.push_back(std::move(r));
    return rows.back();
  }

  ReportRow& at_most(std::string quantity, double value, double bound, const char* source) {
    ReportRow r{std::move(quantity), value, {}, "", bound, "value <= tol", value <= bound, source};
    rows.push_back(std::move(r));
    return rows.back();
  }

  ReportRow& below(std::string quantity, double value, double bound, const char* source) {
    ReportRow r{std::move(quantity), value, {}, "", bound, "value < tol", value < bound, source};
    rows.push_back(std::move(r));
    return rows.back();
  }

  ReportRow& above(std::string quantity, double value, double bound, const char* source) {
    ReportRow r{std::move(quantity), value, {}, "", bound, "value > tol", value > bound, source};
    rows.push_back(std::move(r));
    return rows.back();
  }

  ReportRow& holds(std::string quantity, bool ok, const char* source) {
    ReportRow r{std::move(quantity), ok ? 1.0 : 0.0, ok ? "true" : "false", "true", 0.0, "value is true", ok, source};
    rows.push_back(std::move(r));
    return rows.back();
  }

  ReportRow& symbolic(std::string quantity, double value, std::string text, std::string target, const char* source) {
    const bool ok = text == target;
    ReportRow r{std::move(quantity), value, std::move(text), std::move(target), 0.0, "value == target (exact)", ok, source};
    rows.push_back(std::move(r));
    return rows.back();
  }
};

namespace detail {

inline nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const ScenarioReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["parameters"] = r.parameters;
  j["all_pass"] = r.all_pass();
  if (!r.results.is_null()) j["results"] = r.results;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["quantity"] = row.quantity;
    o["value"] = detail::number_or_null(row.value);
    if (!row.value_text.empty()) o["value_text"] = row.value_text;
    o["target"] = row.target;
    o["tolerance"] = detail::number_or_null(row.tolerance);
    o["relation"] = row.relation;
    o["pass"] = row.pass;
    o["source"] = row.source;
    rows.push_back(std::move(o));
  }
  j["notes"] = r.notes;
  j["artifacts"] = r.artifacts;
  return j;
}

inline void write_report_csv(std::ostream& os, const ScenarioReport& r) {
  os << "quantity,value,value_text,target,tolerance,relation,pass,source\n";
  for (const auto& row : r.rows) {
    os << detail::csv_field(row.quantity) << ',' << format_number(row.value) << ',' << detail::csv_field(row.value_text)
       << ',' << detail::csv_field(row.target) << ',' << format_number(row.tolerance) << ','
       << detail::csv_field(row.relation) << ',' << (row.pass ? "PASS" : "FAIL") << ',' << detail::csv_field(row.source)
       << '\n';
  }
}

inline void write_table_csv(std::ostream& os, const DataTable& t, char sep = ',') {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? std::string(1, sep) : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? std::string(1, sep) : "") << format_number(row[i]);
    os << '\n';
  }
}

inline void write_gnuplot_script(std::ostream& os, const DataTable& t, const std::string& dat_name) {
  os << "set title \"" << t.title << "\"\n";
  os << "set xlabel \"" << t.columns.at(t.x_column) << "\"\n";
  os << "set key outside\n";
  os << "set terminal pngcairo size 900,600\n";
  os << "set output \"" << t.name << ".png\"\n";
  os << "plot ";
  for (std::size_t k = 0; k < t.y_columns.size(); ++k) {
    const std::size_t c = t.y_columns[k];
    os << (k ? ", \\\n     " : "") << '"' << dat_name << "\" using " << t.x_column + 1 << ':' << c + 1
       << " with linespoints title \"" << t.columns.at(c) << '"';
  }
  os << '\n';
}

struct EmitOptions {
  bool csv = true;
  bool json = true;
  bool gnuplot = true;
};

/// Writes the report and its tables into dir; artifact names are recorded
/// relative to dir.
inline void emit_report(ScenarioReport& r, const std::filesystem::path& dir, const EmitOptions& opt = {}) {
  std::filesystem::create_directories(dir);
  r.artifacts.clear();
  const std::string stem = r.scenario;
  for (const auto& t : r.tables) {
    if (opt.csv) {
      const std::string name = stem + "_" + t.name + ".csv";
      auto os = detail::open_output(dir / name);
      write_table_csv(os, t);
      r.artifacts.push_back(name);
    }
    if (opt.gnuplot && !t.y_columns.empty()) {
      const std::string dat = stem + "_" + t.name + ".dat";
      const std::string gp = stem + "_" + t.name + ".gp";
      {
        auto os = detail::open_output(dir / dat);
        os << "# ";
        write_table_csv(os, t, ' ');
      }
      {
        auto os = detail::open_output(dir / gp);
        write_gnuplot_script(os, t, dat);
      }
      r.artifacts.push_back(dat);
      r.artifacts.push_back(gp);
    }
  }
  if (opt.csv) {
    const std::string name = stem + "_report.csv";
    auto os = detail::open_output(dir / name);
    write_report_csv(os, r);
    r.artifacts.push_back(name);
  }
  if (opt.json) {
    const std::string name = stem + "_report.json";
    r.artifacts.push_back(name);
    auto os = detail::open_output(dir / name);
    os << report_to_json(r).dump(2) << '\n';
  }
}

/// Plain-text summary table, one line per row.
inline void print_summary(std::ostream& os, const ScenarioReport& r) {
  os << "scenario " << r.scenario << '\n';
  std::size_t width = 8;
  for (const auto& row : r.rows) width = std::max(width, row.quantity.size());
  for (const auto& row : r.rows) {
    std::string line = row.pass ? "  PASS  " : "  FAIL  ";
    line += row.quantity;
    line.append(width + 2 - row.quantity.size(), ' ');
    line += row.value_text.empty() ? format_number(row.value) : row.value_text;
    if (!row.target.empty()) line += "  target " + row.target;
    if (row.relation != "value is true" && row.relation != "value == target (exact)")
      line += "  tol " + format_number(row.tolerance);
    os << line << '\n';
  }
  os << (r.all_pass() ? "all rows pass" : "some rows FAIL") << '\n';
}

}  // namespace matherlab
