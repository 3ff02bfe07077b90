#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../quantity.hpp"

namespace rlf::sweep {

inline constexpr const char* kCsvVersionLine = "# rlf csv v1";

/// Shortest decimal that parses back to the same double; "inf" for +infinity.
inline std::string format_double(double v) {
  if (std::isnan(v)) throw InvalidConfig("refusing to format NaN");
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InvalidConfig("float formatting failed");
  return std::string(buf, ptr);
}

inline std::string format_quantity(const Quantity& q) { return q.is_divergent() ? "inf" : format_double(q.value()); }

inline double parse_csv_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidConfig("bad CSV number '" + s + "'");
  return v;
}

/// Header line plus string cells; no field ever contains a comma or quote.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const {
    std::string out = std::string(kCsvVersionLine) + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return out;
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw InvalidConfig("CSV has no column '" + name + "'");
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline void write_csv(const std::string& path, const CsvTable& t) { write_text(path, t.to_string()); }

inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line != kCsvVersionLine) throw InvalidConfig("missing CSV version line");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw InvalidConfig("missing CSV header");
  t.columns = split(line);
  while (std::getline(in, line)) {
    auto cells = split(line);
    if (cells.size() != t.columns.size()) throw InvalidConfig("CSV row has the wrong number of fields");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_csv(in);
}

/// One row of an error-sweep CSV. Simulation fields are empty in theory mode.
struct CsvRow {
  double alpha_f = 0, alpha_p = 0;
  std::string quantity;
  Quantity theory;
  std::optional<double> sim_mean, sim_stderr;
  std::optional<std::int64_t> trials;
  std::optional<int> m, n_f, n_p;
};

inline const std::vector<std::string>& error_columns() {
  static const std::vector<std::string> cols = {"alpha_f", "alpha_p", "quantity", "theory", "sim_mean",
                                                "sim_stderr", "trials", "m", "n_f", "n_p"};
  return cols;
}

inline CsvTable to_table(const std::vector<CsvRow>& rows) {
  CsvTable t;
  t.columns = error_columns();
  auto opt = [](const auto& v) { return v ? format_double(static_cast<double>(*v)) : std::string(); };
  auto opt_int = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& r : rows)
    t.rows.push_back({format_double(r.alpha_f), format_double(r.alpha_p), r.quantity, format_quantity(r.theory),
                      opt(r.sim_mean), opt(r.sim_stderr), opt_int(r.trials), opt_int(r.m), opt_int(r.n_f),
                      opt_int(r.n_p)});
  return t;
}

inline std::vector<CsvRow> from_table(const CsvTable& t) {
  if (t.columns != error_columns()) throw InvalidConfig("not an error-sweep CSV");
  std::vector<CsvRow> out;
  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional(parse_csv_double(s)); };
  auto opt_int = [](const std::string& s) -> std::optional<std::int64_t> {
    if (s.empty()) return std::nullopt;
    return std::stoll(s);
  };
  for (const auto& c : t.rows) {
    CsvRow r;
    r.alpha_f = parse_csv_double(c[0]);
    r.alpha_p = parse_csv_double(c[1]);
    r.quantity = c[2];
    r.theory = c[3] == "inf" ? Quantity::divergent() : Quantity(parse_csv_double(c[3]));
    r.sim_mean = opt(c[4]);
    r.sim_stderr = opt(c[5]);
    r.trials = opt_int(c[6]);
    if (auto v = opt_int(c[7])) r.m = static_cast<int>(*v);
    if (auto v = opt_int(c[8])) r.n_f = static_cast<int>(*v);
    if (auto v = opt_int(c[9])) r.n_p = static_cast<int>(*v);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rlf::sweep
