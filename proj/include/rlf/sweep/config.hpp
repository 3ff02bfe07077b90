#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../model.hpp"
#include "../teacher.hpp"

namespace rlf::sweep {

enum class Mode { Theory, Simulate, Spectrum, Validate };
enum class AxisScale { Linear, Log };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Theory: return "theory";
    case Mode::Simulate: return "simulate";
    case Mode::Spectrum: return "spectrum";
    case Mode::Validate: return "validate";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "theory") return Mode::Theory;
  if (s == "simulate") return Mode::Simulate;
  if (s == "spectrum") return Mode::Spectrum;
  if (s == "validate") return Mode::Validate;
  return std::nullopt;
}

/// One grid axis: a single value, an explicit list, or min/max/steps with a scale.
struct Axis {
  std::vector<double> values;
  AxisScale scale = AxisScale::Linear;
  bool is_range = false;
};

inline std::vector<double> axis_points(double lo, double hi, int steps, AxisScale scale) {
  std::vector<double> v(steps);
  for (int i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    v[i] = scale == AxisScale::Log ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  if (steps > 1) v.back() = hi;
  return v;
}

/// A parsed, validated experiment description.
struct SweepSpec {
  Mode mode = Mode::Theory;
  bool mode_from_file = false;  ///< the file named a mode explicitly
  Axis alpha_f, alpha_p;
  int m = 512;
  std::optional<int> m_test;
  double snr = 10.0;
  double lambda = 1e-6;
  TeacherKind teacher = TeacherKind::Linear;
  std::optional<std::int64_t> trials;  ///< unset: 1000, or 150000 on a phase boundary
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool svg = true;
  bool scaled = true;  ///< divide errors by sigma_y^2
  int x_points = 512;  ///< spectrum grid size
  int matrices = 0;    ///< empirical spectra per point in spectrum mode (0: none)
  int bins = 60;
  double min_boundary_distance = 0.25;  ///< validate: skip points closer to a phase boundary
  double z_max = 3.0;                   ///< validate: pass threshold on |z|

  /// True when alpha_f is a range with more than one value: a 2-D grid.
  bool is_grid() const { return alpha_f.values.size() > 1 && alpha_p.values.size() > 1; }

  TeacherActivation teacher_activation() const {
    switch (teacher) {
      case TeacherKind::ReLU: return TeacherActivation::relu();
      case TeacherKind::Tanh: return TeacherActivation::tanh();
      default: return TeacherActivation::linear();
    }
  }

  /// Figure convention: sigma_x2 = sigma_w2 = sigma_eps2 = 1, sigma_beta2 from snr.
  ModelConfig config_at(double alpha_f_value, double alpha_p_value) const {
    ModelConfig c = ModelConfig::from_snr(alpha_f_value, alpha_p_value, snr, teacher_activation());
    c.lambda = lambda;
    c.m = m;
    c.m_test = m_test;
    return c;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
  double out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ParseError(line, key + ": expected a number, got '" + v + "'");
  return out;
}

template <class Int>
Int parse_int(const std::string& v, int line, const std::string& key) {
  Int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ParseError(line, key + ": expected an integer, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(line, key + ": expected true or false, got '" + v + "'");
}

inline AxisScale parse_scale(const std::string& v, int line, const std::string& key) {
  if (v == "linear") return AxisScale::Linear;
  if (v == "log") return AxisScale::Log;
  throw ParseError(line, key + ": expected linear or log, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_double(trim(item), line, key));
  return out;
}

/// Raw values of one axis as read from the file, before validation.
struct RawAxis {
  std::optional<double> value, min, max;
  std::optional<std::vector<double>> values;
  std::optional<int> steps;
  AxisScale scale = AxisScale::Linear;

  void build(const std::string& name, Axis& out, std::vector<std::string>& errors) const {
    const bool range = min || max || steps;
    const int forms = static_cast<int>(value.has_value()) + static_cast<int>(values.has_value()) + (range ? 1 : 0);
    if (forms == 0) {
      errors.push_back("missing " + name + " (set " + name + ", " + name + "_values or " + name + "_min/_max/_steps)");
      return;
    }
    if (forms > 1) {
      errors.push_back(name + ": give only one of " + name + ", " + name + "_values, " + name + "_min/_max/_steps");
      return;
    }
    out.scale = scale;
    if (value) {
      out.values = {*value};
    } else if (values) {
      out.values = *values;
      if (out.values.empty()) errors.push_back(name + "_values is empty");
    } else {
      if (!min) errors.push_back("missing " + name + "_min");
      if (!max) errors.push_back("missing " + name + "_max");
      const int n = steps.value_or(0);
      if (!steps) errors.push_back("missing " + name + "_steps");
      if (steps && n < 1) errors.push_back(name + "_steps must be >= 1");
      if (!min || !max || n < 1) return;
      if (*min > *max) errors.push_back(name + "_min must not exceed " + name + "_max");
      out.is_range = true;
      if (*min > 0 && *max > 0 && *min <= *max) out.values = axis_points(*min, *max, n, scale);
      if (!(*min > 0) || !(*max > 0)) errors.push_back(name + " bounds must be > 0");
      return;
    }
    for (double v : out.values)
      if (!(v > 0) || !std::isfinite(v)) {
        errors.push_back(name + " values must be finite and > 0");
        break;
      }
  }
};

}  // namespace detail

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "mode", "alpha_f", "alpha_f_values", "alpha_f_min", "alpha_f_max", "alpha_f_steps", "alpha_f_scale",
      "alpha_p", "alpha_p_values", "alpha_p_min", "alpha_p_max", "alpha_p_steps", "alpha_p_scale",
      "m", "m_test", "snr", "lambda", "teacher", "trials", "seed", "out_dir", "svg", "scaled",
      "x_points", "matrices", "bins", "min_boundary_distance", "z_max"};
  return keys;
}

/**
 * @brief Parses flat `key = value` text. `#` starts a comment.
 *
 * Syntax problems, unknown or repeated keys and malformed values raise
 * ParseError with the line number. Semantic problems are collected and raised
 * together as one ValidationError.
 */
inline SweepSpec parse_config(std::istream& in) {
  SweepSpec spec;
  detail::RawAxis af, ap;
  std::vector<std::string> errors;
  std::set<std::string> seen;

  std::string raw;
  for (int line_no = 1; std::getline(in, raw); ++line_no) {
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key before '='");
    if (!known_keys().count(key)) throw ParseError(line_no, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(line_no, "duplicate key '" + key + "'");
    if (val.empty()) throw ParseError(line_no, key + ": missing value");

    using namespace detail;
    auto axis_key = [&](const std::string& prefix, RawAxis& a) {
      if (key == prefix) a.value = parse_double(val, line_no, key);
      else if (key == prefix + "_values") a.values = parse_list(val, line_no, key);
      else if (key == prefix + "_min") a.min = parse_double(val, line_no, key);
      else if (key == prefix + "_max") a.max = parse_double(val, line_no, key);
      else if (key == prefix + "_steps") a.steps = parse_int<int>(val, line_no, key);
      else if (key == prefix + "_scale") a.scale = parse_scale(val, line_no, key);
      else return false;
      return true;
    };
    if (axis_key("alpha_f", af) || axis_key("alpha_p", ap)) continue;
    if (key == "mode") {
      const auto m = parse_mode(val);
      if (!m) throw ParseError(line_no, "mode: expected theory, simulate, spectrum or validate");
      spec.mode = *m;
      spec.mode_from_file = true;
    } else if (key == "m") {
      spec.m = parse_int<int>(val, line_no, key);
    } else if (key == "m_test") {
      spec.m_test = parse_int<int>(val, line_no, key);
    } else if (key == "snr") {
      spec.snr = parse_double(val, line_no, key);
    } else if (key == "lambda") {
      spec.lambda = parse_double(val, line_no, key);
    } else if (key == "teacher") {
      if (val == "linear") spec.teacher = TeacherKind::Linear;
      else if (val == "relu") spec.teacher = TeacherKind::ReLU;
      else if (val == "tanh") spec.teacher = TeacherKind::Tanh;
      else throw ParseError(line_no, "teacher: expected linear, relu or tanh");
    } else if (key == "trials") {
      spec.trials = parse_int<std::int64_t>(val, line_no, key);
    } else if (key == "seed") {
      spec.seed = parse_int<std::uint64_t>(val, line_no, key);
    } else if (key == "out_dir") {
      spec.out_dir = val;
    } else if (key == "svg") {
      spec.svg = parse_bool(val, line_no, key);
    } else if (key == "scaled") {
      spec.scaled = parse_bool(val, line_no, key);
    } else if (key == "x_points") {
      spec.x_points = parse_int<int>(val, line_no, key);
    } else if (key == "matrices") {
      spec.matrices = parse_int<int>(val, line_no, key);
    } else if (key == "bins") {
      spec.bins = parse_int<int>(val, line_no, key);
    } else if (key == "min_boundary_distance") {
      spec.min_boundary_distance = parse_double(val, line_no, key);
    } else if (key == "z_max") {
      spec.z_max = parse_double(val, line_no, key);
    }
  }

  af.build("alpha_f", spec.alpha_f, errors);
  ap.build("alpha_p", spec.alpha_p, errors);
  if (spec.m < 1) errors.push_back("m must be >= 1");
  if (spec.m_test && *spec.m_test < 1) errors.push_back("m_test must be >= 1");
  if (!(spec.snr >= 0) || !std::isfinite(spec.snr)) errors.push_back("snr must be finite and >= 0");
  if (!(spec.lambda > 0) || !std::isfinite(spec.lambda)) errors.push_back("lambda must be finite and > 0");
  if (spec.trials && *spec.trials < 2) errors.push_back("trials must be >= 2");
  if (spec.x_points < 2) errors.push_back("x_points must be >= 2");
  if (spec.matrices < 0) errors.push_back("matrices must be >= 0");
  if (spec.bins < 1) errors.push_back("bins must be >= 1");
  if (!(spec.min_boundary_distance >= 0)) errors.push_back("min_boundary_distance must be >= 0");
  if (!(spec.z_max > 0)) errors.push_back("z_max must be > 0");
  if (spec.out_dir.empty()) errors.push_back("out_dir must not be empty");
  if (!errors.empty()) throw ValidationError(errors);
  return spec;
}

/// The subcommand decides the mode; a file naming a different one is an error.
inline void apply_mode(SweepSpec& spec, Mode subcommand) {
  if (spec.mode_from_file && spec.mode != subcommand)
    throw ValidationError({"config sets mode = " + to_string(spec.mode) + " but the subcommand is " +
                           to_string(subcommand)});
  spec.mode = subcommand;
}

inline SweepSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_config(in);
}

}  // namespace rlf::sweep
