#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "../simulator.hpp"
#include "../spectrum.hpp"
#include "../theory.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "svg.hpp"

namespace rlf::sweep {

inline constexpr std::array<const char*, 4> kQuantities = {"train", "test", "bias2", "variance"};

/// Runs f(0..n-1) on up to `threads` workers; results are in index order and
/// the exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, int threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  const int t = static_cast<int>(std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(n, 1)));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Euclidean distance from (alpha_f, alpha_p) to the three phase boundaries.
inline double boundary_distance(double f, double p) {
  auto seg = [](double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - ax - t * dx, py - ay - t * dy);
  };
  const double far = 1e300;
  const double d_p = f >= 1 ? std::abs(p - 1) : seg(f, p, 1, 1, far, 1);  // alpha_p = 1, alpha_f >= 1
  const double d_f = p >= 1 ? std::abs(f - 1) : seg(f, p, 1, 1, 1, far);  // alpha_f = 1, alpha_p >= 1
  const double d_d = seg(f, p, 0, 0, 1, 1);                               // alpha_f = alpha_p <= 1
  return std::min({d_p, d_f, d_d});
}

struct GridPoint {
  std::size_t index = 0;
  double alpha_f = 0, alpha_p = 0;
};

inline std::vector<GridPoint> grid_points(const SweepSpec& spec) {
  std::vector<GridPoint> pts;
  for (double f : spec.alpha_f.values)
    for (double p : spec.alpha_p.values) pts.push_back({pts.size(), f, p});
  return pts;
}

struct PointResult {
  GridPoint point;
  std::array<Quantity, 4> theory;  ///< train, test, bias2, variance
  std::optional<SimEstimate> sim;
};

/// Closed-form errors to leading order at the configured lambda, optionally
/// divided by sigma_y^2.
inline std::array<Quantity, 4> theory_errors(const ModelConfig& cfg, bool scaled) {
  const TheoryResult r = closed_form(cfg);
  const ErrorValues e = errors_at_lambda(r, cfg.lambda_bar());
  std::array<Quantity, 4> out = {e.train, e.test, e.bias2, e.variance};
  if (scaled) {
    const double sy2 = cfg.sigma_beta2 * cfg.sigma_x2 + sigma_dy2(cfg) + cfg.sigma_eps2;
    for (auto& q : out) q /= sy2;
  }
  return out;
}

inline std::int64_t trials_for(const SweepSpec& spec, const ModelConfig& cfg) {
  return spec.trials.value_or(default_trials(cfg));
}

/// Simulate at the realized ratios and compare with theory there.
inline PointResult simulate_point(const SweepSpec& spec, const GridPoint& gp, int threads) {
  const ModelConfig requested = spec.config_at(gp.alpha_f, gp.alpha_p);
  const ModelConfig cfg = realized(requested);
  PointResult r{gp, theory_errors(cfg, spec.scaled), std::nullopt};
  SimEstimate e = estimate(cfg, trials_for(spec, requested), trial_seed(spec.seed, gp.index), threads);
  r.sim = spec.scaled ? e.scaled_by_label_variance() : e;
  return r;
}

struct ValidationRow {
  double alpha_f = 0, alpha_p = 0;
  std::string quantity;
  double theory = 0, mean = 0, std_error = 0, z = 0;
  bool pass = true;
};

struct SweepOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
  std::vector<ValidationRow> validation;
  std::size_t skipped_points = 0;  ///< validate: points too close to a boundary
};

namespace detail {

inline std::vector<CsvRow> error_rows(const std::vector<PointResult>& results, std::size_t q) {
  std::vector<CsvRow> rows;
  for (const auto& r : results) {
    CsvRow row;
    row.alpha_f = r.point.alpha_f;
    row.alpha_p = r.point.alpha_p;
    row.quantity = kQuantities[q];
    row.theory = r.theory[q];
    if (r.sim) {
      const Stat* st[] = {&r.sim->train, &r.sim->test, &r.sim->bias2, &r.sim->variance};
      row.sim_mean = st[q]->mean;
      row.sim_stderr = st[q]->std_error;
      row.trials = r.sim->trials;
      row.m = r.sim->dims.m;
      row.n_f = r.sim->dims.n_f;
      row.n_p = r.sim->dims.n_p;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double as_double(const Quantity& q) { return q.is_divergent() ? std::numeric_limits<double>::infinity() : q.value(); }

inline const char* series_color(std::size_t i) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[i % 6];
}

/// Line plot of one quantity against alpha_p, one series per alpha_f value,
/// with a dense closed-form curve and the sampled points.
inline std::string error_line_plot(const SweepSpec& spec, const std::vector<PointResult>& results, std::size_t q) {
  svg::LinePlot plot;
  plot.title = std::string(kQuantities[q]) + (spec.scaled ? " error / sigma_y^2" : " error");
  if (q == 2) plot.title = spec.scaled ? "bias^2 / sigma_y^2" : "bias^2";
  if (q == 3) plot.title = spec.scaled ? "variance / sigma_y^2" : "variance";
  plot.x_label = "alpha_p = N_p / M";
  plot.y_label = kQuantities[q];
  plot.log_x = spec.alpha_p.scale == AxisScale::Log || spec.alpha_p.values.size() > 1;
  const auto [pmin, pmax] = std::minmax_element(spec.alpha_p.values.begin(), spec.alpha_p.values.end());
  plot.log_y = q != 0;  // train error stays bounded; the others diverge on boundaries
  std::vector<double> seen;
  for (std::size_t k = 0; k < spec.alpha_f.values.size(); ++k) {
    const double f = spec.alpha_f.values[k];
    svg::Series line;
    line.label = "theory a_f=" + svg::detail::label_num(f);
    line.color = series_color(k);
    constexpr int kDense = 400;
    for (double p : axis_points(*pmin, *pmax, kDense, plot.log_x ? AxisScale::Log : AxisScale::Linear)) {
      line.x.push_back(p);
      line.y.push_back(as_double(theory_errors(spec.config_at(f, p), spec.scaled)[q]));
    }
    svg::Series pts;
    pts.label = "sim a_f=" + svg::detail::label_num(f);
    pts.markers = true;
    pts.color = series_color(k);
    for (const auto& r : results) {
      if (r.point.alpha_f != f) continue;
      const double t = as_double(r.theory[q]);
      if (std::isfinite(t)) seen.push_back(t);
      if (!r.sim) continue;
      const Stat* st[] = {&r.sim->train, &r.sim->test, &r.sim->bias2, &r.sim->variance};
      pts.x.push_back(r.point.alpha_p);
      pts.y.push_back(st[q]->mean);
      pts.err.push_back(st[q]->std_error);
      seen.push_back(st[q]->mean);
    }
    plot.series.push_back(std::move(line));
    if (!pts.x.empty()) plot.series.push_back(std::move(pts));
    if (f >= 1) plot.vlines.push_back(1.0);
    else plot.vlines.push_back(f);
  }
  std::sort(plot.vlines.begin(), plot.vlines.end());
  plot.vlines.erase(std::unique(plot.vlines.begin(), plot.vlines.end()), plot.vlines.end());
  if (plot.log_y) std::erase_if(seen, [](double v) { return !(v > 0); });
  if (!seen.empty()) {
    std::sort(seen.begin(), seen.end());
    const double median = seen[seen.size() / 2];
    if (plot.log_y) {
      plot.y_min = 0.5 * seen.front();
      plot.y_max = std::min(2.0 * seen.back(), 1e3 * median);
    } else {
      plot.y_min = std::min(0.0, seen.front());
      plot.y_max = 1.2 * seen.back() + (seen.back() == 0 ? 1.0 : 0.0);
    }
  }
  return svg::render(plot);
}

inline std::string error_heatmap(const SweepSpec& spec, const std::vector<PointResult>& results, std::size_t q) {
  svg::Heatmap h;
  const bool sim = std::any_of(results.begin(), results.end(), [](const auto& r) { return r.sim.has_value(); });
  h.title = std::string(sim ? "simulated " : "closed-form ") + kQuantities[q] + (spec.scaled ? " / sigma_y^2" : "");
  h.x_label = "alpha_p";
  h.y_label = "alpha_f";
  h.xs = spec.alpha_p.values;
  h.ys = spec.alpha_f.values;
  h.log_x = spec.alpha_p.scale == AxisScale::Log;
  h.log_y = spec.alpha_f.scale == AxisScale::Log;
  h.log_z = true;
  h.z.assign(h.ys.size(), std::vector<double>(h.xs.size(), std::nan("")));
  const std::size_t np = h.xs.size();
  for (const auto& r : results) {
    double v = as_double(r.theory[q]);
    if (r.sim) {
      const Stat* st[] = {&r.sim->train, &r.sim->test, &r.sim->bias2, &r.sim->variance};
      v = st[q]->mean;
    }
    h.z[r.point.index / np][r.point.index % np] = v;
  }
  return svg::render(h);
}

inline std::string path_in(const SweepSpec& spec, const std::string& name) {
  return (std::filesystem::path(spec.out_dir) / name).string();
}

inline void prepare_out_dir(const SweepSpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec || !std::filesystem::is_directory(spec.out_dir))
    throw IoError("cannot create output directory '" + spec.out_dir + "'");
}

inline void write_error_outputs(const SweepSpec& spec, const std::vector<PointResult>& results, SweepOutcome& out) {
  const std::string prefix = to_string(spec.mode) + "_";
  for (std::size_t q = 0; q < kQuantities.size(); ++q) {
    const std::string csv = path_in(spec, prefix + kQuantities[q] + ".csv");
    write_csv(csv, to_table(error_rows(results, q)));
    out.files.push_back(csv);
    if (!spec.svg) continue;
    const std::string svg_path = path_in(spec, prefix + kQuantities[q] + ".svg");
    const bool heat = spec.alpha_f.is_range && spec.is_grid();
    write_text(svg_path, heat ? error_heatmap(spec, results, q) : error_line_plot(spec, results, q));
    out.files.push_back(svg_path);
  }
}

inline std::string point_tag(double f, double p) {
  return "af" + format_double(f) + "_ap" + format_double(p);
}

}  // namespace detail

/// Spectrum-mode result for one point.
struct SpectrumPoint {
  GridPoint point;
  SpectrumResult analytic;
  std::optional<EmpiricalSpectrum> empirical;
  std::vector<double> bin_theory;  ///< bin-averaged analytic density at the realized ratios
};

inline SpectrumPoint spectrum_point(const SweepSpec& spec, const GridPoint& gp) {
  const ModelConfig cfg = spec.config_at(gp.alpha_f, gp.alpha_p);
  SpectrumPoint sp{gp, spectral_density(cfg, SpectrumGrid{spec.x_points, std::nullopt}), std::nullopt, {}};
  if (spec.matrices > 0) {
    sp.empirical = empirical_spectrum(cfg, spec.matrices, trial_seed(spec.seed, gp.index), spec.bins);
    const ModelConfig r = realized(cfg);
    const SupportEdges e = support_edges(r);
    const auto& edges = sp.empirical->bin_edges;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
      sp.bin_theory.push_back(bulk_mass_between(r, e, edges[i], edges[i + 1]) / (edges[i + 1] - edges[i]));
  }
  return sp;
}

/**
 * @brief Executes a validated spec and writes its files into spec.out_dir.
 *
 * Grid points run on `threads` workers (simulation splits the remaining
 * threads over trials); results are ordered by grid index before a single
 * writer emits them, so output bytes do not depend on the thread count.
 */
inline SweepOutcome run_sweep(const SweepSpec& spec, int threads = 1, std::ostream* log = nullptr) {
  detail::prepare_out_dir(spec);
  SweepOutcome out;
  const auto points = grid_points(spec);
  threads = std::max(1, threads);

  switch (spec.mode) {
    case Mode::Theory: {
      const auto results = parallel_map(points.size(), threads, [&](std::size_t i) {
        const auto& gp = points[i];
        return PointResult{gp, theory_errors(spec.config_at(gp.alpha_f, gp.alpha_p), spec.scaled), std::nullopt};
      });
      detail::write_error_outputs(spec, results, out);
      break;
    }
    case Mode::Simulate:
    case Mode::Validate: {
      std::vector<GridPoint> chosen;
      for (const auto& gp : points) {
        if (spec.mode == Mode::Validate && boundary_distance(gp.alpha_f, gp.alpha_p) < spec.min_boundary_distance) {
          ++out.skipped_points;
          continue;
        }
        chosen.push_back(gp);
      }
      const int outer = static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(chosen.size(), 1)));
      const int inner = std::max(1, threads / outer);
      std::mutex log_mu;
      const auto results = parallel_map(chosen.size(), outer, [&](std::size_t i) {
        auto r = simulate_point(spec, chosen[i], inner);
        if (log) {
          std::lock_guard lock(log_mu);
          *log << "  point alpha_f=" << chosen[i].alpha_f << " alpha_p=" << chosen[i].alpha_p << " done ("
               << r.sim->trials << " trials)\n";
        }
        return r;
      });
      detail::write_error_outputs(spec, results, out);
      if (spec.mode == Mode::Validate) {
        CsvTable t;
        t.columns = {"alpha_f", "alpha_p", "quantity", "theory", "sim_mean", "sim_stderr", "z"};
        for (const auto& r : results) {
          const Stat* st[] = {&r.sim->train, &r.sim->test, &r.sim->bias2, &r.sim->variance};
          for (std::size_t q = 0; q < kQuantities.size(); ++q) {
            ValidationRow v;
            v.alpha_f = r.point.alpha_f;
            v.alpha_p = r.point.alpha_p;
            v.quantity = kQuantities[q];
            v.theory = detail::as_double(r.theory[q]);
            v.mean = st[q]->mean;
            v.std_error = st[q]->std_error;
            const double diff = v.mean - v.theory;
            v.z = v.std_error > 0 ? diff / v.std_error : (diff == 0 ? 0.0 : std::copysign(INFINITY, diff));
            v.pass = std::abs(v.z) <= spec.z_max;
            if (!v.pass) out.exit_code = 3;
            t.rows.push_back({format_double(v.alpha_f), format_double(v.alpha_p), v.quantity,
                              format_double(v.theory), format_double(v.mean), format_double(v.std_error),
                              format_double(v.z)});
            out.validation.push_back(v);
          }
        }
        const std::string path = detail::path_in(spec, "validate_z.csv");
        write_csv(path, t);
        out.files.push_back(path);
      }
      break;
    }
    case Mode::Spectrum: {
      const auto results = parallel_map(points.size(), threads, [&](std::size_t i) { return spectrum_point(spec, points[i]); });
      CsvTable dens, summary, hist;
      dens.columns = {"alpha_f", "alpha_p", "x", "rho", "in_support"};
      summary.columns = {"alpha_f", "alpha_p", "edge_min", "edge_max", "f_zero", "bulk_mass", "first_moment"};
      hist.columns = {"alpha_f", "alpha_p", "bin_lo", "bin_hi", "empirical", "theory", "zero_fraction"};
      for (const auto& sp : results) {
        const auto f = format_double(sp.point.alpha_f), p = format_double(sp.point.alpha_p);
        const auto& a = sp.analytic;
        for (std::size_t i = 0; i < a.xs.size(); ++i)
          dens.rows.push_back({f, p, format_double(a.xs[i]), format_double(a.rho[i]), a.in_support[i] ? "1" : "0"});
        summary.rows.push_back({f, p, format_double(a.edge_min), format_double(a.edge_max), format_double(a.f_zero),
                                format_double(a.bulk_mass), format_double(a.first_moment)});
        if (sp.empirical) {
          const auto& e = *sp.empirical;
          for (std::size_t i = 0; i < e.density.size(); ++i)
            hist.rows.push_back({f, p, format_double(e.bin_edges[i]), format_double(e.bin_edges[i + 1]),
                                 format_double(e.density[i]), format_double(sp.bin_theory[i]),
                                 format_double(e.zero_fraction)});
        }
        if (spec.svg) {
          svg::LinePlot plot;
          plot.title = "eigenvalue density, alpha_f=" + svg::detail::label_num(sp.point.alpha_f) +
                       ", alpha_p=" + svg::detail::label_num(sp.point.alpha_p) +
                       ", f_zero=" + svg::detail::label_num(a.f_zero);
          plot.x_label = "eigenvalue x";
          plot.y_label = "rho(x)";
          svg::Series line{"analytic", a.xs, a.rho, {}, false, "#1f77b4"};
          plot.series.push_back(line);
          if (sp.empirical) {
            svg::Series pts{"empirical", {}, sp.empirical->density, {}, true, "#d62728"};
            const auto& be = sp.empirical->bin_edges;
            for (std::size_t i = 0; i + 1 < be.size(); ++i) pts.x.push_back(0.5 * (be[i] + be[i + 1]));
            plot.series.push_back(pts);
          }
          double peak = 0;
          for (double v : a.rho) peak = std::max(peak, v);
          if (peak > 0) {
            plot.y_min = 0.0;
            plot.y_max = 1.15 * peak;
          }
          const std::string path =
              detail::path_in(spec, "spectrum_" + detail::point_tag(sp.point.alpha_f, sp.point.alpha_p) + ".svg");
          write_text(path, svg::render(plot));
          out.files.push_back(path);
        }
      }
      for (auto [name, table] : {std::pair{"spectrum_density.csv", &dens}, {"spectrum_summary.csv", &summary}}) {
        const std::string path = detail::path_in(spec, name);
        write_csv(path, *table);
        out.files.push_back(path);
      }
      if (spec.matrices > 0) {
        const std::string path = detail::path_in(spec, "spectrum_histogram.csv");
        write_csv(path, hist);
        out.files.push_back(path);
      }
      break;
    }
  }
  return out;
}

}  // namespace rlf::sweep
