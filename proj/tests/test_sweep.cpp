#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "oracles.hpp"
#include "rlf/sweep/sweep.hpp"

namespace fs = std::filesystem;
using namespace rlf::sweep;

namespace {

SweepSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Fresh empty directory under the system temp dir.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() / ("rlf_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST(Config, DefaultsFile) {
  const SweepSpec s = load_config(std::string(RLF_SOURCE_DIR) + "/configs/defaults.conf");
  EXPECT_EQ(s.m, 512);
  EXPECT_EQ(s.snr, 10.0);
  EXPECT_EQ(s.lambda, 1e-6);
  // The same values apply when the keys are omitted.
  const SweepSpec bare = parse("alpha_f = 1\nalpha_p = 2\n");
  EXPECT_EQ(bare.m, 512);
  EXPECT_EQ(bare.snr, 10.0);
  EXPECT_EQ(bare.lambda, 1e-6);
  EXPECT_EQ(bare.mode, Mode::Theory);
  EXPECT_FALSE(bare.mode_from_file);
}

TEST(Config, MissingAlphaFNamesTheKey) {
  try {
    parse("alpha_p_min = 0.1\nalpha_p_max = 10\nalpha_p_steps = 5\n");
    FAIL() << "expected ValidationError";
  } catch (const rlf::ValidationError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_NE(e.violations()[0].find("alpha_f"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("missing alpha_f"), std::string::npos);
  }
}

TEST(Config, ValidationListsEveryViolation) {
  try {
    parse("alpha_f = -1\nalpha_p = 2\nm = 0\nlambda = 0\ntrials = 1\n");
    FAIL() << "expected ValidationError";
  } catch (const rlf::ValidationError& e) {
    EXPECT_EQ(e.violations().size(), 4u);
  }
}

TEST(Config, ParseErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const rlf::ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("alpha_f = 1\n# comment\n\nalpha_p 2\n"), 4);           // no '='
  EXPECT_EQ(line_of("alpha_f = 1\nalpha_p = 2\nbogus = 3\n"), 3);            // unknown key
  EXPECT_EQ(line_of("alpha_f = 1\nalpha_f = 2\n"), 2);                       // duplicate
  EXPECT_EQ(line_of("alpha_f = 1\nalpha_p = 2x\n"), 2);                      // bad number
  EXPECT_EQ(line_of("alpha_f = 1\nalpha_p = 2\nm = 1.5\n"), 3);              // not an integer
  EXPECT_EQ(line_of("alpha_f = 1\nalpha_p = 2\nteacher = sigmoid\n"), 3);    // bad enum
  EXPECT_EQ(line_of("alpha_f = 1\nalpha_p = 2\nmode = =\n"), 3);
  EXPECT_EQ(line_of("alpha_f = 1\nalpha_p = 2\nsvg = maybe\n"), 3);
}

TEST(Config, AxisForms) {
  const SweepSpec s = parse("alpha_f_values = 0.5, 4\nalpha_p_min = 0.1\nalpha_p_max = 10\nalpha_p_steps = 3\n"
                            "alpha_p_scale = log\n");
  EXPECT_EQ(s.alpha_f.values, (std::vector<double>{0.5, 4}));
  ASSERT_EQ(s.alpha_p.values.size(), 3u);
  EXPECT_DOUBLE_EQ(s.alpha_p.values[0], 0.1);
  EXPECT_NEAR(s.alpha_p.values[1], 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.alpha_p.values[2], 10.0);
  EXPECT_TRUE(s.is_grid());
  EXPECT_THROW(parse("alpha_f = 1\nalpha_f_values = 2\nalpha_p = 1\n"), rlf::ValidationError);
  EXPECT_THROW(parse("alpha_f = 1\nalpha_p_min = 1\nalpha_p_max = 2\n"), rlf::ValidationError);
}

TEST(Config, SnrConvention) {
  for (auto kind : {rlf::TeacherKind::Linear, rlf::TeacherKind::Tanh, rlf::TeacherKind::ReLU}) {
    SweepSpec s = parse("alpha_f = 0.5\nalpha_p = 2\nsnr = 7\n");
    s.teacher = kind;
    const rlf::ModelConfig c = s.config_at(0.5, 2.0);
    EXPECT_EQ(c.sigma_x2, 1.0);
    EXPECT_EQ(c.sigma_w2, 1.0);
    EXPECT_EQ(c.sigma_eps2, 1.0);
    EXPECT_NEAR(c.sigma_beta2 * c.sigma_x2 + rlf::sigma_dy2(c), 7.0 * c.sigma_eps2, 1e-12);
  }
  // Independent check through the label generator: Var(y*) over many rows is
  // the signal power, which the convention sets to snr.
  SweepSpec s = parse("alpha_f = 0.015625\nalpha_p = 1\nsnr = 7\nteacher = tanh\nm = 4096\n");
  const rlf::ModelConfig c = s.config_at(0.015625, 1.0);
  const auto inst = rlf::sample_instance(c, 3);
  const double beta_scale = inst.beta.squaredNorm() / inst.beta.size() / c.sigma_beta2;
  const double var = inst.test.y_star.squaredNorm() / inst.test.y_star.size() / beta_scale;
  EXPECT_NEAR(var, 7.0, 0.7);
}

TEST(Config, ModeConflict) {
  SweepSpec s = parse("mode = theory\nalpha_f = 1\nalpha_p = 2\n");
  EXPECT_NO_THROW(apply_mode(s, Mode::Theory));
  EXPECT_THROW(apply_mode(s, Mode::Simulate), rlf::ValidationError);
  SweepSpec t = parse("alpha_f = 1\nalpha_p = 2\n");
  apply_mode(t, Mode::Spectrum);
  EXPECT_EQ(t.mode, Mode::Spectrum);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/dir/x.conf"), rlf::IoError);
}

TEST(Csv, DoubleRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 20000) {
    const double v = std::bit_cast<double>(bits(rng));
    if (!std::isfinite(v)) continue;
    const std::string s = format_double(v);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(parse_csv_double(s)), std::bit_cast<std::uint64_t>(v)) << s;
    ++checked;
  }
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 5e-324, 1.7976931348623157e308}) {
    EXPECT_EQ(parse_csv_double(format_double(v)), v);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    EXPECT_EQ(parse_csv_double(format_double(v)), std::strtod(buf, nullptr));
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isinf(parse_csv_double("inf")));
  EXPECT_THROW(format_double(std::nan("")), rlf::InvalidConfig);
  EXPECT_THROW(parse_csv_double("1.0abc"), rlf::InvalidConfig);
}

TEST(Csv, TableRoundTrip) {
  std::vector<CsvRow> rows(3);
  rows[0] = {0.5, 0.125, "test", rlf::Quantity(1.0 / 3.0), 0.2 + 0.1, 1e-17, 1000, 512, 256, 64};
  rows[1] = {0.5, 0.5, "test", rlf::Quantity::divergent(), std::nullopt, std::nullopt, std::nullopt,
             std::nullopt, std::nullopt, std::nullopt};
  rows[2] = {4, 8, "variance", rlf::Quantity(-0.0), 7.25, 0.0, 2, 1, 4, 8};
  const CsvTable t = to_table(rows);
  std::istringstream in(t.to_string());
  const auto back = from_table(parse_csv(in));
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].alpha_f, rows[i].alpha_f);
    EXPECT_EQ(back[i].alpha_p, rows[i].alpha_p);
    EXPECT_EQ(back[i].quantity, rows[i].quantity);
    EXPECT_EQ(back[i].theory.is_divergent(), rows[i].theory.is_divergent());
    if (!rows[i].theory.is_divergent()) EXPECT_EQ(back[i].theory.value(), rows[i].theory.value());
    EXPECT_EQ(back[i].sim_mean, rows[i].sim_mean);
    EXPECT_EQ(back[i].sim_stderr, rows[i].sim_stderr);
    EXPECT_EQ(back[i].trials, rows[i].trials);
    EXPECT_EQ(back[i].m, rows[i].m);
    EXPECT_EQ(back[i].n_f, rows[i].n_f);
    EXPECT_EQ(back[i].n_p, rows[i].n_p);
  }
  EXPECT_EQ(t.to_string().substr(0, t.to_string().find('\n')), kCsvVersionLine);
}

TEST(Csv, RejectsMalformed) {
  std::istringstream no_version("alpha_f\n1\n");
  EXPECT_THROW(parse_csv(no_version), rlf::InvalidConfig);
  std::istringstream ragged(std::string(kCsvVersionLine) + "\na,b\n1\n");
  EXPECT_THROW(parse_csv(ragged), rlf::InvalidConfig);
}

TEST(Sweep, BoundaryDistance) {
  EXPECT_DOUBLE_EQ(boundary_distance(4, 1), 0.0);
  EXPECT_DOUBLE_EQ(boundary_distance(1, 4), 0.0);
  EXPECT_NEAR(boundary_distance(0.3, 0.3), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(boundary_distance(4, 2), 1.0);
  EXPECT_DOUBLE_EQ(boundary_distance(0.5, 2), 0.5);
  EXPECT_NEAR(boundary_distance(0.5, 0.1), 0.4 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(boundary_distance(2, 0.5), 0.5, 1e-15);
  // Below the corner the nearest boundary point is the corner or the diagonal.
  EXPECT_NEAR(boundary_distance(0.1, 3), 0.9, 1e-15);
}

TEST(Sweep, ParallelMapOrderAndErrors) {
  const auto sq = parallel_map(50, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < sq.size(); ++i) EXPECT_EQ(sq[i], i * i);
  try {
    parallel_map(40, 3, [](std::size_t i) -> int {
      if (i == 7 || i == 31) throw std::runtime_error("fail " + std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "fail 7");
  }
}

TEST(Sweep, TheoryCutHundredRows) {
  TempDir dir("cut");
  SweepSpec s = parse("alpha_f = 0.5\nalpha_p_min = 0.1\nalpha_p_max = 10\nalpha_p_steps = 100\nalpha_p_scale = log\n");
  s.out_dir = dir.str();
  const SweepOutcome out = run_sweep(s, 2);
  EXPECT_EQ(out.exit_code, 0);
  for (const char* q : kQuantities) {
    const CsvTable t = read_csv((dir.path / (std::string("theory_") + q + ".csv")).string());
    EXPECT_EQ(t.columns, error_columns());
    ASSERT_EQ(t.rows.size(), 100u);
    for (const auto& r : t.rows) {
      EXPECT_EQ(r[2], q);
      EXPECT_TRUE(r[4].empty() && r[6].empty());
    }
    EXPECT_TRUE(fs::exists(dir.path / (std::string("theory_") + q + ".svg")));
  }
}

TEST(Sweep, TheoryValuesMatchIndependentFormulas) {
  // Leading-order errors from the three-branch formulas, divided by sigma_y^2.
  TempDir dir("oracle");
  SweepSpec s = parse("alpha_f_values = 0.25, 0.5, 2, 4\nalpha_p_values = 0.1, 0.3, 1.7, 6\nlambda = 1e-12\n");
  s.out_dir = dir.str();
  run_sweep(s, 1);
  const double sy2 = 10.0 + 1.0;
  for (std::size_t q = 0; q < 4; ++q) {
    const auto rows = from_table(read_csv((dir.path / (std::string("theory_") + kQuantities[q] + ".csv")).string()));
    ASSERT_EQ(rows.size(), 16u);
    for (const auto& r : rows) {
      const auto o = oracle::main_text_errors(r.alpha_f, r.alpha_p, 10.0, 1.0, 1.0, 0.0);
      const double want[] = {o.train, o.test, o.bias2, o.variance};
      EXPECT_NEAR(r.theory.value(), want[q] / sy2, 1e-9 * std::max(1.0, want[q])) << r.alpha_f << " " << r.alpha_p;
    }
  }
}

TEST(Sweep, InfExactlyWhereDivergent) {
  TempDir dir("inf");
  SweepSpec s = parse("alpha_f_values = 0.5, 1, 4\nalpha_p_values = 0.25, 0.5, 1, 2\n");
  s.out_dir = dir.str();
  run_sweep(s, 1);
  int infs = 0;
  for (std::size_t q = 0; q < 4; ++q) {
    const auto rows = from_table(read_csv((dir.path / (std::string("theory_") + kQuantities[q] + ".csv")).string()));
    for (const auto& r : rows) {
      const auto e = rlf::errors_at_lambda(rlf::closed_form(s.config_at(r.alpha_f, r.alpha_p)), 1e-6);
      const rlf::Quantity want[] = {e.train, e.test, e.bias2, e.variance};
      EXPECT_EQ(r.theory.is_divergent(), want[q].is_divergent()) << kQuantities[q] << " " << r.alpha_f << " " << r.alpha_p;
      infs += r.theory.is_divergent();
    }
  }
  // test and variance diverge at (1, 1), (1, 2) and (4, 1); the diagonal
  // alpha_f = alpha_p < 1 is only a kink.
  EXPECT_EQ(infs, 6);
  const std::string test_csv = slurp(dir.path / "theory_test.csv");
  EXPECT_NE(test_csv.find("0.5,0.5,test," + format_double(2.0 / 11.0) + ","), std::string::npos);
  EXPECT_NE(test_csv.find("1,2,test,inf,"), std::string::npos);
  EXPECT_NE(test_csv.find("4,1,test,inf,"), std::string::npos);
  EXPECT_EQ(test_csv.find("nan"), std::string::npos);
}

TEST(Sweep, IdempotentAndThreadIndependent) {
  TempDir a("idem_a"), b("idem_b");
  const std::string text =
      "mode = simulate\nalpha_f_values = 0.5, 2\nalpha_p_values = 0.25, 3\nm = 32\ntrials = 20\nseed = 9\n";
  SweepSpec s = parse(text);
  s.out_dir = a.str();
  run_sweep(s, 1);
  const auto first = snapshot(a.path);
  run_sweep(s, 1);
  EXPECT_EQ(snapshot(a.path), first);
  s.out_dir = b.str();
  run_sweep(s, 3);
  EXPECT_EQ(snapshot(b.path), first);
  EXPECT_EQ(first.size(), 8u);

  // A different seed changes the simulated columns.
  s.seed = 10;
  run_sweep(s, 1);
  EXPECT_NE(snapshot(b.path).at("simulate_test.csv"), first.at("simulate_test.csv"));
}

TEST(Sweep, SimulateRowsCarryRealizedDimensions) {
  TempDir dir("dims");
  SweepSpec s = parse("mode = simulate\nalpha_f = 0.5\nalpha_p_values = 0.3, 3\nm = 40\ntrials = 10\n");
  s.out_dir = dir.str();
  s.svg = false;
  const SweepOutcome out = run_sweep(s, 1);
  EXPECT_EQ(out.files.size(), 4u);
  const auto rows = from_table(read_csv((dir.path / "simulate_train.csv").string()));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].m, 40);
  EXPECT_EQ(rows[0].n_f, 20);
  EXPECT_EQ(rows[0].n_p, 12);  // round(0.3 * 40)
  EXPECT_EQ(rows[1].n_p, 120);
  EXPECT_EQ(rows[0].trials, 10);
  // Theory is evaluated at the realized ratio 12/40, not the requested one.
  const rlf::ModelConfig c = rlf::realized(s.config_at(0.5, 0.3));
  EXPECT_EQ(c.alpha_p, 12.0 / 40.0);
  const double want = (rlf::errors_at_lambda(rlf::closed_form(c), c.lambda_bar()).train / 11.0).value();
  EXPECT_EQ(rows[0].theory.value(), want);
  EXPECT_TRUE(rows[0].sim_mean && rows[0].sim_stderr && *rows[0].sim_stderr > 0);
}

TEST(Sweep, SpectrumPassThrough) {
  TempDir dir("spec");
  SweepSpec s = parse("mode = spectrum\nalpha_f = 4\nalpha_p = 2\nx_points = 64\n");
  s.out_dir = dir.str();
  run_sweep(s, 1);
  const rlf::ModelConfig c = s.config_at(4, 2);
  const auto ref = rlf::spectral_density(c, rlf::SpectrumGrid{64, std::nullopt});
  const CsvTable d = read_csv((dir.path / "spectrum_density.csv").string());
  ASSERT_EQ(d.rows.size(), 64u);
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    EXPECT_EQ(d.rows[i][2], format_double(ref.xs[i]));
    EXPECT_EQ(d.rows[i][3], format_double(ref.rho[i]));
    EXPECT_EQ(d.rows[i][4], ref.in_support[i] ? "1" : "0");
  }
  const CsvTable sm = read_csv((dir.path / "spectrum_summary.csv").string());
  ASSERT_EQ(sm.rows.size(), 1u);
  const auto edges = rlf::support_edges(c);
  EXPECT_EQ(parse_csv_double(sm.rows[0][sm.column("edge_min")]), edges.edge_min);
  EXPECT_EQ(parse_csv_double(sm.rows[0][sm.column("edge_max")]), edges.edge_max);
  // Zero-mode weight against the closed-form nullity max(0, 1 - a_f/a_p, 1 - 1/a_p).
  EXPECT_NEAR(parse_csv_double(sm.rows[0][sm.column("f_zero")]), 0.5, 1e-12);
  EXPECT_NEAR(parse_csv_double(sm.rows[0][sm.column("bulk_mass")]) + 0.5, 1.0, 1e-3);
  EXPECT_FALSE(fs::exists(dir.path / "spectrum_histogram.csv"));
  EXPECT_TRUE(fs::exists(dir.path / "spectrum_af4_ap2.svg"));
}

TEST(Sweep, SpectrumHistogram) {
  TempDir dir("hist");
  SweepSpec s = parse("mode = spectrum\nalpha_f = 4\nalpha_p = 2\nm = 256\nmatrices = 2\nbins = 20\nx_points = 32\n");
  s.out_dir = dir.str();
  run_sweep(s, 1);
  const CsvTable h = read_csv((dir.path / "spectrum_histogram.csv").string());
  ASSERT_EQ(h.rows.size(), 20u);
  double mass = 0, theory_mass = 0;
  for (const auto& r : h.rows) {
    const double w = parse_csv_double(r[3]) - parse_csv_double(r[2]);
    mass += w * parse_csv_double(r[4]);
    theory_mass += w * parse_csv_double(r[5]);
  }
  const double zero = parse_csv_double(h.rows[0][6]);
  EXPECT_NEAR(mass + zero, 1.0, 1e-9);  // every eigenvalue is a zero or lands in a bin
  EXPECT_NEAR(zero, 0.5, 2.0 / 512);
  EXPECT_NEAR(theory_mass, 0.5, 0.02);
}

TEST(Sweep, ValidateTwelveInteriorPoints) {
  TempDir dir("validate");
  SweepSpec s = parse("mode = validate\nalpha_f_values = 0.5, 2, 4\nalpha_p_values = 0.1, 2, 4, 8\n"
                      "m = 128\ntrials = 300\nseed = 1\n");
  s.out_dir = dir.str();
  s.svg = false;
  const SweepOutcome out = run_sweep(s, 1);
  EXPECT_EQ(out.skipped_points, 0u);
  ASSERT_EQ(out.validation.size(), 48u);
  for (const auto& v : out.validation) EXPECT_LE(std::abs(v.z), 3.0) << v.alpha_f << " " << v.alpha_p << " " << v.quantity;
  EXPECT_EQ(out.exit_code, 0);
  const CsvTable z = read_csv((dir.path / "validate_z.csv").string());
  EXPECT_EQ(z.rows.size(), 48u);
}

TEST(Sweep, ValidateSkipsBoundaryPointsAndFlagsFailures) {
  TempDir dir("validate2");
  SweepSpec s = parse("mode = validate\nalpha_f = 4\nalpha_p_values = 1.05, 3\nm = 16\ntrials = 4\nz_max = 1e-9\n");
  s.out_dir = dir.str();
  s.svg = false;
  const SweepOutcome out = run_sweep(s, 1);
  EXPECT_EQ(out.skipped_points, 1u);
  EXPECT_EQ(out.validation.size(), 4u);
  EXPECT_EQ(out.exit_code, 3);
}

TEST(Sweep, HeatmapForGrids) {
  TempDir dir("heat");
  SweepSpec s = parse("alpha_f_min = 0.1\nalpha_f_max = 10\nalpha_f_steps = 8\nalpha_f_scale = log\n"
                      "alpha_p_min = 0.1\nalpha_p_max = 10\nalpha_p_steps = 8\nalpha_p_scale = log\n");
  s.out_dir = dir.str();
  run_sweep(s, 1);
  const std::string svg = slurp(dir.path / "theory_test.svg");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);  // phase-boundary overlay
  EXPECT_GE(std::count(svg.begin(), svg.end(), '\n'), 64);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_NE(svg.rfind("</svg>"), std::string::npos);
}

TEST(Sweep, UnwritableOutputIsIoError) {
  TempDir dir("io");
  const fs::path file = dir.path / "plain_file";
  std::ofstream(file) << "x";
  SweepSpec s = parse("alpha_f = 1\nalpha_p = 2\n");
  s.out_dir = (file / "sub").string();
  EXPECT_THROW(run_sweep(s, 1), rlf::IoError);
}
