// rlf: closed-form, simulated and spectral sweeps for random linear features.
//
// Exit status: 0 success, 1 config or I/O error, 2 bad command line,
// 3 validate found |z| above z_max, 4 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

#include "rlf/sweep/sweep.hpp"

namespace {

void print_validation(const rlf::sweep::SweepOutcome& out, double z_max) {
  std::printf("%-8s %-8s %-9s %14s %14s %12s %8s  %s\n", "alpha_f", "alpha_p", "quantity", "theory", "sim_mean",
              "sim_stderr", "z", "");
  for (const auto& v : out.validation)
    std::printf("%-8g %-8g %-9s %14.6g %14.6g %12.3g %8.2f  %s\n", v.alpha_f, v.alpha_p, v.quantity.c_str(),
                v.theory, v.mean, v.std_error, v.z, v.pass ? "ok" : "FAIL");
  std::size_t bad = 0;
  for (const auto& v : out.validation) bad += !v.pass;
  std::printf("%zu of %zu comparisons exceed |z| <= %g; %zu grid points skipped near phase boundaries\n", bad,
              out.validation.size(), z_max, out.skipped_points);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rlf::sweep;
  CLI::App app{"Random linear features: closed-form errors, simulation and Hessian spectrum"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides out_dir)");
    sub->add_option("--threads", threads, "worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "master seed (overrides seed)");
  };
  const std::pair<const char*, const char*> subs[] = {
      {"theory", "closed-form train/test error, bias^2 and variance"},
      {"simulate", "Monte Carlo estimates next to the closed form"},
      {"spectrum", "analytic Hessian eigenvalue density, optional empirical histograms"},
      {"validate", "z-scores of simulation against theory at interior points"},
  };
  for (const auto& [name, help] : subs) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    SweepSpec spec = load_config(config_path);
    apply_mode(spec, *parse_mode(sub));
    if (!out_dir.empty()) spec.out_dir = out_dir;
    if (app.get_subcommands().front()->count("--seed")) spec.seed = seed;
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    std::cerr << "rlf " << sub << ": " << spec.alpha_f.values.size() * spec.alpha_p.values.size()
              << " grid points, " << threads << " thread(s), out " << spec.out_dir << "\n";
    const SweepOutcome out = run_sweep(spec, threads, &std::cerr);
    if (spec.mode == Mode::Validate) print_validation(out, spec.z_max);
    for (const auto& f : out.files) std::cerr << "wrote " << f << "\n";
    return out.exit_code;
  } catch (const rlf::ParseError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << "\n";
    return 1;
  } catch (const rlf::ValidationError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << "\n";
    return 1;
  } catch (const rlf::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const rlf::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const rlf::DimensionOverflow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
