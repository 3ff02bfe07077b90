#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "model.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "theory.hpp"

namespace rlf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;  // 2 GiB

/// Integer sizes realized from the ratios, and the ratios they actually give.
struct Dimensions {
  int m = 0, m_test = 0, n_f = 0, n_p = 0;
  double alpha_f = 0, alpha_p = 0;
};

inline Dimensions dimensions(const ModelConfig& cfg) {
  cfg.validate();
  if (!cfg.m) throw InvalidConfig("simulation needs the training-set size m");
  Dimensions d;
  d.m = *cfg.m;
  d.m_test = cfg.m_test.value_or(d.m);
  const double nf = std::round(cfg.alpha_f * d.m), np = std::round(cfg.alpha_p * d.m);
  constexpr double kMaxDim = 1 << 30;
  if (nf > kMaxDim || np > kMaxDim) throw DimensionOverflow("feature or parameter count does not fit");
  d.n_f = static_cast<int>(nf);
  d.n_p = static_cast<int>(np);
  if (d.n_f < 1 || d.n_p < 1) throw InvalidConfig("round(alpha * m) must be >= 1 for both N_f and N_p");
  d.alpha_f = static_cast<double>(d.n_f) / d.m;
  d.alpha_p = static_cast<double>(d.n_p) / d.m;
  return d;
}

/// Copy of cfg with the ratios replaced by the realized ones.
inline ModelConfig realized(const ModelConfig& cfg) {
  const Dimensions d = dimensions(cfg);
  ModelConfig out = cfg;
  out.alpha_f = d.alpha_f;
  out.alpha_p = d.alpha_p;
  return out;
}

/// Peak bytes held by one trial: W, three observation matrices, one hidden
/// feature matrix and the smaller Gram matrix.
inline double trial_working_set(const Dimensions& d) {
  const double nf = d.n_f, np = d.n_p, m = d.m, mt = d.m_test;
  const double g = std::min(m, np);
  return 8.0 * (nf * np + (2.0 * m + mt) * nf + m * np + g * g + 4.0 * (m + mt + np + nf));
}

inline void check_budget(double bytes, std::size_t budget) {
  if (bytes > static_cast<double>(budget))
    throw DimensionOverflow("working set of " + std::to_string(static_cast<long long>(bytes / (1 << 20))) +
                            " MiB exceeds the memory budget of " + std::to_string(budget >> 20) + " MiB");
}

// ============================================================================
// Sampling
// ============================================================================

struct Dataset {
  MatrixXd x;        ///< rows are data points, entries N(0, sigma_x2 / N_f)
  VectorXd y;        ///< y_star + eps
  VectorXd y_star;   ///< noiseless teacher labels
  VectorXd eps;      ///< label noise
};

struct Instance {
  Dimensions dims;
  MatrixXd w_mat;  ///< N_f x N_p, entries N(0, sigma_w2 / N_p)
  VectorXd beta;   ///< N_f, entries N(0, sigma_beta2)
  Dataset train1, train2, test;
};

inline MatrixXd sample_matrix(Eigen::Index rows, Eigen::Index cols, double variance, std::uint64_t seed, Stream s) {
  MatrixXd out(rows, cols);
  auto eng = stream_engine(seed, s);
  fill_normal(out.data(), static_cast<std::size_t>(out.size()), variance, eng);
  return out;
}

/// y*(x) = sigma_beta sigma_x / <f'> * f(x.beta / (sigma_x sigma_beta)).
inline VectorXd teacher_labels(const ModelConfig& cfg, const MatrixXd& x, const VectorXd& beta) {
  VectorXd h = x * beta;
  if (cfg.teacher.kind == TeacherKind::Linear) return h;
  if (cfg.sigma_beta2 == 0.0) return VectorXd::Zero(h.size());
  const double scale = std::sqrt(cfg.sigma_beta2 * cfg.sigma_x2);
  const double prefactor = scale / cfg.teacher.mean_fp;
  for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = prefactor * cfg.teacher(h[i] / scale);
  return h;
}

inline Dataset sample_dataset(const ModelConfig& cfg, int rows, int n_f, const VectorXd& beta, std::uint64_t seed,
                              Stream xs, Stream es) {
  Dataset d;
  d.x = sample_matrix(rows, n_f, cfg.sigma_x2 / n_f, seed, xs);
  d.eps = sample_matrix(rows, 1, cfg.sigma_eps2, seed, es).col(0);
  d.y_star = teacher_labels(cfg, d.x, beta);
  d.y = d.y_star + d.eps;
  return d;
}

/// All randomness of one trial. Matrices are filled in storage (column-major)
/// order from their own sub-stream of `seed`; see random.hpp.
inline Instance sample_instance(const ModelConfig& cfg, std::uint64_t seed,
                                std::size_t memory_budget = kDefaultMemoryBudget) {
  Instance inst;
  inst.dims = dimensions(cfg);
  const Dimensions& d = inst.dims;
  check_budget(trial_working_set(d), memory_budget);
  inst.beta = sample_matrix(d.n_f, 1, cfg.sigma_beta2, seed, Stream::Beta).col(0);
  inst.w_mat = sample_matrix(d.n_f, d.n_p, cfg.sigma_w2 / d.n_p, seed, Stream::W);
  inst.train1 = sample_dataset(cfg, d.m, d.n_f, inst.beta, seed, Stream::X1, Stream::Eps1);
  inst.train2 = sample_dataset(cfg, d.m, d.n_f, inst.beta, seed, Stream::X2, Stream::Eps2);
  inst.test = sample_dataset(cfg, d.m_test, d.n_f, inst.beta, seed, Stream::XTest, Stream::EpsTest);
  return inst;
}

// ============================================================================
// Ridge solve
// ============================================================================

enum class SolvePath { Auto, Primal, Dual };

struct RidgeFit {
  VectorXd w;         ///< fit parameters
  VectorXd residual;  ///< y - Z w
  SolvePath path = SolvePath::Auto;
};

/**
 * @brief Ridge fit by Cholesky on the smaller normal system.
 *
 * Primal (N_p < M): (lambda I + Z^T Z) w = Z^T y. Dual: (lambda I + Z Z^T) a = y,
 * w = Z^T a, and the residual is lambda a.
 */
inline RidgeFit ridge_fit(const MatrixXd& z, const VectorXd& y, double lambda, SolvePath path = SolvePath::Auto) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidConfig("ridge_solve needs a finite lambda > 0");
  if (z.rows() != y.size()) throw InvalidConfig("ridge_solve: Z and y sizes differ");
  if (!z.allFinite() || !y.allFinite()) throw SolveFailure("ridge_solve: non-finite input");
  if (path == SolvePath::Auto) path = z.cols() < z.rows() ? SolvePath::Primal : SolvePath::Dual;

  RidgeFit fit;
  fit.path = path;
  if (path == SolvePath::Primal) {
    MatrixXd a = MatrixXd::Identity(z.cols(), z.cols()) * lambda;
    a.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
    Eigen::LLT<MatrixXd, Eigen::Lower> llt(a);
    if (llt.info() != Eigen::Success) throw SolveFailure("primal Cholesky failed");
    fit.w = llt.solve(z.transpose() * y);
    fit.residual = y - z * fit.w;
  } else {
    MatrixXd k = MatrixXd::Identity(z.rows(), z.rows()) * lambda;
    k.selfadjointView<Eigen::Lower>().rankUpdate(z);
    Eigen::LLT<MatrixXd, Eigen::Lower> llt(k);
    if (llt.info() != Eigen::Success) throw SolveFailure("dual Cholesky failed");
    const VectorXd a = llt.solve(y);
    fit.w = z.transpose() * a;
    fit.residual = lambda * a;
  }
  if (!fit.w.allFinite()) throw SolveFailure("ridge_solve produced non-finite parameters");
  return fit;
}

inline VectorXd ridge_solve(const MatrixXd& z, const VectorXd& y, double lambda, SolvePath path = SolvePath::Auto) {
  return ridge_fit(z, y, lambda, path).w;
}

// ============================================================================
// Rank
// ============================================================================

/// Eigenvalues at or below this multiple of n * eps * max eigenvalue count as zero.
inline constexpr double kRankTolFactor = 100.0;

inline double zero_threshold(const VectorXd& eigenvalues, Eigen::Index n) {
  const double top = eigenvalues.size() ? std::max(0.0, eigenvalues.maxCoeff()) : 0.0;
  return kRankTolFactor * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * top;
}

inline VectorXd symmetric_eigenvalues(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigenFailure("symmetric eigensolver did not converge");
  return es.eigenvalues();
}

/// Lower triangle of the smaller Gram matrix of z (Z^T Z or Z Z^T).
inline MatrixXd smaller_gram(const MatrixXd& z) {
  const bool cols = z.cols() <= z.rows();
  const Eigen::Index g = cols ? z.cols() : z.rows();
  MatrixXd k = MatrixXd::Zero(g, g);
  if (cols)
    k.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  else
    k.selfadjointView<Eigen::Lower>().rankUpdate(z);
  return k;
}

/// 1 - rank(Z^T Z) / N_p, rank counted from the eigenvalues of the smaller Gram matrix.
inline double rank_deficit(const MatrixXd& z) {
  if (!z.allFinite()) throw EigenFailure("rank_deficit: non-finite input");
  const VectorXd ev = symmetric_eigenvalues(smaller_gram(z));
  const double tol = zero_threshold(ev, std::max(z.rows(), z.cols()));
  const auto rank = (ev.array() > tol).count();
  return 1.0 - static_cast<double>(rank) / static_cast<double>(z.cols());
}

// ============================================================================
// Trials
// ============================================================================

struct TrialResult {
  double train_error = 0;  ///< |y1 - Z1 w1|^2 / M
  double test_error = 0;   ///< |y' - yhat1'|^2 / M'
  double bias_cross = 0;   ///< (yhat1' - y*') . (yhat2' - y*') / M'
  std::optional<double> rank_deficit;  ///< 1 - rank(Z1^T Z1) / N_p
};

struct TrialOptions {
  bool rank = false;
  SolvePath path = SolvePath::Auto;
  std::size_t memory_budget = kDefaultMemoryBudget;
};

/// Both training sets are fitted with the shared W; test predictions are
/// X' (W w), so the test hidden features are never formed.
inline TrialResult run_trial(const ModelConfig& cfg, std::uint64_t seed, const TrialOptions& opt = {}) {
  if (!(cfg.lambda > 0.0)) throw InvalidConfig("simulation needs lambda > 0");
  const Instance inst = sample_instance(cfg, seed, opt.memory_budget);
  const Dimensions& d = inst.dims;
  TrialResult r;

  VectorXd pred[2];
  const Dataset* sets[2] = {&inst.train1, &inst.train2};
  for (int k = 0; k < 2; ++k) {
    const MatrixXd z = sets[k]->x * inst.w_mat;
    const RidgeFit fit = ridge_fit(z, sets[k]->y, cfg.lambda, opt.path);
    if (k == 0) {
      r.train_error = fit.residual.squaredNorm() / d.m;
      if (opt.rank) r.rank_deficit = rank_deficit(z);
    }
    pred[k] = inst.test.x * (inst.w_mat * fit.w);
  }
  r.test_error = (inst.test.y - pred[0]).squaredNorm() / d.m_test;
  r.bias_cross = (pred[0] - inst.test.y_star).dot(pred[1] - inst.test.y_star) / d.m_test;
  return r;
}

struct Stat {
  double mean = 0;
  double std_error = 0;
};

struct SimEstimate {
  Stat train, test, bias2, variance;
  std::int64_t trials = 0;
  double sigma_y2 = 0;    ///< sigma_beta2 sigma_x2 + sigma_dy2 + sigma_eps2
  double sigma_eps2 = 0;  ///< noise term subtracted in the variance estimate
  bool scaled = false;
  Dimensions dims;

  /// Every mean and standard error divided by sigma_y2.
  SimEstimate scaled_by_label_variance() const {
    if (scaled) return *this;
    SimEstimate out = *this;
    const double k = sigma_y2;
    for (Stat* st : {&out.train, &out.test, &out.bias2}) {
      st->mean /= k;
      st->std_error /= k;
    }
    out.sigma_eps2 = sigma_eps2 / k;
    out.variance.mean = out.test.mean - out.bias2.mean - out.sigma_eps2;
    out.variance.std_error = variance.std_error / k;
    out.scaled = true;
    return out;
  }
};

/// Order-insensitive per-quantity moments over trials.
struct TrialAccumulator {
  MomentAccumulator train, test, bias, test_minus_bias;

  void add(const TrialResult& r) {
    train.add(r.train_error);
    test.add(r.test_error);
    bias.add(r.bias_cross);
    test_minus_bias.add(r.test_error - r.bias_cross);
  }

  void merge(const TrialAccumulator& o) {
    train.merge(o.train);
    test.merge(o.test);
    bias.merge(o.bias);
    test_minus_bias.merge(o.test_minus_bias);
  }

  /// Unscaled estimate; variance = test - bias2 - sigma_eps2 by construction.
  SimEstimate finish(const ModelConfig& cfg) const {
    SimEstimate e;
    e.dims = dimensions(cfg);
    e.trials = train.count();
    e.sigma_eps2 = cfg.sigma_eps2;
    e.sigma_y2 = cfg.sigma_beta2 * cfg.sigma_x2 + sigma_dy2(cfg) + cfg.sigma_eps2;
    e.train = {train.mean(), train.std_error()};
    e.test = {test.mean(), test.std_error()};
    e.bias2 = {bias.mean(), bias.std_error()};
    e.variance = {e.test.mean - e.bias2.mean - e.sigma_eps2, test_minus_bias.std_error()};
    return e;
  }
};

/// 1000 trials, or 150000 on a phase boundary where the estimates are heavy-tailed.
inline int default_trials(const ModelConfig& cfg) {
  return classify_regime(cfg).kind == RegimeKind::Boundary ? 150000 : 1000;
}

/**
 * @brief Runs trials [first, first + count) of the run seeded by seed0.
 *
 * Trial t uses trial_seed(seed0, t) whichever thread runs it, and the
 * accumulator is exact, so the result is independent of scheduling.
 */
inline TrialAccumulator accumulate_trials(const ModelConfig& cfg, std::int64_t first, std::int64_t count,
                                          std::uint64_t seed0, int threads = 1, const TrialOptions& opt = {}) {
  if (count < 0 || first < 0) throw InvalidConfig("trial range must be non-negative");
  const Dimensions d = dimensions(cfg);
  const double ws = trial_working_set(d);
  check_budget(ws, opt.memory_budget);
  threads = std::max(1, std::min<int>(threads, static_cast<int>(opt.memory_budget / ws)));
  threads = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(count, 1)));

  std::vector<TrialResult> results(static_cast<std::size_t>(count));
  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::int64_t err_index = count;
  std::exception_ptr err;

  auto worker = [&] {
    for (std::int64_t i; (i = next.fetch_add(1)) < count;) {
      try {
        results[i] = run_trial(cfg, trial_seed(seed0, static_cast<std::uint64_t>(first + i)), opt);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (i < err_index) {  // report the lowest failing trial
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);

  TrialAccumulator acc;
  for (const auto& r : results) acc.add(r);
  return acc;
}

inline SimEstimate estimate(const ModelConfig& cfg, std::int64_t n_trials, std::uint64_t seed0, int threads = 1,
                            const TrialOptions& opt = {}) {
  if (n_trials < 2) throw InvalidConfig("estimate needs at least 2 trials");
  return accumulate_trials(cfg, 0, n_trials, seed0, threads, opt).finish(cfg);
}

// ============================================================================
// Empirical spectra
// ============================================================================

/// Nonzero-eigenvalue spectrum of Z^T Z for one sampled design.
struct GramSpectrum {
  VectorXd eigenvalues;  ///< computed eigenvalues of the reduced matrix
  Eigen::Index appended_zeros = 0;  ///< structural zeros added to reach N_p
};

inline constexpr Eigen::Index kColumnBlock = 256;

/// Peak bytes of gram_spectrum: X, the reduced matrix and a column block.
inline double spectrum_working_set(const Dimensions& d) {
  const double nf = d.n_f, np = d.n_p, m = d.m;
  const double g = std::min({m, np, nf});
  double bytes = m * nf + 2.0 * g * g + (nf + m) * kColumnBlock;
  if (d.n_f < std::min(d.m, d.n_p)) bytes += nf * nf;
  if (d.n_p <= d.m) bytes += nf * np + m * np;
  return 8.0 * bytes;
}

/**
 * @brief Eigenvalues of Z^T Z for Z = X1 W of the trial seeded by `seed`.
 *
 * N_p <= M: Z^T Z directly. N_p > M > N_f: L^T (X^T X) L with W W^T = L L^T,
 * which holds the N_f nonzero eigenvalues; N_p - N_f zeros are appended.
 * Otherwise Z Z^T, accumulated over column blocks of W, plus N_p - M zeros.
 * W is drawn column by column in both cases, so it matches sample_instance.
 */
inline GramSpectrum gram_spectrum(const ModelConfig& cfg, std::uint64_t seed,
                                  std::size_t memory_budget = kDefaultMemoryBudget) {
  const Dimensions d = dimensions(cfg);
  check_budget(spectrum_working_set(d), memory_budget);
  const MatrixXd x = sample_matrix(d.m, d.n_f, cfg.sigma_x2 / d.n_f, seed, Stream::X1);
  auto w_eng = stream_engine(seed, Stream::W);
  const double w_var = cfg.sigma_w2 / d.n_p;

  GramSpectrum out;
  if (d.n_p <= d.m) {
    MatrixXd w(d.n_f, d.n_p);
    fill_normal(w.data(), static_cast<std::size_t>(w.size()), w_var, w_eng);
    out.eigenvalues = symmetric_eigenvalues(smaller_gram(x * w));
    return out;
  }

  const bool nf_smallest = d.n_f < d.m;
  const Eigen::Index g = nf_smallest ? d.n_f : d.m;
  MatrixXd acc = MatrixXd::Zero(g, g);  // W W^T or Z Z^T, lower triangle
  MatrixXd block(d.n_f, kColumnBlock);
  for (Eigen::Index c0 = 0; c0 < d.n_p; c0 += kColumnBlock) {
    const Eigen::Index nc = std::min<Eigen::Index>(kColumnBlock, d.n_p - c0);
    auto wb = block.leftCols(nc);
    fill_normal(block.data(), static_cast<std::size_t>(d.n_f * nc), w_var, w_eng);
    if (nf_smallest)
      acc.selfadjointView<Eigen::Lower>().rankUpdate(wb);
    else
      acc.selfadjointView<Eigen::Lower>().rankUpdate(x * wb);
  }

  if (nf_smallest) {
    Eigen::LLT<MatrixXd, Eigen::Lower> llt(acc);
    if (llt.info() != Eigen::Success) throw EigenFailure("W W^T is not positive definite");
    const MatrixXd l = llt.matrixL();
    MatrixXd xtx = MatrixXd::Zero(d.n_f, d.n_f);
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    const MatrixXd cl = xtx.selfadjointView<Eigen::Lower>() * l;
    MatrixXd reduced = l.transpose() * cl;
    out.eigenvalues = symmetric_eigenvalues(reduced);
    out.appended_zeros = d.n_p - d.n_f;
  } else {
    out.eigenvalues = symmetric_eigenvalues(acc);
    out.appended_zeros = d.n_p - d.m;
  }
  return out;
}

struct EmpiricalSpectrum {
  Dimensions dims;
  int n_matrices = 0;
  std::vector<double> bin_edges;      ///< n_bins + 1 increasing edges
  std::vector<std::int64_t> counts;   ///< nonzero eigenvalues per bin
  std::vector<double> density;        ///< counts / (total eigenvalues * width)
  std::vector<double> nonzero;        ///< all nonzero eigenvalues, ascending
  std::int64_t n_eigenvalues = 0;     ///< n_matrices * N_p
  std::int64_t n_zero = 0;
  std::int64_t outside = 0;           ///< nonzero eigenvalues outside the bin range
  double zero_fraction = 0;
  double min_eigenvalue = 0;          ///< most negative computed value (PSD check)
};

/**
 * @brief Averaged eigenvalue histogram of Z^T Z over n_matrices designs.
 *
 * Matrix k is the first training design of trial k under seed0. The density
 * is normalized by the total eigenvalue count including zeros, so it
 * integrates to the nonzero fraction, the same normalization as the bulk rho.
 * Bins span [min, max] of the nonzero eigenvalues unless a range is given.
 */
inline EmpiricalSpectrum empirical_spectrum(const ModelConfig& cfg, int n_matrices, std::uint64_t seed0, int n_bins,
                                            std::optional<std::pair<double, double>> range = {},
                                            std::size_t memory_budget = kDefaultMemoryBudget) {
  if (n_matrices < 1) throw InvalidConfig("empirical_spectrum needs n_matrices >= 1");
  if (n_bins < 1) throw InvalidConfig("empirical_spectrum needs n_bins >= 1");
  EmpiricalSpectrum out;
  out.dims = dimensions(cfg);
  out.n_matrices = n_matrices;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();

  for (int k = 0; k < n_matrices; ++k) {
    const GramSpectrum gs = gram_spectrum(cfg, trial_seed(seed0, static_cast<std::uint64_t>(k)), memory_budget);
    const double tol = zero_threshold(gs.eigenvalues, std::max(out.dims.m, out.dims.n_p));
    out.n_zero += gs.appended_zeros;
    if (gs.appended_zeros > 0) out.min_eigenvalue = std::min(out.min_eigenvalue, 0.0);
    for (double v : gs.eigenvalues) {
      out.min_eigenvalue = std::min(out.min_eigenvalue, v);
      if (v > tol)
        out.nonzero.push_back(v);
      else
        ++out.n_zero;
    }
  }
  std::sort(out.nonzero.begin(), out.nonzero.end());
  out.n_eigenvalues = static_cast<std::int64_t>(n_matrices) * out.dims.n_p;
  out.zero_fraction = static_cast<double>(out.n_zero) / static_cast<double>(out.n_eigenvalues);

  double lo = 0, hi = 1;
  if (range) {
    std::tie(lo, hi) = *range;
  } else if (!out.nonzero.empty()) {
    lo = out.nonzero.front();
    hi = out.nonzero.back();
  }
  if (!(hi > lo)) hi = lo + std::max(1.0, std::abs(lo)) * 1e-12;
  out.bin_edges.resize(n_bins + 1);
  for (int i = 0; i <= n_bins; ++i) out.bin_edges[i] = lo + (hi - lo) * i / n_bins;
  out.counts.assign(n_bins, 0);
  const double width = (hi - lo) / n_bins;
  for (double v : out.nonzero) {
    if (v < lo || v > hi) {
      ++out.outside;
      continue;
    }
    const int b = std::min(n_bins - 1, static_cast<int>((v - lo) / width));
    ++out.counts[b];
  }
  out.density.resize(n_bins);
  for (int i = 0; i < n_bins; ++i)
    out.density[i] = static_cast<double>(out.counts[i]) / (static_cast<double>(out.n_eigenvalues) * width);
  return out;
}

}  // namespace rlf
