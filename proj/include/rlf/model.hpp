#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "teacher.hpp"

namespace rlf {

/// Full parameterization of one experiment.
struct ModelConfig {
  double alpha_f = 1.0;      ///< N_f / M
  double alpha_p = 1.0;      ///< N_p / M
  double sigma_x2 = 1.0;     ///< input variance scale
  double sigma_w2 = 1.0;     ///< projection variance scale
  double sigma_beta2 = 1.0;  ///< ground-truth variance
  double sigma_eps2 = 1.0;   ///< label noise variance
  double lambda = 1e-6;      ///< ridge parameter
  TeacherActivation teacher = TeacherActivation::linear();
  std::optional<int> m;       ///< training-set size (simulator only)
  std::optional<int> m_test;  ///< test-set size, defaults to m

  double s() const { return sigma_w2 * sigma_x2; }
  double lambda_bar() const { return lambda / s(); }

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    auto positive = [&](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x)) v.push_back(std::string(name) + " must be finite and > 0");
    };
    auto non_negative = [&](double x, const char* name) {
      if (!(x >= 0.0) || !std::isfinite(x)) v.push_back(std::string(name) + " must be finite and >= 0");
    };
    positive(alpha_f, "alpha_f");
    positive(alpha_p, "alpha_p");
    positive(sigma_x2, "sigma_x2");
    positive(sigma_w2, "sigma_w2");
    non_negative(sigma_beta2, "sigma_beta2");
    non_negative(sigma_eps2, "sigma_eps2");
    non_negative(lambda, "lambda");
    if (sigma_x2 > 0 && sigma_w2 > 0 && !std::isfinite(lambda_bar())) v.push_back("lambda_bar must be finite");
    if (teacher.kind != TeacherKind::Linear && std::abs(teacher.mean_fp) < kDegenerateTol)
      v.push_back("teacher <f'> must be nonzero");
    if (m && *m < 1) v.push_back("m must be >= 1");
    if (m_test && *m_test < 1) v.push_back("m_test must be >= 1");
    return v;
  }

  void validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid model config:";
    for (const auto& s : v) msg += " " + s + ";";
    throw InvalidConfig(msg);
  }

  /// Figure convention: sigma_x2 = sigma_w2 = sigma_eps2 = 1 and
  /// sigma_beta2 * sigma_x2 + sigma_dy2 = snr * sigma_eps2.
  static ModelConfig from_snr(double alpha_f, double alpha_p, double snr,
                              TeacherActivation teacher = TeacherActivation::linear()) {
    ModelConfig c;
    c.alpha_f = alpha_f;
    c.alpha_p = alpha_p;
    c.sigma_beta2 = snr / (1.0 + teacher.delta_f());
    c.teacher = std::move(teacher);
    return c;
  }
};

}  // namespace rlf
