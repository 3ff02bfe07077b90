#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "errors.hpp"

namespace rlf {

/// Gauss-Hermite rule for the standard normal weight exp(-h^2/2)/sqrt(2pi).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  ///< sums to 1
};

/**
 * @brief Golub-Welsch construction of the probabilists' Gauss-Hermite rule.
 *
 * The Jacobi matrix of the monic Hermite polynomials He_k has a zero diagonal
 * and off-diagonal sqrt(k). Nodes are its eigenvalues; weights are the squared
 * first components of the normalized eigenvectors.
 */
inline GaussHermiteRule gauss_hermite_rule(int order) {
  if (order < 1) throw InvalidConfig("quadrature order must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order > 1 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw EigenFailure("Gauss-Hermite eigenproblem did not converge");

  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

/// E[g(h)] for h ~ N(0,1).
template <class F>
double gaussian_expectation(const GaussHermiteRule& rule, F&& g) {
  // Sum from the tails inward so the small tail weights are not swamped.
  const int n = static_cast<int>(rule.nodes.size());
  double acc = 0.0;
  for (int lo = 0, hi = n - 1; lo <= hi; ++lo, --hi) {
    acc += rule.weights[lo] * g(rule.nodes[lo]);
    if (hi != lo) acc += rule.weights[hi] * g(rule.nodes[hi]);
  }
  return acc;
}

}  // namespace rlf
