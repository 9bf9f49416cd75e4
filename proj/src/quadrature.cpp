#include "lama/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "lama/errors.hpp"

namespace lama {

namespace {
std::map<std::size_t, GaussHermite> g_cache;
std::mutex g_cache_mutex;
}  // namespace

const GaussHermite& gauss_hermite(std::size_t n) {
  if (n < 1) throw validation_error("gauss_hermite: n must be >= 1");
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = g_cache.find(n);
  if (it != g_cache.end()) return it->second;

  // Golub-Welsch on the Jacobi matrix of the (physicists') Hermite family:
  // zero diagonal, off-diagonal sqrt(k/2).  Stable for large n, unlike the
  // three-term recurrence which overflows past a few hundred nodes.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k) / 2.0);
    J(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = b;
    J(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw numerical_error("gauss_hermite: eigensolver failed");

  GaussHermite rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt_pi = std::sqrt(3.141592653589793238462643383279502884);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
    const double v = es.eigenvectors()(0, static_cast<Eigen::Index>(i));
    rule.weights[i] = sqrt_pi * v * v;
  }
  // symmetrize: nodes come out sorted; enforce exact +-pairing
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

  return g_cache.emplace(n, std::move(rule)).first->second;
}

void QuadratureSpec::validate() const {
  if (nodes_per_dim < 8) throw validation_error("QuadratureSpec: nodes_per_dim must be >= 8");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw validation_error("QuadratureSpec: tolerances must be positive");
}

}  // namespace lama
