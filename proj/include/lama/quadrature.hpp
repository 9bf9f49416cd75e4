#pragma once

#include <cstddef>
#include <vector>

namespace lama {

/// Gauss-Hermite rule: integral f(x) exp(-x^2) dx ~= sum w_i f(x_i).
/// Nodes/weights via Golub-Welsch; results are cached per n.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussHermite& gauss_hermite(std::size_t n);

struct QuadratureSpec {
  // per-dimension node count for complex integrals; real-field rules use
  // 2*nodes_per_dim
  int nodes_per_dim = 96;
  // certified via node-doubling agreement; 1e-10 is the tightest level the
  // 2-D tensor sums can certify reliably in double precision (the accepted
  // values themselves are typically ~1e-13 accurate)
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;

  void validate() const;
};

}  // namespace lama
