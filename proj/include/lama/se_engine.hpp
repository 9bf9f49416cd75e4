#pragma once

#include <cstdint>
#include <vector>

#include "lama/constellation.hpp"
#include "lama/quadrature.hpp"

namespace lama {

struct SEParams {
  double beta = 1.0;        // system ratio M_T / M_R
  double n0 = 0.0;          // true noise variance
  double n0post = 0.0;      // postulated noise variance
  Constellation constellation;
  QuadratureSpec quad;

  bool matched() const { return n0 == n0post; }
  void validate() const;
};

/// One state-evolution iterate: effective noise variance sigma2 and
/// postulated output variance gamma2 (equal in the matched case).
struct SEState {
  double sigma2;
  double gamma2;
  int t;
};

struct SETrace {
  std::vector<SEState> states;
  bool converged = false;
  const SEState& last() const { return states.back(); }
};

/// Which evaluation path psi/phi take.  auto_route picks the 1-D real
/// reduction for separable alphabets; forcing complex_full keeps the 2-D
/// tensor rule (used by consistency tests).
enum class PsiRoute { auto_route, complex_full, real_reduction };

struct PsiPhi {
  double psi;
  double phi;
  double psi_err;  // node-doubling error estimates
  double phi_err;
};

/// MSE function: E_{S,Z} |F(S + sigma Z, gamma2) - S|^2, Z ~ CN(0,1)
/// (real field: Z ~ N(0,1)).  Throws numerical_error when the adaptive
/// Gauss-Hermite rule cannot reach the requested tolerance.
double psi(double sigma2, double gamma2, const Constellation& c, const QuadratureSpec& q,
           PsiRoute route = PsiRoute::auto_route);

/// Variance function: E_{S,Z}[G(S + sigma Z, gamma2)].
double phi(double sigma2, double gamma2, const Constellation& c, const QuadratureSpec& q,
           PsiRoute route = PsiRoute::auto_route);

/// Both functions from one pass over the quadrature nodes.
PsiPhi psi_phi(double sigma2, double gamma2, const Constellation& c, const QuadratureSpec& q,
               PsiRoute route = PsiRoute::auto_route);

/// One coupled update sigma2' = n0 + beta Psi, gamma2' = n0post + beta Phi;
/// collapses to the single matched recursion when n0post == n0.
SEState se_step(const SEState& s, const SEParams& p);

SEState se_initial_state(const SEParams& p);

/// Iterate from the canonical initialization until
/// |sigma2_{t+1} - sigma2_t| <= conv_tol * sigma2_t or max_iters.
/// Non-convergence is reported in the trace, not thrown.
SETrace se_run(const SEParams& p, int max_iters, double conv_tol);

/// Fixed-point locator function g(sigma2) = n0 + beta Psi(s2,s2) - s2
/// (matched case only); its zero crossings are the SE fixed points.
double g_function(double sigma2, const SEParams& p);

struct FixedPointReport {
  std::vector<double> roots;  // ascending
  double largest = 0.0;       // the fixed point attained from the canonical init
  double smallest = 0.0;      // the optimal fixed point
  double eta = 1.0;           // multiuser efficiency n0 / largest
  int count = 0;
  bool grid_warning = false;  // root count changed at doubled scan resolution
};

/// Sign-change scan of g over a log-spaced grid plus bisection refinement.
/// grid bounds <= 0 select the defaults [1e-8 (n0+beta), 10 (n0+beta Var)].
FixedPointReport fixed_points(const SEParams& p, double grid_lo = 0.0, double grid_hi = 0.0,
                              int grid_points = 2000, bool check_resolution = true);

enum class SerMethod { closed_form, monte_carlo };

struct McEstimate {
  double value;
  double std_error;
};

/// Symbol error probability of the MAP decision on s + n with
/// n ~ CN(0, sigma2) (real field: N(0, sigma2)).
double awgn_ser(double sigma2, const Constellation& c, SerMethod method,
                std::uint64_t mc_samples = 400000, std::uint64_t seed = 1);

McEstimate awgn_ser_mc(double sigma2, const Constellation& c, std::uint64_t samples,
                       std::uint64_t seed);

/// Mutual information I(S; S + sigma Z) in bits per channel use, clamped to
/// [0, log2 |alphabet|].
double achievable_rate(double sigma2, const Constellation& c, const QuadratureSpec& q);

namespace detail {

/// Matched-diagonal Psi from a single Gauss-Hermite rule, no node-doubling
/// error control.  Scan workhorse for the threshold module; every root it
/// locates is re-verified with the tolerance-controlled path.
double psi_matched_raw(double sigma2, const Constellation& c, int nodes_per_dim,
                       PsiRoute route = PsiRoute::auto_route);

}  // namespace detail

}  // namespace lama
