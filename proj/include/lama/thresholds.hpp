#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lama/se_engine.hpp"

namespace lama {

/// d Psi(s2,s2) / d s2 on the matched diagonal, central differences with
/// relative step 1e-4 plus one step-halving (Richardson) refinement.
double dpsi_matched(double sigma2, const Constellation& c, const QuadratureSpec& q,
                    PsiRoute route = PsiRoute::auto_route);

struct ThresholdValue {
  double beta;
  double argmin_sigma2;
};

/// Exact recovery threshold: min over sigma2 of sigma2 / Psi(s2,s2).
/// Relative accuracy ~1e-4.
ThresholdValue ert(const Constellation& c, const QuadratureSpec& q,
                   PsiRoute route = PsiRoute::auto_route);

/// Minimum recovery threshold: min over sigma2 of (d Psi/d s2)^-1.
/// Relative accuracy ~1e-3.
ThresholdValue mrt(const Constellation& c, const QuadratureSpec& q,
                   PsiRoute route = PsiRoute::auto_route);

/// sigma2 values where beta * dPsi/dsigma2 = 1 (critical points of
/// sigma2 - beta Psi); empty when beta is below the MRT.
std::vector<double> stationary_sigma2(double beta, const Constellation& c,
                                      const QuadratureSpec& q,
                                      PsiRoute route = PsiRoute::auto_route);

/// Minimum critical noise: min over the stationary set of sigma2 - beta Psi.
/// Requires beta in [mrt, ert].
double n0_min(double beta, const Constellation& c, const QuadratureSpec& q,
              PsiRoute route = PsiRoute::auto_route);

/// Maximum guaranteed noise: max over the stationary set; requires beta >= mrt.
double n0_max(double beta, const Constellation& c, const QuadratureSpec& q,
              PsiRoute route = PsiRoute::auto_route);

struct ThresholdReport {
  std::string constellation;
  double beta_min;
  double beta_max;
  double n0_min_at_beta_min;
  double n0_max_at_beta_max;
  double argmin_sigma2_mrt;
  double argmin_sigma2_ert;
};

/// One table row: MRT, ERT and the critical noise levels at those ratios.
ThresholdReport threshold_report(const Constellation& c, const QuadratureSpec& q,
                                 PsiRoute route = PsiRoute::auto_route);

enum class Regime { optimal, conditional, suboptimal };

struct RegimeReport {
  Regime regime;                    // resolved to optimal or suboptimal
  bool conditional_band = false;    // noise fell inside [n0_min, n0_max]
  double beta_min;
  double beta_max;
  std::optional<double> n0_min;     // set when beta >= beta_min and <= beta_max
  std::optional<double> n0_max;     // set when beta >= beta_min
  std::optional<int> root_count;    // set when fixed_points was consulted
};

/// Optimality classification of (beta, n0) in the matched case.  Inside the
/// conditional band the verdict is resolved by counting fixed points.
/// Precomputed beta_min/beta_max may be supplied to skip recomputation.
RegimeReport classify_regime(double beta, double n0, const Constellation& c,
                             const QuadratureSpec& q,
                             std::optional<double> beta_min_hint = std::nullopt,
                             std::optional<double> beta_max_hint = std::nullopt);

struct ConsistencyReport {
  double beta_min_complex, beta_min_real;
  double beta_max_complex, beta_max_real;
  double n0_min_ratio;  // complex / real, expected 2
  double n0_max_ratio;
  double probe_beta;    // ratio at which the critical noise levels were compared
};

/// Complex-vs-real threshold agreement for a separable constellation: the
/// complex side is evaluated with the full 2-D rule, the real side on the
/// real-part alphabet, so the comparison exercises independent paths.
ConsistencyReport complex_real_consistency(const Constellation& c, const QuadratureSpec& q);

}  // namespace lama
