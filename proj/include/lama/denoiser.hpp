#pragma once

#include <vector>

#include "lama/constellation.hpp"

namespace lama {

/// Posterior summary of one Gaussian-measure observation against a discrete
/// prior: mean (F), variance (G) and the per-point posterior weights.
struct DenoiserEval {
  cplx mean;
  double variance;
  std::vector<double> weights;
};

/// Per-point posterior probabilities w_a for observation z at variance tau.
/// Complex field: w_a ~ p_a exp(-|z-a|^2/tau); real field uses the
/// variance-tau real Gaussian, w_a ~ p_a exp(-(z-a)^2/(2 tau)).
/// Computed in the log domain (max-subtracted), so arbitrarily small tau is
/// safe; tau below 1e-12 * min squared point distance collapses to a one-hot
/// at the hard decision.
std::vector<double> weights(cplx z, double tau, const Constellation& c);

cplx posterior_mean(cplx z, double tau, const Constellation& c);
double posterior_variance(cplx z, double tau, const Constellation& c);

DenoiserEval denoise(cplx z, double tau, const Constellation& c);

/// argmax_a w_a(z, tau); ties broken by lowest point index
std::size_t hard_decision_index(cplx z, double tau, const Constellation& c);
cplx hard_decision(cplx z, double tau, const Constellation& c);

/// |G - (tau/2)(d1 F^R + d2 F^I)| with central finite differences of the
/// given step (real field: |G - tau dF/dx|).  Test oracle tying the
/// posterior variance to the mean's divergence.
double variance_identity_check(cplx z, double tau, const Constellation& c, double step);

namespace detail {

/// Hot-path evaluation into caller scratch (no allocation).  `weights` must
/// have c.size() capacity; returns (F, G).
std::pair<cplx, double> denoise_into(cplx z, double tau, const Constellation& c,
                                     double* weight_scratch);

}  // namespace detail

}  // namespace lama
