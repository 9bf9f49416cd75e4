#include "lama/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lama/errors.hpp"

namespace lama {

namespace {

constexpr double kTauFloorRel = 1e-12;

inline void check_tau(double tau) {
  if (!(tau > 0.0)) throw validation_error("denoiser: tau must be > 0");
}

inline double sq_dist(cplx z, cplx a, Field f) {
  if (f == Field::real) {
    const double d = z.real() - a.real();
    return d * d;
  }
  return std::norm(z - a);
}

inline void check_field_arg(cplx z, const Constellation& c) {
  if (c.field() == Field::real && z.imag() != 0.0)
    throw validation_error("denoiser: complex observation passed to a real-field alphabet");
}

}  // namespace

namespace detail {

std::pair<cplx, double> denoise_into(cplx z, double tau, const Constellation& c,
                                     double* w) {
  const auto& pts = c.points();
  const auto& logp = c.log_priors();
  const std::size_t m = pts.size();
  const Field f = c.field();
  // real field density exp(-(.)^2/(2 tau)): fold the 1/2 into the divisor
  const double div = (f == Field::real) ? 2.0 * tau : tau;

  if (tau < kTauFloorRel * c.min_sq_distance()) {
    // degenerate posterior: one-hot at the nearest point
    std::size_t best = 0;
    double dbest = sq_dist(z, pts[0], f);
    for (std::size_t i = 1; i < m; ++i) {
      const double d = sq_dist(z, pts[i], f);
      if (d < dbest) {
        dbest = d;
        best = i;
      }
    }
    for (std::size_t i = 0; i < m; ++i) w[i] = 0.0;
    w[best] = 1.0;
    return {pts[best], 0.0};
  }

  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = sq_dist(z, pts[i], f);
    dmin = std::min(dmin, w[i]);
  }
  double lmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = logp[i] - (w[i] - dmin) / div;
    lmax = std::max(lmax, w[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = std::exp(w[i] - lmax);
    sum += w[i];
  }
  cplx mean(0.0, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    w[i] /= sum;
    mean += w[i] * pts[i];
  }
  double var = 0.0;
  for (std::size_t i = 0; i < m; ++i) var += w[i] * std::norm(pts[i] - mean);
  return {mean, var};
}

}  // namespace detail

std::vector<double> weights(cplx z, double tau, const Constellation& c) {
  check_tau(tau);
  check_field_arg(z, c);
  std::vector<double> w(c.size());
  detail::denoise_into(z, tau, c, w.data());
  return w;
}

DenoiserEval denoise(cplx z, double tau, const Constellation& c) {
  check_tau(tau);
  check_field_arg(z, c);
  DenoiserEval out;
  out.weights.resize(c.size());
  std::tie(out.mean, out.variance) = detail::denoise_into(z, tau, c, out.weights.data());
  return out;
}

cplx posterior_mean(cplx z, double tau, const Constellation& c) {
  return denoise(z, tau, c).mean;
}

double posterior_variance(cplx z, double tau, const Constellation& c) {
  return denoise(z, tau, c).variance;
}

std::size_t hard_decision_index(cplx z, double tau, const Constellation& c) {
  check_tau(tau);
  check_field_arg(z, c);
  const auto& pts = c.points();
  const auto& logp = c.log_priors();
  const Field f = c.field();

  if (tau < kTauFloorRel * c.min_sq_distance()) {
    std::size_t best = 0;
    double dbest = sq_dist(z, pts[0], f);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double d = sq_dist(z, pts[i], f);
      if (d < dbest) {
        dbest = d;
        best = i;
      }
    }
    return best;
  }

  const double div = (f == Field::real) ? 2.0 * tau : tau;
  std::size_t best = 0;
  double lbest = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double l = logp[i] - sq_dist(z, pts[i], f) / div;
    if (l > lbest) {
      lbest = l;
      best = i;
    }
  }
  return best;
}

cplx hard_decision(cplx z, double tau, const Constellation& c) {
  return c.points()[hard_decision_index(z, tau, c)];
}

double variance_identity_check(cplx z, double tau, const Constellation& c, double step) {
  check_tau(tau);
  if (!(step > 0.0)) throw validation_error("variance_identity_check: step must be > 0");
  const double g = posterior_variance(z, tau, c);
  if (c.field() == Field::real) {
    const double fp = posterior_mean(z + cplx(step, 0.0), tau, c).real();
    const double fm = posterior_mean(z - cplx(step, 0.0), tau, c).real();
    return std::abs(g - tau * (fp - fm) / (2.0 * step));
  }
  const double d1FR = (posterior_mean(z + cplx(step, 0.0), tau, c).real() -
                       posterior_mean(z - cplx(step, 0.0), tau, c).real()) /
                      (2.0 * step);
  const double d2FI = (posterior_mean(z + cplx(0.0, step), tau, c).imag() -
                       posterior_mean(z - cplx(0.0, step), tau, c).imag()) /
                      (2.0 * step);
  return std::abs(g - 0.5 * tau * (d1FR + d2FI));
}

}  // namespace lama
