#include "lama/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lama/errors.hpp"

namespace lama {

namespace {

// optimization bracket for unit-energy alphabets; endpoints pinned by the
// Psi limits (0 and Var)
constexpr double kScanLo = 1e-6;
constexpr double kScanHi = 1e3;
constexpr int kCoarseScan = 200;
constexpr int kStationaryScan = 2000;

double psi_matched(double s2, const Constellation& c, const QuadratureSpec& q, PsiRoute r) {
  return psi(s2, s2, c, q, r);
}

double dpsi_fast(double s2, const Constellation& c, const QuadratureSpec& q, PsiRoute r) {
  const double h = 1e-4 * s2;
  return (detail::psi_matched_raw(s2 + h, c, q.nodes_per_dim, r) -
          detail::psi_matched_raw(s2 - h, c, q.nodes_per_dim, r)) /
         (2.0 * h);
}

// golden-section minimum of f on [a, b] (log-sigma2 axis)
double golden_min(const std::function<double(double)>& f, double a, double b, double xtol) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

struct ScanMin {
  double log_s2;
  int index;
};

ScanMin coarse_argmin(const std::function<double(double)>& f_logx, int points) {
  const double la = std::log(kScanLo), lb = std::log(kScanHi);
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < points; ++i) {
    const double lx = la + (lb - la) * i / (points - 1);
    const double v = f_logx(lx);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  return {la + (lb - la) * best_i / (points - 1), best_i};
}

}  // namespace

double dpsi_matched(double sigma2, const Constellation& c, const QuadratureSpec& q,
                    PsiRoute route) {
  if (!(sigma2 > 0.0)) throw validation_error("dpsi_matched: sigma2 must be > 0");
  const double h = 1e-4 * sigma2;
  const double d_h = (psi_matched(sigma2 + h, c, q, route) -
                      psi_matched(sigma2 - h, c, q, route)) /
                     (2.0 * h);
  const double d_h2 = (psi_matched(sigma2 + 0.5 * h, c, q, route) -
                       psi_matched(sigma2 - 0.5 * h, c, q, route)) /
                      h;
  return (4.0 * d_h2 - d_h) / 3.0;
}

ThresholdValue ert(const Constellation& c, const QuadratureSpec& q, PsiRoute route) {
  q.validate();
  // coarse scan on the cheap rule, golden refinement on the verified one
  auto ratio_fast = [&](double lx) {
    const double s2 = std::exp(lx);
    return s2 / detail::psi_matched_raw(s2, c, q.nodes_per_dim, route);
  };
  const auto seed = coarse_argmin(ratio_fast, kCoarseScan);
  const double step = (std::log(kScanHi) - std::log(kScanLo)) / (kCoarseScan - 1);
  auto ratio = [&](double lx) {
    const double s2 = std::exp(lx);
    return s2 / psi_matched(s2, c, q, route);
  };
  const double lx = golden_min(ratio, seed.log_s2 - step, seed.log_s2 + step, 1e-6);
  return {ratio(lx), std::exp(lx)};
}

ThresholdValue mrt(const Constellation& c, const QuadratureSpec& q, PsiRoute route) {
  q.validate();
  auto neg_slope_fast = [&](double lx) { return -dpsi_fast(std::exp(lx), c, q, route); };
  const auto seed = coarse_argmin(neg_slope_fast, kCoarseScan);
  const double step = (std::log(kScanHi) - std::log(kScanLo)) / (kCoarseScan - 1);
  auto neg_slope = [&](double lx) { return -dpsi_matched(std::exp(lx), c, q, route); };
  const double lx = golden_min(neg_slope, seed.log_s2 - step, seed.log_s2 + step, 1e-5);
  return {1.0 / dpsi_matched(std::exp(lx), c, q, route), std::exp(lx)};
}

std::vector<double> stationary_sigma2(double beta, const Constellation& c,
                                      const QuadratureSpec& q, PsiRoute route) {
  q.validate();
  if (!(beta > 0.0)) throw validation_error("stationary_sigma2: beta must be > 0");
  const double la = std::log(kScanLo), lb = std::log(kScanHi);

  auto h_fast = [&](double s2) { return beta * dpsi_fast(s2, c, q, route) - 1.0; };
  auto h_acc = [&](double s2) { return beta * dpsi_matched(s2, c, q, route) - 1.0; };

  std::vector<double> roots;
  double prev_x = kScanLo, prev_h = h_fast(prev_x);
  double best_h = prev_h, best_x = prev_x;
  for (int i = 1; i < kStationaryScan; ++i) {
    const double x = std::exp(la + (lb - la) * i / (kStationaryScan - 1));
    const double hx = h_fast(x);
    if (hx > best_h) {
      best_h = hx;
      best_x = x;
    }
    if ((prev_h < 0.0) != (hx < 0.0)) {
      // bisect on the cheap rule, then polish on the verified one
      double a = prev_x, b = x, ha = prev_h;
      for (int it = 0; it < 60 && (b - a) > 1e-8 * b; ++it) {
        const double m = std::sqrt(a * b);
        const double hm = h_fast(m);
        if ((ha < 0.0) != (hm < 0.0)) {
          b = m;
        } else {
          a = m;
          ha = hm;
        }
      }
      double r = std::sqrt(a * b);
      double lo = r * 0.98, hi = r * 1.02;
      double hlo = h_acc(lo), hhi = h_acc(hi);
      if ((hlo < 0.0) != (hhi < 0.0)) {
        for (int it = 0; it < 50 && (hi - lo) > 1e-9 * hi; ++it) {
          const double m = 0.5 * (lo + hi);
          const double hm = h_acc(m);
          if ((hlo < 0.0) != (hm < 0.0)) {
            hi = m;
          } else {
            lo = m;
            hlo = hm;
          }
        }
        r = 0.5 * (lo + hi);
      }
      roots.push_back(r);
    }
    prev_x = x;
    prev_h = hx;
  }

  if (roots.empty() && best_h > -1e-3) {
    // tangency: beta at (or numerically at) the MRT touches the level from below
    auto neg = [&](double lx) { return -h_acc(std::exp(lx)); };
    const double lx = golden_min(neg, std::log(best_x) - 0.2, std::log(best_x) + 0.2, 1e-6);
    if (h_acc(std::exp(lx)) > -1e-3) roots.push_back(std::exp(lx));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

namespace {

std::vector<double> critical_values(double beta, const Constellation& c,
                                    const QuadratureSpec& q, PsiRoute route) {
  const auto st = stationary_sigma2(beta, c, q, route);
  if (st.empty())
    throw validation_error("no stationary points: beta below the minimum recovery threshold");
  std::vector<double> vals;
  vals.reserve(st.size());
  for (double s2 : st) vals.push_back(s2 - beta * psi_matched(s2, c, q, route));
  return vals;
}

}  // namespace

double n0_min(double beta, const Constellation& c, const QuadratureSpec& q, PsiRoute route) {
  const auto vals = critical_values(beta, c, q, route);
  const double v = *std::min_element(vals.begin(), vals.end());
  if (v < -1e-9)
    throw validation_error("n0_min: beta above the exact-recovery threshold");
  return std::max(v, 0.0);
}

double n0_max(double beta, const Constellation& c, const QuadratureSpec& q, PsiRoute route) {
  const auto vals = critical_values(beta, c, q, route);
  return *std::max_element(vals.begin(), vals.end());
}

ThresholdReport threshold_report(const Constellation& c, const QuadratureSpec& q,
                                 PsiRoute route) {
  ThresholdReport rep;
  rep.constellation = c.name();
  const auto lo = mrt(c, q, route);
  const auto hi = ert(c, q, route);
  rep.beta_min = lo.beta;
  rep.beta_max = hi.beta;
  rep.argmin_sigma2_mrt = lo.argmin_sigma2;
  rep.argmin_sigma2_ert = hi.argmin_sigma2;
  rep.n0_min_at_beta_min = n0_min(lo.beta, c, q, route);
  rep.n0_max_at_beta_max = n0_max(hi.beta, c, q, route);
  return rep;
}

RegimeReport classify_regime(double beta, double n0, const Constellation& c,
                             const QuadratureSpec& q,
                             std::optional<double> beta_min_hint,
                             std::optional<double> beta_max_hint) {
  if (!(beta > 0.0) || !(n0 >= 0.0))
    throw validation_error("classify_regime: beta > 0 and n0 >= 0 required");
  RegimeReport rep;
  rep.beta_min = beta_min_hint ? *beta_min_hint : mrt(c, q).beta;
  rep.beta_max = beta_max_hint ? *beta_max_hint : ert(c, q).beta;

  if (beta < rep.beta_min) {
    rep.regime = Regime::optimal;
    return rep;
  }
  rep.n0_max = n0_max(beta, c, q);
  if (beta <= rep.beta_max) {
    rep.n0_min = n0_min(beta, c, q);
    if (n0 < *rep.n0_min || n0 > *rep.n0_max) {
      rep.regime = Regime::optimal;
      return rep;
    }
    rep.conditional_band = true;
    SEParams p;
    p.beta = beta;
    p.n0 = p.n0post = n0;
    p.constellation = c;
    p.quad = q;
    const auto fp = fixed_points(p);
    rep.root_count = fp.count;
    rep.regime = fp.count == 1 ? Regime::optimal : Regime::suboptimal;
    return rep;
  }
  rep.regime = n0 > *rep.n0_max ? Regime::optimal : Regime::suboptimal;
  return rep;
}

ConsistencyReport complex_real_consistency(const Constellation& c, const QuadratureSpec& q) {
  if (!c.separable())
    throw validation_error("complex_real_consistency: constellation is not separable");
  const auto& r = c.real_part_alphabet();

  ConsistencyReport rep;
  rep.beta_min_complex = mrt(c, q, PsiRoute::complex_full).beta;
  rep.beta_max_complex = ert(c, q, PsiRoute::complex_full).beta;
  rep.beta_min_real = mrt(r, q).beta;
  rep.beta_max_real = ert(r, q).beta;

  // compare the critical noise levels inside the shared [mrt, ert] band
  rep.probe_beta = 0.5 * (rep.beta_min_real + rep.beta_max_real);
  const double n0min_c = n0_min(rep.probe_beta, c, q, PsiRoute::complex_full);
  const double n0min_r = n0_min(rep.probe_beta, r, q);
  const double n0max_c = n0_max(rep.probe_beta, c, q, PsiRoute::complex_full);
  const double n0max_r = n0_max(rep.probe_beta, r, q);
  rep.n0_min_ratio = n0min_c / n0min_r;
  rep.n0_max_ratio = n0max_c / n0max_r;
  return rep;
}

}  // namespace lama
