#include "lama/se_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lama/denoiser.hpp"
#include "lama/errors.hpp"
#include "lama/rng.hpp"

namespace lama {

namespace {

constexpr double kSqrtPi = 1.7724538509055160272981674833411451828;
constexpr double kSqrt2 = 1.4142135623730950488016887242096980786;

struct RawPair {
  double psi;
  double phi;
};

// E over a real N(0,1) perturbation of each orbit representative.
RawPair eval_real(double sigma2, double gamma2, const Constellation& c, std::size_t n) {
  const auto& rule = gauss_hermite(n);
  const double sig = std::sqrt(sigma2);
  std::vector<double> scratch(c.size());
  double acc_psi = 0.0, acc_phi = 0.0;
  for (const auto& [a0, mass] : c.rotation_orbit_reps()) {
    const double a = a0.real();
    double p_psi = 0.0, p_phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = a + sig * kSqrt2 * rule.nodes[i];
      const auto [f, g] = detail::denoise_into(cplx(x, 0.0), gamma2, c, scratch.data());
      const double e = f.real() - a;
      p_psi += rule.weights[i] * e * e;
      p_phi += rule.weights[i] * g;
    }
    acc_psi += mass * p_psi;
    acc_phi += mass * p_phi;
  }
  return {acc_psi / kSqrtPi, acc_phi / kSqrtPi};
}

// E over a CN(0,1) perturbation: 2-D tensor rule.  Re/Im of Z have variance
// 1/2, so the node offset is exactly the Hermite node.
RawPair eval_complex(double sigma2, double gamma2, const Constellation& c, std::size_t n) {
  const auto& rule = gauss_hermite(n);
  const double sig = std::sqrt(sigma2);
  std::vector<double> scratch(c.size());
  double acc_psi = 0.0, acc_phi = 0.0;
  for (const auto& [a0, mass] : c.rotation_orbit_reps()) {
    double p_psi = 0.0, p_phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xr = a0.real() + sig * rule.nodes[i];
      double row_psi = 0.0, row_phi = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const cplx z(xr, a0.imag() + sig * rule.nodes[j]);
        const auto [f, g] = detail::denoise_into(z, gamma2, c, scratch.data());
        row_psi += rule.weights[j] * std::norm(f - a0);
        row_phi += rule.weights[j] * g;
      }
      p_psi += rule.weights[i] * row_psi;
      p_phi += rule.weights[i] * row_phi;
    }
    acc_psi += mass * p_psi;
    acc_phi += mass * p_phi;
  }
  const double pi = kSqrtPi * kSqrtPi;
  return {acc_psi / pi, acc_phi / pi};
}

enum class ResolvedRoute { real_direct, real_reduced, complex_2d };

ResolvedRoute resolve_route(const Constellation& c, PsiRoute route) {
  switch (route) {
    case PsiRoute::real_reduction:
      if (!c.separable())
        throw validation_error("psi: real_reduction route needs a separable constellation");
      return ResolvedRoute::real_reduced;
    case PsiRoute::complex_full:
      if (c.field() != Field::complex_)
        throw validation_error("psi: complex_full route needs a complex-field constellation");
      return ResolvedRoute::complex_2d;
    case PsiRoute::auto_route:
    default:
      if (c.field() == Field::real) return ResolvedRoute::real_direct;
      if (c.separable()) return ResolvedRoute::real_reduced;
      return ResolvedRoute::complex_2d;
  }
}

RawPair eval_routed(double sigma2, double gamma2, const Constellation& c,
                    ResolvedRoute route, std::size_t n_complex) {
  switch (route) {
    case ResolvedRoute::real_direct:
      return eval_real(sigma2, gamma2, c, 2 * n_complex);
    case ResolvedRoute::real_reduced: {
      // separable: Psi(s2,g2) = 2 Psi^R(s2/2, g2/2), likewise Phi
      const auto r = eval_real(sigma2 / 2.0, gamma2 / 2.0, c.real_part_alphabet(), 2 * n_complex);
      return {2.0 * r.psi, 2.0 * r.phi};
    }
    case ResolvedRoute::complex_2d:
    default:
      return eval_complex(sigma2, gamma2, c, n_complex);
  }
}

}  // namespace

void SEParams::validate() const {
  if (!(beta > 0.0)) throw validation_error("SEParams: beta must be > 0");
  if (!(n0 >= 0.0) || !(n0post >= 0.0))
    throw validation_error("SEParams: noise variances must be >= 0");
  if (constellation.size() == 0) throw validation_error("SEParams: empty constellation");
  quad.validate();
}

PsiPhi psi_phi(double sigma2, double gamma2, const Constellation& c, const QuadratureSpec& q,
               PsiRoute route) {
  q.validate();
  if (!(sigma2 >= 0.0)) throw validation_error("psi: sigma2 must be >= 0");
  if (sigma2 == 0.0 && gamma2 == 0.0) return {0.0, 0.0, 0.0, 0.0};  // exact limit
  if (!(gamma2 > 0.0)) throw validation_error("psi: gamma2 must be > 0");

  const ResolvedRoute rr = resolve_route(c, route);
  const auto n0 = static_cast<std::size_t>(q.nodes_per_dim);
  RawPair prev = eval_routed(sigma2, gamma2, c, rr, n0);
  std::size_t n = n0;
  // Node doubling with geometric extrapolation: delta_k = |I_k - I_{k/2}|
  // bounds the coarser rule; once the deltas decay geometrically the finer
  // rule's error is delta * r / (1 - r).
  double prev_dpsi = -1.0, prev_dphi = -1.0;
  for (int level = 0; level < 3; ++level) {
    n *= 2;
    const RawPair cur = eval_routed(sigma2, gamma2, c, rr, n);
    const double dpsi = std::abs(cur.psi - prev.psi);
    const double dphi = std::abs(cur.phi - prev.phi);
    auto certified = [](double delta, double prev_delta, double tol) {
      if (delta <= tol) return delta;
      if (prev_delta > 0.0) {
        const double r = delta / prev_delta;
        if (r <= 0.25) {
          const double extrap = delta * r / (1.0 - r);
          if (extrap <= tol) return extrap;
        }
      }
      return -1.0;
    };
    const double psi_err = certified(dpsi, prev_dpsi, std::max(q.abs_tol, q.rel_tol * std::abs(cur.psi)));
    const double phi_err = certified(dphi, prev_dphi, std::max(q.abs_tol, q.rel_tol * std::abs(cur.phi)));
    if (psi_err >= 0.0 && phi_err >= 0.0) return {cur.psi, cur.phi, psi_err, phi_err};
    prev = cur;
    prev_dpsi = dpsi;
    prev_dphi = dphi;
    if (level == 2) {
      std::ostringstream msg;
      msg << "psi/phi quadrature did not converge at sigma2=" << sigma2 << " gamma2=" << gamma2
          << " (" << c.name() << "): achieved error " << dpsi << "/" << dphi << " at " << n
          << " nodes/dim, requested " << std::max(q.abs_tol, q.rel_tol);
      throw numerical_error(msg.str());
    }
  }
  return {prev.psi, prev.phi, 0.0, 0.0};  // unreachable
}

double psi(double sigma2, double gamma2, const Constellation& c, const QuadratureSpec& q,
           PsiRoute route) {
  return psi_phi(sigma2, gamma2, c, q, route).psi;
}

namespace detail {

double psi_matched_raw(double sigma2, const Constellation& c, int nodes_per_dim,
                       PsiRoute route) {
  if (sigma2 == 0.0) return 0.0;
  return eval_routed(sigma2, sigma2, c, resolve_route(c, route),
                     static_cast<std::size_t>(nodes_per_dim))
      .psi;
}

}  // namespace detail

double phi(double sigma2, double gamma2, const Constellation& c, const QuadratureSpec& q,
           PsiRoute route) {
  return psi_phi(sigma2, gamma2, c, q, route).phi;
}

SEState se_initial_state(const SEParams& p) {
  const double var = p.constellation.moments().variance;
  return {p.n0 + p.beta * var, p.n0post + p.beta * var, 1};
}

SEState se_step(const SEState& s, const SEParams& p) {
  p.validate();
  if (p.matched()) {
    const double ps = psi(s.sigma2, s.sigma2, p.constellation, p.quad);
    const double next = p.n0 + p.beta * ps;
    return {next, next, s.t + 1};
  }
  const auto pp = psi_phi(s.sigma2, s.gamma2, p.constellation, p.quad);
  return {p.n0 + p.beta * pp.psi, p.n0post + p.beta * pp.phi, s.t + 1};
}

SETrace se_run(const SEParams& p, int max_iters, double conv_tol) {
  p.validate();
  if (max_iters < 1) throw validation_error("se_run: max_iters must be >= 1");
  SETrace trace;
  trace.states.push_back(se_initial_state(p));
  for (int t = 1; t < max_iters; ++t) {
    const SEState next = se_step(trace.states.back(), p);
    const double prev_s2 = trace.states.back().sigma2;
    trace.states.push_back(next);
    if (std::abs(next.sigma2 - prev_s2) <= conv_tol * prev_s2) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

double g_function(double sigma2, const SEParams& p) {
  p.validate();
  if (!p.matched()) throw validation_error("g_function: defined for the matched case only");
  if (sigma2 == 0.0) return p.n0;  // Psi(0,0) = 0 exactly
  return p.n0 + p.beta * psi(sigma2, sigma2, p.constellation, p.quad) - sigma2;
}

namespace {

double bisect_root(const SEParams& p, double a, double b, double ga, double gb) {
  // g(a), g(b) have opposite signs; relative tolerance 1e-10
  for (int it = 0; it < 200 && (b - a) > 1e-10 * b; ++it) {
    const double m = 0.5 * (a + b);
    const double gm = g_function(m, p);
    if (gm == 0.0) return m;
    if ((ga < 0.0) != (gm < 0.0)) {
      b = m;
      gb = gm;
    } else {
      a = m;
      ga = gm;
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> scan_roots(const SEParams& p, double lo, double hi, int points) {
  std::vector<double> roots;
  const double llo = std::log(lo), lhi = std::log(hi);
  double prev_x = lo, prev_g = g_function(lo, p);
  for (int i = 1; i < points; ++i) {
    const double x = std::exp(llo + (lhi - llo) * i / (points - 1));
    const double gx = g_function(x, p);
    if (prev_g == 0.0) {
      roots.push_back(prev_x);
    } else if ((prev_g < 0.0) != (gx < 0.0)) {
      roots.push_back(bisect_root(p, prev_x, x, prev_g, gx));
    }
    prev_x = x;
    prev_g = gx;
  }
  if (prev_g == 0.0) roots.push_back(prev_x);
  return roots;
}

}  // namespace

FixedPointReport fixed_points(const SEParams& p, double grid_lo, double grid_hi,
                              int grid_points, bool check_resolution) {
  p.validate();
  if (!p.matched()) throw validation_error("fixed_points: matched case only");
  if (grid_points < 16) throw validation_error("fixed_points: grid too small");
  const double var = p.constellation.moments().variance;
  const double lo = grid_lo > 0.0 ? grid_lo : 1e-8 * (p.n0 + p.beta);
  const double hi = grid_hi > 0.0 ? grid_hi : 10.0 * (p.n0 + p.beta * var);
  if (!(hi > lo)) throw validation_error("fixed_points: bad grid bounds");

  FixedPointReport rep;
  rep.roots = scan_roots(p, lo, hi, grid_points);
  if (p.n0 == 0.0) rep.roots.insert(rep.roots.begin(), 0.0);  // exact root of g
  if (check_resolution) {
    auto finer = scan_roots(p, lo, hi, 2 * grid_points);
    if (p.n0 == 0.0) finer.insert(finer.begin(), 0.0);
    rep.grid_warning = finer.size() != rep.roots.size();
  }
  if (rep.roots.empty())
    throw numerical_error("fixed_points: no roots found (grid bounds too narrow?)");
  std::sort(rep.roots.begin(), rep.roots.end());
  rep.count = static_cast<int>(rep.roots.size());
  rep.smallest = rep.roots.front();
  rep.largest = rep.roots.back();
  rep.eta = rep.largest > 0.0 ? p.n0 / rep.largest : 1.0;
  return rep;
}

namespace {

inline double q_func(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// uniform priors + evenly spaced collinear levels: the only closed forms we
// ship.  Returns half the level spacing, or nan.
double uniform_grid_half_spacing(const std::vector<double>& levels) {
  if (levels.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> s(levels);
  std::sort(s.begin(), s.end());
  const double d = s[1] - s[0];
  for (std::size_t i = 2; i < s.size(); ++i)
    if (std::abs((s[i] - s[i - 1]) - d) > 1e-9 * std::max(1.0, std::abs(d)))
      return std::numeric_limits<double>::quiet_NaN();
  return 0.5 * d;
}

bool uniform_priors(const Constellation& c) {
  const double u = 1.0 / static_cast<double>(c.size());
  for (double p : c.priors())
    if (std::abs(p - u) > 1e-12) return false;
  return true;
}

}  // namespace

McEstimate awgn_ser_mc(double sigma2, const Constellation& c, std::uint64_t samples,
                       std::uint64_t seed) {
  if (!(sigma2 > 0.0)) throw validation_error("awgn_ser: sigma2 must be > 0");
  if (samples < 1) throw validation_error("awgn_ser: need at least one sample");
  Rng rng(stream_seed(seed, 0xa5e5u));
  // cumulative prior table for sampling
  std::vector<double> cum(c.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    acc += c.priors()[i];
    cum[i] = acc;
  }
  cum.back() = 1.0;
  const double sig = std::sqrt(sigma2);
  std::uint64_t errors = 0;
  for (std::uint64_t k = 0; k < samples; ++k) {
    const double u = rng.uniform();
    const std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    cplx z;
    if (c.field() == Field::complex_) {
      z = c.points()[idx] + sig * rng.cnormal();
    } else {
      z = c.points()[idx] + cplx(sig * rng.normal(), 0.0);
    }
    if (hard_decision_index(z, sigma2, c) != idx) ++errors;
  }
  const double p = static_cast<double>(errors) / static_cast<double>(samples);
  return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(samples))};
}

double awgn_ser(double sigma2, const Constellation& c, SerMethod method,
                std::uint64_t mc_samples, std::uint64_t seed) {
  if (!(sigma2 > 0.0)) throw validation_error("awgn_ser: sigma2 must be > 0");
  if (method == SerMethod::monte_carlo) return awgn_ser_mc(sigma2, c, mc_samples, seed).value;

  if (!uniform_priors(c))
    throw validation_error("awgn_ser: closed form needs uniform priors");
  const double sig = std::sqrt(sigma2);

  if (c.field() == Field::real) {
    std::vector<double> lv;
    for (const auto& p : c.points()) lv.push_back(p.real());
    const double d = uniform_grid_half_spacing(lv);
    if (!std::isfinite(d))
      throw validation_error("awgn_ser: closed form unavailable for " + c.name());
    const double L = static_cast<double>(c.size());
    return 2.0 * (1.0 - 1.0 / L) * q_func(d / sig);
  }

  if (c.separable()) {
    // independent I/Q decisions on the per-dimension grid
    std::vector<double> lv;
    for (const auto& p : c.real_part_alphabet().points()) lv.push_back(p.real());
    const double d = uniform_grid_half_spacing(lv);
    if (!std::isfinite(d))
      throw validation_error("awgn_ser: closed form unavailable for " + c.name());
    const double L = static_cast<double>(lv.size());
    const double pd = 2.0 * (1.0 - 1.0 / L) * q_func(d * kSqrt2 / sig);
    return 1.0 - (1.0 - pd) * (1.0 - pd);
  }

  // collinear complex alphabet (BPSK in a complex system)
  bool collinear = true;
  for (const auto& p : c.points()) collinear = collinear && p.imag() == 0.0;
  if (collinear) {
    std::vector<double> lv;
    for (const auto& p : c.points()) lv.push_back(p.real());
    const double d = uniform_grid_half_spacing(lv);
    if (std::isfinite(d)) {
      const double L = static_cast<double>(c.size());
      return 2.0 * (1.0 - 1.0 / L) * q_func(d * kSqrt2 / sig);
    }
  }
  throw validation_error("awgn_ser: closed form unavailable for " + c.name());
}

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145817657;

// -E log2 sum_a' p_a' exp((|z-s|^2 - |z-a'|^2)/div) for one field
double rate_real_eval(double sigma2, const Constellation& c, std::size_t n) {
  const auto& rule = gauss_hermite(n);
  const double sig = std::sqrt(sigma2);
  const auto& pts = c.points();
  const auto& logp = c.log_priors();
  double acc = 0.0;
  std::vector<double> e(pts.size());
  for (const auto& [a0, mass] : c.rotation_orbit_reps()) {
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = a0.real() + sig * kSqrt2 * rule.nodes[i];
      const double ds = (x - a0.real()) * (x - a0.real());
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < pts.size(); ++a) {
        const double da = (x - pts[a].real()) * (x - pts[a].real());
        e[a] = logp[a] + (ds - da) / (2.0 * sigma2);
        m = std::max(m, e[a]);
      }
      double s = 0.0;
      for (double v : e) s += std::exp(v - m);
      inner += rule.weights[i] * (m + std::log(s));
    }
    acc += mass * inner;
  }
  return -acc / kSqrtPi / kLn2;
}

double rate_complex_eval(double sigma2, const Constellation& c, std::size_t n) {
  const auto& rule = gauss_hermite(n);
  const double sig = std::sqrt(sigma2);
  const auto& pts = c.points();
  const auto& logp = c.log_priors();
  double acc = 0.0;
  std::vector<double> e(pts.size());
  for (const auto& [a0, mass] : c.rotation_orbit_reps()) {
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const cplx z = a0 + sig * cplx(rule.nodes[i], rule.nodes[j]);
        const double ds = std::norm(z - a0);
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < pts.size(); ++a) {
          e[a] = logp[a] + (ds - std::norm(z - pts[a])) / sigma2;
          m = std::max(m, e[a]);
        }
        double s = 0.0;
        for (double v : e) s += std::exp(v - m);
        row += rule.weights[j] * (m + std::log(s));
      }
      inner += rule.weights[i] * row;
    }
    acc += mass * inner;
  }
  return -acc / (kSqrtPi * kSqrtPi) / kLn2;
}

double rate_eval(double sigma2, const Constellation& c, ResolvedRoute route, std::size_t n) {
  switch (route) {
    case ResolvedRoute::real_direct:
      return rate_real_eval(sigma2, c, 2 * n);
    case ResolvedRoute::real_reduced:
      return 2.0 * rate_real_eval(sigma2 / 2.0, c.real_part_alphabet(), 2 * n);
    case ResolvedRoute::complex_2d:
    default:
      return rate_complex_eval(sigma2, c, n);
  }
}

}  // namespace

double achievable_rate(double sigma2, const Constellation& c, const QuadratureSpec& q) {
  q.validate();
  if (!(sigma2 > 0.0)) throw validation_error("achievable_rate: sigma2 must be > 0");
  const double cap = std::log2(static_cast<double>(c.size()));
  const ResolvedRoute rr = resolve_route(c, PsiRoute::auto_route);
  std::size_t n = static_cast<std::size_t>(q.nodes_per_dim);
  double prev = rate_eval(sigma2, c, rr, n);
  double prev_delta = -1.0;
  for (int level = 0; level < 3; ++level) {
    n *= 2;
    const double cur = rate_eval(sigma2, c, rr, n);
    const double delta = std::abs(cur - prev);
    const double tol = std::max(q.abs_tol, q.rel_tol * std::abs(cur));
    bool ok = delta <= tol;
    if (!ok && prev_delta > 0.0) {
      const double r = delta / prev_delta;
      ok = r <= 0.25 && delta * r / (1.0 - r) <= tol;
    }
    if (ok) return std::clamp(cur, 0.0, cap);
    prev = cur;
    prev_delta = delta;
    if (level == 2) {
      std::ostringstream msg;
      msg << "achievable_rate quadrature did not converge at sigma2=" << sigma2 << " ("
          << c.name() << "): achieved error " << delta;
      throw numerical_error(msg.str());
    }
  }
  return std::clamp(prev, 0.0, cap);
}

}  // namespace lama
