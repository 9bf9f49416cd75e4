#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lama/constellation.hpp"
#include "lama/denoiser.hpp"
#include "lama/errors.hpp"

namespace lama {

enum class StopRule { fixed_iters, tau_non_improving };
enum class VarianceMode { analytic_g, residual_estimator };

struct LamaConfig {
  double n0post = 1.0;
  int max_iters = 10;
  StopRule stop_rule = StopRule::fixed_iters;
  VarianceMode variance_mode = VarianceMode::analytic_g;

  void validate() const {
    if (max_iters < 1) throw validation_error("LamaConfig: max_iters must be >= 1");
    if (!(n0post > 0.0))
      throw validation_error(
          "LamaConfig: n0post must be > 0 (request the matched-filter limit with a large "
          "finite value)");
  }
};

template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-iteration detector state: MMSE estimate shat, residual r, Gaussian
/// output z = shat + H^H r, and the normalized variance tau.
template <typename Scalar>
struct LamaStateT {
  VecT<Scalar> shat;
  VecT<Scalar> r;
  VecT<Scalar> z;
  double tau = 0.0;
  int t = 1;
};

using LamaState = LamaStateT<cplx>;
using LamaStateReal = LamaStateT<double>;

struct LamaTraceRow {
  int t;
  double tau;
  double gamma2;      // n0post (1 + tau)
  double sigma2_hat;  // ||r||^2 / M_R
  double ser;         // vs known s0, nan when unavailable
};

template <typename Scalar>
struct LamaResultT {
  std::vector<LamaTraceRow> trace;
  LamaStateT<Scalar> state;
  std::vector<std::size_t> decision_indices;
  VecT<Scalar> detected;
  bool stopped_early = false;
};

using LamaResult = LamaResultT<cplx>;
using LamaResultReal = LamaResultT<double>;

namespace detail {

template <typename Scalar>
Scalar to_scalar(cplx v);
template <>
inline cplx to_scalar<cplx>(cplx v) { return v; }
template <>
inline double to_scalar<double>(cplx v) { return v.real(); }

template <typename Scalar>
inline cplx to_cplx(Scalar v);
template <>
inline cplx to_cplx<cplx>(cplx v) { return v; }
template <>
inline cplx to_cplx<double>(double v) { return {v, 0.0}; }

template <typename Scalar>
void check_problem(const VecT<Scalar>& y, const MatT<Scalar>& H, const Constellation& c) {
  if (H.rows() != y.size()) throw validation_error("lama: y length != receiver count");
  if (H.rows() < 1 || H.cols() < 1) throw validation_error("lama: empty channel");
  constexpr bool is_complex = std::is_same_v<Scalar, cplx>;
  if (is_complex != (c.field() == Field::complex_))
    throw validation_error("lama: constellation field does not match the system field");
}

}  // namespace detail

/// Canonical initialization: shat = E[S] 1, r = y - H shat,
/// tau = beta Var[S] / n0post, z = shat + H^H r.
template <typename Scalar>
LamaStateT<Scalar> lama_init(const VecT<Scalar>& y, const MatT<Scalar>& H,
                             const Constellation& c, const LamaConfig& cfg) {
  cfg.validate();
  detail::check_problem(y, H, c);
  const auto m = c.moments();
  const double beta = static_cast<double>(H.cols()) / static_cast<double>(H.rows());
  LamaStateT<Scalar> s;
  s.shat = VecT<Scalar>::Constant(H.cols(), detail::to_scalar<Scalar>(m.mean));
  s.r = y - H * s.shat;
  s.tau = beta * m.variance / cfg.n0post;
  s.z = s.shat + H.adjoint() * s.r;
  s.t = 1;
  return s;
}

/// One update in the canonical order: F, tau, Onsager-corrected residual,
/// then the Gaussian output for the next call.  In residual_estimator mode
/// the denoiser sees ||r||^2/M_R instead of n0post (1 + tau).
template <typename Scalar>
LamaStateT<Scalar> lama_step(const LamaStateT<Scalar>& s, const VecT<Scalar>& y,
                             const MatT<Scalar>& H, const Constellation& c,
                             const LamaConfig& cfg) {
  cfg.validate();
  detail::check_problem(y, H, c);
  const auto mt = H.cols();
  const auto mr = H.rows();
  const double beta = static_cast<double>(mt) / static_cast<double>(mr);

  const bool estimator = cfg.variance_mode == VarianceMode::residual_estimator;
  double v = cfg.n0post * (1.0 + s.tau);
  if (estimator) v = s.r.squaredNorm() / static_cast<double>(mr);

  LamaStateT<Scalar> next;
  next.shat.resize(mt);
  std::vector<double> scratch(c.size());
  double g_mean = 0.0;
  for (Eigen::Index i = 0; i < mt; ++i) {
    const auto [f, g] =
        detail::denoise_into(detail::to_cplx<Scalar>(s.z(i)), v, c, scratch.data());
    next.shat(i) = detail::to_scalar<Scalar>(f);
    g_mean += g;
  }
  g_mean /= static_cast<double>(mt);

  next.tau = beta / cfg.n0post * g_mean;
  // Onsager coefficient beta <G>/v; with the analytic variance this is
  // exactly tau^{t+1}/(1 + tau^t), in estimator mode the estimate replaces
  // the variance here as well (an inconsistent pair destabilizes the
  // residual recursion on unlucky draws)
  const double onsager = estimator ? beta * g_mean / v : next.tau / (1.0 + s.tau);
  next.r = y - H * next.shat + Scalar(onsager) * s.r;
  next.z = next.shat + H.adjoint() * next.r;
  next.t = s.t + 1;

  if (!next.shat.allFinite() || !next.r.allFinite() || !std::isfinite(next.tau))
    throw numerical_error("lama diverged at iteration " + std::to_string(s.t));
  return next;
}

/// Matched-filter output H^H y.
template <typename Scalar>
VecT<Scalar> matched_filter(const VecT<Scalar>& y, const MatT<Scalar>& H) {
  if (H.rows() != y.size()) throw validation_error("matched_filter: dimension mismatch");
  return H.adjoint() * y;
}

/// Full detection: iterate until the stop rule fires, then take element-wise
/// hard decisions on z at the current decision variance.  An optional
/// observer sees every visited state (including the initial one).
template <typename Scalar>
LamaResultT<Scalar> lama_run(
    const VecT<Scalar>& y, const MatT<Scalar>& H, const Constellation& c,
    const LamaConfig& cfg, const VecT<Scalar>* s0 = nullptr,
    const std::function<void(const LamaStateT<Scalar>&)>& observer = nullptr) {
  cfg.validate();
  detail::check_problem(y, H, c);
  const auto mr = static_cast<double>(H.rows());

  LamaResultT<Scalar> out;
  LamaStateT<Scalar> cur = lama_init<Scalar>(y, H, c, cfg);

  auto decision_variance = [&](const LamaStateT<Scalar>& s) {
    if (cfg.variance_mode == VarianceMode::residual_estimator)
      return s.r.squaredNorm() / mr;
    return cfg.n0post * (1.0 + s.tau);
  };
  auto record = [&](const LamaStateT<Scalar>& s) {
    if (observer) observer(s);
    LamaTraceRow row;
    row.t = s.t;
    row.tau = s.tau;
    row.gamma2 = cfg.n0post * (1.0 + s.tau);
    row.sigma2_hat = s.r.squaredNorm() / mr;
    row.ser = std::numeric_limits<double>::quiet_NaN();
    if (s0) {
      const double v = decision_variance(s);
      std::size_t errs = 0;
      for (Eigen::Index i = 0; i < s.z.size(); ++i) {
        const cplx zi = detail::to_cplx<Scalar>(s.z(i));
        if (c.points()[hard_decision_index(zi, v, c)] != detail::to_cplx<Scalar>((*s0)(i)))
          ++errs;
      }
      row.ser = static_cast<double>(errs) / static_cast<double>(s.z.size());
    }
    out.trace.push_back(row);
  };

  record(cur);
  for (int t = 1; t < cfg.max_iters; ++t) {
    LamaStateT<Scalar> next = lama_step<Scalar>(cur, y, H, c, cfg);
    if (cfg.stop_rule == StopRule::tau_non_improving && next.tau >= cur.tau) {
      out.stopped_early = true;  // keep the last improving state
      break;
    }
    cur = std::move(next);
    record(cur);
  }

  const double v = decision_variance(cur);
  out.decision_indices.resize(static_cast<std::size_t>(cur.z.size()));
  out.detected.resize(cur.z.size());
  for (Eigen::Index i = 0; i < cur.z.size(); ++i) {
    const std::size_t idx = hard_decision_index(detail::to_cplx<Scalar>(cur.z(i)), v, c);
    out.decision_indices[static_cast<std::size_t>(i)] = idx;
    out.detected(i) = detail::to_scalar<Scalar>(c.points()[idx]);
  }
  out.state = std::move(cur);
  return out;
}

}  // namespace lama
