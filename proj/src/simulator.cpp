#include "lama/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lama/errors.hpp"

namespace lama {

std::string detector_name(DetectorKind d) {
  switch (d) {
    case DetectorKind::lama: return "lama";
    case DetectorKind::lama_estimator: return "lama_estimator";
    case DetectorKind::mf: return "mf";
    case DetectorKind::mmse: return "mmse";
  }
  return "?";
}

DetectorKind detector_from_name(const std::string& s) {
  if (s == "lama") return DetectorKind::lama;
  if (s == "lama_estimator") return DetectorKind::lama_estimator;
  if (s == "mf") return DetectorKind::mf;
  if (s == "mmse") return DetectorKind::mmse;
  throw validation_error("unknown detector: " + s);
}

double n0_from_snr_db(double snr_db, double beta, double es) {
  return beta * es / std::pow(10.0, snr_db / 10.0);
}

double snr_db_from_n0(double n0, double beta, double es) {
  return 10.0 * std::log10(beta * es / n0);
}

void SimConfig::validate() const {
  if (mr < 1 || mt < 1) throw validation_error("SimConfig: dimensions must be >= 1");
  if (trials < 1) throw validation_error("SimConfig: trials must be >= 1");
  if (max_iters < 1) throw validation_error("SimConfig: max_iters must be >= 1");
  if (snr_db_grid.empty()) throw validation_error("SimConfig: empty SNR grid");
  if (detectors.empty()) throw validation_error("SimConfig: empty detector set");
  if (constellation.field() != Field::complex_)
    throw validation_error("SimConfig: simulation drives complex-field systems");
  if (!n0post_matched && !(n0post_fixed > 0.0))
    throw validation_error("SimConfig: fixed n0post must be > 0");
  if (channel == ChannelKind::large_sparse && !gamma)
    throw validation_error("SimConfig: large_sparse channel needs gamma");
  if (threads < 1) throw validation_error("SimConfig: threads must be >= 1");
}

namespace {

std::size_t draw_symbol_index(const std::vector<double>& cum, Rng& rng) {
  const double u = rng.uniform();
  return static_cast<std::size_t>(
      std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
}

std::vector<double> cumulative_priors(const Constellation& c) {
  std::vector<double> cum(c.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    acc += c.priors()[i];
    cum[i] = acc;
  }
  cum.back() = 1.0;
  return cum;
}

std::size_t nearest_point_index(const Constellation& c, cplx z) {
  const auto& pts = c.points();
  std::size_t best = 0;
  double dbest = std::norm(z - pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = std::norm(z - pts[i]);
    if (d < dbest) {
      dbest = d;
      best = i;
    }
  }
  return best;
}

std::uint64_t count_errors(const std::vector<std::size_t>& dec,
                           const std::vector<std::size_t>& truth) {
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < dec.size(); ++i) e += dec[i] != truth[i];
  return e;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  std::vector<std::thread> pool;
  const int k = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

Eigen::VectorXcd mmse_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& H,
                             const Constellation& c, double n0) {
  if (!(n0 > 0.0)) throw validation_error("mmse_detect: n0 must be > 0");
  if (H.rows() != y.size()) throw validation_error("mmse_detect: dimension mismatch");
  const auto mt = H.cols();
  const Eigen::MatrixXcd A = H.adjoint() * H;
  Eigen::MatrixXcd reg = A;
  const double lambda = n0 / c.es();
  reg.diagonal().array() += lambda;
  const auto ldlt = reg.ldlt();
  const Eigen::VectorXcd x = ldlt.solve(H.adjoint() * y);
  const Eigen::MatrixXcd equalized = ldlt.solve(A);  // bias factors on the diagonal

  Eigen::VectorXcd out(mt);
  for (Eigen::Index i = 0; i < mt; ++i) {
    const cplx u = equalized(i, i);
    const cplx unbiased = std::abs(u) > 1e-300 ? x(i) / u : x(i);
    out(i) = c.points()[nearest_point_index(c, unbiased)];
  }
  return out;
}

TrialResult run_trial(const SimConfig& cfg, double snr_db, Rng& rng) {
  cfg.validate();
  const auto& c = cfg.constellation;
  const double n0 = n0_from_snr_db(snr_db, cfg.beta(), c.es());
  const auto cum = cumulative_priors(c);

  const auto chan = gen_channel(cfg.channel, cfg.mr, cfg.mt, cfg.gamma, rng);
  const Eigen::MatrixXcd& H = chan.H;

  std::vector<std::size_t> truth(static_cast<std::size_t>(cfg.mt));
  Eigen::VectorXcd s0(cfg.mt);
  for (int i = 0; i < cfg.mt; ++i) {
    truth[static_cast<std::size_t>(i)] = draw_symbol_index(cum, rng);
    s0(i) = c.points()[truth[static_cast<std::size_t>(i)]];
  }
  Eigen::VectorXcd n(cfg.mr);
  const double sig = std::sqrt(n0);
  for (int i = 0; i < cfg.mr; ++i) n(i) = sig * rng.cnormal();
  const Eigen::VectorXcd y = H * s0 + n;

  TrialResult res;
  res.signal_energy = (H * s0).squaredNorm();
  res.noise_energy = n.squaredNorm();

  const double n0post = cfg.n0post_matched ? n0 : cfg.n0post_fixed;
  for (DetectorKind d : cfg.detectors) {
    DetectorTrialOutcome outcome;
    try {
      switch (d) {
        case DetectorKind::lama:
        case DetectorKind::lama_estimator: {
          LamaConfig lc;
          lc.n0post = n0post;
          lc.max_iters = cfg.max_iters;
          lc.stop_rule = cfg.stop_rule;
          lc.variance_mode = d == DetectorKind::lama ? VarianceMode::analytic_g
                                                     : VarianceMode::residual_estimator;
          const auto run = lama_run<cplx>(y, H, c, lc);
          outcome.symbol_errors = count_errors(run.decision_indices, truth);
          if (d == DetectorKind::lama) {
            res.lama_sigma2_hat.clear();
            for (const auto& row : run.trace) res.lama_sigma2_hat.push_back(row.sigma2_hat);
          }
          break;
        }
        case DetectorKind::mf: {
          const Eigen::VectorXcd z = matched_filter<cplx>(y, H);
          // decoupled variance of the matched-filter output
          const double v = n0 + cfg.beta() * c.moments().variance;
          std::vector<std::size_t> dec(static_cast<std::size_t>(cfg.mt));
          for (int i = 0; i < cfg.mt; ++i)
            dec[static_cast<std::size_t>(i)] = hard_decision_index(z(i), v, c);
          outcome.symbol_errors = count_errors(dec, truth);
          break;
        }
        case DetectorKind::mmse: {
          const Eigen::VectorXcd shat = mmse_detect(y, H, c, n0);
          std::uint64_t e = 0;
          for (int i = 0; i < cfg.mt; ++i) e += shat(i) != s0(i);
          outcome.symbol_errors = e;
          break;
        }
      }
    } catch (const numerical_error&) {
      outcome.diverged = true;
    }
    res.outcomes[d] = outcome;
  }
  return res;
}

SweepResult ser_sweep(const SimConfig& cfg) {
  cfg.validate();
  SweepResult out;
  const auto n_snr = cfg.snr_db_grid.size();
  out.sigma2_hat_mean.resize(n_snr);
  out.empirical_snr_db.resize(n_snr);

  const bool track_lama = std::find(cfg.detectors.begin(), cfg.detectors.end(),
                                    DetectorKind::lama) != cfg.detectors.end();

  for (std::size_t si = 0; si < n_snr; ++si) {
    std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
    parallel_for(cfg.trials, cfg.threads, [&](int ti) {
      Rng rng(stream_seed(cfg.seed, si, static_cast<std::uint64_t>(ti)));
      results[static_cast<std::size_t>(ti)] = run_trial(cfg, cfg.snr_db_grid[si], rng);
    });

    double sig_e = 0.0, noise_e = 0.0;
    for (DetectorKind d : cfg.detectors) {
      SweepCell cell;
      cell.detector = d;
      cell.snr_db = cfg.snr_db_grid[si];
      for (const auto& r : results) {
        const auto& o = r.outcomes.at(d);
        cell.trials += 1;
        if (o.diverged) {
          cell.divergences += 1;
          continue;
        }
        cell.symbols += static_cast<std::uint64_t>(cfg.mt);
        cell.errors += o.symbol_errors;
      }
      if (cell.symbols > 0) {
        cell.ser = static_cast<double>(cell.errors) / static_cast<double>(cell.symbols);
        cell.std_error = std::sqrt(std::max(cell.ser * (1.0 - cell.ser), 0.0) /
                                   static_cast<double>(cell.symbols));
      }
      out.cells.push_back(cell);
    }
    for (const auto& r : results) {
      sig_e += r.signal_energy;
      noise_e += r.noise_energy;
    }
    out.empirical_snr_db[si] = 10.0 * std::log10(sig_e / noise_e);
    if (track_lama) {
      std::size_t depth = 0;
      for (const auto& r : results) depth = std::max(depth, r.lama_sigma2_hat.size());
      auto& mean = out.sigma2_hat_mean[si];
      mean.assign(depth, 0.0);
      std::vector<std::size_t> counts(depth, 0);
      for (const auto& r : results)
        for (std::size_t t = 0; t < r.lama_sigma2_hat.size(); ++t) {
          mean[t] += r.lama_sigma2_hat[t];
          counts[t] += 1;
        }
      for (std::size_t t = 0; t < depth; ++t)
        if (counts[t] > 0) mean[t] /= static_cast<double>(counts[t]);
    }
  }
  return out;
}

std::vector<DecouplingRow> decoupling_report(const SimConfig& cfg, double snr_db,
                                             const QuadratureSpec& quad) {
  cfg.validate();
  if (!cfg.n0post_matched)
    throw validation_error("decoupling_report: matched case only");
  const auto& c = cfg.constellation;
  const double beta = cfg.beta();
  const double n0 = n0_from_snr_db(snr_db, beta, c.es());
  const int iters = cfg.max_iters;

  // state-evolution prediction
  SEParams p;
  p.beta = beta;
  p.n0 = p.n0post = n0;
  p.constellation = c;
  p.quad = quad;
  std::vector<double> se_sigma2;
  {
    SEState s = se_initial_state(p);
    se_sigma2.push_back(s.sigma2);
    for (int t = 1; t < iters; ++t) {
      s = se_step(s, p);
      se_sigma2.push_back(s.sigma2);
    }
  }

  const auto cum = cumulative_priors(c);
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(iters));
  for (auto& v : samples) v.reserve(static_cast<std::size_t>(cfg.trials));
  std::vector<double> m2r(static_cast<std::size_t>(iters), 0.0),
      m4r(static_cast<std::size_t>(iters), 0.0), m2i(static_cast<std::size_t>(iters), 0.0),
      m4i(static_cast<std::size_t>(iters), 0.0);
  std::vector<std::uint64_t> cnt(static_cast<std::size_t>(iters), 0);

  std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(cfg.trials));
  std::vector<std::array<std::vector<double>, 4>> moments(
      static_cast<std::size_t>(cfg.trials));

  parallel_for(cfg.trials, cfg.threads, [&](int ti) {
    Rng rng(stream_seed(cfg.seed, 0x4ec0, static_cast<std::uint64_t>(ti)));
    const auto chan = gen_channel(cfg.channel, cfg.mr, cfg.mt, cfg.gamma, rng);
    Eigen::VectorXcd s0(cfg.mt);
    for (int i = 0; i < cfg.mt; ++i) s0(i) = c.points()[draw_symbol_index(cum, rng)];
    Eigen::VectorXcd n(cfg.mr);
    const double sig = std::sqrt(n0);
    for (int i = 0; i < cfg.mr; ++i) n(i) = sig * rng.cnormal();
    const Eigen::VectorXcd y = chan.H * s0 + n;

    LamaConfig lc;
    lc.n0post = n0;
    lc.max_iters = iters;
    lc.stop_rule = StopRule::fixed_iters;

    auto& rows = per_trial[static_cast<std::size_t>(ti)];
    auto& mom = moments[static_cast<std::size_t>(ti)];
    for (auto& m : mom) m.assign(static_cast<std::size_t>(iters), 0.0);
    lama_run<cplx>(y, chan.H, c, lc, nullptr, [&](const LamaState& s) {
      const std::size_t t = static_cast<std::size_t>(s.t - 1);
      if (t >= static_cast<std::size_t>(iters)) return;
      double acc = 0.0;
      for (int i = 0; i < cfg.mt; ++i) {
        const cplx d = s.z(i) - s0(i);
        acc += std::norm(d);
        mom[0][t] += d.real() * d.real();
        mom[1][t] += std::pow(d.real(), 4);
        mom[2][t] += d.imag() * d.imag();
        mom[3][t] += std::pow(d.imag(), 4);
      }
      rows.push_back(acc / cfg.mt);
    });
  });

  for (int ti = 0; ti < cfg.trials; ++ti) {
    const auto& rows = per_trial[static_cast<std::size_t>(ti)];
    for (std::size_t t = 0; t < rows.size(); ++t) {
      samples[t].push_back(rows[t]);
      m2r[t] += moments[static_cast<std::size_t>(ti)][0][t];
      m4r[t] += moments[static_cast<std::size_t>(ti)][1][t];
      m2i[t] += moments[static_cast<std::size_t>(ti)][2][t];
      m4i[t] += moments[static_cast<std::size_t>(ti)][3][t];
      cnt[t] += static_cast<std::uint64_t>(cfg.mt);
    }
  }

  std::vector<DecouplingRow> out;
  for (int t = 0; t < iters; ++t) {
    const auto& v = samples[static_cast<std::size_t>(t)];
    if (v.empty()) break;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    const double se_err = std::sqrt(var / static_cast<double>(v.size()));

    DecouplingRow row;
    row.t = t + 1;
    row.empirical_var = mean;
    row.std_error = se_err;
    row.se_sigma2 = se_sigma2[static_cast<std::size_t>(t)];
    row.z_score = se_err > 0.0 ? (mean - row.se_sigma2) / se_err
                               : std::numeric_limits<double>::quiet_NaN();
    const double n_d = static_cast<double>(cnt[static_cast<std::size_t>(t)]);
    const double v2r = m2r[static_cast<std::size_t>(t)] / n_d;
    const double v4r = m4r[static_cast<std::size_t>(t)] / n_d;
    const double v2i = m2i[static_cast<std::size_t>(t)] / n_d;
    const double v4i = m4i[static_cast<std::size_t>(t)] / n_d;
    row.kurtosis_re = v2r > 0.0 ? v4r / (v2r * v2r) - 3.0 : 0.0;
    row.kurtosis_im = v2i > 0.0 ? v4i / (v2i * v2i) - 3.0 : 0.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace lama
