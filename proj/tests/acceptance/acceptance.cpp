// Acceptance suite: every check prints one pass/fail line; the exit code is
// the number of failed criteria.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "lama/channel.hpp"
#include "lama/detector.hpp"
#include "lama/simulator.hpp"
#include "lama/studies.hpp"
#include "lama/thresholds.hpp"

#include "../cpp/oracles.hpp"

using namespace lama;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& label, const std::string& detail) {
  std::printf("criterion %d: %s  %s (%s)\n", criterion, pass ? "PASS" : "FAIL",
              label.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void info(const std::string& text) {
  std::printf("    info: %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

const QuadratureSpec kQuad;

Eigen::VectorXcd draw_symbols(const Constellation& c, int n, Rng& rng) {
  Eigen::VectorXcd s(n);
  for (int i = 0; i < n; ++i) s(i) = c.points()[rng.index(c.size())];
  return s;
}

// ---------------------------------------------------------------------------
// 1. recovery-threshold table reproduction
void criterion1() {
  struct Row {
    const char* name;
    double beta_min, n0_min, beta_max, n0_max;
  };
  const Row rows[] = {
      {"BPSK", 2.951, 3.00e-1, 4.171, 2.43e-1},
      {"QPSK", 1.475, 1.50e-1, 2.086, 1.22e-1},
      {"16-QAM", 0.983, 3.00e-2, 1.363, 2.45e-2},
      {"64-QAM", 0.842, 7.14e-3, 1.157, 5.87e-3},
      {"8-PSK", 1.458, 4.44e-2, 1.804, 3.83e-2},
      {"16-PSK", 1.473, 1.14e-2, 1.801, 9.95e-3},
  };
  bool pass = true;
  std::string detail;
  for (const auto& row : rows) {
    const auto c = Constellation::make_standard(row.name, Field::complex_);
    const auto rep = threshold_report(c, kQuad);
    const bool ok_bmin = std::abs(rep.beta_min - row.beta_min) <= 0.01;
    const bool ok_bmax = std::abs(rep.beta_max - row.beta_max) <= 0.01;
    const bool ok_n0min = std::abs(rep.n0_min_at_beta_min - row.n0_min) <= 0.02 * row.n0_min;
    const bool ok_n0max = std::abs(rep.n0_max_at_beta_max - row.n0_max) <= 0.02 * row.n0_max;
    info(fmt("%-7s beta_min=%.4f (ref %.3f)  n0_min=%.4g (ref %.3g)  beta_max=%.4f "
             "(ref %.3f)  n0_max=%.4g (ref %.3g)",
             row.name, rep.beta_min, row.beta_min, rep.n0_min_at_beta_min, row.n0_min,
             rep.beta_max, row.beta_max, rep.n0_max_at_beta_max, row.n0_max));
    if (!(ok_bmin && ok_bmax && ok_n0min && ok_n0max)) {
      pass = false;
      detail += std::string(detail.empty() ? "" : "; ") + row.name + " out of tolerance";
    }
  }
  report(1, pass, "threshold table reproduction",
         pass ? "6 constellations within +-0.01 / 2%" : detail);
}

// ---------------------------------------------------------------------------
// 2. BPSK equivalence: detector == tanh recursion; SE fixed point solves the
//    tanh-integral equation
void criterion2() {
  const auto c = Constellation::make_standard("BPSK", Field::real);
  bool traces_ok = true;
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(stream_seed(4202, static_cast<std::uint64_t>(seed)));
    const int m = 64;
    const auto H = gen_channel_real(m, m, rng);
    Eigen::VectorXd s0(m);
    for (int i = 0; i < m; ++i) s0(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double n0 = 0.1;
    Eigen::VectorXd n(m);
    for (int i = 0; i < m; ++i) n(i) = std::sqrt(n0) * rng.normal();
    const Eigen::VectorXd y = H * s0 + n;

    LamaConfig cfg;
    cfg.n0post = n0;
    auto st = lama_init<double>(y, H, c, cfg);
    auto ref = oracles::tanh_init(y, H, n0);
    for (int t = 0; t < 10; ++t) {
      st = lama_step<double>(st, y, H, c, cfg);
      ref = oracles::tanh_step(ref, y, H, n0);
      const double d = std::max((st.shat - ref.shat).lpNorm<Eigen::Infinity>(),
                                (st.r - ref.r).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, std::max(d, std::abs(st.tau - ref.tau)));
      if (worst > 1e-12) traces_ok = false;
    }
  }

  double worst_resid = 0.0;
  for (const auto& [beta, n0] : {std::pair{0.5, 0.1}, std::pair{1.0, 0.2}}) {
    SEParams p;
    p.beta = beta;
    p.n0 = p.n0post = n0;
    p.constellation = c;
    p.quad = kQuad;
    const double s2 = fixed_points(p).largest;
    const double sig = std::sqrt(s2);
    const double integral = oracles::gauss_expect_simpson(
        [&](double z) { return 1.0 - std::tanh((1.0 + sig * z) / s2); });
    worst_resid = std::max(worst_resid, std::abs(s2 - (n0 + beta * integral)));
  }
  const bool pass = traces_ok && worst_resid <= 1e-8;
  report(2, pass, "BPSK tanh-recursion equivalence",
         fmt("trace deviation %.2e (<=1e-12/iter, 20 seeds), fixed-point residual %.2e "
             "(<=1e-8)",
             worst, worst_resid));
}

// ---------------------------------------------------------------------------
// 3. separability: Psi/Phi factor through the real reduction; thresholds and
//    critical noise match between the complex alphabet and its real part
void criterion3() {
  // the tensor rule needs a deeper node ladder than the default to certify
  // 1e-10 on the sharp low-noise part of the grid
  QuadratureSpec wide = kQuad;
  wide.nodes_per_dim = 192;
  bool psi_ok = true;
  double worst = 0.0;
  for (const char* name : {"QPSK", "16-QAM"}) {
    const auto c = Constellation::make_standard(name, Field::complex_);
    for (int i = 0; i < 50; ++i) {
      const double s2 = std::pow(10.0, std::log10(0.05) + (std::log10(20.0) - std::log10(0.05)) * i / 49.0);
      const auto full = psi_phi(s2, s2, c, wide, PsiRoute::complex_full);
      const auto red = psi_phi(s2, s2, c, wide, PsiRoute::real_reduction);
      worst = std::max({worst, std::abs(full.psi - red.psi), std::abs(full.phi - red.phi)});
    }
  }
  psi_ok = worst <= 1e-9;

  bool thr_ok = true;
  std::string thr_detail;
  for (const char* name : {"QPSK", "16-QAM"}) {
    const auto c = Constellation::make_standard(name, Field::complex_);
    const auto rep = complex_real_consistency(c, kQuad);
    const double dmin = std::abs(rep.beta_min_complex / rep.beta_min_real - 1.0);
    const double dmax = std::abs(rep.beta_max_complex / rep.beta_max_real - 1.0);
    const double rmin = std::abs(rep.n0_min_ratio / 2.0 - 1.0);
    const double rmax = std::abs(rep.n0_max_ratio / 2.0 - 1.0);
    if (dmin > 1e-3 || dmax > 1e-3 || rmin > 1e-3 || rmax > 1e-3) thr_ok = false;
    thr_detail += fmt("%s%s d_mrt=%.1e d_ert=%.1e n0x2=%.1e/%.1e", thr_detail.empty() ? "" : "; ",
                      name, dmin, dmax, rmin, rmax);
  }
  report(3, psi_ok && thr_ok, "separability (complex == doubled real reduction)",
         fmt("max |Psi/Phi deviation| %.2e (<=1e-9); %s", worst, thr_detail.c_str()));
}

// ---------------------------------------------------------------------------
// 4. decoupling validation at 128x128 (plus a larger informational size)
void run_decoupling(int m, int trials, bool gate) {
  SimConfig cfg;
  cfg.mr = cfg.mt = m;
  cfg.constellation = Constellation::make_standard("QPSK", Field::complex_);
  cfg.snr_db_grid = {10.0};
  cfg.trials = trials;
  cfg.max_iters = 10;
  cfg.seed = 4242;
  const auto rows = decoupling_report(cfg, 10.0, kQuad);
  double worst_z = 0.0;
  int worst_t = 0;
  for (const auto& row : rows) {
    if (std::abs(row.z_score) > std::abs(worst_z)) {
      worst_z = row.z_score;
      worst_t = row.t;
    }
  }
  const bool pass = std::abs(worst_z) <= 3.0;
  if (gate) {
    report(4, pass, "decoupling: empirical var(z - s0) vs state evolution",
           fmt("%dx%d, %d trials: worst |z-score| %.2f at t=%d (<=3 for t=1..10)", m, m,
               trials, std::abs(worst_z), worst_t));
  } else {
    info(fmt("decoupling at %dx%d, %d trials: worst |z-score| %.2f at t=%d %s", m, m,
             trials, std::abs(worst_z), worst_t,
             pass ? "(within 3 std errors)" : "(exceeds 3 std errors)"));
  }
}

void criterion4() {
  run_decoupling(128, 500, true);
  run_decoupling(512, 150, false);  // finite-size bias shrinks ~1/M
}

// ---------------------------------------------------------------------------
// 5. performance/complexity trade-off
void criterion5() {
  const auto c = Constellation::make_standard("QPSK", Field::complex_);
  const double target = 1e-3;
  const double bmin = mrt(c, kQuad).beta;
  const double bmax = ert(c, kQuad).beta;
  const double bstar = 0.5 * (bmin + bmax);

  bool pass = true;
  std::string detail;
  for (const auto& [beta, iters] : {std::pair{0.1, 3}, std::pair{0.5, 5}}) {
    const double awgn = awgn_snr_db_for_ser(c, beta, target);
    const auto rows = tradeoff_study(c, beta, target, iters, kQuad);
    const auto& last = rows.back();
    const double gap = last.required_snr_db - awgn;
    const bool ok = last.reachable && gap <= 0.1;
    if (!ok) pass = false;
    detail += fmt("%sbeta=%.1f I=%d gap=%.3f dB", detail.empty() ? "" : "; ", beta, iters, gap);
  }

  const double awgn_star = awgn_snr_db_for_ser(c, bstar, target);
  const auto req = converged_required_snr_db(c, bstar, target, kQuad);
  double gap_star = std::numeric_limits<double>::quiet_NaN();
  bool star_ok = false;
  if (req) {
    gap_star = *req - awgn_star;
    star_ok = std::abs(gap_star - 0.6) <= 0.15;
  }
  detail += fmt("; beta*=%.4f converged gap=%.3f dB (required 0.6+-0.15)", bstar, gap_star);
  if (!star_ok) pass = false;
  report(5, pass, "required SNR vs iteration count", detail);
}

// ---------------------------------------------------------------------------
// 6. SER floor at the exact-recovery threshold
void criterion6() {
  const auto c = Constellation::make_standard("QPSK", Field::complex_);
  const double bmax = ert(c, kQuad).beta;
  const double floor60 = converged_ser_at_snr(c, bmax, 60.0, kQuad);
  const double floor80 = converged_ser_at_snr(c, bmax, 80.0, kQuad);
  const bool pass = std::abs(floor60 - 0.08) <= 0.01;
  report(6, pass, "decoupled SER floor at beta = ERT",
         fmt("floor %.4f at 60 dB (%.4f at 80 dB), required 0.08+-0.01", floor60, floor80));
}

// ---------------------------------------------------------------------------
// 7. noiseless exact recovery at finite size
void criterion7() {
  const auto c = Constellation::make_standard("QPSK", Field::complex_);
  SEParams p;
  p.beta = 1.0;
  p.n0 = p.n0post = 0.0;
  p.constellation = c;
  p.quad = kQuad;
  const auto trace = se_run(p, 200, 0.0);
  const bool se_ok = trace.states.back().sigma2 < 1e-10;

  const int m = 256, trials = 100;
  int perfect = 0;
  LamaConfig cfg;
  cfg.n0post = 1e-12;  // noiseless matched limit
  cfg.max_iters = 200;
  cfg.stop_rule = StopRule::tau_non_improving;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(stream_seed(7077, static_cast<std::uint64_t>(trial)));
    const auto H = gen_channel(ChannelKind::iid_gaussian, m, m, std::nullopt, rng).H;
    const auto s0 = draw_symbols(c, m, rng);
    const auto run = lama_run<cplx>(H * s0, H, c, cfg);
    int errs = 0;
    for (int i = 0; i < m; ++i) errs += run.detected(i) != s0(i);
    perfect += errs == 0;
  }
  const bool pass = se_ok && perfect >= 95;
  report(7, pass, "noiseless exact recovery (256x256, beta=1)",
         fmt("%d/%d perfect trials (>=95), SE sigma2(200)=%.2e (<1e-10)", perfect, trials,
             trace.states.back().sigma2));
}

// ---------------------------------------------------------------------------
// 8. always-on property suite
void criterion8() {
  bool pass = true;
  std::string detail;
  auto subcheck = [&](const char* name, bool ok, const std::string& d = "") {
    if (!ok) {
      pass = false;
      detail += std::string(detail.empty() ? "" : "; ") + name + (d.empty() ? "" : ":" + d);
    }
    info(fmt("%-34s %s %s", name, ok ? "ok" : "FAILED", d.c_str()));
  };

  {  // gap property with the Var/(Var+s2) bound
    bool ok = true;
    for (const char* name : {"QPSK", "16-QAM", "8-PSK"}) {
      const auto c = Constellation::make_standard(name, Field::complex_);
      for (int i = 0; i < 50 && ok; ++i) {
        const double s2 = std::pow(10.0, -4.0 + 7.0 * i / 49.0);
        const double v = psi(s2, s2, c, kQuad);
        ok = v < s2 && v <= s2 * 1.0 / (1.0 + s2) + 1e-9;
      }
    }
    const auto b = Constellation::make_standard("BPSK", Field::real);
    for (int i = 0; i < 50 && ok; ++i) {
      const double s2 = std::pow(10.0, -4.0 + 7.0 * i / 49.0);
      const double v = psi(s2, s2, b, kQuad);
      ok = v < s2 && v <= s2 * 1.0 / (1.0 + s2) + 1e-9;
    }
    subcheck("gap property", ok);
  }

  {  // MRT <= ERT across the full standard family (the large-M PSK members
     // also show the threshold saturation toward 1.474 / 1.801)
    bool ok = true;
    std::string d;
    for (const auto& name : standard_constellation_names()) {
      const Field f = name.find("PAM") != std::string::npos ? Field::real : Field::complex_;
      const auto c = Constellation::make_standard(name, f);
      const double lo = mrt(c, kQuad).beta;
      const double hi = ert(c, kQuad).beta;
      info(fmt("  %-8s mrt=%.4f ert=%.4f", name.c_str(), lo, hi));
      if (!(lo <= hi)) {
        ok = false;
        d += name + " ";
      }
    }
    subcheck("mrt <= ert (12 alphabets)", ok, d);
  }

  {  // matched collapse Phi == Psi
    bool ok = true;
    for (const char* name : {"QPSK", "8-PSK"}) {
      const auto c = Constellation::make_standard(name, Field::complex_);
      for (int i = 0; i < 25 && ok; ++i) {
        const double s2 = std::pow(10.0, -2.0 + 4.0 * i / 24.0);
        const auto pp = psi_phi(s2, s2, c, kQuad);
        ok = std::abs(pp.phi - pp.psi) <= 2e-10;
      }
    }
    subcheck("matched Phi == Psi", ok);
  }

  {  // posterior-variance identity
    Rng rng(88);
    bool ok = true;
    for (const char* name : {"QPSK", "16-QAM", "8-PSK"}) {
      const auto c = Constellation::make_standard(name, Field::complex_);
      for (int k = 0; k < 100 && ok; ++k) {
        const cplx z(3.0 * (rng.uniform() - 0.5), 3.0 * (rng.uniform() - 0.5));
        const double tau = 0.05 + 2.0 * rng.uniform();
        ok = variance_identity_check(z, tau, c, 1e-5) <= 1e-6;
      }
    }
    subcheck("posterior variance identity", ok);
  }

  {  // matched-filter limit of the detector
    Rng rng(91);
    const auto c = Constellation::make_standard("QPSK", Field::complex_);
    const auto H = gen_channel(ChannelKind::iid_gaussian, 64, 32, std::nullopt, rng).H;
    const auto s0 = draw_symbols(c, 32, rng);
    Eigen::VectorXcd n(64);
    for (int i = 0; i < 64; ++i) n(i) = std::sqrt(0.05) * rng.cnormal();
    const Eigen::VectorXcd y = H * s0 + n;
    const Eigen::VectorXcd mf = matched_filter<cplx>(y, H);
    LamaConfig cfg;
    cfg.n0post = 1e9;
    auto st = lama_init<cplx>(y, H, c, cfg);
    bool ok = true;
    const double thr = 1e-3 * (1.0 + mf.lpNorm<Eigen::Infinity>());
    for (int t = 0; t < 10 && ok; ++t) {
      ok = (st.z - mf).lpNorm<Eigen::Infinity>() <= thr;
      st = lama_step<cplx>(st, y, H, c, cfg);
    }
    subcheck("matched-filter limit (n0post=1e9)", ok);
  }

  {  // massive-MIMO limit of state evolution
    SEParams p;
    p.beta = 1e-12;
    p.n0 = p.n0post = 0.37;
    p.constellation = Constellation::make_standard("QPSK", Field::complex_);
    p.quad = kQuad;
    const auto next = se_step(se_initial_state(p), p);
    subcheck("beta->0 pins sigma2 to n0", std::abs(next.sigma2 - 0.37) <= 1e-10);
  }

  {  // largest-fixed-point slope at high SNR
    SEParams p;
    p.beta = 1.0;
    p.n0 = p.n0post = 1e-6;
    p.constellation = Constellation::make_standard("QPSK", Field::complex_);
    p.quad = kQuad;
    const double ratio = fixed_points(p).largest / 1e-6;
    subcheck("sigma2/n0 in [1, 1.05] at n0=1e-6", ratio >= 1.0 && ratio <= 1.05,
             fmt("%.4f", ratio));
  }

  {  // geometric convergence below the MRT
    bool ok = true;
    for (double n0 : {0.02, 0.1, 0.5}) {
      SEParams p;
      p.beta = 0.5;
      p.n0 = p.n0post = n0;
      p.constellation = Constellation::make_standard("QPSK", Field::complex_);
      p.quad = kQuad;
      const auto trace = se_run(p, 100, 1e-12);
      ok = ok && trace.converged;
      for (std::size_t i = 2; i + 1 < trace.states.size() && ok; ++i) {
        const double d1 = trace.states[i].sigma2 - trace.states[i + 1].sigma2;
        const double d0 = trace.states[i - 1].sigma2 - trace.states[i].sigma2;
        if (d0 > 1e-13) ok = d1 / d0 < 1.0;
      }
    }
    subcheck("geometric convergence (beta < mrt)", ok);
  }

  {  // seed determinism of sweeps, independent of thread count
    SimConfig cfg;
    cfg.mr = 32;
    cfg.mt = 16;
    cfg.constellation = Constellation::make_standard("QPSK", Field::complex_);
    cfg.snr_db_grid = {6.0, 10.0};
    cfg.trials = 40;
    cfg.max_iters = 6;
    cfg.seed = 99;
    cfg.detectors = {DetectorKind::lama, DetectorKind::mf, DetectorKind::mmse};
    const auto a = ser_sweep(cfg);
    cfg.threads = 4;
    const auto b = ser_sweep(cfg);
    bool ok = a.cells.size() == b.cells.size();
    for (std::size_t i = 0; ok && i < a.cells.size(); ++i)
      ok = a.cells[i].errors == b.cells[i].errors && a.cells[i].ser == b.cells[i].ser;
    subcheck("seed determinism of sweeps", ok);
  }

  report(8, pass, "property suite", pass ? "9 sub-checks" : detail);
}

// ---------------------------------------------------------------------------
// 9. regime classifier vs fixed-point counts
void criterion9() {
  const auto c = Constellation::make_standard("QPSK", Field::complex_);
  const double bmin = mrt(c, kQuad).beta;
  const double bmax = ert(c, kQuad).beta;

  const std::vector<double> betas = {0.6, 0.9, 1.2, 1.45, 1.55, 1.70, 1.85, 2.00, 2.20, 2.60};
  const std::vector<double> noises = {0.020, 0.030, 0.045, 0.068, 0.101,
                                      0.152, 0.228, 0.341, 0.512, 0.768};
  int agree = 0, total = 0;
  std::string mism;
  for (double beta : betas) {
    for (double n0 : noises) {
      const auto reg = classify_regime(beta, n0, c, kQuad, bmin, bmax);
      SEParams p;
      p.beta = beta;
      p.n0 = p.n0post = n0;
      p.constellation = c;
      p.quad = kQuad;
      const auto fp = fixed_points(p);
      const bool label_optimal = reg.regime == Regime::optimal;
      const bool unique_root = fp.count == 1;
      ++total;
      if (label_optimal == unique_root) {
        ++agree;
      } else if (mism.size() < 200) {
        mism += fmt(" (%.2f,%.3f:%s,%d)", beta, n0,
                    label_optimal ? "opt" : "sub", fp.count);
      }
    }
  }

  // conditional-band case resolved to optimal for 16-PSK
  const auto psk = Constellation::make_standard("16-PSK", Field::complex_);
  const auto reg = classify_regime(1.73, 1.1e-2, psk, kQuad);
  const bool psk_ok = reg.regime == Regime::optimal && reg.conditional_band &&
                      reg.root_count.has_value() && *reg.root_count == 1;

  const bool pass = agree == total && psk_ok;
  report(9, pass, "regime classifier vs root counts",
         fmt("%d/%d grid cells agree%s; 16-PSK (1.73, 1.1e-2): %s in band [%.4g, %.4g] "
             "roots=%d",
             agree, total, mism.c_str(), reg.regime == Regime::optimal ? "optimal" : "suboptimal",
             reg.n0_min ? *reg.n0_min : 0.0, reg.n0_max ? *reg.n0_max : 0.0,
             reg.root_count ? *reg.root_count : -1));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("================\n%d of 9 criteria failed\n", g_failures);
  return g_failures;
}
