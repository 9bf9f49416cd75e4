#include <doctest.h>

#include <cmath>

#include "lama/simulator.hpp"
#include "oracles.hpp"

using namespace lama;

namespace {

SimConfig base_config() {
  SimConfig cfg;
  cfg.mr = 32;
  cfg.mt = 16;
  cfg.constellation = Constellation::make_standard("QPSK", Field::complex_);
  cfg.snr_db_grid = {10.0};
  cfg.trials = 20;
  cfg.max_iters = 8;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("snr / n0 conversion round trip") {
  CHECK(n0_from_snr_db(10.0, 1.0, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(n0_from_snr_db(20.0, 0.5, 1.0) == doctest::Approx(0.005).epsilon(1e-12));
  for (double snr : {-3.0, 0.0, 12.5})
    CHECK(snr_db_from_n0(n0_from_snr_db(snr, 0.7, 1.0), 0.7, 1.0) ==
          doctest::Approx(snr).epsilon(1e-12));
}

TEST_CASE("iid channel column norms concentrate at one") {
  Rng rng(10);
  const auto chan = gen_channel(ChannelKind::iid_gaussian, 128, 64, std::nullopt, rng);
  double mean_norm = 0.0;
  for (int l = 0; l < 64; ++l) mean_norm += chan.H.col(l).squaredNorm();
  mean_norm /= 64.0;
  CHECK(mean_norm == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("large-sparse channel columns carry Bernoulli support with unit energy") {
  Rng rng(11);
  const int mr = 96, mt = 64, gamma = 8;
  const auto chan = gen_channel(ChannelKind::large_sparse, mr, mt, gamma, rng);
  double count = 0.0, mean_energy = 0.0;
  for (int l = 0; l < mt; ++l) {
    int nnz = 0;
    for (int k = 0; k < mr; ++k) nnz += chan.H(k, l) != cplx(0.0, 0.0);
    REQUIRE(nnz >= 1);  // all-zero columns are redrawn
    count += nnz;
    mean_energy += chan.H.col(l).squaredNorm();
  }
  // entries on the support have variance 1/Gamma_l, so E||h_l||^2 = 1
  CHECK(mean_energy / mt == doctest::Approx(1.0).epsilon(0.15));
  // mean nonzeros per column = Gamma * mr / mt within 3 binomial sigmas
  const double p = static_cast<double>(gamma) / mt;
  const double expect = p * mr;
  const double sd = std::sqrt(mr * p * (1 - p) / mt);
  CHECK(std::abs(count / mt - expect) <= 3.0 * sd + 1.0);
}

TEST_CASE("gamma = mt produces a fully dense mask") {
  Rng rng(12);
  const auto chan = gen_channel(ChannelKind::large_sparse, 24, 16, 16, rng);
  for (int l = 0; l < 16; ++l)
    for (int k = 0; k < 24; ++k) CHECK(chan.H(k, l) != cplx(0.0, 0.0));
}

TEST_CASE("mmse baseline matches an explicit normal-equations oracle") {
  Rng rng(13);
  const auto c = Constellation::make_standard("QPSK", Field::complex_);
  const int mr = 64, mt = 64;
  const auto H = gen_channel(ChannelKind::iid_gaussian, mr, mt, std::nullopt, rng).H;
  Eigen::VectorXcd s0(mt);
  for (int i = 0; i < mt; ++i) s0(i) = c.points()[rng.index(4)];
  const double n0 = n0_from_snr_db(15.0, 1.0, 1.0);
  Eigen::VectorXcd n(mr);
  for (int i = 0; i < mr; ++i) n(i) = std::sqrt(n0) * rng.cnormal();
  const Eigen::VectorXcd y = H * s0 + n;

  const Eigen::VectorXcd lib = mmse_detect(y, H, c, n0);

  // dense-solve oracle with explicit inversion and bias removal
  const Eigen::MatrixXcd A = H.adjoint() * H;
  const Eigen::MatrixXcd reg =
      A + (n0 / c.es()) * Eigen::MatrixXcd::Identity(mt, mt);
  const Eigen::MatrixXcd Winv = reg.fullPivLu().inverse();
  const Eigen::VectorXcd x = Winv * (H.adjoint() * y);
  const Eigen::MatrixXcd B = Winv * A;
  for (int i = 0; i < mt; ++i) {
    const cplx u = x(i) / B(i, i);
    std::size_t best = 0;
    double dbest = std::norm(u - c.points()[0]);
    for (std::size_t a = 1; a < 4; ++a) {
      const double d = std::norm(u - c.points()[a]);
      if (d < dbest) {
        dbest = d;
        best = a;
      }
    }
    CHECK(std::abs(lib(i) - c.points()[best]) <= 1e-10);
  }
}

TEST_CASE("single-stream mmse reduces to the matched-filter decision") {
  Rng rng(14);
  const auto c = Constellation::make_standard("QPSK", Field::complex_);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXcd H(6, 1);
    for (int i = 0; i < 6; ++i) H(i, 0) = 0.4 * rng.cnormal();
    Eigen::VectorXcd s0(1);
    s0 << c.points()[rng.index(4)];
    Eigen::VectorXcd n(6);
    for (int i = 0; i < 6; ++i) n(i) = 0.1 * rng.cnormal();
    const Eigen::VectorXcd y = H * s0 + n;
    // bias removal makes the scalar MMSE equal the normalized MF statistic
    const cplx mf_stat = (H.adjoint() * y)(0) / H.col(0).squaredNorm();
    std::size_t mf_dec = 0;
    double dbest = std::norm(mf_stat - c.points()[0]);
    for (std::size_t a = 1; a < 4; ++a) {
      const double d = std::norm(mf_stat - c.points()[a]);
      if (d < dbest) {
        dbest = d;
        mf_dec = a;
      }
    }
    const auto out = mmse_detect(y, H, c, 0.05);
    CHECK(out(0) == c.points()[mf_dec]);
  }
}

TEST_CASE("estimator mode lowers the square-system error floor (paired seeds)") {
  // the analytic variance track occasionally derails on unlucky square-system
  // draws at high SNR; the residual estimator recovers those trials
  SimConfig cfg;
  cfg.mr = cfg.mt = 128;
  cfg.constellation = Constellation::make_standard("16-QAM", Field::complex_);
  cfg.snr_db_grid = {32.0};
  cfg.trials = 200;
  cfg.max_iters = 20;
  cfg.seed = 21;
  cfg.detectors = {DetectorKind::lama, DetectorKind::lama_estimator};
  const auto sweep = ser_sweep(cfg);
  REQUIRE(sweep.cells.size() == 2);
  const auto& analytic = sweep.cells[0];
  const auto& estimator = sweep.cells[1];
  REQUIRE(analytic.detector == DetectorKind::lama);
  CHECK(analytic.errors > 0);  // the finite-size floor is visible here
  CHECK(estimator.errors < analytic.errors);
}

TEST_CASE("mmse with an orthonormal channel and no noise is exact") {
  const auto c = Constellation::make_standard("QPSK", Field::complex_);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(4, 2);
  H(1, 0) = 1.0;
  H(3, 1) = cplx(0.0, -1.0);
  Eigen::VectorXcd s0(2);
  s0 << c.points()[0], c.points()[3];
  const auto out = mmse_detect(H * s0, H, c, 1e-9);
  CHECK(out(0) == s0(0));
  CHECK(out(1) == s0(1));
}

TEST_CASE("noiseless well-posed trials make no symbol errors") {
  auto cfg = base_config();
  cfg.snr_db_grid = {200.0};
  cfg.detectors = {DetectorKind::lama, DetectorKind::mmse};
  const auto sweep = ser_sweep(cfg);
  for (const auto& cell : sweep.cells) {
    CHECK(cell.errors == 0);
    CHECK(cell.divergences == 0);
  }
}

TEST_CASE("trial result carries the energy split") {
  auto cfg = base_config();
  Rng rng(stream_seed(cfg.seed, 0, 0));
  const auto res = run_trial(cfg, 10.0, rng);
  CHECK(res.signal_energy > 0.0);
  CHECK(res.noise_energy > 0.0);
  CHECK(res.outcomes.count(DetectorKind::lama) == 1);
}

TEST_CASE("seeded sweeps are bit-identical") {
  auto cfg = base_config();
  cfg.detectors = {DetectorKind::lama, DetectorKind::mf, DetectorKind::mmse};
  cfg.snr_db_grid = {6.0, 10.0};
  const auto a = ser_sweep(cfg);
  const auto b = ser_sweep(cfg);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].errors == b.cells[i].errors);
    CHECK(a.cells[i].ser == b.cells[i].ser);
  }
  for (std::size_t i = 0; i < a.empirical_snr_db.size(); ++i)
    CHECK(a.empirical_snr_db[i] == b.empirical_snr_db[i]);

  // thread count must not change anything either
  cfg.threads = 3;
  const auto c3 = ser_sweep(cfg);
  for (std::size_t i = 0; i < a.cells.size(); ++i)
    CHECK(a.cells[i].errors == c3.cells[i].errors);
}

TEST_CASE("different seeds give different draws") {
  auto cfg = base_config();
  cfg.snr_db_grid = {4.0};
  const auto a = ser_sweep(cfg);
  cfg.seed = 8;
  const auto b = ser_sweep(cfg);
  CHECK(a.cells[0].errors != b.cells[0].errors);
}

TEST_CASE("energy accounting reproduces the configured SNR") {
  auto cfg = base_config();
  cfg.mr = 128;
  cfg.mt = 64;
  cfg.trials = 1000;
  cfg.max_iters = 1;
  cfg.snr_db_grid = {10.0};
  cfg.detectors = {DetectorKind::mf};
  const auto sweep = ser_sweep(cfg);
  const double ratio = std::pow(10.0, (sweep.empirical_snr_db[0] - 10.0) / 10.0);
  CHECK(std::abs(ratio - 1.0) <= 0.02);
}

TEST_CASE("matched detection beats the matched filter at moderate load") {
  auto cfg = base_config();
  cfg.mr = 64;
  cfg.mt = 64;
  cfg.trials = 200;
  cfg.snr_db_grid = {12.0};
  cfg.detectors = {DetectorKind::lama, DetectorKind::mf};
  const auto sweep = ser_sweep(cfg);
  REQUIRE(sweep.cells.size() == 2);
  const auto& lama_cell = sweep.cells[0];
  const auto& mf_cell = sweep.cells[1];
  REQUIRE(lama_cell.detector == DetectorKind::lama);
  REQUIRE(mf_cell.detector == DetectorKind::mf);
  // paired seeds: same channels and noise for both detectors
  const double margin = 3.0 * std::sqrt(mf_cell.std_error * mf_cell.std_error +
                                        lama_cell.std_error * lama_cell.std_error);
  CHECK(lama_cell.ser <= mf_cell.ser + margin);
  CHECK(lama_cell.ser < mf_cell.ser);  // strictly better here
}

TEST_CASE("lama does not lose to the linear mmse baseline at 128x64") {
  auto cfg = base_config();
  cfg.mr = 128;
  cfg.mt = 64;
  cfg.trials = 160;
  cfg.snr_db_grid = {12.0};
  cfg.detectors = {DetectorKind::lama, DetectorKind::mmse};
  const auto sweep = ser_sweep(cfg);
  const auto& lama_cell = sweep.cells[0];
  const auto& mmse_cell = sweep.cells[1];
  const double margin = 3.0 * std::sqrt(lama_cell.std_error * lama_cell.std_error +
                                        mmse_cell.std_error * mmse_cell.std_error);
  CHECK(lama_cell.ser <= mmse_cell.ser + margin);
}

TEST_CASE("single trial equals a one-cell sweep") {
  auto cfg = base_config();
  cfg.trials = 1;
  cfg.snr_db_grid = {9.0};
  const auto sweep = ser_sweep(cfg);
  Rng rng(stream_seed(cfg.seed, 0, 0));
  const auto trial = run_trial(cfg, 9.0, rng);
  CHECK(sweep.cells[0].errors == trial.outcomes.at(DetectorKind::lama).symbol_errors);
}

TEST_CASE("doubling trials shrinks the standard error binomially") {
  auto cfg = base_config();
  cfg.snr_db_grid = {6.0};
  cfg.trials = 50;
  const auto a = ser_sweep(cfg);
  cfg.trials = 200;
  const auto b = ser_sweep(cfg);
  REQUIRE(a.cells[0].ser > 0.0);
  const double shrink = b.cells[0].std_error / a.cells[0].std_error;
  CHECK(shrink < 0.75);  // ~0.5 expected, allow binomial slack
}

TEST_CASE("decoupling report smoke: massive-MIMO proxy pins the variance to n0") {
  SimConfig cfg;
  cfg.mr = 400;
  cfg.mt = 4;
  cfg.constellation = Constellation::make_standard("QPSK", Field::complex_);
  cfg.snr_db_grid = {10.0};
  cfg.trials = 200;
  cfg.max_iters = 5;
  cfg.seed = 3;
  const double n0 = n0_from_snr_db(10.0, cfg.beta(), 1.0);
  const auto rows = decoupling_report(cfg, 10.0);
  REQUIRE(rows.size() == 5);
  // t=1 is the matched-filter output with variance n0 + beta Es; from t=2 on
  // the interference term has collapsed and the variance pins to n0
  CHECK(rows[0].empirical_var ==
        doctest::Approx(n0 + cfg.beta() * 1.0).epsilon(0.05));
  for (std::size_t t = 1; t < rows.size(); ++t) {
    CHECK(std::abs(rows[t].empirical_var - n0) <= 3.0 * rows[t].std_error + 0.02 * n0);
    CHECK(std::abs(rows[t].kurtosis_re) < 0.6);
  }
}

TEST_CASE("config validation failures") {
  auto cfg = base_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg = base_config();
  cfg.snr_db_grid.clear();
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg = base_config();
  cfg.channel = ChannelKind::large_sparse;
  CHECK_THROWS_AS(cfg.validate(), validation_error);  // gamma missing
  cfg = base_config();
  cfg.constellation = Constellation::make_standard("BPSK", Field::real);
  CHECK_THROWS_AS(cfg.validate(), validation_error);
}
