#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lama/channel.hpp"
#include "lama/detector.hpp"
#include "lama/se_engine.hpp"

namespace lama {

enum class DetectorKind { lama, lama_estimator, mf, mmse };

std::string detector_name(DetectorKind d);
DetectorKind detector_from_name(const std::string& s);

/// N0 = beta Es / SNR with SNR given in dB.
double n0_from_snr_db(double snr_db, double beta, double es);
double snr_db_from_n0(double n0, double beta, double es);

struct SimConfig {
  int mr = 1;
  int mt = 1;
  Constellation constellation;
  std::vector<double> snr_db_grid;
  bool n0post_matched = true;
  double n0post_fixed = 0.0;     // used when n0post_matched is false
  int trials = 1;
  int max_iters = 10;
  StopRule stop_rule = StopRule::fixed_iters;
  std::uint64_t seed = 1;
  std::vector<DetectorKind> detectors = {DetectorKind::lama};
  ChannelKind channel = ChannelKind::iid_gaussian;
  std::optional<int> gamma;
  int threads = 1;

  double beta() const { return static_cast<double>(mt) / static_cast<double>(mr); }
  void validate() const;
};

struct DetectorTrialOutcome {
  std::uint64_t symbol_errors = 0;
  bool diverged = false;
};

struct TrialResult {
  std::map<DetectorKind, DetectorTrialOutcome> outcomes;
  std::vector<double> lama_sigma2_hat;  // ||r^t||^2 / M_R per iteration
  double signal_energy = 0.0;           // ||H s0||^2
  double noise_energy = 0.0;            // ||n||^2
};

/// One seeded draw of (H, s0, n) pushed through every requested detector.
/// Divergence is recorded, not thrown.
TrialResult run_trial(const SimConfig& cfg, double snr_db, Rng& rng);

/// Unbiased linear MMSE baseline: regularized normal-equations solve, each
/// output divided by its bias factor, then nearest-point decisions.
Eigen::VectorXcd mmse_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& H,
                             const Constellation& c, double n0);

struct SweepCell {
  DetectorKind detector;
  double snr_db;
  std::uint64_t symbols = 0;
  std::uint64_t errors = 0;
  std::uint64_t divergences = 0;
  std::uint64_t trials = 0;
  double ser = 0.0;
  double std_error = 0.0;  // binomial
};

struct SweepResult {
  std::vector<SweepCell> cells;
  // mean ||r^t||^2/M_R per (snr index, iteration), when lama is in the set
  std::vector<std::vector<double>> sigma2_hat_mean;
  std::vector<double> empirical_snr_db;  // from energy accounting, per snr index
};

/// trials x SNR-grid aggregation; bit-identical for identical (config, seed)
/// regardless of thread count.
SweepResult ser_sweep(const SimConfig& cfg);

struct DecouplingRow {
  int t;
  double empirical_var;  // mean over trials of mean_l |z_l^t - s0_l|^2
  double std_error;      // across trials
  double se_sigma2;      // state-evolution prediction
  double z_score;
  double kurtosis_re;    // excess kurtosis of Re(z - s0), pooled
  double kurtosis_im;
};

/// Per-iteration comparison of the detector's Gaussian output statistics
/// against state evolution (matched case).
std::vector<DecouplingRow> decoupling_report(const SimConfig& cfg, double snr_db,
                                             const QuadratureSpec& quad = {});

}  // namespace lama
