#pragma once

#include <optional>
#include <vector>

#include "lama/se_engine.hpp"

namespace lama {

/// SNR (Eq.-2 convention, dB) at which an interference-free AWGN channel
/// reaches the target symbol error rate.
double awgn_snr_db_for_ser(const Constellation& c, double beta, double target_ser);

/// sigma2 solving awgn_ser(sigma2) = target (closed form alphabets).
double awgn_sigma2_for_ser(const Constellation& c, double target_ser);

struct TradeoffRow {
  int iterations;
  bool reachable;
  double required_snr_db;  // valid when reachable
};

/// Per-iteration-count required SNR: bisect SNR so that the decoupled SER
/// after exactly I state-evolution iterations equals target_ser.  Rows where
/// even snr_hi_db cannot reach the target are marked unreachable.
std::vector<TradeoffRow> tradeoff_study(const Constellation& c, double beta,
                                        double target_ser, int max_iters,
                                        const QuadratureSpec& q, double snr_lo_db = -10.0,
                                        double snr_hi_db = 60.0);

/// Required SNR with unlimited iterations: the decoupled SER at the
/// trace-attained (largest) fixed point.  nullopt when unreachable below
/// snr_hi_db (SER floor above target).
std::optional<double> converged_required_snr_db(const Constellation& c, double beta,
                                                double target_ser, const QuadratureSpec& q,
                                                double snr_lo_db = -10.0,
                                                double snr_hi_db = 60.0);

/// Decoupled SER of the SE fixed point at the given SNR.
double converged_ser_at_snr(const Constellation& c, double beta, double snr_db,
                            const QuadratureSpec& q);

/// sigma2 after exactly `iterations` matched SE steps at the given SNR.
double se_sigma2_after(const Constellation& c, double beta, double snr_db, int iterations,
                       const QuadratureSpec& q);

}  // namespace lama
