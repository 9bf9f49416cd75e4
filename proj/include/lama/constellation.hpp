#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lama {

using cplx = std::complex<double>;

enum class Field { real, complex_ };

struct Moments {
  cplx mean;
  double variance;
  double energy;
};

/// Finite symbol alphabet with per-point priors.  Immutable after
/// construction; safe for shared concurrent reads.
class Constellation {
 public:
  /// empty alphabet; only useful as a placeholder before assignment from a
  /// factory
  Constellation() = default;

  /// name in {BPSK, QPSK, 8-PSK, 16-PSK, 64-PSK, 256-PSK, 16-QAM, 64-QAM,
  /// 256-QAM, 4-PAM, 8-PAM, 16-PAM}; PAM requires Field::real, PSK/QAM
  /// Field::complex_ except BPSK which admits both.  Uniform priors,
  /// zero mean, unit energy.
  static Constellation make_standard(const std::string& name, Field field);

  /// one point per line: `re im prior`, '#' comments; priors must sum to 1
  /// within 1e-6 (then renormalized exactly)
  static Constellation from_file(const std::string& path, Field field = Field::complex_);

  static Constellation custom(std::string name, Field field,
                              std::vector<cplx> points, std::vector<double> priors);

  const std::string& name() const { return name_; }
  Field field() const { return field_; }
  const std::vector<cplx>& points() const { return points_; }
  const std::vector<double>& priors() const { return priors_; }
  const std::vector<double>& log_priors() const { return log_priors_; }
  std::size_t size() const { return points_.size(); }
  double es() const { return es_; }

  Moments moments() const;

  /// Cartesian-product structure: point set equals R x R for a real alphabet
  /// R with factoring priors
  bool separable() const { return separable_; }

  /// marginal alphabet of the real parts (separable constellations only);
  /// energy es()/2
  const Constellation& real_part_alphabet() const;

  /// largest k such that multiplying the point set by exp(2*pi*i/k) permutes
  /// (points, priors); 1 when no such symmetry was detected.  Exact
  /// expectations over the symbol prior may be collapsed onto
  /// rotation_orbit_reps().
  int rotation_order() const { return rotation_order_; }

  /// orbit representatives and their total prior mass under the detected
  /// rotation symmetry (the whole alphabet with its priors when order is 1)
  const std::vector<std::pair<cplx, double>>& rotation_orbit_reps() const { return orbit_reps_; }

  /// smallest squared distance between distinct points (denoiser tau guard)
  double min_sq_distance() const { return min_sq_dist_; }

 private:
  void finalize();  // sorts points, computes caches, detects structure

  std::string name_;
  Field field_ = Field::complex_;
  std::vector<cplx> points_;
  std::vector<double> priors_;
  std::vector<double> log_priors_;
  double es_ = 0.0;
  bool separable_ = false;
  std::shared_ptr<const Constellation> real_alphabet_;
  int rotation_order_ = 1;
  std::vector<std::pair<cplx, double>> orbit_reps_;
  double min_sq_dist_ = 0.0;
};

/// Names accepted by make_standard, in canonical order.
const std::vector<std::string>& standard_constellation_names();

}  // namespace lama
