#include "lama/constellation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lama/errors.hpp"

namespace lama {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string canonical_key(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool lex_less(const cplx& a, const cplx& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

std::vector<double> pam_levels(int m) {
  std::vector<double> lv(m);
  double e = 0.0;
  for (int i = 0; i < m; ++i) {
    lv[i] = static_cast<double>(2 * i - (m - 1));
    e += lv[i] * lv[i];
  }
  const double scale = 1.0 / std::sqrt(e / m);
  for (auto& v : lv) v *= scale;
  return lv;
}

int match_point(const std::vector<cplx>& pts, const cplx& p, double tol) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i] - p) <= tol) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

const std::vector<std::string>& standard_constellation_names() {
  static const std::vector<std::string> names = {
      "BPSK",   "QPSK",   "8-PSK",   "16-PSK", "64-PSK", "256-PSK",
      "16-QAM", "64-QAM", "256-QAM", "4-PAM",  "8-PAM",  "16-PAM"};
  return names;
}

Constellation Constellation::make_standard(const std::string& name, Field field) {
  const std::string key = canonical_key(name);
  Constellation c;
  c.field_ = field;

  auto set_uniform = [&c]() {
    c.priors_.assign(c.points_.size(), 1.0 / static_cast<double>(c.points_.size()));
  };
  auto require_complex = [&](const char* n) {
    if (field != Field::complex_)
      throw validation_error(std::string(n) + " requires a complex-field system");
  };
  auto require_real = [&](const char* n) {
    if (field != Field::real)
      throw validation_error(std::string(n) + " requires a real-field system");
  };

  if (key == "bpsk") {
    c.name_ = "BPSK";
    c.points_ = {cplx(-1.0, 0.0), cplx(1.0, 0.0)};
    set_uniform();
  } else if (key == "qpsk" || key == "4qam") {
    require_complex("QPSK");
    c.name_ = "QPSK";
    const double s = 1.0 / std::sqrt(2.0);
    c.points_ = {cplx(s, s), cplx(s, -s), cplx(-s, s), cplx(-s, -s)};
    set_uniform();
  } else if (key == "8psk" || key == "16psk" || key == "64psk" || key == "256psk") {
    require_complex("PSK");
    const int m = std::stoi(key.substr(0, key.size() - 3));
    c.name_ = std::to_string(m) + "-PSK";
    for (int k = 0; k < m; ++k) {
      const double ang = 2.0 * kPi * k / m;
      c.points_.emplace_back(std::cos(ang), std::sin(ang));
    }
    set_uniform();
  } else if (key == "16qam" || key == "64qam" || key == "256qam") {
    require_complex("QAM");
    const int m = std::stoi(key.substr(0, key.size() - 3));
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    c.name_ = std::to_string(m) + "-QAM";
    const auto lv = pam_levels(side);  // unit-energy per dimension
    const double s = 1.0 / std::sqrt(2.0);
    for (double re : lv)
      for (double im : lv) c.points_.emplace_back(s * re, s * im);
    set_uniform();
  } else if (key == "4pam" || key == "8pam" || key == "16pam") {
    require_real("PAM");
    const int m = std::stoi(key.substr(0, key.size() - 3));
    c.name_ = std::to_string(m) + "-PAM";
    for (double v : pam_levels(m)) c.points_.emplace_back(v, 0.0);
    set_uniform();
  } else {
    throw validation_error("unknown constellation name: " + name);
  }

  c.finalize();
  return c;
}

Constellation Constellation::custom(std::string name, Field field,
                                    std::vector<cplx> points, std::vector<double> priors) {
  if (points.empty()) throw validation_error("constellation needs at least one point");
  if (points.size() != priors.size())
    throw validation_error("points/priors length mismatch");
  double sum = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw validation_error("priors must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw validation_error("priors sum to " + std::to_string(sum) + ", expected 1");
  for (auto& p : priors) p /= sum;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.real()) || !std::isfinite(pt.imag()))
      throw validation_error("non-finite constellation point");
    if (field == Field::real && pt.imag() != 0.0)
      throw validation_error("real-field constellation has a point with nonzero imaginary part");
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) <= 1e-12)
        throw validation_error("duplicate constellation points");

  Constellation c;
  c.name_ = std::move(name);
  c.field_ = field;
  c.points_ = std::move(points);
  c.priors_ = std::move(priors);
  c.finalize();
  return c;
}

Constellation Constellation::from_file(const std::string& path, Field field) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open constellation file: " + path);
  std::vector<cplx> pts;
  std::vector<double> pri;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double re, im, p;
    if (!(ls >> re)) continue;  // blank
    if (!(ls >> im >> p)) {
      throw validation_error(path + ":" + std::to_string(lineno) +
                             ": expected `re im prior`");
    }
    std::string extra;
    if (ls >> extra)
      throw validation_error(path + ":" + std::to_string(lineno) + ": trailing fields");
    pts.emplace_back(re, im);
    pri.push_back(p);
  }
  std::string name = path;
  const auto slash = name.find_last_of("/\\");
  if (slash != std::string::npos) name = name.substr(slash + 1);
  try {
    return custom(name, field, std::move(pts), std::move(pri));
  } catch (const validation_error& e) {
    throw validation_error(path + ": " + e.what());
  }
}

Moments Constellation::moments() const {
  cplx mean(0.0, 0.0);
  double energy = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    mean += priors_[i] * points_[i];
    energy += priors_[i] * std::norm(points_[i]);
  }
  return {mean, energy - std::norm(mean), energy};
}

const Constellation& Constellation::real_part_alphabet() const {
  if (!separable_ || !real_alphabet_)
    throw validation_error(name_ + " is not separable");
  return *real_alphabet_;
}

void Constellation::finalize() {
  // deterministic point order: lexicographic by (Re, Im)
  std::vector<std::size_t> order(points_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return lex_less(points_[a], points_[b]);
  });
  {
    std::vector<cplx> p2(points_.size());
    std::vector<double> q2(points_.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      p2[i] = points_[order[i]];
      q2[i] = priors_[order[i]];
    }
    points_ = std::move(p2);
    priors_ = std::move(q2);
  }

  log_priors_.resize(priors_.size());
  for (std::size_t i = 0; i < priors_.size(); ++i)
    log_priors_[i] = priors_[i] > 0.0 ? std::log(priors_[i])
                                      : -std::numeric_limits<double>::infinity();

  es_ = moments().energy;

  min_sq_dist_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      min_sq_dist_ = std::min(min_sq_dist_, std::norm(points_[i] - points_[j]));
  if (!std::isfinite(min_sq_dist_)) min_sq_dist_ = 1.0;  // single point

  const double scale = std::sqrt(std::max(es_, 1e-30));
  const double tol = 1e-9 * scale;

  // -- separability (complex field only): points == R x R with factoring priors
  separable_ = false;
  if (field_ == Field::complex_) {
    std::vector<double> re_vals, re_pri, im_vals, im_pri;
    auto accumulate = [&](std::vector<double>& vals, std::vector<double>& pri, double v, double p) {
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (std::abs(vals[i] - v) <= tol) {
          pri[i] += p;
          return;
        }
      }
      vals.push_back(v);
      pri.push_back(p);
    };
    for (std::size_t i = 0; i < points_.size(); ++i) {
      accumulate(re_vals, re_pri, points_[i].real(), priors_[i]);
      accumulate(im_vals, im_pri, points_[i].imag(), priors_[i]);
    }
    bool ok = re_vals.size() == im_vals.size() &&
              re_vals.size() * re_vals.size() == points_.size();
    if (ok) {
      // sorted marginals must agree between Re and Im
      std::vector<std::size_t> ri(re_vals.size()), ii(im_vals.size());
      for (std::size_t i = 0; i < ri.size(); ++i) ri[i] = ii[i] = i;
      std::sort(ri.begin(), ri.end(), [&](auto a, auto b) { return re_vals[a] < re_vals[b]; });
      std::sort(ii.begin(), ii.end(), [&](auto a, auto b) { return im_vals[a] < im_vals[b]; });
      for (std::size_t k = 0; ok && k < ri.size(); ++k) {
        ok = std::abs(re_vals[ri[k]] - im_vals[ii[k]]) <= tol &&
             std::abs(re_pri[ri[k]] - im_pri[ii[k]]) <= 1e-12;
      }
      // every product point present with factoring prior
      for (std::size_t a = 0; ok && a < re_vals.size(); ++a) {
        for (std::size_t b = 0; ok && b < re_vals.size(); ++b) {
          const int idx = match_point(points_, cplx(re_vals[a], im_vals[b]), tol);
          ok = idx >= 0 && std::abs(priors_[idx] - re_pri[a] * im_pri[b]) <= 1e-12;
        }
      }
      if (ok) {
        auto real_alpha = std::make_shared<Constellation>();
        real_alpha->name_ = name_ + "/re";
        real_alpha->field_ = Field::real;
        std::vector<std::size_t> idx(re_vals.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](auto a, auto b) { return re_vals[a] < re_vals[b]; });
        for (auto i : idx) {
          real_alpha->points_.emplace_back(re_vals[i], 0.0);
          real_alpha->priors_.push_back(re_pri[i]);
        }
        real_alpha->finalize();
        real_alphabet_ = std::move(real_alpha);
        separable_ = true;
      }
    }
  }

  // -- rotation symmetry: largest k with exp(2*pi*i/k) * points == points
  rotation_order_ = 1;
  std::vector<int> candidates;
  if (field_ == Field::complex_) {
    candidates = {static_cast<int>(points_.size()), 4, 2};
  } else {
    candidates = {2};
  }
  for (int k : candidates) {
    if (k < 2 || static_cast<std::size_t>(k) > points_.size()) continue;
    if (points_.size() % static_cast<std::size_t>(k) != 0) continue;
    const cplx rot = std::polar(1.0, 2.0 * kPi / k);
    bool ok = true;
    for (std::size_t i = 0; ok && i < points_.size(); ++i) {
      const int j = match_point(points_, rot * points_[i], tol);
      ok = j >= 0 && std::abs(priors_[static_cast<std::size_t>(j)] - priors_[i]) <= 1e-12;
    }
    if (ok) {
      rotation_order_ = k;
      break;
    }
  }

  orbit_reps_.clear();
  if (rotation_order_ > 1) {
    const cplx rot = std::polar(1.0, 2.0 * kPi / rotation_order_);
    std::vector<bool> seen(points_.size(), false);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (seen[i]) continue;
      double mass = 0.0;
      cplx p = points_[i];
      for (int r = 0; r < rotation_order_; ++r) {
        const int j = match_point(points_, p, tol);
        if (j < 0 || seen[static_cast<std::size_t>(j)]) break;
        seen[static_cast<std::size_t>(j)] = true;
        mass += priors_[static_cast<std::size_t>(j)];
        p *= rot;
      }
      orbit_reps_.emplace_back(points_[i], mass);
    }
  } else {
    for (std::size_t i = 0; i < points_.size(); ++i)
      orbit_reps_.emplace_back(points_[i], priors_[i]);
  }
}

}  // namespace lama
