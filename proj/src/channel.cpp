#include "lama/channel.hpp"

#include <cmath>
#include <vector>

#include "lama/errors.hpp"

namespace lama {

ChannelRealization gen_channel(ChannelKind kind, int mr, int mt, std::optional<int> gamma,
                               Rng& rng) {
  if (mr < 1 || mt < 1) throw validation_error("gen_channel: dimensions must be >= 1");
  ChannelRealization out;
  out.kind = kind;
  out.H.resize(mr, mt);

  if (kind == ChannelKind::iid_gaussian) {
    const double s = std::sqrt(1.0 / (2.0 * mr));
    for (int l = 0; l < mt; ++l)
      for (int k = 0; k < mr; ++k)
        out.H(k, l) = cplx(s * rng.normal(), s * rng.normal());
    return out;
  }

  if (!gamma) throw validation_error("gen_channel: large_sparse needs gamma");
  const int g = *gamma;
  if (g < 1 || g > mt) throw validation_error("gen_channel: gamma must be in [1, M_T]");
  out.gamma = g;
  const double p = static_cast<double>(g) / static_cast<double>(mt);
  std::vector<bool> mask(mr);
  for (int l = 0; l < mt; ++l) {
    int count = 0;
    while (count == 0) {  // reject all-zero columns
      count = 0;
      for (int k = 0; k < mr; ++k) {
        mask[k] = rng.uniform() < p;
        if (mask[k]) ++count;
      }
    }
    const double s = std::sqrt(1.0 / (2.0 * count));
    for (int k = 0; k < mr; ++k)
      out.H(k, l) = mask[k] ? cplx(s * rng.normal(), s * rng.normal()) : cplx(0.0, 0.0);
  }
  return out;
}

Eigen::MatrixXd gen_channel_real(int mr, int mt, Rng& rng) {
  if (mr < 1 || mt < 1) throw validation_error("gen_channel_real: dimensions must be >= 1");
  Eigen::MatrixXd H(mr, mt);
  const double s = std::sqrt(1.0 / mr);
  for (int l = 0; l < mt; ++l)
    for (int k = 0; k < mr; ++k) H(k, l) = s * rng.normal();
  return H;
}

}  // namespace lama
