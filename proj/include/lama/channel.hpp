#pragma once

#include <Eigen/Dense>
#include <optional>

#include "lama/constellation.hpp"
#include "lama/rng.hpp"

namespace lama {

enum class ChannelKind { iid_gaussian, large_sparse };

struct ChannelRealization {
  Eigen::MatrixXcd H;
  ChannelKind kind = ChannelKind::iid_gaussian;
  std::optional<int> gamma;  // sparsity parameter of the large-sparse construction
};

/// iid_gaussian: entries CN(0, 1/M_R).
/// large_sparse: Bernoulli(gamma/M_T) support mask, entries CN(0, 1/Gamma_l)
/// where Gamma_l counts the column's support; all-zero columns are redrawn.
ChannelRealization gen_channel(ChannelKind kind, int mr, int mt, std::optional<int> gamma,
                               Rng& rng);

/// Real-field iid channel, entries N(0, 1/M_R).
Eigen::MatrixXd gen_channel_real(int mr, int mt, Rng& rng);

}  // namespace lama
