#pragma once

#include "dkrx/numerics.hpp"

#include <iosfwd>
#include <vector>

namespace dkrx {

/// Diagonal of the per-antenna visibility indicator: bit k is 1 when UE k
/// reaches the antenna.
struct VisibilityMask {
    std::vector<std::uint8_t> bits;

    int size() const { return static_cast<int>(bits.size()); }
    int visible_count() const;
    bool visible(int k) const { return bits[static_cast<std::size_t>(k)] != 0; }
};

/// One block-fading channel draw: H is M x K with H(m, k) == 0 exactly
/// wherever masks[m] hides UE k.
struct ChannelRealization {
    CMatrix H;
    std::vector<VisibilityMask> masks;
    int D = 0;

    int M() const { return static_cast<int>(H.rows()); }
    int K() const { return static_cast<int>(H.cols()); }

    /// ||h_m||^2 for every antenna.
    Eigen::VectorXd row_energy() const { return H.rowwise().squaredNorm(); }
};

ChannelRealization generate_stationary(int M, int K, RngStream& rng);

/// Uniform over the C(K, D) masks with exactly D ones: K fair Bernoulli bits are
/// drawn repeatedly until their sum equals D.
VisibilityMask generate_visibility_mask(int K, int D, RngStream& rng);

/// Independent visibility mask per antenna, CN(0, 1) on the visible entries.
/// With D == K no mask bits are drawn, so the output is bitwise identical to
/// generate_stationary for the same stream.
ChannelRealization generate_nonstationary(int M, int K, int D, RngStream& rng);

/// Debug dump: header `m,k,re,im,visible`, one line per entry, 0-based indices.
void write_channel_csv(std::ostream& out, const ChannelRealization& channel);

}  // namespace dkrx
