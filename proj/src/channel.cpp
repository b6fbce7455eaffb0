#include "dkrx/channel.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dkrx {

namespace {

void check_dims(int M, int K) {
    if (M < 1 || K < 1) {
        throw std::invalid_argument("channel dimensions must be positive (M=" + std::to_string(M) +
                                    ", K=" + std::to_string(K) + ")");
    }
}

void check_effective_users(int K, int D) {
    if (D < 1 || D > K) {
        throw std::invalid_argument("effective UE count D=" + std::to_string(D) +
                                    " outside [1, " + std::to_string(K) + "]");
    }
}

Complex unit_gaussian(RngStream& rng) {
    static const double scale = std::sqrt(0.5);
    const auto [re, im] = rng.normal_pair();
    return {scale * re, scale * im};
}

}  // namespace

int VisibilityMask::visible_count() const {
    int n = 0;
    for (auto b : bits) {
        n += b != 0;
    }
    return n;
}

VisibilityMask generate_visibility_mask(int K, int D, RngStream& rng) {
    check_dims(1, K);
    check_effective_users(K, D);

    VisibilityMask mask;
    mask.bits.assign(static_cast<std::size_t>(K), 1);
    if (D == K) {
        return mask;
    }

    // One 64-bit word supplies up to 64 Bernoulli(1/2) bits per attempt.
    const int words = (K + 63) / 64;
    std::vector<std::uint64_t> draw(static_cast<std::size_t>(words));
    for (;;) {
        int ones = 0;
        for (int w = 0; w < words; ++w) {
            std::uint64_t word = rng.next_u64();
            const int used = std::min(64, K - 64 * w);
            if (used < 64) {
                word &= (std::uint64_t{1} << used) - 1;
            }
            draw[static_cast<std::size_t>(w)] = word;
            ones += std::popcount(word);
        }
        if (ones == D) {
            break;
        }
    }
    for (int k = 0; k < K; ++k) {
        mask.bits[static_cast<std::size_t>(k)] =
            static_cast<std::uint8_t>((draw[static_cast<std::size_t>(k / 64)] >> (k % 64)) & 1U);
    }
    return mask;
}

ChannelRealization generate_stationary(int M, int K, RngStream& rng) {
    check_dims(M, K);
    ChannelRealization ch;
    ch.H.resize(M, K);
    ch.D = K;
    ch.masks.assign(static_cast<std::size_t>(M), VisibilityMask{std::vector<std::uint8_t>(static_cast<std::size_t>(K), 1)});
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            ch.H(m, k) = unit_gaussian(rng);
        }
    }
    return ch;
}

ChannelRealization generate_nonstationary(int M, int K, int D, RngStream& rng) {
    check_dims(M, K);
    check_effective_users(K, D);
    ChannelRealization ch;
    ch.H = CMatrix::Zero(M, K);
    ch.D = D;
    ch.masks.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        ch.masks.push_back(generate_visibility_mask(K, D, rng));
        const auto& mask = ch.masks.back();
        for (int k = 0; k < K; ++k) {
            if (mask.visible(k)) {
                ch.H(m, k) = unit_gaussian(rng);
            }
        }
    }
    return ch;
}

void write_channel_csv(std::ostream& out, const ChannelRealization& channel) {
    out << "m,k,re,im,visible\n";
    out << std::setprecision(17);
    for (int m = 0; m < channel.M(); ++m) {
        for (int k = 0; k < channel.K(); ++k) {
            const Complex h = channel.H(m, k);
            out << m << ',' << k << ',' << h.real() << ',' << h.imag() << ','
                << (channel.masks[static_cast<std::size_t>(m)].visible(k) ? 1 : 0) << '\n';
        }
    }
}

}  // namespace dkrx
