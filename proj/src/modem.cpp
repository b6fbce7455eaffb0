#include "dkrx/modem.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace dkrx {

namespace {

const double kScale = 1.0 / std::sqrt(10.0);

// Level index 0..3 -> amplitude -3, -1, +1, +3.
constexpr double level_amplitude(unsigned idx) { return 2.0 * idx - 3.0; }

unsigned slice_axis(double v) {
    const double unscaled = v / kScale;
    if (unscaled >= 2.0) return 3;
    if (unscaled >= 0.0) return 2;
    if (unscaled >= -2.0) return 1;
    return 0;
}

}  // namespace

const std::array<Complex, 16>& constellation() {
    static const std::array<Complex, 16> points = [] {
        std::array<Complex, 16> p{};
        for (unsigned idx = 0; idx < 16; ++idx) {
            p[idx] = Complex(level_amplitude(idx >> 2) * kScale, level_amplitude(idx & 3U) * kScale);
        }
        return p;
    }();
    return points;
}

CVector map_bits(std::span<const std::uint8_t> bits) {
    if (bits.size() % kBitsPerSymbol != 0) {
        throw std::invalid_argument("map_bits: bit count must be a multiple of 4");
    }
    const auto& points = constellation();
    CVector symbols(static_cast<Eigen::Index>(bits.size() / kBitsPerSymbol));
    for (Eigen::Index s = 0; s < symbols.size(); ++s) {
        unsigned idx = 0;
        for (int b = 0; b < kBitsPerSymbol; ++b) {
            idx = (idx << 1) | (bits[static_cast<std::size_t>(s * kBitsPerSymbol + b)] & 1U);
        }
        symbols[s] = points[idx];
    }
    return symbols;
}

Bits demap_symbols(const CVector& soft) {
    Bits bits(static_cast<std::size_t>(soft.size()) * kBitsPerSymbol);
    for (Eigen::Index s = 0; s < soft.size(); ++s) {
        const unsigned idx = (slice_axis(soft[s].real()) << 2) | slice_axis(soft[s].imag());
        for (int b = 0; b < kBitsPerSymbol; ++b) {
            bits[static_cast<std::size_t>(s * kBitsPerSymbol + b)] =
                static_cast<std::uint8_t>((idx >> (kBitsPerSymbol - 1 - b)) & 1U);
        }
    }
    return bits;
}

std::size_t count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
    if (tx.size() != rx.size()) {
        throw std::invalid_argument("bit sequences differ in length");
    }
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx.size(); ++i) {
        errors += (tx[i] & 1U) != (rx[i] & 1U);
    }
    return errors;
}

double bit_error_rate(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
    if (tx.empty()) {
        throw std::invalid_argument("bit_error_rate: empty input");
    }
    return static_cast<double>(count_bit_errors(tx, rx)) / static_cast<double>(tx.size());
}

Bits random_bits(std::size_t count, RngStream& rng) {
    Bits bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) {
            word = rng.next_u64();
        }
        bits[i] = static_cast<std::uint8_t>(word & 1U);
        word >>= 1;
    }
    return bits;
}

}  // namespace dkrx
