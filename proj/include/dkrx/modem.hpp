#pragma once

#include "dkrx/numerics.hpp"

#include <array>
#include <span>
#include <vector>

namespace dkrx {

using Bits = std::vector<std::uint8_t>;

inline constexpr int kBitsPerSymbol = 4;

/// Unit-average-energy 16-QAM with natural binary level ordering.
///
/// A 4-bit group b3 b2 b1 b0 maps b3b2 to the in-phase level and b1b0 to the
/// quadrature level, each through 00 -> -3, 01 -> -1, 10 -> +1, 11 -> +3,
/// and the result is scaled by 1/sqrt(10).
CVector map_bits(std::span<const std::uint8_t> bits);

/// Nearest-point hard decision. Each axis is sliced independently at
/// {-2, 0, +2}/sqrt(10); a value exactly on a boundary resolves to the
/// higher level, so 0 + 0i demaps to 1010.
Bits demap_symbols(const CVector& soft);

/// The 16 constellation points indexed by their natural-binary bit pattern.
const std::array<Complex, 16>& constellation();

double bit_error_rate(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

/// Number of differing positions; lengths must match.
std::size_t count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

/// Uniform random bits, one per byte.
Bits random_bits(std::size_t count, RngStream& rng);

}  // namespace dkrx
