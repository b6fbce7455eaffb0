#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

namespace dkrx {

using Complex = std::complex<double>;

/// Dense complex column vector.
using CVector = Eigen::VectorXcd;

/// Dense complex matrix, stored row-major so that a channel row h_m is contiguous.
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Deterministic random stream identified by a (seed, stream id) pair.
///
/// Stream derivation: the 64-bit engine seed is
///
///     splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x632BE59BD9B4E019))
///
/// and the engine is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. Uniform and Gaussian variates are produced by the conversions
/// below rather than by <random> distributions (whose algorithms are
/// implementation-defined), so draws are identical across compilers and
/// platforms.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Child stream keyed by this stream's identity and `child_id`.
    RngStream substream(std::uint64_t child_id) const;

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    double uniform();

    /// Standard normal pair via Box-Muller.
    std::pair<double, double> normal_pair();

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// i.i.d. CN(0, variance) entries; real and imaginary parts each carry variance/2.
CVector sample_complex_gaussian(Eigen::Index dim, double variance, RngStream& rng);

/// Minimum-norm least-squares solution (Moore-Penrose) of A x = b.
///
/// Computed by a complete orthogonal decomposition; pivots below 1e-12 times
/// the largest are treated as zero.
CVector ls_solve(const CMatrix& a, const CVector& b);

/// Tikhonov-regularized solution (A^H A + xi I)^{-1} A^H b, computed in
/// whichever of the two equivalent forms has the smaller Gram matrix.
CVector regularized_solve(const CMatrix& a, const CVector& b, double xi);

/// Singular values of `a` in decreasing order.
Eigen::VectorXd singular_values(const CMatrix& a);

/// Numerical rank with the same cutoff as ls_solve.
Eigen::Index numerical_rank(const CMatrix& a);

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

}  // namespace dkrx
