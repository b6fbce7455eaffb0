#include "dkrx/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dkrx {

namespace {

constexpr double kRankCutoff = 1e-12;
constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;

void require_finite(const auto& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + " contains non-finite entries");
    }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id + kStreamSalt))) {}

RngStream RngStream::substream(std::uint64_t child_id) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(stream_id_)), child_id);
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::pair<double, double> RngStream::normal_pair() {
    // 1 - u lies in (0, 1], keeping the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

CVector sample_complex_gaussian(Eigen::Index dim, double variance, RngStream& rng) {
    if (dim < 0) {
        throw std::invalid_argument("sample_complex_gaussian: negative dimension");
    }
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw std::invalid_argument("sample_complex_gaussian: variance must be finite and >= 0");
    }
    CVector out(dim);
    const double scale = std::sqrt(variance / 2.0);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto [re, im] = rng.normal_pair();
        out[i] = Complex(scale * re, scale * im);
    }
    return out;
}

CVector ls_solve(const CMatrix& a, const CVector& b) {
    if (a.rows() != b.size()) {
        throw std::invalid_argument("ls_solve: A has " + std::to_string(a.rows()) +
                                    " rows but b has dimension " + std::to_string(b.size()));
    }
    require_finite(a, "ls_solve: A");
    require_finite(b, "ls_solve: b");

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod;
    cod.setThreshold(kRankCutoff);
    cod.compute(a);
    return cod.solve(b);
}

CVector regularized_solve(const CMatrix& a, const CVector& b, double xi) {
    if (a.rows() != b.size()) {
        throw std::invalid_argument("regularized_solve: dimension mismatch");
    }
    if (!(xi > 0.0) || !std::isfinite(xi)) {
        throw std::invalid_argument("regularized_solve: xi must be positive");
    }
    require_finite(a, "regularized_solve: A");
    require_finite(b, "regularized_solve: b");

    if (a.cols() <= a.rows()) {
        Eigen::MatrixXcd gram = a.adjoint() * a;
        gram.diagonal().array() += xi;
        return Eigen::LLT<Eigen::MatrixXcd>(gram).solve(a.adjoint() * b);
    }
    Eigen::MatrixXcd gram = a * a.adjoint();
    gram.diagonal().array() += xi;
    return a.adjoint() * Eigen::LLT<Eigen::MatrixXcd>(gram).solve(b);
}

Eigen::VectorXd singular_values(const CMatrix& a) {
    return Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues();
}

Eigen::Index numerical_rank(const CMatrix& a) {
    const Eigen::VectorXd s = singular_values(a);
    if (s.size() == 0 || s[0] == 0.0) {
        return 0;
    }
    return (s.array() > kRankCutoff * s[0]).count();
}

}  // namespace dkrx
