#include "dkrx/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dkrx {

namespace {

constexpr double kUnitNormTolerance = 1e-12;

struct BoundDraw {
    double lhs = 0;
    double rhs = 0;
    double x_energy = 0;
};

// One (x, n) draw; rho_energy[m] accumulates ||rho_m||^2.
BoundDraw bound_draw(const ChannelRealization& channel, double lambda, const BoundParams& params, RngStream rng,
                     std::vector<double>& rho_energy) {
    const int M = channel.M();
    const int K = channel.K();
    const CVector x = sample_complex_gaussian(K, params.p, rng);
    const CVector n = sample_complex_gaussian(M, params.sigma2, rng);
    const CVector y = channel.H * x + n;

    BoundDraw d;
    d.x_energy = x.squaredNorm();
    d.rhs = -d.x_energy / (2.0 * lambda);
    CVector estimate = CVector::Zero(K);
    for (int m = 0; m < M; ++m) {
        const auto h = channel.H.row(m).transpose();
        const Complex r = y[m] - (h.transpose() * estimate).value();
        const CVector rho = h.conjugate() * r;
        const double rho_sq = rho.squaredNorm();
        d.lhs += (estimate - x).dot(rho).real();
        d.rhs -= 0.5 * lambda * rho_sq;
        rho_energy[static_cast<std::size_t>(m)] += rho_sq;
        estimate.noalias() += lambda * rho;
    }
    return d;
}

}  // namespace

double per_step_identity_residual(const CVector& x_true, const CVector& x_prev, const CVector& x_next,
                                  const CVector& rho, double lambda) {
    if (x_true.size() != x_prev.size() || x_prev.size() != x_next.size() || x_next.size() != rho.size()) {
        throw std::invalid_argument("per_step_identity_residual: dimension mismatch");
    }
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("per_step_identity_residual: lambda must be positive");
    }
    const double lhs = (x_prev - x_true).dot(rho).real();
    const double rhs = ((x_next - x_true).squaredNorm() - (x_prev - x_true).squaredNorm()) / (2.0 * lambda) -
                       0.5 * lambda * rho.squaredNorm();
    return std::abs(lhs - rhs);
}

BoundCheck theorem_bound_check(const ChannelRealization& channel, std::size_t trials, double lambda,
                               const BoundParams& params, std::uint64_t seed, Execution execution) {
    if (trials < 2) {
        throw std::invalid_argument("theorem_bound_check: need at least 2 trials");
    }
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("theorem_bound_check: lambda must be positive");
    }
    // Unit rows make lambda_m = lambda / ||h_m||^2 identical across nodes.
    const Eigen::VectorXd energy = channel.row_energy();
    if ((energy.array() - 1.0).abs().maxCoeff() > kUnitNormTolerance) {
        throw std::invalid_argument("theorem_bound_check: rows must have unit norm (constant per-node lambda)");
    }

    const auto M = static_cast<std::size_t>(channel.M());
    std::vector<BoundDraw> draws(trials);
    std::vector<std::vector<double>> rho_energy(trials, std::vector<double>(M, 0.0));
    const auto n = static_cast<std::int64_t>(trials);

    if (execution == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            draws[idx] = bound_draw(channel, lambda, params, RngStream(seed, idx), rho_energy[idx]);
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            draws[idx] = bound_draw(channel, lambda, params, RngStream(seed, idx), rho_energy[idx]);
        }
    }

    // Reduction in ascending trial order.
    BoundCheck out;
    out.trials = trials;
    out.min_per_draw_slack = std::numeric_limits<double>::infinity();
    double diff_sum = 0.0;
    double diff_sq_sum = 0.0;
    std::vector<double> rho_mean(M, 0.0);
    for (std::size_t i = 0; i < trials; ++i) {
        const double diff = draws[i].lhs - draws[i].rhs;
        out.lhs_mean += draws[i].lhs;
        out.rhs_mean += draws[i].rhs;
        out.mean_x_energy += draws[i].x_energy;
        diff_sum += diff;
        diff_sq_sum += diff * diff;
        out.min_per_draw_slack = std::min(out.min_per_draw_slack, diff);
        for (std::size_t m = 0; m < M; ++m) {
            rho_mean[m] += rho_energy[i][m];
        }
    }
    const double count = static_cast<double>(trials);
    out.lhs_mean /= count;
    out.rhs_mean /= count;
    out.mean_x_energy /= count;
    const double diff_mean = diff_sum / count;
    const double variance = std::max(0.0, (diff_sq_sum - count * diff_mean * diff_mean) / (count - 1.0));
    out.diff_stderr = std::sqrt(variance / count);
    out.min_rho_energy = *std::min_element(rho_mean.begin(), rho_mean.end()) / count;
    return out;
}

std::int64_t flops_sdk(std::int64_t K, std::int64_t T) {
    if (K < 1 || T < 1) {
        throw std::invalid_argument("flops_sdk: K and T must be >= 1");
    }
    return (12 * K + 2) * T;
}

std::int64_t flops_bdk(std::int64_t K, std::int64_t T) {
    if (K < 1 || T < 1) {
        throw std::invalid_argument("flops_bdk: K and T must be >= 1");
    }
    return (12 * K + 6) * T;
}

std::int64_t exchange_count(std::int64_t K, std::int64_t T) {
    if (K < 1 || T < 1) {
        throw std::invalid_argument("exchange_count: K and T must be >= 1");
    }
    return 4 * K * T;
}

std::optional<int> semi_convergence_profile(const std::vector<ProfilePoint>& profile) {
    if (profile.size() < 3) {
        throw std::invalid_argument("semi_convergence_profile: need at least 3 points");
    }
    for (std::size_t i = 1; i < profile.size(); ++i) {
        if (profile[i].T <= profile[i - 1].T) {
            throw std::invalid_argument("semi_convergence_profile: points must be sorted by T");
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < profile.size(); ++i) {
        if (profile[i].ber < profile[best].ber) {
            best = i;
        }
    }
    if (best == 0 || best + 1 == profile.size()) {
        return std::nullopt;
    }
    const auto& lo = profile[best];
    const auto& first = profile.front();
    const auto& last = profile.back();
    const bool fell = first.ber - lo.ber > first.ci95 + lo.ci95;
    const bool rose = last.ber - lo.ber > last.ci95 + lo.ci95;
    if (fell && rose) {
        return lo.T;
    }
    return std::nullopt;
}

}  // namespace dkrx
