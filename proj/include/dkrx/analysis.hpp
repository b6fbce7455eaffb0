#pragma once

#include "dkrx/channel.hpp"
#include "dkrx/numerics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dkrx {

enum class Execution { serial, parallel };

/// |LHS - RHS| of the per-step error identity
///   Re<x_prev - x, rho> = (||x_next - x||^2 - ||x_prev - x||^2) / (2 lambda) - (lambda/2) ||rho||^2
/// for the SDK move x_next = x_prev + lambda rho.
double per_step_identity_residual(const CVector& x_true, const CVector& x_prev, const CVector& x_next,
                                  const CVector& rho, double lambda);

/// Loose constants of the first-cycle error bound: B^2 = K p and rho^2 = sigma^2.
struct BoundParams {
    double p = 1.0;
    double sigma2 = 1.0;

    double B_sq(int K) const { return K * p; }
    double rho_sq() const { return sigma2; }
};

struct BoundCheck {
    double lhs_mean = 0;        // E[ sum_m Re<x_{m-1} - x, rho_m> ]
    double rhs_mean = 0;        // -(1/(2 lambda_1)) E||x||^2 - sum_m (lambda_m/2) E||rho_m||^2
    double diff_stderr = 0;     // standard error of the per-draw (lhs - rhs)
    double min_per_draw_slack = 0;
    double mean_x_energy = 0;   // E||x||^2, compared against B^2
    double min_rho_energy = 0;  // min_m E||rho_m||^2, compared against rho^2
    std::size_t trials = 0;

    /// lhs_mean >= rhs_mean - 3 * standard error.
    bool holds() const { return lhs_mean >= rhs_mean - 3.0 * diff_stderr; }
};

/// Monte Carlo audit of the first-cycle bound for a fixed channel with
/// unit-norm rows and a constant relaxation scalar. Only (x, n) are redrawn:
/// x ~ CN(0, p I), n ~ CN(0, sigma^2 I). Trial i uses RngStream(seed, i).
BoundCheck theorem_bound_check(const ChannelRealization& channel, std::size_t trials, double lambda,
                               const BoundParams& params, std::uint64_t seed,
                               Execution execution = Execution::parallel);

/// Real FLOPs per node for T cycles of the SDK step.
std::int64_t flops_sdk(std::int64_t K, std::int64_t T);
/// Real FLOPs per node for T cycles of the BDK step.
std::int64_t flops_bdk(std::int64_t K, std::int64_t T);
/// Values exchanged per link over T cycles (dispersion + backpropagation).
std::int64_t exchange_count(std::int64_t K, std::int64_t T);

struct ProfilePoint {
    int T = 1;
    double ber = 0;
    double ci95 = 0;
};

/// Returns the cycle count minimizing BER when the profile dips and then
/// rises: the minimum is interior and both endpoints sit above it by more
/// than the combined confidence half-widths. Otherwise nullopt.
std::optional<int> semi_convergence_profile(const std::vector<ProfilePoint>& profile);

}  // namespace dkrx
