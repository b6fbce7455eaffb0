#pragma once

#include "dkrx/channel.hpp"
#include "dkrx/relaxation.hpp"
#include "dkrx/topology.hpp"

#include <optional>
#include <vector>

namespace dkrx {

using ConstVectorRef = Eigen::Ref<const CVector>;

/// Running estimate carried along the dispersion order.
///
/// `u_hat` holds the BDK per-node noise estimates (one slot per antenna);
/// SDK and SRC never touch it.
struct ReceiverState {
    CVector x_hat;
    CVector u_hat;
    int cycle = 1;
    int cursor = 0;

    static ReceiverState zeros(int K, int M);
};

/// One node visit.
struct StepSnapshot {
    int cycle = 1;
    int group = 0;
    int node = 0;
    Complex residual{};
    CVector x_hat;
    CVector u_hat;             // full noise-slot vector after the step (BDK only)
    std::size_t payload = 0;   // complex values forwarded to the next node
    bool skipped = false;
};

struct RunTrace {
    std::vector<StepSnapshot> steps;
    std::vector<CVector> cycle_estimates;  // pooled root estimate after each cycle
};

struct RunOptions {
    int cycles = 1;
    CVector x0;               // empty means zero
    bool record_trace = false;
};

struct RunResult {
    CVector x_hat;
    CVector u_hat;
    RunTrace trace;
};

/// r = y_m - h_m^T x;  x += lambda_m conj(h_m) r.  Returns r.
Complex sdk_step(ReceiverState& state, ConstVectorRef h_m, Complex y_m, double lambda_m);

/// r = y_m - h_m^T x - sqrt(xi) u[m];  x += lambda*_m conj(h_m) r;
/// u[m] += lambda*_m sqrt(xi) r.  Returns r.
Complex bdk_step(ReceiverState& state, ConstVectorRef h_m, Complex y_m, int m, double xi, double lambda_star_m);

/// Standard distributed Kaczmarz receiver over `schedule` for `options.cycles`
/// cycles. Zero-energy rows are skipped.
RunResult sdk_run(const ChannelRealization& channel, const CVector& y, const LambdaStrategy& strategy,
                  double snr, const Schedule& schedule, const RunOptions& options);

/// Bayesian distributed Kaczmarz receiver. Noise slots stay at their nodes;
/// only x_hat travels. `u0` empty means zero.
RunResult bdk_run(const ChannelRealization& channel, const CVector& y, double xi, double lambda_star,
                  const Schedule& schedule, const RunOptions& options, const CVector& u0 = {});

/// Successive residual cancellation with combiners `combiners` (rows w_m^T, M x K).
/// Without combiners the normalized matched filter h_m / ||h_m||^2 is used;
/// zero-norm combiners skip their node.
CVector src_run(const ChannelRealization& channel, const CVector& y, int cycles, const Schedule& schedule,
                const std::optional<CMatrix>& combiners = std::nullopt);

struct SdkClosedForm {
    CVector x_hat;
    CMatrix V;  // row m is v_m^T; x_hat == V^H y when x0 == 0
};

/// One-cycle SDK estimate in natural node order, built from products of the
/// per-node projectors. `lambdas[m]` is lambda_m (0 marks a skipped node).
SdkClosedForm closed_form_sdk(const ChannelRealization& channel, const CVector& y,
                              const std::vector<double>& lambdas, const CVector& x0 = {});

struct BdkClosedForm {
    CVector x_hat;
    CVector u_hat;
};

/// One-cycle BDK estimates in natural node order from the effective-signal
/// expansions, with lambda*_m = lambda_star / (||h_m||^2 + xi).
BdkClosedForm closed_form_bdk(const ChannelRealization& channel, const CVector& y, double xi, double lambda_star,
                              const CVector& x0 = {}, const CVector& u0 = {});

/// First-cycle lambda_m per physical node under `strategy` for a schedule.
std::vector<double> sdk_lambdas(const ChannelRealization& channel, const LambdaStrategy& strategy, double snr,
                                const Schedule& schedule, int cycle = 1);

CVector centralized_zf(const ChannelRealization& channel, const CVector& y);
CVector centralized_rzf(const ChannelRealization& channel, const CVector& y, double xi);

/// Per-UE normalized matched filter diag(||H_k||^2)^{-1} H^H y.
CVector centralized_mf(const ChannelRealization& channel, const CVector& y);

}  // namespace dkrx
