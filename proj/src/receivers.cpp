#include "dkrx/receivers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dkrx {

namespace {

void check_inputs(const ChannelRealization& channel, const CVector& y, const Schedule& schedule) {
    if (y.size() != channel.M()) {
        throw std::invalid_argument("received signal has dimension " + std::to_string(y.size()) + ", expected M=" +
                                    std::to_string(channel.M()));
    }
    if (static_cast<int>(schedule.dispersion_order.size()) != channel.M()) {
        throw std::invalid_argument("schedule covers " + std::to_string(schedule.dispersion_order.size()) +
                                    " nodes, channel has M=" + std::to_string(channel.M()));
    }
}

CVector initial_guess(const CVector& x0, int K) {
    if (x0.size() == 0) {
        return CVector::Zero(K);
    }
    if (x0.size() != K) {
        throw std::invalid_argument("initial guess has dimension " + std::to_string(x0.size()) + ", expected K=" +
                                    std::to_string(K));
    }
    return x0;
}

CVector initial_slots(const CVector& u0, int M) {
    if (u0.size() == 0) {
        return CVector::Zero(M);
    }
    if (u0.size() != M) {
        throw std::invalid_argument("noise-slot vector has dimension " + std::to_string(u0.size()) +
                                    ", expected M=" + std::to_string(M));
    }
    return u0;
}

// h^T x without conjugation.
Complex forward(ConstVectorRef h, const CVector& x) {
    return (h.transpose() * x).value();
}

Complex sdk_update(CVector& x, ConstVectorRef h, Complex y, double lambda) {
    const Complex r = y - forward(h, x);
    x.noalias() += (lambda * r) * h.conjugate();
    return r;
}

Complex bdk_update(CVector& x, Complex& u_slot, ConstVectorRef h, Complex y, double sqrt_xi, double lambda) {
    const Complex r = y - forward(h, x) - sqrt_xi * u_slot;
    x.noalias() += (lambda * r) * h.conjugate();
    u_slot += lambda * sqrt_xi * r;
    return r;
}

// Visits every group of the schedule sequentially from the shared root
// estimate and pools the group outputs, once per cycle. `visit(x, node,
// position, cycle, group)` updates x in place.
template <typename Visit>
CVector run_cycles(const Schedule& schedule, CVector x, int cycles, RunTrace* trace, Visit&& visit) {
    if (cycles < 1) {
        throw std::invalid_argument("cycle count must be >= 1");
    }
    std::vector<CVector> outputs(schedule.groups.size());
    for (int t = 1; t <= cycles; ++t) {
        for (std::size_t g = 0; g < schedule.groups.size(); ++g) {
            CVector xg = x;
            int position = 1;
            for (int node : schedule.groups[g].leaves) {
                visit(xg, node, position++, t, static_cast<int>(g));
            }
            outputs[g] = std::move(xg);
        }
        x = pool_estimates(schedule, outputs);
        if (trace != nullptr) {
            trace->cycle_estimates.push_back(x);
        }
    }
    return x;
}

}  // namespace

ReceiverState ReceiverState::zeros(int K, int M) {
    return ReceiverState{CVector::Zero(K), CVector::Zero(M), 1, 0};
}

Complex sdk_step(ReceiverState& state, ConstVectorRef h_m, Complex y_m, double lambda_m) {
    if (h_m.size() != state.x_hat.size()) {
        throw std::invalid_argument("sdk_step: channel row and estimate differ in dimension");
    }
    const Complex r = sdk_update(state.x_hat, h_m, y_m, lambda_m);
    ++state.cursor;
    return r;
}

Complex bdk_step(ReceiverState& state, ConstVectorRef h_m, Complex y_m, int m, double xi, double lambda_star_m) {
    if (!(xi > 0.0)) {
        throw std::invalid_argument("bdk_step: xi must be positive");
    }
    if (h_m.size() != state.x_hat.size()) {
        throw std::invalid_argument("bdk_step: channel row and estimate differ in dimension");
    }
    if (m < 0 || m >= state.u_hat.size()) {
        throw std::invalid_argument("bdk_step: node index outside the noise-slot vector");
    }
    const Complex r = bdk_update(state.x_hat, state.u_hat[m], h_m, y_m, std::sqrt(xi), lambda_star_m);
    ++state.cursor;
    return r;
}

RunResult sdk_run(const ChannelRealization& channel, const CVector& y, const LambdaStrategy& strategy, double snr,
                  const Schedule& schedule, const RunOptions& options) {
    check_inputs(channel, y, schedule);
    const int K = channel.K();
    const int M = channel.M();
    const Eigen::VectorXd energy = channel.row_energy();

    RunResult result;
    RunTrace* trace = options.record_trace ? &result.trace : nullptr;
    result.x_hat = run_cycles(schedule, initial_guess(options.x0, K), options.cycles, trace,
                              [&](CVector& x, int node, int position, int cycle, int group) {
                                  const auto h = channel.H.row(node).transpose();
                                  const auto lambda =
                                      lambda_sdk(strategy, {position, cycle, energy[node], K, M, snr});
                                  Complex r{};
                                  if (lambda) {
                                      r = sdk_update(x, h, y[node], *lambda);
                                  }
                                  if (trace != nullptr) {
                                      trace->steps.push_back(StepSnapshot{cycle, group, node, r, x, CVector{},
                                                                          static_cast<std::size_t>(x.size()),
                                                                          !lambda.has_value()});
                                  }
                              });
    result.u_hat = CVector::Zero(M);
    return result;
}

RunResult bdk_run(const ChannelRealization& channel, const CVector& y, double xi, double lambda_star,
                  const Schedule& schedule, const RunOptions& options, const CVector& u0) {
    check_inputs(channel, y, schedule);
    if (!(xi > 0.0)) {
        throw std::invalid_argument("bdk_run: xi must be positive");
    }
    const int K = channel.K();
    const double sqrt_xi = std::sqrt(xi);
    const Eigen::VectorXd energy = channel.row_energy();

    // Node-resident noise estimates; never part of the forwarded message.
    CVector slots = initial_slots(u0, channel.M());

    RunResult result;
    RunTrace* trace = options.record_trace ? &result.trace : nullptr;
    result.x_hat = run_cycles(schedule, initial_guess(options.x0, K), options.cycles, trace,
                              [&](CVector& x, int node, int, int cycle, int group) {
                                  const auto h = channel.H.row(node).transpose();
                                  const double lambda = lambda_bdk(energy[node], xi, lambda_star);
                                  const Complex r = bdk_update(x, slots[node], h, y[node], sqrt_xi, lambda);
                                  if (trace != nullptr) {
                                      trace->steps.push_back(StepSnapshot{cycle, group, node, r, x, slots,
                                                                          static_cast<std::size_t>(x.size()), false});
                                  }
                              });
    result.u_hat = std::move(slots);
    return result;
}

CVector src_run(const ChannelRealization& channel, const CVector& y, int cycles, const Schedule& schedule,
                const std::optional<CMatrix>& combiners) {
    check_inputs(channel, y, schedule);
    const int K = channel.K();

    CMatrix w;
    if (combiners) {
        if (combiners->rows() != channel.M() || combiners->cols() != K) {
            throw std::invalid_argument("src_run: combiner matrix must be M x K");
        }
        w = *combiners;
    } else {
        const Eigen::VectorXd energy = channel.row_energy();
        w = CMatrix::Zero(channel.M(), K);
        for (int m = 0; m < channel.M(); ++m) {
            if (energy[m] > 0.0) {
                w.row(m) = channel.H.row(m) / energy[m];
            }
        }
    }
    const Eigen::VectorXd w_energy = w.rowwise().squaredNorm();

    // (S.2) strip the contribution of the running estimate from y_m, then
    // (S.1) add this node's combined local estimate.
    return run_cycles(schedule, CVector::Zero(K), cycles, nullptr, [&](CVector& x, int node, int, int, int) {
        if (w_energy[node] == 0.0) {
            return;
        }
        const Complex cancelled = y[node] - forward(channel.H.row(node).transpose(), x);
        x.noalias() += cancelled * w.row(node).adjoint();
    });
}

SdkClosedForm closed_form_sdk(const ChannelRealization& channel, const CVector& y, const std::vector<double>& lambdas,
                              const CVector& x0) {
    const int M = channel.M();
    const int K = channel.K();
    if (y.size() != M || static_cast<int>(lambdas.size()) != M) {
        throw std::invalid_argument("closed_form_sdk: y and lambdas must have M entries");
    }
    const CVector start = initial_guess(x0, K);

    // Backward sweep: tail = A_M ... A_{m+1}, with A_i = I - lambda_i conj(h_i) h_i^T.
    Eigen::MatrixXcd tail = Eigen::MatrixXcd::Identity(K, K);
    SdkClosedForm out;
    out.V.resize(M, K);
    for (int m = M - 1; m >= 0; --m) {
        const CVector h = channel.H.row(m).transpose();
        const CVector combine = tail * (lambdas[static_cast<std::size_t>(m)] * h.conjugate());
        out.V.row(m) = combine.conjugate().transpose();
        tail -= (tail * (lambdas[static_cast<std::size_t>(m)] * h.conjugate())) * h.transpose();
    }
    out.x_hat = tail * start + out.V.adjoint() * y;
    return out;
}

BdkClosedForm closed_form_bdk(const ChannelRealization& channel, const CVector& y, double xi, double lambda_star,
                              const CVector& x0, const CVector& u0) {
    const int M = channel.M();
    const int K = channel.K();
    if (y.size() != M) {
        throw std::invalid_argument("closed_form_bdk: y must have M entries");
    }
    const CVector start = initial_guess(x0, K);
    const CVector slots0 = initial_slots(u0, M);
    const double sqrt_xi = std::sqrt(xi);
    const Eigen::VectorXd energy = channel.row_energy();

    // Within one cycle slot m is untouched before node m, so node m's
    // effective signal is y_m - sqrt(xi) u0[m].
    std::vector<double> lambdas(static_cast<std::size_t>(M));
    CVector effective(M);
    for (int m = 0; m < M; ++m) {
        lambdas[static_cast<std::size_t>(m)] = lambda_bdk(energy[m], xi, lambda_star);
        effective[m] = y[m] - sqrt_xi * slots0[m];
    }

    // x_hat_{m} = P_m x0 + s_m with P_m = A_m ... A_1 and s_m the summed
    // projector-chain terms over the first m nodes.
    Eigen::MatrixXcd prefix = Eigen::MatrixXcd::Identity(K, K);
    CVector accumulated = CVector::Zero(K);
    BdkClosedForm out;
    out.u_hat.resize(M);
    for (int m = 0; m < M; ++m) {
        const double lam = lambdas[static_cast<std::size_t>(m)];
        const CVector h = channel.H.row(m).transpose();
        const CVector x_before = prefix * start + accumulated;
        // Diagonal factors (I - lambda*_i xi e_i e_i^H) only touch slot i.
        out.u_hat[m] = (1.0 - lam * xi) * slots0[m] + lam * sqrt_xi * (y[m] - (h.transpose() * x_before).value());

        const Eigen::MatrixXcd step = Eigen::MatrixXcd::Identity(K, K) - (lam * h.conjugate()) * h.transpose();
        prefix = step * prefix;
        accumulated = step * accumulated + (lam * effective[m]) * h.conjugate();
    }
    out.x_hat = prefix * start + accumulated;
    return out;
}

std::vector<double> sdk_lambdas(const ChannelRealization& channel, const LambdaStrategy& strategy, double snr,
                                const Schedule& schedule, int cycle) {
    const Eigen::VectorXd energy = channel.row_energy();
    std::vector<double> out(static_cast<std::size_t>(channel.M()), 0.0);
    for (const auto& group : schedule.groups) {
        int position = 1;
        for (int node : group.leaves) {
            const auto lambda = lambda_sdk(strategy, {position++, cycle, energy[node], channel.K(), channel.M(), snr});
            out[static_cast<std::size_t>(node)] = lambda.value_or(0.0);
        }
    }
    return out;
}

CVector centralized_zf(const ChannelRealization& channel, const CVector& y) { return ls_solve(channel.H, y); }

CVector centralized_rzf(const ChannelRealization& channel, const CVector& y, double xi) {
    return regularized_solve(channel.H, y, xi);
}

CVector centralized_mf(const ChannelRealization& channel, const CVector& y) {
    if (y.size() != channel.M()) {
        throw std::invalid_argument("centralized_mf: dimension mismatch");
    }
    CVector x = channel.H.adjoint() * y;
    const Eigen::VectorXd col_energy = channel.H.colwise().squaredNorm().transpose();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        x[k] = col_energy[k] > 0.0 ? x[k] / col_energy[k] : Complex{};
    }
    return x;
}

}  // namespace dkrx
