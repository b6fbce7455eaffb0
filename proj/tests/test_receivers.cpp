#include "doctest.h"

#include "dkrx/receivers.hpp"

#include <stdexcept>
#include <cmath>

using namespace dkrx;

namespace {

struct Instance {
    ChannelRealization channel;
    CVector x;
    CVector y;
};

Instance make_instance(int M, int K, double sigma2, std::uint64_t seed, std::optional<int> D = std::nullopt) {
    RngStream rng(seed, 0);
    Instance in;
    in.channel = D ? generate_nonstationary(M, K, *D, rng) : generate_stationary(M, K, rng);
    in.x = sample_complex_gaussian(K, 1.0, rng);
    in.y = in.channel.H * in.x + sample_complex_gaussian(M, sigma2, rng);
    return in;
}

double max_abs(const CVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

RunOptions cycles(int T, bool trace = false) {
    RunOptions o;
    o.cycles = T;
    o.record_trace = trace;
    return o;
}

}  // namespace

TEST_CASE("sdk_step examples") {
    ReceiverState s = ReceiverState::zeros(1, 1);
    CVector h1(1);
    h1 << 1.0;
    CHECK(sdk_step(s, h1, 1.0, 1.0) == Complex(1.0));
    CHECK(s.x_hat[0] == Complex(1.0));

    // already consistent
    const CVector before = s.x_hat;
    CHECK(sdk_step(s, h1, 1.0, 0.7) == Complex(0.0));
    CHECK((s.x_hat.array() == before.array()).all());

    ReceiverState s2 = ReceiverState::zeros(2, 1);
    CVector h2(2);
    h2 << 1.0, Complex(0, 1);
    CHECK(sdk_step(s2, h2, 2.0, 0.25) == Complex(2.0));
    CHECK(std::abs(s2.x_hat[0] - Complex(0.5, 0)) < 1e-15);
    CHECK(std::abs(s2.x_hat[1] - Complex(0, -0.5)) < 1e-15);
    CHECK(s2.u_hat.isZero(0.0));
}

TEST_CASE("sdk_run converges on consistent systems") {
    const auto in = make_instance(32, 4, 0.0, 21);
    const auto run = sdk_run(in.channel, in.y, LambdaStrategy::constant(1.0), 1.0, make_schedule(build_chain(32)),
                             cycles(200, true));
    CHECK((run.x_hat - in.x).norm() / in.x.norm() < 1e-6);
    CHECK(run.trace.steps.size() == 32u * 200u);
    double prev = in.x.norm();
    for (const auto& estimate : run.trace.cycle_estimates) {
        const double err = (estimate - in.x).norm();
        CHECK(err <= prev * (1 + 1e-12) + 1e-14);
        prev = err;
    }
}

TEST_CASE("single node single cycle") {
    ChannelRealization ch;
    ch.H = CMatrix::Ones(1, 1);
    ch.masks = {VisibilityMask{{1}}};
    ch.D = 1;
    CVector y = CVector::Ones(1);
    const auto run =
        sdk_run(ch, y, LambdaStrategy::constant(1.0), 1.0, make_schedule(build_chain(1)), cycles(1));
    CHECK(run.x_hat[0] == Complex(1.0));
}

TEST_CASE("sdk_run rejects bad dimensions") {
    const auto in = make_instance(8, 2, 1.0, 22);
    const auto schedule = make_schedule(build_chain(8));
    CHECK_THROWS_AS(sdk_run(in.channel, CVector::Zero(7), LambdaStrategy::proposed(), 1.0, schedule, cycles(1)),
                    std::invalid_argument);
    RunOptions bad_x0 = cycles(1);
    bad_x0.x0 = CVector::Zero(3);
    CHECK_THROWS_AS(sdk_run(in.channel, in.y, LambdaStrategy::proposed(), 1.0, schedule, bad_x0),
                    std::invalid_argument);
    CHECK_THROWS_AS(sdk_run(in.channel, in.y, LambdaStrategy::proposed(), 1.0, schedule, cycles(0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(sdk_run(in.channel, in.y, LambdaStrategy::proposed(), 1.0, make_schedule(build_chain(7)),
                            cycles(1)),
                    std::invalid_argument);
}

TEST_CASE("closed-form SDK matches the recursion") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const int M = 1 + static_cast<int>(seed % 17);
        const int K = 1 + static_cast<int>(seed % 5);
        const auto in = make_instance(M, K, 0.5, 100 + seed);
        const auto schedule = make_schedule(build_chain(M));
        RngStream rng(200 + seed, 0);
        RunOptions opts = cycles(1);
        opts.x0 = sample_complex_gaussian(K, 1.0, rng);

        for (const auto& strategy : {LambdaStrategy::proposed(), LambdaStrategy::constant(0.6)}) {
            const auto lambdas = sdk_lambdas(in.channel, strategy, 2.0, schedule);
            const auto closed = closed_form_sdk(in.channel, in.y, lambdas, opts.x0);
            const auto run = sdk_run(in.channel, in.y, strategy, 2.0, schedule, opts);
            CHECK(max_abs(closed.x_hat - run.x_hat) < 1e-10);

            const auto from_zero = closed_form_sdk(in.channel, in.y, lambdas);
            CHECK(max_abs(from_zero.V.adjoint() * in.y - from_zero.x_hat) < 1e-10);
        }
    }
}

TEST_CASE("closed-form SDK single node expansion") {
    const auto in = make_instance(1, 3, 0.3, 31);
    RngStream rng(32, 0);
    const CVector x0 = sample_complex_gaussian(3, 1.0, rng);
    const double lam = 0.4;
    const CVector h = in.channel.H.row(0).transpose();
    // x0 - lambda conj(h) h^T x0 + lambda conj(h) y
    const CVector expected = x0 - lam * h.conjugate() * (h.transpose() * x0).value() + lam * h.conjugate() * in.y[0];
    CHECK(max_abs(closed_form_sdk(in.channel, in.y, {lam}, x0).x_hat - expected) < 1e-14);
}

TEST_CASE("SRC equals SDK with unit relaxation") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const int M = 1 + static_cast<int>((seed * 7) % 32);
        const int K = 1 + static_cast<int>(seed % 8);
        const auto in = make_instance(M, K, 1.0, 300 + seed);
        const auto schedule = make_schedule(build_chain(M));
        const CVector src = src_run(in.channel, in.y, 1, schedule);
        const auto sdk = sdk_run(in.channel, in.y, LambdaStrategy::constant(1.0), 1.0, schedule, cycles(1));
        CHECK(max_abs(src - sdk.x_hat) < 1e-10);
    }
}

TEST_CASE("SRC edge cases") {
    const auto in = make_instance(1, 4, 1.0, 41);
    const auto schedule = make_schedule(build_chain(1));
    CMatrix w(1, 4);
    w << 1.0, Complex(0, 2), -1.0, Complex(0.5, 0.5);
    const CVector x = src_run(in.channel, in.y, 1, schedule, w);
    CHECK(max_abs(x - w.row(0).adjoint() * in.y[0]) < 1e-14);

    const auto big = make_instance(16, 4, 1.0, 42);
    CHECK(src_run(big.channel, CVector::Zero(16), 3, make_schedule(build_chain(16))).isZero(0.0));
    CHECK_THROWS_AS(src_run(big.channel, big.y, 1, make_schedule(build_chain(16)), CMatrix::Zero(3, 4)),
                    std::invalid_argument);
}

TEST_CASE("zero rows are skipped") {
    auto in = make_instance(6, 3, 1.0, 51);
    in.channel.H.row(2).setZero();
    in.channel.H.row(4).setZero();
    const auto schedule = make_schedule(build_chain(6));
    const auto run = sdk_run(in.channel, in.y, LambdaStrategy::proposed(), 1.0, schedule, cycles(2, true));
    for (std::size_t i = 1; i < run.trace.steps.size(); ++i) {
        const auto& step = run.trace.steps[i];
        if (step.node == 2 || step.node == 4) {
            CHECK(step.skipped);
            CHECK((step.x_hat.array() == run.trace.steps[i - 1].x_hat.array()).all());
        }
    }
    const CVector src = src_run(in.channel, in.y, 1, schedule);
    const auto unit = sdk_run(in.channel, in.y, LambdaStrategy::constant(1.0), 1.0, schedule, cycles(1));
    CHECK(max_abs(src - unit.x_hat) < 1e-12);
}

TEST_CASE("bdk_step examples") {
    const auto in = make_instance(1, 3, 0.0, 61);
    const CVector h = in.channel.H.row(0).transpose();
    ReceiverState sdk = ReceiverState::zeros(3, 1);
    ReceiverState bdk = ReceiverState::zeros(3, 1);
    sdk_step(sdk, h, in.y[0], 1.0 / h.squaredNorm());
    bdk_step(bdk, h, in.y[0], 0, 1e-8, lambda_bdk(h.squaredNorm(), 1e-8));
    CHECK(max_abs(sdk.x_hat - bdk.x_hat) < 1e-6);

    // fully masked row: the residual lands entirely in the noise slot
    ReceiverState masked = ReceiverState::zeros(2, 3);
    const Complex noise(0.3, -1.2);
    const Complex r = bdk_step(masked, CVector::Zero(2), noise, 1, 1.0, lambda_bdk(0.0, 1.0));
    CHECK(r == noise);
    CHECK(std::abs(masked.u_hat[1] - noise) < 1e-15);
    CHECK(masked.u_hat[0] == Complex{});
    CHECK(masked.u_hat[2] == Complex{});
    CHECK(masked.x_hat.isZero(0.0));

    // fixed point: y_m = h^T x + sqrt(xi) u[m]
    ReceiverState fixed = ReceiverState::zeros(3, 2);
    fixed.x_hat = in.x;
    fixed.u_hat[0] = Complex(0.2, 0.1);
    const Complex y = (h.transpose() * in.x).value() + std::sqrt(0.5) * fixed.u_hat[0];
    const ReceiverState snapshot = fixed;
    bdk_step(fixed, h, y, 0, 0.5, lambda_bdk(h.squaredNorm(), 0.5));
    CHECK(max_abs(fixed.x_hat - snapshot.x_hat) < 1e-15);
    CHECK(max_abs(fixed.u_hat - snapshot.u_hat) < 1e-15);

    CHECK_THROWS_AS(bdk_step(fixed, h, y, 0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bdk_step(fixed, h, y, 2, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("bdk_run approaches the RZF solution") {
    const auto in = make_instance(32, 8, 1.0, 71);
    const double xi = 1.0;
    const CVector rzf = centralized_rzf(in.channel, in.y, xi);
    const auto run = bdk_run(in.channel, in.y, xi, 1.0, make_schedule(build_chain(32)), cycles(500, true));
    CHECK((run.x_hat - rzf).norm() / rzf.norm() < 1e-4);

    // the augmented iterate z = [x; u] approaches z* monotonically
    const CVector u_star = (in.y - in.channel.H * rzf) / std::sqrt(xi);
    const double scale = std::sqrt(rzf.squaredNorm() + u_star.squaredNorm());
    double prev = scale;
    for (const auto& s : run.trace.steps) {
        const double err = std::sqrt((s.x_hat - rzf).squaredNorm() + (s.u_hat - u_star).squaredNorm());
        CHECK(err <= prev + 1e-12 * scale);
        prev = err;
    }
}

TEST_CASE("bdk_run in the noiseless limit") {
    const auto in = make_instance(32, 8, 0.0, 72);
    const auto run = bdk_run(in.channel, in.y, 1e-8, 1.0, make_schedule(build_chain(32)), cycles(500));
    CHECK((run.x_hat - in.x).norm() / in.x.norm() < 1e-4);
}

TEST_CASE("bdk noise slots stay local and only x_hat travels") {
    const auto in = make_instance(12, 3, 1.0, 73);
    const auto run = bdk_run(in.channel, in.y, 0.7, 1.0, make_schedule(build_chain(12)), cycles(3, true));
    CVector previous = CVector::Zero(12);
    for (const auto& step : run.trace.steps) {
        CHECK(step.payload == 3u);
        for (int m = 0; m < 12; ++m) {
            if (m != step.node) CHECK(step.u_hat[m] == previous[m]);
        }
        previous = step.u_hat;
    }
    CHECK((run.u_hat.array() == previous.array()).all());
}

TEST_CASE("closed-form BDK matches the recursion") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const int M = 1 + static_cast<int>(seed % 13);
        const int K = 1 + static_cast<int>(seed % 6);
        const double xi = 0.1 + 0.2 * static_cast<double>(seed % 5);
        const auto in = make_instance(M, K, xi, 400 + seed);
        RngStream rng(500 + seed, 0);
        RunOptions opts = cycles(1);
        opts.x0 = sample_complex_gaussian(K, 1.0, rng);
        const CVector u0 = sample_complex_gaussian(M, 0.5, rng);
        const auto closed = closed_form_bdk(in.channel, in.y, xi, 1.0, opts.x0, u0);
        const auto run = bdk_run(in.channel, in.y, xi, 1.0, make_schedule(build_chain(M)), opts, u0);
        CHECK(max_abs(closed.x_hat - run.x_hat) < 1e-10);
        CHECK(max_abs(closed.u_hat - run.u_hat) < 1e-10);
    }
}

TEST_CASE("closed-form BDK degenerates to SDK and is linear") {
    const auto in = make_instance(10, 4, 0.0, 81);
    const double xi = 1e-8;
    const auto bdk = closed_form_bdk(in.channel, in.y, xi, 1.0);
    const Eigen::VectorXd energy = in.channel.row_energy();
    std::vector<double> lambdas;
    for (int m = 0; m < 10; ++m) lambdas.push_back(1.0 / (energy[m] + xi));
    CHECK(max_abs(bdk.x_hat - closed_form_sdk(in.channel, in.y, lambdas).x_hat) < 1e-6);

    const auto zero = closed_form_bdk(in.channel, CVector::Zero(10), 0.4, 1.0);
    CHECK(zero.x_hat.isZero(0.0));
    CHECK(zero.u_hat.isZero(0.0));
}

TEST_CASE("receivers are linear in y") {
    const auto a = make_instance(20, 5, 1.0, 91);
    const auto b = make_instance(20, 5, 1.0, 92);
    const auto ch = a.channel;
    const auto schedule = make_schedule(build_chain(20));
    const Complex alpha(0.7, -1.3), beta(-2.0, 0.4);
    const CVector combo = alpha * a.y + beta * b.y;
    const double tol = 1e-9;

    auto sdk = [&](const CVector& y) {
        return sdk_run(ch, y, LambdaStrategy::proposed(), 1.0, schedule, cycles(3)).x_hat;
    };
    auto bdk = [&](const CVector& y) { return bdk_run(ch, y, 1.0, 1.0, schedule, cycles(3)).x_hat; };
    auto src = [&](const CVector& y) { return src_run(ch, y, 3, schedule); };

    CHECK(max_abs(sdk(combo) - (alpha * sdk(a.y) + beta * sdk(b.y))) < tol);
    CHECK(max_abs(bdk(combo) - (alpha * bdk(a.y) + beta * bdk(b.y))) < tol);
    CHECK(max_abs(src(combo) - (alpha * src(a.y) + beta * src(b.y))) < tol);
}

TEST_CASE("centralized oracles") {
    ChannelRealization eye;
    eye.H = CMatrix::Identity(3, 3);
    CVector y(3);
    y << 1.0, Complex(0, -1), 2.5;
    CHECK(max_abs(centralized_zf(eye, y) - y) < 1e-14);
    CHECK(max_abs(centralized_mf(eye, y) - y) < 1e-14);

    const auto in = make_instance(16, 4, 0.0, 101);
    CHECK(max_abs(centralized_zf(in.channel, in.y) - in.x) < 1e-10);

    // rank-deficient: the Tikhonov path with a vanishing regularizer tends to
    // the minimum-norm least-squares solution
    const auto sparse = make_instance(6, 6, 1.0, 102, 1);
    const CVector zf = centralized_zf(sparse.channel, sparse.y);
    const CVector limit = centralized_rzf(sparse.channel, sparse.y, 1e-11);
    CHECK((zf - limit).norm() < 1e-6 * std::max(1.0, zf.norm()));
}

TEST_CASE("single-subarray tree reproduces the chain bit for bit") {
    const auto in = make_instance(24, 6, 1.0, 111);
    const auto chain = make_schedule(build_chain(24));
    std::vector<int> all(24);
    for (int i = 0; i < 24; ++i) all[static_cast<std::size_t>(i)] = i;
    const auto tree = make_schedule(build_subarray_tree({all}, {1.0}));

    const auto a = sdk_run(in.channel, in.y, LambdaStrategy::proposed(), 1.0, chain, cycles(4, true));
    const auto b = sdk_run(in.channel, in.y, LambdaStrategy::proposed(), 1.0, tree, cycles(4, true));
    for (std::size_t t = 0; t < a.trace.cycle_estimates.size(); ++t) {
        CHECK((a.trace.cycle_estimates[t].array() == b.trace.cycle_estimates[t].array()).all());
    }
    const auto c = bdk_run(in.channel, in.y, 1.0, 1.0, chain, cycles(4));
    const auto d = bdk_run(in.channel, in.y, 1.0, 1.0, tree, cycles(4));
    CHECK((c.x_hat.array() == d.x_hat.array()).all());
    CHECK((c.u_hat.array() == d.u_hat.array()).all());
}

TEST_CASE("two-subarray tree pools the sub-array outputs") {
    const auto in = make_instance(8, 3, 1.0, 121);
    const auto tree = make_schedule(build_subarray_tree({{0, 1, 2, 3}, {4, 5, 6, 7}}, {0.25, 0.75}));
    const auto run = sdk_run(in.channel, in.y, LambdaStrategy::proposed(), 1.0, tree, cycles(1));

    auto sub = [&](int first) {
        ReceiverState s = ReceiverState::zeros(3, 8);
        for (int i = 0; i < 4; ++i) {
            const int node = first + i;
            const CVector h = in.channel.H.row(node).transpose();
            sdk_step(s, h, in.y[node], proposed_lambda(3, 1.0, 1, i + 1) / h.squaredNorm());
        }
        return s.x_hat;
    };
    const CVector expected = 0.25 * sub(0) + 0.75 * sub(4);
    CHECK(max_abs(run.x_hat - expected) < 1e-12);
}
