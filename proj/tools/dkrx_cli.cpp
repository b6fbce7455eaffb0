#include "dkrx/analysis.hpp"
#include "dkrx/harness.hpp"
#include "dkrx/receivers.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>

namespace {

using namespace dkrx;

struct SimArgs {
    std::string receiver = "sdk";
    int M = 128;
    int K = 16;
    int D = 0;
    double snr_db = 0.0;
    bool noiseless = false;
    int cycles = 1;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::string lambda = "proposed";
    double lambda_star = 1.0;
    double xi = 0.0;
    std::string topology = "chain";
    bool random_root = false;
    int symbols = 1;
    bool serial = false;
    std::string out = "-";
};

void add_sim_options(CLI::App& cmd, SimArgs& a) {
    cmd.add_option("--receiver", a.receiver, "zf | rzf | mf | sdk | bdk | src")->capture_default_str();
    cmd.add_option("--M", a.M, "Antennas (one processing node each)")->capture_default_str();
    cmd.add_option("--K", a.K, "Single-antenna users")->capture_default_str();
    cmd.add_option("--D", a.D, "Visible users per antenna; omit for a stationary channel");
    cmd.add_option("--snr-db", a.snr_db, "SNR p/sigma^2 in dB (p = 1)")->capture_default_str();
    cmd.add_flag("--noiseless", a.noiseless, "Set sigma^2 = 0 (BDK/RZF then need --xi)");
    cmd.add_option("--cycles,-T", a.cycles, "Cycles T")->capture_default_str();
    cmd.add_option("--trials", a.trials, "Monte Carlo trials")->capture_default_str();
    cmd.add_option("--seed", a.seed, "Master seed")->capture_default_str();
    cmd.add_option("--lambda", a.lambda,
                   "SDK relaxation: constant:<v> | sanchez | proposed. sanchez uses the natural log: "
                   "0.5 (K/M) ln(4 M snr) with snr linear")
        ->capture_default_str();
    cmd.add_option("--lambda-star", a.lambda_star, "BDK relaxation scale")->capture_default_str();
    cmd.add_option("--xi", a.xi, "BDK/RZF regularizer override (default sigma^2 / p)");
    cmd.add_option("--topology", a.topology, "chain | tree:SxN | path to a partition JSON file")
        ->capture_default_str();
    cmd.add_flag("--random-root", a.random_root, "Draw the chain root with probability ||h_m||^2 / ||H||_F^2");
    cmd.add_option("--symbols", a.symbols, "Symbol vectors per coherence block")->capture_default_str();
    cmd.add_flag("--serial", a.serial, "Run trials on one thread");
    cmd.add_option("--out", a.out, "CSV destination, - for stdout")->capture_default_str();
}

SimConfig to_config(const SimArgs& a, const CLI::App& cmd) {
    SimConfig c;
    c.receiver = parse_receiver(a.receiver);
    c.M = a.M;
    c.K = a.K;
    if (cmd.count("--D") > 0) c.D = a.D;
    c.snr_db = a.snr_db;
    c.noiseless = a.noiseless;
    c.cycles = a.cycles;
    c.trials = a.trials;
    c.seed = a.seed;
    c.lambda = parse_lambda(a.lambda);
    c.lambda_star = a.lambda_star;
    if (cmd.count("--xi") > 0) c.xi = a.xi;
    c.topology = a.topology;
    c.random_root = a.random_root;
    c.symbols_per_block = a.symbols;
    c.validate();
    return c;
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void emit_rows(const std::string& out, const std::vector<BerResult>& rows) {
    Output o(out);
    write_csv_header(o.stream());
    for (const auto& r : rows) write_csv_row(o.stream(), r);
    o.stream().flush();
}

ChannelRealization unit_row_channel(int M, int K, RngStream rng) {
    auto ch = generate_stationary(M, K, rng);
    ch.H.rowwise().normalize();
    return ch;
}

bool verify_identity(std::size_t steps, std::uint64_t seed) {
    double worst = 0;
    for (std::size_t i = 0; i < steps; ++i) {
        RngStream rng(seed, i);
        const int K = 1 + static_cast<int>(i % 16);
        const CVector h = sample_complex_gaussian(K, 1.0, rng);
        const CVector x = sample_complex_gaussian(K, 1.0, rng);
        ReceiverState s = ReceiverState::zeros(K, 1);
        s.x_hat = sample_complex_gaussian(K, 1.0, rng);
        const Complex y = (h.transpose() * x).value() + sample_complex_gaussian(1, 1.0, rng)[0];
        const double lambda = (0.05 + 1.9 * rng.uniform()) / h.squaredNorm();
        const CVector prev = s.x_hat;
        const Complex r = sdk_step(s, h, y, lambda);
        const CVector rho = h.conjugate() * r;
        worst = std::max(worst, per_step_identity_residual(x, prev, s.x_hat, rho, lambda));
    }
    const bool ok = worst <= 1e-9;
    std::printf("identity steps=%zu max_residual=%.3e tolerance=1e-9 %s\n", steps, worst, ok ? "PASS" : "FAIL");
    return ok;
}

bool verify_theorem(int M, int K, std::size_t draws, int channels, double snr_db, std::uint64_t seed) {
    const double sigma2 = std::pow(10.0, -snr_db / 10.0);
    bool all = true;
    for (double lambda : {0.25, 0.5, 1.0}) {
        for (int c = 0; c < channels; ++c) {
            const auto ch = unit_row_channel(M, K, RngStream(seed, static_cast<std::uint64_t>(c)).substream(1));
            const auto check = theorem_bound_check(ch, draws, lambda, BoundParams{1.0, sigma2},
                                                   RngStream(seed, static_cast<std::uint64_t>(c)).substream(2).seed());
            const double slack = (check.lhs_mean - check.rhs_mean) / std::max(check.diff_stderr, 1e-300);
            std::printf("theorem1 lambda=%.2f channel=%d lhs=%.6f rhs=%.6f slack_se=%.2f min_draw_slack=%.3e %s\n",
                        lambda, c, check.lhs_mean, check.rhs_mean, slack, check.min_per_draw_slack,
                        check.holds() ? "PASS" : "FAIL");
            all = all && check.holds();
        }
    }
    return all;
}

bool verify_costs() {
    struct Case {
        const char* name;
        std::int64_t got;
        std::int64_t want;
    };
    const Case cases[] = {
        {"flops_sdk(16,1)", flops_sdk(16, 1), 194}, {"flops_bdk(16,1)", flops_bdk(16, 1), 198},
        {"exchange(16,1)", exchange_count(16, 1), 64}, {"flops_sdk(1,1)", flops_sdk(1, 1), 14},
        {"flops_bdk(1,1)", flops_bdk(1, 1), 18},       {"exchange(1,1)", exchange_count(1, 1), 4},
        {"flops_sdk(16,4)", flops_sdk(16, 4), 776},    {"flops_bdk(16,2)", flops_bdk(16, 2), 396},
    };
    bool all = true;
    for (const auto& c : cases) {
        const bool ok = c.got == c.want;
        std::printf("costs %s=%lld expected=%lld %s\n", c.name, static_cast<long long>(c.got),
                    static_cast<long long>(c.want), ok ? "PASS" : "FAIL");
        all = all && ok;
    }
    return all;
}

int fail(const std::string& kind, const std::string& message, int code) {
    const nlohmann::json line = {{"status", "error"}, {"kind", kind}, {"message", message}};
    std::cerr << line.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized Kaczmarz uplink receivers: Monte Carlo BER and verification"};
    app.require_subcommand(1);

    SimArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Run one operating point and write a CSV row");
    add_sim_options(*simulate, sim_args);

    SimArgs sweep_args;
    std::string axis_name;
    std::string values_text;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one axis and write one CSV row per value");
    add_sim_options(*sweep_cmd, sweep_args);
    sweep_cmd->add_option("--axis", axis_name, "snr | cycles | D")->required();
    sweep_cmd->add_option("--values", values_text, "a:b:step (inclusive) or a comma list")->required();

    std::string what;
    int vM = 32, vK = 8, channels = 10;
    std::size_t draws = 10000;
    double v_snr_db = 0.0;
    std::uint64_t vseed = 1;
    auto* verify = app.add_subcommand("verify", "Numerical checks: theorem1 | identity | costs");
    verify->add_option("check", what, "theorem1 | identity | costs")
        ->required()
        ->check(CLI::IsMember({"theorem1", "identity", "costs"}));
    verify->add_option("--M", vM, "Antennas (theorem1)")->capture_default_str();
    verify->add_option("--K", vK, "Users (theorem1)")->capture_default_str();
    verify->add_option("--draws", draws, "(x, n) draws per channel, or steps for identity")->capture_default_str();
    verify->add_option("--channels", channels, "Channel draws (theorem1)")->capture_default_str();
    verify->add_option("--snr-db", v_snr_db, "SNR in dB (theorem1)")->capture_default_str();
    verify->add_option("--seed", vseed, "Master seed")->capture_default_str();

    std::string dump_out = "-";
    int dM = 8, dK = 4, dD = 0;
    std::uint64_t dseed = 1;
    auto* dump = app.add_subcommand("dump-channel", "Write one channel realization as CSV");
    dump->add_option("--M", dM)->capture_default_str();
    dump->add_option("--K", dK)->capture_default_str();
    dump->add_option("--D", dD, "Visible users per antenna; omit for a stationary channel");
    dump->add_option("--seed", dseed)->capture_default_str();
    dump->add_option("--out", dump_out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        if (simulate->parsed()) {
            const SimConfig config = to_config(sim_args, *simulate);
            const auto r = run_experiment(config, sim_args.serial ? Execution::serial : Execution::parallel);
            emit_rows(sim_args.out, {r});
        } else if (sweep_cmd->parsed()) {
            const SimConfig config = to_config(sweep_args, *sweep_cmd);
            const auto rows = sweep(config, parse_axis(axis_name), parse_values(values_text),
                                    sweep_args.serial ? Execution::serial : Execution::parallel);
            emit_rows(sweep_args.out, rows);
        } else if (verify->parsed()) {
            bool ok = false;
            if (what == "identity") {
                ok = verify_identity(verify->count("--draws") > 0 ? draws : 1000, vseed);
            } else if (what == "theorem1") {
                ok = verify_theorem(vM, vK, draws, channels, v_snr_db, vseed);
            } else {
                ok = verify_costs();
            }
            if (!ok) return fail("verification", "verify " + what + " failed", 1);
        } else if (dump->parsed()) {
            RngStream rng(dseed, 0);
            const auto ch = dump->count("--D") > 0 ? generate_nonstationary(dM, dK, dD, rng)
                                                   : generate_stationary(dM, dK, rng);
            Output o(dump_out);
            write_channel_csv(o.stream(), ch);
        }
    } catch (const std::invalid_argument& e) {
        return fail("invalid_argument", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), 1);
    }
    return 0;
}
