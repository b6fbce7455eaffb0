#include "dkrx/harness.hpp"

#include "dkrx/modem.hpp"
#include "dkrx/receivers.hpp"

#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dkrx {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

CVector detect(const SimConfig& config, const ChannelRealization& channel, const CVector& y,
               const Schedule& schedule) {
    RunOptions options;
    options.cycles = config.cycles;
    switch (config.receiver) {
    case ReceiverKind::zf:
        return centralized_zf(channel, y);
    case ReceiverKind::rzf:
        return centralized_rzf(channel, y, config.regularizer());
    case ReceiverKind::mf:
        return centralized_mf(channel, y);
    case ReceiverKind::sdk:
        return sdk_run(channel, y, config.lambda, config.snr(), schedule, options).x_hat;
    case ReceiverKind::bdk:
        return bdk_run(channel, y, config.regularizer(), config.lambda_star, schedule, options).x_hat;
    case ReceiverKind::src:
        return src_run(channel, y, config.cycles, schedule);
    }
    bad("unknown receiver");
}

std::string format_double(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

ReceiverKind parse_receiver(const std::string& name) {
    if (name == "zf") return ReceiverKind::zf;
    if (name == "rzf") return ReceiverKind::rzf;
    if (name == "mf") return ReceiverKind::mf;
    if (name == "sdk") return ReceiverKind::sdk;
    if (name == "bdk") return ReceiverKind::bdk;
    if (name == "src") return ReceiverKind::src;
    bad("unknown receiver '" + name + "' (expected zf, rzf, mf, sdk, bdk or src)");
}

std::string to_string(ReceiverKind kind) {
    switch (kind) {
    case ReceiverKind::zf: return "zf";
    case ReceiverKind::rzf: return "rzf";
    case ReceiverKind::mf: return "mf";
    case ReceiverKind::sdk: return "sdk";
    case ReceiverKind::bdk: return "bdk";
    case ReceiverKind::src: return "src";
    }
    return "?";
}

double SimConfig::noise_variance() const { return noiseless ? 0.0 : std::pow(10.0, -snr_db / 10.0); }

double SimConfig::snr() const {
    return noiseless ? std::numeric_limits<double>::infinity() : p() / noise_variance();
}

double SimConfig::regularizer() const { return xi.value_or(noise_variance() / p()); }

void SimConfig::validate() const {
    if (M < 1 || K < 1) bad("M and K must be >= 1");
    if (D && (*D < 1 || *D > K)) bad("D must lie in [1, K]");
    if (cycles < 1) bad("cycle count T must be >= 1");
    if (trials < 1) bad("trial count must be >= 1");
    if (symbols_per_block < 1) bad("symbols per block must be >= 1");
    if (!std::isfinite(snr_db)) bad("snr_db must be finite (use the noiseless flag for sigma^2 = 0)");
    if (!(lambda_star > 0.0)) bad("lambda_star must be positive");
    if (lambda.kind == LambdaStrategy::Kind::constant && !(lambda.value > 0.0)) bad("lambda must be positive");
    if (xi && !(*xi > 0.0)) bad("xi must be positive");
    if ((receiver == ReceiverKind::bdk || receiver == ReceiverKind::rzf) && !(regularizer() > 0.0)) {
        bad("receiver " + to_string(receiver) + " needs xi > 0; pass an explicit xi in the noiseless regime");
    }
    if (receiver == ReceiverKind::sdk && lambda.kind == LambdaStrategy::Kind::sanchez) {
        sanchez_lambda(K, M, snr());
    }
    const Topology t = parse_topology(topology, M);
    if (random_root && t.kind != TopologyKind::chain) bad("root randomization requires the chain topology");
}

TrialOutcome run_trial(const SimConfig& config, const Topology& topology, RngStream rng) {
    const ChannelRealization channel =
        config.D ? generate_nonstationary(config.M, config.K, *config.D, rng) : generate_stationary(config.M, config.K, rng);
    const int root = config.random_root ? select_random_root(channel, rng) : 0;
    const Schedule schedule = make_schedule(topology, root);
    const double amplitude = std::sqrt(config.p());
    const double sigma2 = config.noise_variance();

    TrialOutcome outcome;
    for (int s = 0; s < config.symbols_per_block; ++s) {
        const Bits tx = random_bits(static_cast<std::size_t>(kBitsPerSymbol * config.K), rng);
        const CVector x = amplitude * map_bits(tx);
        CVector y = channel.H * x;
        if (sigma2 > 0.0) {
            y += sample_complex_gaussian(config.M, sigma2, rng);
        }
        const CVector estimate = detect(config, channel, y, schedule) / amplitude;
        outcome.bit_errors += count_bit_errors(tx, demap_symbols(estimate));
        outcome.bits += tx.size();
    }
    return outcome;
}

TrialOutcome run_trial(const SimConfig& config, RngStream rng) {
    config.validate();
    return run_trial(config, parse_topology(config.topology, config.M), std::move(rng));
}

CostReport cost_report(const SimConfig& config) {
    switch (config.receiver) {
    case ReceiverKind::sdk:
    case ReceiverKind::src:
        return {flops_sdk(config.K, config.cycles), exchange_count(config.K, config.cycles)};
    case ReceiverKind::bdk:
        return {flops_bdk(config.K, config.cycles), exchange_count(config.K, config.cycles)};
    default:
        return {0, 0};
    }
}

BerResult run_experiment(const SimConfig& config, Execution execution) {
    config.validate();
    const Topology topology = parse_topology(config.topology, config.M);
    std::vector<TrialOutcome> outcomes(config.trials);
    const auto n = static_cast<std::int64_t>(config.trials);

    if (execution == Execution::parallel) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) {
            try {
                outcomes[static_cast<std::size_t>(i)] =
                    run_trial(config, topology, RngStream(config.seed, static_cast<std::uint64_t>(i)));
            } catch (...) {
#pragma omp critical(dkrx_trial_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            outcomes[static_cast<std::size_t>(i)] =
                run_trial(config, topology, RngStream(config.seed, static_cast<std::uint64_t>(i)));
        }
    }

    BerResult result;
    result.config = config;
    result.trials = config.trials;
    result.cost = cost_report(config);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& o : outcomes) {
        const double ber = static_cast<double>(o.bit_errors) / static_cast<double>(o.bits);
        sum += ber;
        sum_sq += ber * ber;
        result.bit_errors += o.bit_errors;
        result.bits += o.bits;
    }
    const double count = static_cast<double>(config.trials);
    result.ber_mean = sum / count;
    if (config.trials > 1) {
        const double variance = std::max(0.0, (sum_sq - count * result.ber_mean * result.ber_mean) / (count - 1.0));
        result.ber_ci95 = 1.96 * std::sqrt(variance / count);
    }
    return result;
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "snr" || name == "snr_db") return SweepAxis::snr;
    if (name == "cycles" || name == "T") return SweepAxis::cycles;
    if (name == "D") return SweepAxis::D;
    bad("unknown sweep axis '" + name + "' (expected snr, cycles or D)");
}

std::vector<BerResult> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values,
                             Execution execution) {
    if (values.empty()) bad("sweep needs at least one value");
    std::vector<BerResult> rows;
    rows.reserve(values.size());
    for (double v : values) {
        SimConfig c = base;
        switch (axis) {
        case SweepAxis::snr:
            c.snr_db = v;
            break;
        case SweepAxis::cycles:
            if (v != std::round(v)) bad("cycle counts must be integers");
            c.cycles = static_cast<int>(v);
            break;
        case SweepAxis::D:
            if (v != std::round(v)) bad("D values must be integers");
            c.D = static_cast<int>(v);
            break;
        }
        rows.push_back(run_experiment(c, execution));
    }
    return rows;
}

std::vector<double> parse_values(const std::string& text) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (s.empty() || used != s.size() || !std::isfinite(v)) bad("cannot parse value '" + s + "' in '" + text + "'");
        return v;
    };

    std::vector<double> values;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
        if (parts.size() != 3) bad("range must be a:b:step, got '" + text + "'");
        const double a = number(parts[0]);
        const double b = number(parts[1]);
        const double step = number(parts[2]);
        if (!(step > 0.0) || b < a) bad("range needs step > 0 and b >= a, got '" + text + "'");
        const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
        for (long i = 0; i < count; ++i) values.push_back(a + static_cast<double>(i) * step);
        return values;
    }
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) values.push_back(number(item));
    if (values.empty()) bad("no values given");
    return values;
}

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_csv_row(std::ostream& out, const BerResult& r) {
    const SimConfig& c = r.config;
    std::string lambda = "none";
    if (c.receiver == ReceiverKind::sdk) {
        lambda = describe(c.lambda);
    } else if (c.receiver == ReceiverKind::bdk) {
        lambda = "star:" + format_double(c.lambda_star);
    } else if (c.receiver == ReceiverKind::src) {
        lambda = "constant:1";
    }
    const std::string topology = describe(parse_topology(c.topology, c.M));
    out << to_string(c.receiver) << ',' << lambda << ',' << topology << ',' << c.M << ',' << c.K << ','
        << c.effective_users() << ',' << (c.noiseless ? "inf" : format_double(c.snr_db)) << ',' << c.cycles << ','
        << r.trials << ',' << format_double(r.ber_mean) << ',' << format_double(r.ber_ci95) << ','
        << r.cost.flops_per_node << ',' << r.cost.exchange_per_link << ',' << c.seed << '\n';
}

}  // namespace dkrx
