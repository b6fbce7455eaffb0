#pragma once

#include "dkrx/analysis.hpp"
#include "dkrx/relaxation.hpp"
#include "dkrx/topology.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dkrx {

enum class ReceiverKind { zf, rzf, mf, sdk, bdk, src };

ReceiverKind parse_receiver(const std::string& name);
std::string to_string(ReceiverKind kind);

/// One Monte Carlo operating point. Transmit power is fixed at p = 1 and the
/// noise variance follows from the SNR: sigma^2 = 10^(-snr_db/10).
struct SimConfig {
    int M = 128;
    int K = 16;
    std::optional<int> D;           // unset: stationary channel
    double snr_db = 0.0;
    bool noiseless = false;         // sigma^2 = 0 regardless of snr_db
    int cycles = 1;
    ReceiverKind receiver = ReceiverKind::sdk;
    LambdaStrategy lambda = LambdaStrategy::proposed();
    double lambda_star = 1.0;       // BDK relaxation scale
    std::optional<double> xi;       // BDK/RZF regularizer override; default sigma^2 / p
    std::string topology = "chain";
    std::size_t trials = 1000;
    bool random_root = false;
    std::uint64_t seed = 1;
    int symbols_per_block = 1;

    /// Throws std::invalid_argument on any inconsistency.
    void validate() const;

    double p() const { return 1.0; }
    double noise_variance() const;
    /// Linear p / sigma^2 (infinite when noiseless).
    double snr() const;
    double regularizer() const;
    int effective_users() const { return D.value_or(K); }
};

struct TrialOutcome {
    std::size_t bit_errors = 0;
    std::size_t bits = 0;
};

struct CostReport {
    std::int64_t flops_per_node = 0;
    std::int64_t exchange_per_link = 0;
};

struct BerResult {
    SimConfig config;
    double ber_mean = 0;
    double ber_ci95 = 0;
    std::size_t trials = 0;
    std::size_t bit_errors = 0;
    std::size_t bits = 0;
    CostReport cost;
};

/// Channel draw, 16-QAM data, noise, receiver, hard decision, error count.
/// Draw order on `rng`: channel, root (if randomized), then per symbol
/// vector the data bits followed by the noise.
TrialOutcome run_trial(const SimConfig& config, const Topology& topology, RngStream rng);
TrialOutcome run_trial(const SimConfig& config, RngStream rng);

/// Decentralized cost counters; zero for the centralized receivers.
CostReport cost_report(const SimConfig& config);

/// Trial i draws from RngStream(config.seed, i). The per-trial outcomes are
/// reduced in ascending trial order, so serial and parallel execution agree
/// bit for bit.
BerResult run_experiment(const SimConfig& config, Execution execution = Execution::parallel);

enum class SweepAxis { snr, cycles, D };

SweepAxis parse_axis(const std::string& name);

/// Sets the swept field of `base` to each value in turn.
std::vector<BerResult> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values,
                             Execution execution = Execution::parallel);

/// `a:b:step` (inclusive) or a comma-separated list.
std::vector<double> parse_values(const std::string& text);

inline constexpr const char* kCsvHeader =
    "receiver,lambda,topology,M,K,D,snr_db,T,trials,ber_mean,ber_ci95,flops_per_node,exchange_per_link,seed";

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BerResult& result);

}  // namespace dkrx
