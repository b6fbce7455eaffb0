#pragma once

#include <optional>
#include <string>

namespace dkrx {

/// Rule for the per-node SDK relaxation scalar lambda_m.
struct LambdaStrategy {
    enum class Kind { constant, sanchez, proposed };

    Kind kind = Kind::proposed;
    double value = 1.0;  // only read by Kind::constant

    static LambdaStrategy constant(double lambda) { return {Kind::constant, lambda}; }
    static LambdaStrategy sanchez() { return {Kind::sanchez, 0.0}; }
    static LambdaStrategy proposed() { return {Kind::proposed, 0.0}; }
};

/// Everything a node knows when it picks its relaxation scalar.
struct RelaxationContext {
    int position = 1;     // 1-based position in the dispersion order
    int cycle = 1;        // 1-based cycle index t
    double h_norm_sq = 0; // ||h_m||^2
    int K = 1;
    int M = 1;
    double snr = 1;       // linear p / sigma^2
};

/// Prior-art constant 0.5 * (K/M) * ln(4 M snr), natural logarithm.
double sanchez_lambda(int K, int M, double snr);

/// Cycle/position-dependent scalar min(sqrt(K snr / (t m)), 1).
double proposed_lambda(int K, double snr, int cycle, int position);

/// lambda_m = (strategy scalar) / ||h_m||^2. Returns nullopt for a zero-energy
/// row: the node skips its update.
std::optional<double> lambda_sdk(const LambdaStrategy& strategy, const RelaxationContext& ctx);

/// lambda*_m = lambda_star / (||h_m||^2 + xi); finite for zero rows.
double lambda_bdk(double h_norm_sq, double xi, double lambda_star = 1.0);

/// Parses `constant:<value>`, `sanchez` or `proposed`.
LambdaStrategy parse_lambda(const std::string& spec);

std::string describe(const LambdaStrategy& strategy);

}  // namespace dkrx
