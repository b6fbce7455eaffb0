#include "dkrx/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dkrx {

double sanchez_lambda(int K, int M, double snr) {
    const double arg = 4.0 * M * snr;
    if (!(arg > 1.0)) {
        throw std::invalid_argument("sanchez lambda undefined: 4*M*snr must exceed 1 (got " +
                                    std::to_string(arg) + ")");
    }
    return 0.5 * (static_cast<double>(K) / M) * std::log(arg);
}

double proposed_lambda(int K, double snr, int cycle, int position) {
    if (cycle < 1 || position < 1) {
        throw std::invalid_argument("proposed lambda needs cycle >= 1 and position >= 1");
    }
    return std::min(std::sqrt(K * snr / (static_cast<double>(cycle) * position)), 1.0);
}

std::optional<double> lambda_sdk(const LambdaStrategy& strategy, const RelaxationContext& ctx) {
    if (ctx.h_norm_sq <= 0.0) {
        return std::nullopt;
    }
    double scalar = 0.0;
    switch (strategy.kind) {
    case LambdaStrategy::Kind::constant:
        scalar = strategy.value;
        break;
    case LambdaStrategy::Kind::sanchez:
        scalar = sanchez_lambda(ctx.K, ctx.M, ctx.snr);
        break;
    case LambdaStrategy::Kind::proposed:
        scalar = proposed_lambda(ctx.K, ctx.snr, ctx.cycle, ctx.position);
        break;
    }
    return scalar / ctx.h_norm_sq;
}

double lambda_bdk(double h_norm_sq, double xi, double lambda_star) {
    if (!(xi > 0.0)) {
        throw std::invalid_argument("lambda_bdk: xi must be positive");
    }
    if (!(lambda_star > 0.0)) {
        throw std::invalid_argument("lambda_bdk: lambda_star must be positive");
    }
    return lambda_star / (h_norm_sq + xi);
}

LambdaStrategy parse_lambda(const std::string& spec) {
    if (spec == "proposed") {
        return LambdaStrategy::proposed();
    }
    if (spec == "sanchez") {
        return LambdaStrategy::sanchez();
    }
    if (spec.starts_with("constant:")) {
        const std::string text = spec.substr(9);
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size() || text.empty() || !(value > 0.0) || !std::isfinite(value)) {
            throw std::invalid_argument("lambda: constant value must be a positive number, got '" + text + "'");
        }
        return LambdaStrategy::constant(value);
    }
    throw std::invalid_argument("lambda: expected constant:<value>, sanchez or proposed, got '" + spec + "'");
}

std::string describe(const LambdaStrategy& strategy) {
    switch (strategy.kind) {
    case LambdaStrategy::Kind::constant: {
        std::ostringstream os;
        os << "constant:" << strategy.value;
        return os.str();
    }
    case LambdaStrategy::Kind::sanchez:
        return "sanchez";
    case LambdaStrategy::Kind::proposed:
        return "proposed";
    }
    return "?";
}

}  // namespace dkrx
