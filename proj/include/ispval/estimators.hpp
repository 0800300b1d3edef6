#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ispval/common.hpp"

namespace ispval {

// Natural log of an importance weight w = dP/dQ at one point. -inf encodes
// w = 0; +inf is impossible for a point actually drawn from Q and is rejected.
// `normalized` is true iff w is an exact version of dP/dQ rather than dP/dQ
// times an unknown positive constant.
struct LogWeight {
    double log_w;
    bool normalized;

    LogWeight(double lw, bool norm) : log_w(lw), normalized(norm) {
        if (std::isnan(lw) || lw == kPosInf)
            throw DomainError("LogWeight: log weight must be in [-inf, inf)");
    }
    double weight() const { return std::exp(log_w); }
};

// One proposal draw: test-statistic value and importance weight.
struct WeightedDraw {
    double stat;
    LogWeight weight;

    WeightedDraw(double s, LogWeight w) : stat(s), weight(w) {
        if (std::isnan(s)) throw DomainError("WeightedDraw: statistic is NaN");
    }
};

// The original observation: its statistic value t(X) and weight w(X).
struct ObservedPoint {
    double stat;
    LogWeight weight;

    ObservedPoint(double s, LogWeight w) : stat(s), weight(w) {
        if (std::isnan(s)) throw DomainError("ObservedPoint: statistic is NaN");
    }
};

enum class EstimatorKind { PHat, PTilde, PHatStar, PTildeStar, WaldUpper };

const char* estimator_name(EstimatorKind kind);

struct PValueReport {
    double estimate;
    EstimatorKind kind;
    std::size_t n;
    std::optional<double> std_error;

    // p-hat style estimates may exceed 1; reporting clamps.
    double clamped() const { return estimate < 1.0 ? estimate : 1.0; }
};

PValueReport make_report(double estimate, EstimatorKind kind, std::size_t n,
                         std::optional<double> std_error = std::nullopt);

// (1/n) sum_i w(Y_i) 1{t(Y_i) >= obs_stat}. Weights must be normalized.
// Empty draws give 0 by the n=0 convention. May exceed 1.
double p_hat(double obs_stat, std::span<const WeightedDraw> draws);

// Self-normalized variant, usable with weights known only up to a constant:
// sum_i w_i 1{t_i >= obs_stat} / sum_j w_j, with 0/0 = 0.
double p_tilde(double obs_stat, std::span<const WeightedDraw> draws);

// Corrected estimator (w(X) + sum_i w_i 1{t_i >= t(X)}) / (n + 1).
// Valid p-value at any n, including n = 0 where it reduces to w(X).
double p_hat_star(const ObservedPoint& obs, std::span<const WeightedDraw> draws);

// Corrected self-normalized estimator
// (w(X) + sum_i w_i 1{t_i >= t(X)}) / (w(X) + sum_j w_j), with 0/0 = 0.
// Always within [0,1] and >= p_tilde on the same inputs.
double p_tilde_star(const ObservedPoint& obs, std::span<const WeightedDraw> draws);

// min{1, 2 min(p_plus, p_minus)}.
double two_sided_combine(double p_plus, double p_minus);

// Sample standard deviation of the terms w(Y_i) 1{t(Y_i) >= obs_stat},
// divided by sqrt(n). Requires normalized weights and n >= 2.
double p_hat_std_error(double obs_stat, std::span<const WeightedDraw> draws);

// p_hat_value + z_level * se.
double wald_upper_limit(double p_hat_value, double se, double level);

// Effective-sample-size heuristic n / (1 + cv^2), where cv^2 is the sample
// variance of the weights over the squared sample mean. Invariant under
// scaling all weights by a positive constant.
double ess_diagnostic(std::span<const WeightedDraw> draws);

}  // namespace ispval
