#include "ispval/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "ispval/special.hpp"

namespace ispval {

namespace {

double max_log_weight(std::span<const WeightedDraw> draws) {
    double m = kNegInf;
    for (const auto& d : draws) m = std::max(m, d.weight.log_w);
    return m;
}

void require_normalized(std::span<const WeightedDraw> draws) {
    for (const auto& d : draws) {
        if (!d.weight.normalized)
            throw NonNormalizedWeights("estimator requires exact dP/dQ weights");
    }
}

// Numerator and denominator of the self-normalized ratio under one shared
// shift, so the ratio is exact up to rounding of the shifted sums.
struct RatioSums {
    double numer;
    double denom;
};

RatioSums shifted_ratio_sums(double shift, double obs_stat, double obs_log_w,
                             bool include_obs, std::span<const WeightedDraw> draws) {
    KahanSum numer;
    KahanSum denom;
    if (include_obs && obs_log_w != kNegInf) {
        double w = std::exp(obs_log_w - shift);
        numer.add(w);  // t(X) >= t(X) always
        denom.add(w);
    }
    for (const auto& d : draws) {
        if (d.weight.log_w == kNegInf) continue;
        double w = std::exp(d.weight.log_w - shift);
        denom.add(w);
        if (d.stat >= obs_stat) numer.add(w);
    }
    return {numer.value(), denom.value()};
}

}  // namespace

const char* estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::PHat: return "p_hat";
        case EstimatorKind::PTilde: return "p_tilde";
        case EstimatorKind::PHatStar: return "p_hat_star";
        case EstimatorKind::PTildeStar: return "p_tilde_star";
        case EstimatorKind::WaldUpper: return "wald_upper";
    }
    return "unknown";
}

PValueReport make_report(double estimate, EstimatorKind kind, std::size_t n,
                         std::optional<double> std_error) {
    if (std::isnan(estimate)) throw DomainError("PValueReport: estimate is NaN");
    if (kind == EstimatorKind::PTilde || kind == EstimatorKind::PTildeStar) {
        if (estimate < 0.0 || estimate > 1.0)
            throw DomainError("PValueReport: self-normalized estimate outside [0,1]");
    } else if (estimate < 0.0) {
        throw DomainError("PValueReport: negative estimate");
    }
    if (std_error && !(*std_error >= 0.0))
        throw DomainError("PValueReport: negative standard error");
    return PValueReport{estimate, kind, n, std_error};
}

double p_hat(double obs_stat, std::span<const WeightedDraw> draws) {
    require_normalized(draws);
    if (draws.empty()) return 0.0;
    double shift = max_log_weight(draws);
    if (shift == kNegInf) return 0.0;
    KahanSum sum;
    for (const auto& d : draws) {
        if (d.stat >= obs_stat && d.weight.log_w != kNegInf)
            sum.add(std::exp(d.weight.log_w - shift));
    }
    return std::exp(shift) * sum.value() / static_cast<double>(draws.size());
}

double p_tilde(double obs_stat, std::span<const WeightedDraw> draws) {
    if (draws.empty()) return 0.0;
    double shift = max_log_weight(draws);
    if (shift == kNegInf) return 0.0;  // all weights zero: 0/0 = 0
    auto s = shifted_ratio_sums(shift, obs_stat, kNegInf, false, draws);
    if (s.denom == 0.0) return 0.0;
    return s.numer / s.denom;
}

double p_hat_star(const ObservedPoint& obs, std::span<const WeightedDraw> draws) {
    if (!obs.weight.normalized)
        throw NonNormalizedWeights("p_hat_star requires a normalized observation weight");
    require_normalized(draws);
    double shift = std::max(obs.weight.log_w, max_log_weight(draws));
    if (shift == kNegInf) return 0.0;
    KahanSum sum;
    if (obs.weight.log_w != kNegInf) sum.add(std::exp(obs.weight.log_w - shift));
    for (const auto& d : draws) {
        if (d.stat >= obs.stat && d.weight.log_w != kNegInf)
            sum.add(std::exp(d.weight.log_w - shift));
    }
    return std::exp(shift) * sum.value() / static_cast<double>(draws.size() + 1);
}

double p_tilde_star(const ObservedPoint& obs, std::span<const WeightedDraw> draws) {
    for (const auto& d : draws) {
        if (d.weight.normalized != obs.weight.normalized)
            throw MixedWeightScales(
                "p_tilde_star: observation and draws disagree on weight normalization");
    }
    double shift = std::max(obs.weight.log_w, max_log_weight(draws));
    if (shift == kNegInf) return 0.0;  // 0/0 convention
    auto s = shifted_ratio_sums(shift, obs.stat, obs.weight.log_w, true, draws);
    if (s.denom == 0.0) return 0.0;
    double r = s.numer / s.denom;
    return std::min(r, 1.0);
}

double two_sided_combine(double p_plus, double p_minus) {
    if (!(p_plus >= 0.0 && p_plus <= 1.0 && p_minus >= 0.0 && p_minus <= 1.0))
        throw DomainError("two_sided_combine: inputs must lie in [0,1]");
    return std::min(1.0, 2.0 * std::min(p_plus, p_minus));
}

double p_hat_std_error(double obs_stat, std::span<const WeightedDraw> draws) {
    require_normalized(draws);
    std::size_t n = draws.size();
    if (n < 2) throw DomainError("p_hat_std_error: need at least two draws");
    double shift = max_log_weight(draws);
    if (shift == kNegInf) return 0.0;
    // Two-pass variance of the scaled terms exp(log_w - shift) * 1{exceed}.
    KahanSum mean_sum;
    for (const auto& d : draws) {
        double term = (d.stat >= obs_stat && d.weight.log_w != kNegInf)
                          ? std::exp(d.weight.log_w - shift)
                          : 0.0;
        mean_sum.add(term);
    }
    double mean = mean_sum.value() / static_cast<double>(n);
    KahanSum ss;
    for (const auto& d : draws) {
        double term = (d.stat >= obs_stat && d.weight.log_w != kNegInf)
                          ? std::exp(d.weight.log_w - shift)
                          : 0.0;
        double dd = term - mean;
        ss.add(dd * dd);
    }
    double var = ss.value() / static_cast<double>(n - 1);
    return std::exp(shift) * std::sqrt(var / static_cast<double>(n));
}

double wald_upper_limit(double p_hat_value, double se, double level) {
    if (!(se >= 0.0)) throw DomainError("wald_upper_limit: se must be >= 0");
    if (!(level > 0.0 && level < 1.0))
        throw DomainError("wald_upper_limit: level must lie in (0,1)");
    return p_hat_value + normal_quantile(level) * se;
}

double ess_diagnostic(std::span<const WeightedDraw> draws) {
    std::size_t n = draws.size();
    if (n < 2) throw DomainError("ess_diagnostic: need at least two draws");
    double shift = max_log_weight(draws);
    if (shift == kNegInf) throw DegenerateWeights("ess_diagnostic: all weights are zero");
    KahanSum mean_sum;
    for (const auto& d : draws)
        mean_sum.add(d.weight.log_w == kNegInf ? 0.0 : std::exp(d.weight.log_w - shift));
    double mean = mean_sum.value() / static_cast<double>(n);
    KahanSum ss;
    for (const auto& d : draws) {
        double w = d.weight.log_w == kNegInf ? 0.0 : std::exp(d.weight.log_w - shift);
        double dd = w - mean;
        ss.add(dd * dd);
    }
    double var = ss.value() / static_cast<double>(n - 1);
    double cv2 = var / (mean * mean);
    return static_cast<double>(n) / (1.0 + cv2);
}

}  // namespace ispval
