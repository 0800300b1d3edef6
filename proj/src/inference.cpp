#include "ispval/inference.hpp"

#include <algorithm>
#include <cmath>

namespace ispval {

MultiTestOutcome bonferroni(std::span<const double> pvalues, double alpha,
                            std::size_t n_tests) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("bonferroni: alpha must lie in (0,1)");
    if (n_tests < pvalues.size())
        throw DomainError("bonferroni: n_tests must cover all supplied p-values");
    MultiTestOutcome out;
    out.pvalues.assign(pvalues.begin(), pvalues.end());
    out.alpha = alpha;
    out.n_tests = n_tests;
    double threshold = alpha / static_cast<double>(n_tests);
    for (std::size_t i = 0; i < pvalues.size(); ++i)
        if (pvalues[i] <= threshold) out.rejected.push_back(i);
    return out;
}

bool ConfidenceSet::contains(double theta) const {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (retained[i] && grid[i] == theta) return true;
    // Between-grid values count as covered when they lie inside a retained
    // bracket.
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (retained[i] && retained[i + 1] && grid[i] <= theta && theta <= grid[i + 1])
            return true;
    return false;
}

ConfidenceSet invert_confidence_set(std::span<const double> grid,
                                    const std::function<double(double)>& pvalue_at,
                                    double alpha) {
    if (grid.empty()) throw DomainError("invert_confidence_set: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("invert_confidence_set: grid must be strictly increasing");

    ConfidenceSet cs;
    cs.grid.assign(grid.begin(), grid.end());
    cs.alpha = alpha;
    cs.pvalues.resize(grid.size());
    cs.retained.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cs.pvalues[i] = pvalue_at(grid[i]);
        cs.retained[i] = cs.pvalues[i] > alpha;
    }

    std::optional<std::size_t> first, last;
    std::size_t runs = 0;
    bool in_run = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (cs.retained[i]) {
            if (!first) first = i;
            last = i;
            if (!in_run) ++runs;
            in_run = true;
        } else {
            in_run = false;
        }
    }
    if (first) cs.hull = std::make_pair(cs.grid[*first], cs.grid[*last]);
    cs.contiguous = runs <= 1;
    return cs;
}

namespace {

double one_sided_tilde(double theta, const StoredRaschSample& s, double sign,
                       bool corrected) {
    // log weights theta * t - log_q, shared shift across obs and draws
    double lw_obs = theta * s.t_obs - s.log_q_obs;
    double shift = lw_obs;
    for (std::size_t i = 0; i < s.t_draws.size(); ++i)
        if (s.alive[i]) shift = std::max(shift, theta * s.t_draws[i] - s.log_q_draws[i]);

    double t_ref = sign * s.t_obs;
    KahanSum numer, denom;
    double w_obs = std::exp(lw_obs - shift);
    if (corrected) {
        numer.add(w_obs);
        denom.add(w_obs);
    }
    for (std::size_t i = 0; i < s.t_draws.size(); ++i) {
        if (!s.alive[i]) continue;
        double w = std::exp(theta * s.t_draws[i] - s.log_q_draws[i] - shift);
        denom.add(w);
        if (sign * s.t_draws[i] >= t_ref) numer.add(w);
    }
    if (denom.value() == 0.0) return 0.0;
    return std::min(numer.value() / denom.value(), 1.0);
}

}  // namespace

double two_sided_rasch_pvalue(double theta, const StoredRaschSample& sample,
                              CorrectionKind kind) {
    if (sample.t_draws.size() != sample.log_q_draws.size() ||
        sample.t_draws.size() != sample.alive.size())
        throw ShapeError("two_sided_rasch_pvalue: ragged stored sample");
    bool corrected = kind == CorrectionKind::Corrected;
    double p_plus = one_sided_tilde(theta, sample, +1.0, corrected);
    double p_minus = one_sided_tilde(theta, sample, -1.0, corrected);
    return two_sided_combine(p_plus, p_minus);
}

}  // namespace ispval
