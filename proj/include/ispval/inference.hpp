#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ispval/common.hpp"
#include "ispval/estimators.hpp"
#include "ispval/matrix.hpp"
#include "ispval/proposals.hpp"

namespace ispval {

// ---------------------------------------------------------------------------
// Multiple testing
// ---------------------------------------------------------------------------

struct MultiTestOutcome {
    std::vector<double> pvalues;
    double alpha;
    std::size_t n_tests;
    std::vector<std::size_t> rejected;  // indices with p <= alpha / n_tests
};

MultiTestOutcome bonferroni(std::span<const double> pvalues, double alpha,
                            std::size_t n_tests);

// ---------------------------------------------------------------------------
// Confidence sets by test inversion
// ---------------------------------------------------------------------------

struct ConfidenceSet {
    std::vector<double> grid;
    std::vector<double> pvalues;
    double alpha;
    std::vector<bool> retained;         // pvalues[i] > alpha
    std::optional<std::pair<double, double>> hull;  // min/max retained grid value
    bool contiguous = true;             // false when the retained set has gaps

    double hull_length() const {
        return hull ? hull->second - hull->first : 0.0;
    }
    bool contains(double theta) const;
};

// Evaluates pvalue_at on every grid point (one shared importance sample is the
// intended use: only weights and statistics vary across the grid).
ConfidenceSet invert_confidence_set(std::span<const double> grid,
                                    const std::function<double(double)>& pvalue_at,
                                    double alpha);

// ---------------------------------------------------------------------------
// Two-sided conditional (Rasch-type) p-values sharing one importance sample
// ---------------------------------------------------------------------------

// A stored importance sample over a margin fiber: per-draw sufficient
// statistics t_i and mixture log-proposal values, plus the same for the
// observation. Dead-end draws carry stat 0 and log_q = +inf marker handled
// through `alive`.
struct StoredRaschSample {
    double t_obs = 0.0;
    double log_q_obs = 0.0;
    std::vector<double> t_draws;
    std::vector<double> log_q_draws;
    std::vector<bool> alive;  // false marks dead-end draws (weight 0)
};

enum class CorrectionKind { Corrected, Uncorrected };

// min{1, 2 min(p+, p-)} where both one-sided p-values use importance weights
// log w_i = theta * t_i - log_q_i (an unknown constant cancels).
double two_sided_rasch_pvalue(double theta, const StoredRaschSample& sample,
                              CorrectionKind kind);

}  // namespace ispval
