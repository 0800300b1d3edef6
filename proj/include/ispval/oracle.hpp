#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ispval/common.hpp"
#include "ispval/estimators.hpp"
#include "ispval/matrix.hpp"
#include "ispval/proposals.hpp"
#include "ispval/statistics.hpp"

namespace ispval {

// ---------------------------------------------------------------------------
// The algebraic inequality behind the validity guarantees:
// sum_k w_k 1{ sum_i w_i 1{t_i >= t_k} <= alpha } <= alpha.
// ---------------------------------------------------------------------------

struct Lemma1Result {
    double lhs;
    bool holds;
};

// t values may be +/-inf; weights must be >= 0 (infinite weights allowed).
Lemma1Result lemma1_check(std::span<const double> t, std::span<const double> w,
                          double alpha);

// ---------------------------------------------------------------------------
// Exact p-values by enumeration
// ---------------------------------------------------------------------------

// Exact permutation-test p-value: enumerates all labelings with r ones
// (each carrying its permutation multiplicity, which is uniform).
// Bounded at m <= 10.
double exact_permutation_pvalue(const PermutationFiber& fiber,
                                std::span<const int> observed_labeling,
                                const std::function<double(std::span<const int>)>& stat);

// Number of 0/1 matrices with the given margins, saturating at `cap`.
std::uint64_t count_margin_fiber(std::span<const int> row_sums,
                                 std::span<const int> col_sums, std::uint64_t cap);

// Every matrix in the fiber, exactly once. Refuses fibers larger than
// max_size (counted first).
std::vector<BinaryMatrix> enumerate_margin_fiber(const MarginFiber& fiber,
                                                 std::size_t max_size);

// Exact p-value for a uniform (or exponentially tilted, via theta and
// covariates) null on an enumerable fiber.
double exact_fiber_pvalue(const MarginFiber& fiber, const BinaryMatrix& observed,
                          const std::function<double(const BinaryMatrix&)>& stat,
                          std::size_t max_size, double theta = 0.0,
                          const RealMatrix* covariates = nullptr);

// 1 - Phi(x), the analytic Gaussian p-value.
double gaussian_true_pvalue(double x);

// ---------------------------------------------------------------------------
// Joint-distribution validity testing
// ---------------------------------------------------------------------------

// One null scenario: how to draw the observation (with its weight) and how to
// draw one proposal point. Both closures receive the replication stream.
struct ValidityScenario {
    std::function<ObservedPoint(Rng&)> draw_observation;
    std::function<WeightedDraw(Rng&)> draw_proposal;
    EstimatorKind estimator = EstimatorKind::PHatStar;
    std::size_t n = 10;
    double wald_level = 0.975;  // used when estimator == WaldUpper
};

struct ValidityReport {
    std::vector<double> alphas;
    std::vector<double> cdf_hat;  // estimated P(p <= alpha)
    std::vector<double> se;       // binomial standard errors
    std::size_t replications = 0;
    std::vector<bool> violation;  // cdf_hat > alpha + k * se
    double k_sigma = 3.0;

    bool all_valid() const {
        for (bool v : violation)
            if (v) return false;
        return true;
    }
};

// Estimates P(p <= alpha) over the joint law of data and Monte Carlo sample.
// Deterministic for a fixed master seed at any thread count.
ValidityReport validity_monte_carlo(const ValidityScenario& scenario,
                                    std::size_t replications,
                                    std::span<const double> alpha_grid,
                                    std::uint64_t master_seed, unsigned threads,
                                    double k_sigma = 3.0);

}  // namespace ispval
