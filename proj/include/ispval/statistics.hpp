#pragma once

#include <span>
#include <variant>
#include <vector>

#include "ispval/common.hpp"
#include "ispval/matrix.hpp"

namespace ispval {

// Test statistics used across the application domains.
enum class StatisticKind {
    Identity,        // t(x) = x, scalar observations
    MedianDiff,      // median(values | label 1) - median(values | label 0)
    LinearCovariate, // sum_ij x_ij v_ij for a binary matrix and covariates v
    LagCountPlus,    // max over lags d=1..4 of the pairwise lag-d match count
    LagCountMinus,   // minus the min over lags d=1..4 of the same counts
    FinchS2Bar,      // (1/(m(m-1))) sum_{i != j} ((x x^T)_ij)^2
    ColumnIndexSum,  // sum of 1-based column indices of the ones in row 0
};

// Permutation-invariant transforms of the pooled statistic sequence
// (observation first, then the n draws).
enum class PooledTransform { None, Rank, CenterScale };

struct LabeledValues {
    std::vector<double> values;
    std::vector<int> labels;  // 0/1
};

struct PairedEventTimes {
    std::vector<int> first;
    std::vector<int> second;
};

// Median with the even-length convention: midpoint of the two central
// order statistics.
double median(std::span<const double> values);

double median_diff(const LabeledValues& data);

double linear_covariate_stat(const BinaryMatrix& x, const RealMatrix& v);

// Pairwise lag-match counts: for each lag d, #{(k,l): second_l - first_k = d}.
long lag_match_count(std::span<const int> first, std::span<const int> second, int lag);
double lag_count_plus(const PairedEventTimes& data);
double lag_count_minus(const PairedEventTimes& data);

// Pairwise co-occurrence statistic for an m-row occurrence matrix, normalized
// by m(m-1).
double finch_s2bar(const BinaryMatrix& x);

double column_index_sum(const BinaryMatrix& x);

// Generic observation for the dispatcher below.
using Observation =
    std::variant<double, LabeledValues, PairedEventTimes, BinaryMatrix>;

struct StatisticSpec {
    StatisticKind kind;
    RealMatrix covariates;  // used by LinearCovariate only
};

// Evaluates `spec` on `data`; throws ShapeError when the observation type
// does not match the statistic.
double evaluate_statistic(const StatisticSpec& spec, const Observation& data);

// Applies the pooled transform to the sequence of statistic values.
// Rank uses average ranks for ties; CenterScale subtracts the mean and
// divides by the sample standard deviation (left unscaled if degenerate).
// Both are monotone, so exceedance comparisons are preserved.
std::vector<double> apply_pooled_transform(PooledTransform t,
                                           std::span<const double> pooled);

}  // namespace ispval
