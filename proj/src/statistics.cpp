#include "ispval/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ispval {

double median(std::span<const double> values) {
    if (values.empty()) throw DomainError("median: empty input");
    std::vector<double> v(values.begin(), values.end());
    std::size_t n = v.size();
    std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

double median_diff(const LabeledValues& data) {
    if (data.values.size() != data.labels.size())
        throw ShapeError("median_diff: values/labels length mismatch");
    std::vector<double> ones, zeros;
    for (std::size_t i = 0; i < data.values.size(); ++i) {
        if (data.labels[i] != 0 && data.labels[i] != 1)
            throw ShapeError("median_diff: labels must be 0/1");
        (data.labels[i] == 1 ? ones : zeros).push_back(data.values[i]);
    }
    if (ones.empty() || zeros.empty())
        throw ShapeError("median_diff: both label groups must be nonempty");
    return median(ones) - median(zeros);
}

double linear_covariate_stat(const BinaryMatrix& x, const RealMatrix& v) {
    if (x.rows() != v.rows() || x.cols() != v.cols())
        throw ShapeError("linear_covariate_stat: covariate shape mismatch");
    KahanSum s;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j)
            if (x(i, j)) s.add(v(i, j));
    return s.value();
}

long lag_match_count(std::span<const int> first, std::span<const int> second, int lag) {
    // Both sequences are strictly increasing; two-pointer sweep.
    long count = 0;
    std::size_t k = 0, l = 0;
    while (k < first.size() && l < second.size()) {
        long shifted = static_cast<long>(first[k]) + lag;
        if (shifted == second[l]) {
            ++count;
            ++k;
            ++l;
        } else if (shifted < second[l]) {
            ++k;
        } else {
            ++l;
        }
    }
    return count;
}

namespace {

void check_strictly_increasing(std::span<const int> t, const char* what) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] <= t[i - 1]) throw ShapeError(std::string(what) + ": times must be strictly increasing");
}

}  // namespace

double lag_count_plus(const PairedEventTimes& data) {
    check_strictly_increasing(data.first, "lag_count_plus");
    check_strictly_increasing(data.second, "lag_count_plus");
    long best = 0;
    for (int d = 1; d <= 4; ++d)
        best = std::max(best, lag_match_count(data.first, data.second, d));
    return static_cast<double>(best);
}

double lag_count_minus(const PairedEventTimes& data) {
    check_strictly_increasing(data.first, "lag_count_minus");
    check_strictly_increasing(data.second, "lag_count_minus");
    long worst = std::numeric_limits<long>::max();
    for (int d = 1; d <= 4; ++d)
        worst = std::min(worst, lag_match_count(data.first, data.second, d));
    return -static_cast<double>(worst);
}

double finch_s2bar(const BinaryMatrix& x) {
    int m = x.rows();
    if (m < 2) throw ShapeError("finch_s2bar: need at least two rows");
    KahanSum s;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            long dot = 0;
            for (int c = 0; c < x.cols(); ++c) dot += x(i, c) & x(j, c);
            s.add(static_cast<double>(dot) * static_cast<double>(dot));
        }
    }
    return s.value() / (static_cast<double>(m) * (m - 1));
}

double column_index_sum(const BinaryMatrix& x) {
    if (x.rows() < 1) throw ShapeError("column_index_sum: empty matrix");
    long sum = 0;
    for (int j = 0; j < x.cols(); ++j)
        if (x(0, j)) sum += j + 1;
    return static_cast<double>(sum);
}

double evaluate_statistic(const StatisticSpec& spec, const Observation& data) {
    switch (spec.kind) {
        case StatisticKind::Identity:
            if (const double* v = std::get_if<double>(&data)) return *v;
            throw ShapeError("Identity statistic expects a scalar observation");
        case StatisticKind::MedianDiff:
            if (const auto* lv = std::get_if<LabeledValues>(&data)) return median_diff(*lv);
            throw ShapeError("MedianDiff expects labeled values");
        case StatisticKind::LinearCovariate:
            if (const auto* m = std::get_if<BinaryMatrix>(&data))
                return linear_covariate_stat(*m, spec.covariates);
            throw ShapeError("LinearCovariate expects a binary matrix");
        case StatisticKind::LagCountPlus:
            if (const auto* p = std::get_if<PairedEventTimes>(&data)) return lag_count_plus(*p);
            throw ShapeError("LagCountPlus expects paired event times");
        case StatisticKind::LagCountMinus:
            if (const auto* p = std::get_if<PairedEventTimes>(&data)) return lag_count_minus(*p);
            throw ShapeError("LagCountMinus expects paired event times");
        case StatisticKind::FinchS2Bar:
            if (const auto* m = std::get_if<BinaryMatrix>(&data)) return finch_s2bar(*m);
            throw ShapeError("FinchS2Bar expects a binary matrix");
        case StatisticKind::ColumnIndexSum:
            if (const auto* m = std::get_if<BinaryMatrix>(&data)) return column_index_sum(*m);
            throw ShapeError("ColumnIndexSum expects a binary matrix");
    }
    throw DomainError("evaluate_statistic: unknown statistic kind");
}

std::vector<double> apply_pooled_transform(PooledTransform t,
                                           std::span<const double> pooled) {
    std::vector<double> out(pooled.begin(), pooled.end());
    if (t == PooledTransform::None || out.empty()) return out;

    if (t == PooledTransform::Rank) {
        std::vector<std::size_t> order(out.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return out[a] < out[b]; });
        std::vector<double> ranks(out.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && out[order[j + 1]] == out[order[i]]) ++j;
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average 1-based rank
            for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
            i = j + 1;
        }
        return ranks;
    }

    // CenterScale. Moments are accumulated in sorted order so the transform
    // is permutation invariant bit for bit.
    std::vector<double> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    KahanSum sum;
    for (double x : sorted) sum.add(x);
    double mean = sum.value() / static_cast<double>(out.size());
    KahanSum ss;
    for (double x : sorted) ss.add((x - mean) * (x - mean));
    double sd = out.size() > 1
                    ? std::sqrt(ss.value() / static_cast<double>(out.size() - 1))
                    : 0.0;
    if (!(sd > 0.0)) sd = 1.0;
    for (double& x : out) x = (x - mean) / sd;
    return out;
}

}  // namespace ispval
