#include "ispval/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ispval/special.hpp"

namespace ispval {

Lemma1Result lemma1_check(std::span<const double> t, std::span<const double> w,
                          double alpha) {
    if (t.size() != w.size()) throw ShapeError("lemma1_check: length mismatch");
    if (!(alpha >= 0.0)) throw DomainError("lemma1_check: alpha must be >= 0");
    for (double wk : w)
        if (!(wk >= 0.0)) throw DomainError("lemma1_check: weights must be >= 0");
    for (double tk : t)
        if (std::isnan(tk)) throw DomainError("lemma1_check: NaN statistic");

    const std::size_t n = t.size();
    KahanSum lhs;
    for (std::size_t k = 0; k < n; ++k) {
        KahanSum inner;
        for (std::size_t i = 0; i < n; ++i)
            if (t[i] >= t[k]) inner.add(w[i]);
        if (inner.value() <= alpha) lhs.add(w[k]);
    }
    return {lhs.value(), lhs.value() <= alpha};
}

// ---------------------------------------------------------------------------

double exact_permutation_pvalue(const PermutationFiber& fiber,
                                std::span<const int> observed_labeling,
                                const std::function<double(std::span<const int>)>& stat) {
    if (fiber.m > 10) throw TooLarge("exact_permutation_pvalue: m must be <= 10");
    if (static_cast<int>(observed_labeling.size()) != fiber.m)
        throw ShapeError("exact_permutation_pvalue: labeling length mismatch");
    int ones = 0;
    for (int l : observed_labeling) ones += (l != 0);
    if (ones != fiber.r)
        throw DomainError("exact_permutation_pvalue: labeling must have r ones");

    double t_obs = stat(observed_labeling);
    // All labelings with r ones are equally likely under the null.
    std::vector<int> labeling(fiber.m, 0);
    long total = 0, exceed = 0;
    std::vector<int> idx(fiber.r);
    std::iota(idx.begin(), idx.end(), 0);
    auto eval = [&]() {
        std::fill(labeling.begin(), labeling.end(), 0);
        for (int i : idx) labeling[i] = 1;
        ++total;
        if (stat(labeling) >= t_obs) ++exceed;
    };
    if (fiber.r == 0) {
        eval();
    } else {
        for (;;) {
            eval();
            int pos = fiber.r - 1;
            while (pos >= 0 && idx[pos] == fiber.m - fiber.r + pos) --pos;
            if (pos < 0) break;
            ++idx[pos];
            for (int q = pos + 1; q < fiber.r; ++q) idx[q] = idx[q - 1] + 1;
        }
    }
    return static_cast<double>(exceed) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Counting and enumerating margin fibers
// ---------------------------------------------------------------------------

namespace {

using u128 = unsigned __int128;

struct CountKey {
    int col;
    std::vector<int> sorted_residual;
    bool operator<(const CountKey& o) const {
        if (col != o.col) return col < o.col;
        return sorted_residual < o.sorted_residual;
    }
};

std::uint64_t saturating_u64(u128 v, std::uint64_t cap) {
    return v > cap ? cap : static_cast<std::uint64_t>(v);
}

// Binomial coefficients for small arguments.
u128 choose_u128(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    u128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<u128>(n - k + i) / static_cast<u128>(i);
    }
    return r;
}

class FiberCounter {
public:
    FiberCounter(std::span<const int> col_sums, std::uint64_t cap)
        : col_sums_(col_sums.begin(), col_sums.end()), cap_(cap) {}

    std::uint64_t count(int col, std::vector<int> residual) {
        if (col == static_cast<int>(col_sums_.size())) {
            for (int r : residual)
                if (r != 0) return 0;
            return 1;
        }
        std::sort(residual.begin(), residual.end());
        CountKey key{col, residual};
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;

        // group rows by residual value
        std::map<int, int> groups;  // residual value -> count
        for (int r : residual) ++groups[r];
        int need = col_sums_[col];
        int cols_remaining = static_cast<int>(col_sums_.size()) - col;

        std::vector<std::pair<int, int>> gv(groups.begin(), groups.end());
        u128 total = 0;
        std::vector<int> take(gv.size(), 0);
        // enumerate how many rows of each residual group receive a one
        std::function<void(std::size_t, int, u128)> rec = [&](std::size_t gi, int left,
                                                              u128 ways) {
            if (total > cap_) return;
            if (gi == gv.size()) {
                if (left != 0) return;
                std::vector<int> next;
                next.reserve(residual.size());
                for (std::size_t q = 0; q < gv.size(); ++q) {
                    int value = gv[q].first, cnt = gv[q].second, t = take[q];
                    for (int z = 0; z < cnt - t; ++z) next.push_back(value);
                    for (int z = 0; z < t; ++z) next.push_back(value - 1);
                }
                // prune: residuals must fit in the remaining columns
                for (int r : next)
                    if (r < 0 || r > cols_remaining - 1) return;
                std::uint64_t sub = count(col + 1, std::move(next));
                total += ways * static_cast<u128>(sub);
                return;
            }
            int value = gv[gi].first, cnt = gv[gi].second;
            int hi = std::min(cnt, left);
            for (int tk = 0; tk <= hi; ++tk) {
                if (value == 0 && tk > 0) continue;  // exhausted rows take no ones
                take[gi] = tk;
                rec(gi + 1, left - tk, ways * choose_u128(cnt, tk));
            }
            take[gi] = 0;
        };
        rec(0, need, 1);

        std::uint64_t result = saturating_u64(total, cap_);
        memo_.emplace(std::move(key), result);
        return result;
    }

private:
    std::vector<int> col_sums_;
    std::uint64_t cap_;
    std::map<CountKey, std::uint64_t> memo_;
};

}  // namespace

std::uint64_t count_margin_fiber(std::span<const int> row_sums,
                                 std::span<const int> col_sums, std::uint64_t cap) {
    long tr = std::accumulate(row_sums.begin(), row_sums.end(), 0L);
    long tc = std::accumulate(col_sums.begin(), col_sums.end(), 0L);
    if (tr != tc) return 0;
    if (!gale_ryser_feasible(row_sums, col_sums)) return 0;
    FiberCounter counter(col_sums, cap);
    return counter.count(0, std::vector<int>(row_sums.begin(), row_sums.end()));
}

namespace {

void enumerate_rec(const MarginFiber& fiber, int col, std::vector<int>& residual,
                   BinaryMatrix& work, std::vector<BinaryMatrix>& out) {
    int n = fiber.num_cols();
    if (col == n) {
        out.push_back(work);
        return;
    }
    int m = fiber.num_rows();
    int need = fiber.col_sums[col];
    std::vector<int> rows;
    for (int i = 0; i < m; ++i)
        if (residual[i] > 0) rows.push_back(i);

    std::function<void(std::size_t, int)> rec = [&](std::size_t start, int left) {
        if (left == 0) {
            std::span<const int> rest(fiber.col_sums.data() + col + 1, n - col - 1);
            if (gale_ryser_feasible(residual, rest))
                enumerate_rec(fiber, col + 1, residual, work, out);
            return;
        }
        if (rows.size() - start < static_cast<std::size_t>(left)) return;
        for (std::size_t q = start; q + left <= rows.size(); ++q) {
            int i = rows[q];
            work.set(i, col, 1);
            --residual[i];
            rec(q + 1, left - 1);
            ++residual[i];
            work.set(i, col, 0);
        }
    };
    rec(0, need);
}

}  // namespace

std::vector<BinaryMatrix> enumerate_margin_fiber(const MarginFiber& fiber,
                                                 std::size_t max_size) {
    std::uint64_t size = count_margin_fiber(fiber.row_sums, fiber.col_sums,
                                            static_cast<std::uint64_t>(max_size) + 1);
    if (size > max_size) throw TooLarge("enumerate_margin_fiber: fiber too large");
    std::vector<BinaryMatrix> out;
    out.reserve(size);
    BinaryMatrix work(fiber.num_rows(), fiber.num_cols());
    std::vector<int> residual = fiber.row_sums;
    enumerate_rec(fiber, 0, residual, work, out);
    return out;
}

double exact_fiber_pvalue(const MarginFiber& fiber, const BinaryMatrix& observed,
                          const std::function<double(const BinaryMatrix&)>& stat,
                          std::size_t max_size, double theta,
                          const RealMatrix* covariates) {
    if (!fiber.contains(observed)) throw NotInFiber("exact_fiber_pvalue: observation not in fiber");
    std::vector<BinaryMatrix> all = enumerate_margin_fiber(fiber, max_size);
    double t_obs = stat(observed);
    // weights exp(theta * t_cov(x)) normalized over the fiber
    std::vector<double> log_w(all.size(), 0.0);
    if (theta != 0.0) {
        if (!covariates) throw DomainError("exact_fiber_pvalue: tilt requires covariates");
        for (std::size_t i = 0; i < all.size(); ++i)
            log_w[i] = theta * linear_covariate_stat(all[i], *covariates);
    }
    double log_z = log_sum_exp(log_w);
    KahanSum p;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (stat(all[i]) >= t_obs) p.add(std::exp(log_w[i] - log_z));
    return p.value();
}

double gaussian_true_pvalue(double x) {
    if (std::isnan(x)) throw DomainError("gaussian_true_pvalue: NaN");
    return normal_sf(x);
}

// ---------------------------------------------------------------------------

ValidityReport validity_monte_carlo(const ValidityScenario& scenario,
                                    std::size_t replications,
                                    std::span<const double> alpha_grid,
                                    std::uint64_t master_seed, unsigned threads,
                                    double k_sigma) {
    if (replications == 0) throw DomainError("validity_monte_carlo: need replications");
    std::vector<double> pvals(replications);
    parallel_for(replications, threads, [&](std::size_t rep) {
        Rng g = make_stream(master_seed, rep);
        ObservedPoint obs = scenario.draw_observation(g);
        std::vector<WeightedDraw> draws;
        draws.reserve(scenario.n);
        for (std::size_t i = 0; i < scenario.n; ++i) draws.push_back(scenario.draw_proposal(g));
        double p = 0.0;
        switch (scenario.estimator) {
            case EstimatorKind::PHat: p = p_hat(obs.stat, draws); break;
            case EstimatorKind::PTilde: p = p_tilde(obs.stat, draws); break;
            case EstimatorKind::PHatStar: p = p_hat_star(obs, draws); break;
            case EstimatorKind::PTildeStar: p = p_tilde_star(obs, draws); break;
            case EstimatorKind::WaldUpper:
                p = wald_upper_limit(p_hat(obs.stat, draws),
                                     draws.size() >= 2 ? p_hat_std_error(obs.stat, draws) : 0.0,
                                     scenario.wald_level);
                break;
        }
        pvals[rep] = p;
    });

    ValidityReport report;
    report.alphas.assign(alpha_grid.begin(), alpha_grid.end());
    report.replications = replications;
    report.k_sigma = k_sigma;
    double R = static_cast<double>(replications);
    for (double alpha : alpha_grid) {
        std::size_t hits = 0;
        for (double p : pvals) hits += (p <= alpha);
        double cdf = static_cast<double>(hits) / R;
        double se = std::sqrt(cdf * (1.0 - cdf) / R);
        report.cdf_hat.push_back(cdf);
        report.se.push_back(se);
        report.violation.push_back(cdf > alpha + k_sigma * se);
    }
    return report;
}

}  // namespace ispval
