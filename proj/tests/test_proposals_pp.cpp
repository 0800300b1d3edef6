#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "ispval/proposals.hpp"
#include "ispval/statistics.hpp"
#include "test_util.hpp"

using namespace ispval;

namespace {

// Enumerate all members of an event-time fiber (small windows only).
void enumerate_times(const std::vector<int>& counts, int delta, std::vector<int>& prefix,
                     int window, const std::function<void(const std::vector<int>&)>& emit) {
    if (window == static_cast<int>(counts.size())) {
        emit(prefix);
        return;
    }
    int c = counts[window];
    std::vector<int> offs(c);
    std::function<void(int, int)> rec = [&](int start, int left) {
        if (left == 0) {
            std::size_t base = prefix.size();
            for (int o : offs) prefix.push_back(window * delta + o);
            enumerate_times(counts, delta, prefix, window + 1, emit);
            prefix.resize(base);
            return;
        }
        for (int o = start; o <= delta - left; ++o) {
            offs[c - left] = o;
            rec(o + 1, left - 1);
        }
    };
    if (c == 0)
        enumerate_times(counts, delta, prefix, window + 1, emit);
    else
        rec(0, c);
}

std::vector<std::vector<int>> fiber_members(const std::vector<int>& counts, int delta) {
    std::vector<std::vector<int>> out;
    std::vector<int> prefix;
    enumerate_times(counts, delta, prefix, 0,
                    [&](const std::vector<int>& t) { out.push_back(t); });
    return out;
}

}  // namespace

TEST_SUITE("proposals.pointprocess") {

TEST_CASE("fiber validation") {
    CHECK_THROWS_AS(BinnedPairFiber(10, 25, {1, 1}, {1, 1}), DomainError);  // 25 % 10 != 0
    CHECK_THROWS_AS(BinnedPairFiber(3, 6, {4, 0}, {1, 1}), DomainError);    // count > delta
    BinnedPairFiber ok(3, 6, {2, 1}, {1, 2});
    CHECK(ok.num_windows == 2);
    CHECK(ok.log_omega_first() == doctest::Approx(std::log(3.0 * 3.0)).epsilon(1e-12));
}

TEST_CASE("uniform case: probability of any member is 1/|Omega|") {
    BinnedPairFiber fiber(3, 6, {2, 1}, {2, 1});
    TiltedPointProcessConfig cfg;
    cfg.lags = {0, 1};
    cfg.thetas = {0.0, 0.0};
    TiltedPointProcess pp(fiber, cfg);
    std::vector<int> u = {0, 2, 4};
    auto members = fiber_members(fiber.counts_second, fiber.delta);
    double expect = -fiber.log_omega_second();
    for (const auto& s : members)
        CHECK(pp.log_prob_second(u, s) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("single window, single slot closed form") {
    // delta=2, one window; u+d occupies one slot; one event to place
    BinnedPairFiber fiber(2, 2, {1}, {1});
    TiltedPointProcessConfig cfg;
    cfg.lags = {0};
    double theta = 0.8;
    cfg.thetas = {theta};
    TiltedPointProcess pp(fiber, cfg);
    std::vector<int> u = {0};
    std::vector<int> on_match = {0};
    std::vector<int> off_match = {1};
    double e = std::exp(theta);
    CHECK(std::exp(pp.log_rho(u, on_match, 0, theta)) ==
          doctest::Approx(e / (e + 1)).epsilon(1e-12));
    CHECK(std::exp(pp.log_rho(u, off_match, 0, theta)) ==
          doctest::Approx(1 / (e + 1)).epsilon(1e-12));
}

TEST_CASE("rho normalizes over enumerable fibers") {
    BinnedPairFiber fiber(3, 6, {2, 1}, {2, 2});
    TiltedPointProcessConfig cfg;  // defaults: lags 0..4
    TiltedPointProcess pp(fiber, cfg);
    std::vector<int> u = {1, 2, 3};
    auto members = fiber_members(fiber.counts_second, fiber.delta);
    for (double theta : {-0.5, 0.0, 0.5}) {
        for (int d : {0, 1, 2}) {
            double total = 0;
            for (const auto& s : members) total += std::exp(pp.log_rho(u, s, d, theta));
            CHECK(std::fabs(total - 1.0) < 1e-10);
        }
    }
    // the lag mixture normalizes as well
    double total = 0;
    for (const auto& s : members) total += std::exp(pp.log_prob_second(u, s));
    CHECK(std::fabs(total - 1.0) < 1e-10);
}

TEST_CASE("empirical law of sample_second matches log_prob_second") {
    BinnedPairFiber fiber(3, 6, {1, 1}, {2, 1});
    TiltedPointProcessConfig cfg;
    cfg.lags = {0, 1, 2};
    cfg.thetas = {0.0, 0.7, -0.4};
    TiltedPointProcess pp(fiber, cfg);
    std::vector<int> u = {2, 4};
    auto members = fiber_members(fiber.counts_second, fiber.delta);
    std::map<std::vector<int>, std::size_t> index;
    std::vector<double> probs;
    for (std::size_t i = 0; i < members.size(); ++i) {
        index[members[i]] = i;
        probs.push_back(std::exp(pp.log_prob_second(u, members[i])));
    }
    Rng g(404);
    std::vector<long> counts(members.size(), 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto [s, lq] = pp.sample_second(u, g);
        ++counts[index.at(s)];
        (void)lq;
    }
    CHECK(test_util::chi_square_gof_pvalue(counts, probs) > 0.001);
}

TEST_CASE("pair weights have mean one under the proposal") {
    BinnedPairFiber fiber(4, 16, {2, 1, 0, 3}, {1, 2, 2, 0});
    TiltedPointProcessConfig cfg;  // theta defaults (0,.5,.5,.5,.5)
    TiltedPointProcess pp(fiber, cfg);
    Rng g(7);
    const int n = 50000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<int> u = pp.sample_first_uniform(g);
        auto [s, lq] = pp.sample_second(u, g);
        double w = std::exp(pp.pair_log_weight(u, s).log_w);
        sum += w;
        sumsq += w * w;
        (void)lq;
    }
    double mean = sum / n;
    double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::fabs(mean - 1.0) <= 5 * se);
}

TEST_CASE("membership validation") {
    BinnedPairFiber fiber(3, 6, {1, 1}, {1, 1});
    TiltedPointProcessConfig cfg;
    TiltedPointProcess pp(fiber, cfg);
    Rng g(1);
    std::vector<int> wrong_counts = {0, 1};  // both in window 0: counts (2,0)
    CHECK_THROWS_AS(pp.sample_second(wrong_counts, g), DomainError);
    std::vector<int> unsorted = {4, 0};
    CHECK_THROWS_AS(pp.sample_second(unsorted, g), DomainError);
}

TEST_CASE("lag statistics interact with the tilt as designed") {
    // positive theta at lag 1 should inflate lag-1 matches relative to uniform
    BinnedPairFiber fiber(5, 25, {2, 1, 2, 0, 1}, {1, 2, 1, 1, 1});
    TiltedPointProcessConfig tilted;
    tilted.lags = {1};
    tilted.thetas = {1.5};
    TiltedPointProcessConfig flat;
    flat.lags = {1};
    flat.thetas = {0.0};
    TiltedPointProcess pt(fiber, tilted);
    TiltedPointProcess pf(fiber, flat);
    Rng g(88);
    std::vector<int> u = pt.sample_first_uniform(g);
    double mt = 0, mf = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto [st, l1] = pt.sample_second(u, g);
        auto [sf, l2] = pf.sample_second(u, g);
        mt += static_cast<double>(lag_match_count(u, st, 1));
        mf += static_cast<double>(lag_match_count(u, sf, 1));
        (void)l1;
        (void)l2;
    }
    CHECK(mt / n > mf / n + 0.05);
}

}  // TEST_SUITE
