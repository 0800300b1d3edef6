#include <doctest.h>

#include <cmath>

#include "ispval/proposals.hpp"

using namespace ispval;

namespace {

struct MeanTracker {
    double sum = 0, sumsq = 0;
    long n = 0;
    void add(double w) {
        sum += w;
        sumsq += w * w;
        ++n;
    }
    bool within_five_se_of_one() const {
        double mean = sum / n;
        double se = std::sqrt((sumsq / n - mean * mean) / n);
        return std::fabs(mean - 1.0) <= 5.0 * se;
    }
};

}  // namespace

// Every normalized proposal must have E_Q[dP/dQ] = 1; checked empirically at
// 1e5 draws within five Monte Carlo standard errors.
TEST_SUITE("proposals.mean_one") {

TEST_CASE("gaussian pair") {
    GaussianPair q(1.2, 0.7);
    Rng g(1001);
    MeanTracker m;
    for (int i = 0; i < 100000; ++i) {
        auto [x, w] = q.sample_and_weight(g);
        (void)x;
        m.add(std::exp(w.log_w));
    }
    CHECK(m.within_five_se_of_one());
}

TEST_CASE("tilted permutation proposal") {
    Rng g0(7);
    std::vector<double> values;
    for (int i = 0; i < 30; ++i) values.push_back(normal_variate(g0));
    PermutationFiber fiber(values, 12);
    TiltedPermutationProposal prop(fiber, 2.0);
    Rng g(1002);
    MeanTracker m;
    for (int i = 0; i < 100000; ++i) {
        auto lab = prop.sample(g);
        m.add(std::exp(prop.log_weight(lab).log_w));
    }
    CHECK(m.within_five_se_of_one());
}

TEST_CASE("point-process pair proposal") {
    BinnedPairFiber fiber(5, 40, {2, 0, 3, 1, 2, 2, 0, 1}, {1, 2, 2, 0, 3, 1, 1, 2});
    TiltedPointProcess pp(fiber, TiltedPointProcessConfig{});
    Rng g(1003);
    MeanTracker m;
    for (int i = 0; i < 100000; ++i) {
        std::vector<int> u = pp.sample_first_uniform(g);
        auto [s, lq] = pp.sample_second(u, g);
        (void)lq;
        m.add(std::exp(pp.pair_log_weight(u, s).log_w));
    }
    CHECK(m.within_five_se_of_one());
}

TEST_CASE("sequential table sampler on the structured fiber") {
    const MarginFiber& fiber = structured_table_fiber();
    double log_p = -structured_table_log_fiber_size();
    Rng g(1004);
    MeanTracker m;
    BinaryMatrix scratch;
    for (int i = 0; i < 100000; ++i) {
        TableDraw d = cp_column_sample_into(fiber, nullptr, 0.0, g, scratch);
        REQUIRE_FALSE(d.dead_end);
        m.add(std::exp(log_p - d.log_q));
    }
    CHECK(m.within_five_se_of_one());
}

TEST_CASE("ess heuristic arithmetic at reference scale") {
    // n / (1 + cv^2) with n = 2e7 and cv^2 = 20249 sits near 988
    CHECK(std::lround(2e7 / (1.0 + 20249.0)) == 988);
}

}  // TEST_SUITE
