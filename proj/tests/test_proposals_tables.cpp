#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "ispval/finch_data.hpp"
#include "ispval/oracle.hpp"
#include "ispval/proposals.hpp"
#include "ispval/statistics.hpp"
#include "test_util.hpp"

using namespace ispval;

TEST_SUITE("proposals.tables") {

TEST_CASE("gale-ryser feasibility") {
    std::vector<int> r1 = {1, 1}, c1 = {1, 1};
    CHECK(gale_ryser_feasible(r1, c1));
    std::vector<int> r2 = {2, 0}, c2 = {1, 1};
    CHECK(gale_ryser_feasible(r2, c2));
    std::vector<int> r3 = {2, 2}, c3 = {1, 1};
    CHECK_FALSE(gale_ryser_feasible(r3, c3));  // totals differ
    std::vector<int> r4 = {2, 2}, c4 = {2, 1, 1};
    CHECK(gale_ryser_feasible(r4, c4));
    std::vector<int> r5 = {3, 1}, c5 = {2, 2};
    CHECK_FALSE(gale_ryser_feasible(r5, c5));  // row sum exceeds column count
    std::vector<int> r6 = {2, 2, 2}, c6 = {3, 3, 0};
    CHECK(gale_ryser_feasible(r6, c6));
    std::vector<int> r7 = {3, 3, 0}, c7 = {2, 2, 2};
    CHECK(gale_ryser_feasible(r7, c7));
    // a genuinely infeasible case with equal totals: rows (2,2,0), cols (3,1,0)
    std::vector<int> r8 = {2, 2, 0}, c8 = {3, 1, 0};
    CHECK_FALSE(gale_ryser_feasible(r8, c8));
    CHECK_THROWS_AS(MarginFiber({2, 2, 0}, {3, 1, 0}), InfeasibleMargins);
    // finch margins are feasible
    CHECK(gale_ryser_feasible(finch_sorted_row_margins(), finch_sorted_col_margins()));
}

TEST_CASE("conditional poisson subset matches brute-force probabilities") {
    std::vector<double> w = {0.5, 1.0, 2.0, 3.5};
    int k = 2;
    ConditionalPoissonSubset cps(w, k);
    // brute force over all subsets of size 2
    double z = 0;
    std::map<std::pair<int, int>, double> probs;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            probs[{a, b}] = w[a] * w[b];
            z += w[a] * w[b];
        }
    for (auto& [key, v] : probs) {
        v /= z;
        std::vector<int> subset = {key.first, key.second};
        CHECK(std::exp(cps.log_prob(subset)) == doctest::Approx(v).epsilon(1e-12));
    }
    // empirical check
    Rng g(17);
    std::map<std::pair<int, int>, long> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto s = cps.sample(g);
        REQUIRE(s.size() == 2);
        ++counts[{s[0], s[1]}];
    }
    std::vector<long> cvec;
    std::vector<double> pvec;
    for (auto& [key, v] : probs) {
        cvec.push_back(counts[key]);
        pvec.push_back(v);
    }
    CHECK(test_util::chi_square_gof_pvalue(cvec, pvec) > 0.001);
}

TEST_CASE("2x2 fiber with unit margins splits evenly") {
    MarginFiber fiber({1, 1}, {1, 1});
    Rng g(5);
    std::map<std::vector<std::uint8_t>, long> counts;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto [mat, draw] = cp_column_sample(fiber, g);
        REQUIRE_FALSE(draw.dead_end);
        CHECK(draw.log_q == doctest::Approx(std::log(0.5)).epsilon(1e-12));
        CHECK(cp_column_logprob(fiber, mat) == draw.log_q);  // same code path, same bits
        ++counts[mat.raw()];
    }
    CHECK(counts.size() == 2);
    for (auto& [key, c] : counts) CHECK(std::fabs(c / double(n) - 0.5) < 0.02);
}

TEST_CASE("forced fiber of size one") {
    MarginFiber fiber({2, 0}, {1, 1});
    Rng g(2);
    auto [mat, draw] = cp_column_sample(fiber, g);
    REQUIRE_FALSE(draw.dead_end);
    CHECK(draw.log_q == 0.0);  // probability one
    CHECK(mat(0, 0) == 1);
    CHECK(mat(0, 1) == 1);
    CHECK(mat(1, 0) == 0);
}

TEST_CASE("sequential probabilities plus dead-end mass sum to one") {
    MarginFiber fiber({2, 1, 1}, {2, 1, 1});
    auto all = enumerate_margin_fiber(fiber, 1000);
    CHECK(all.size() == 5);  // hand enumeration: rows (2,1,1) x cols (2,1,1)
    double fiber_mass = 0;
    for (const auto& m : all) fiber_mass += std::exp(cp_column_logprob(fiber, m));
    // estimate dead-end mass empirically and check the complement
    Rng g(31);
    const int n = 200000;
    long dead = 0;
    for (int i = 0; i < n; ++i) {
        auto [mat, draw] = cp_column_sample(fiber, g);
        dead += draw.dead_end;
        (void)mat;
    }
    double dead_frac = dead / double(n);
    double se = std::sqrt(dead_frac * (1 - dead_frac) / n) + 1e-9;
    CHECK(std::fabs((1.0 - fiber_mass) - dead_frac) < 5 * se + 0.003);

    // exact check on a dead-end-free fiber
    MarginFiber clean({1, 1}, {1, 1});
    auto all2 = enumerate_margin_fiber(clean, 10);
    double total = 0;
    for (const auto& m : all2) total += std::exp(cp_column_logprob(clean, m));
    CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("empirical frequencies match sequential probabilities") {
    MarginFiber fiber({2, 1, 1}, {2, 1, 1});
    auto all = enumerate_margin_fiber(fiber, 1000);
    std::map<std::vector<std::uint8_t>, std::size_t> index;
    std::vector<double> probs(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        index[all[i].raw()] = i;
        probs[i] = std::exp(cp_column_logprob(fiber, all[i]));
    }
    Rng g(77);
    std::vector<long> counts(all.size() + 1, 0);
    std::vector<double> full_probs = probs;
    double dead_mass = 1.0;
    for (double p : probs) dead_mass -= p;
    full_probs.push_back(dead_mass);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto [mat, draw] = cp_column_sample(fiber, g);
        if (draw.dead_end)
            ++counts[all.size()];
        else
            ++counts[index.at(mat.raw())];
    }
    CHECK(test_util::chi_square_gof_pvalue(counts, full_probs) > 0.001);
}

TEST_CASE("sampled draws always land in the fiber") {
    MarginFiber fiber({3, 2, 2, 1}, {2, 2, 2, 1, 1});
    Rng g(123);
    int alive = 0;
    for (int i = 0; i < 500; ++i) {
        auto [mat, draw] = cp_column_sample(fiber, g);
        if (draw.dead_end) continue;
        ++alive;
        CHECK(fiber.contains(mat));
        CHECK(cp_column_logprob(fiber, mat) == draw.log_q);
    }
    CHECK(alive > 0);
}

TEST_CASE("theta tilt at zero reproduces the plain sampler bit for bit") {
    MarginFiber fiber({2, 1, 1}, {2, 1, 1});
    RealMatrix v(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v(i, j) = 0.37 * i - 0.22 * j;
    for (std::uint64_t seed : {1ull, 9ull, 55ull}) {
        Rng g1(seed), g2(seed);
        auto [m1, d1] = cp_column_sample(fiber, g1);
        auto [m2, d2] = theta_tilted_matrix_sample(fiber, v, 0.0, g2);
        CHECK(d1.dead_end == d2.dead_end);
        if (!d1.dead_end) {
            CHECK(m1 == m2);
            CHECK(d1.log_q == d2.log_q);
        }
    }
}

TEST_CASE("tilted sampler matches its replayed probabilities (chi-square)") {
    MarginFiber fiber({2, 1, 1}, {2, 1, 1});
    RealMatrix v(3, 3);
    v(0, 0) = 1.0;
    v(1, 1) = -0.5;
    v(2, 2) = 0.25;
    double theta = 1.2;
    auto all = enumerate_margin_fiber(fiber, 1000);
    std::map<std::vector<std::uint8_t>, std::size_t> index;
    std::vector<double> probs;
    for (std::size_t i = 0; i < all.size(); ++i) {
        index[all[i].raw()] = i;
        probs.push_back(std::exp(theta_tilted_matrix_logprob(fiber, v, theta, all[i])));
    }
    double dead_mass = 1.0;
    for (double p : probs) dead_mass -= p;
    probs.push_back(std::max(dead_mass, 0.0));
    Rng g(2718);
    std::vector<long> counts(all.size() + 1, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto [mat, draw] = theta_tilted_matrix_sample(fiber, v, theta, g);
        if (draw.dead_end)
            ++counts[all.size()];
        else
            ++counts[index.at(mat.raw())];
    }
    CHECK(test_util::chi_square_gof_pvalue(counts, probs) > 0.001);
}

TEST_CASE("positive tilt raises the tilted cell's inclusion frequency") {
    MarginFiber fiber({2, 1, 1}, {2, 1, 1});
    RealMatrix v(3, 3);
    v(2, 0) = 1.0;  // favor row 2 in column 0
    double prev = -1.0;
    for (double theta : {0.0, 1.0, 2.0}) {
        Rng g(99);
        long hits = 0, alive = 0;
        for (int i = 0; i < 20000; ++i) {
            auto [mat, draw] = theta_tilted_matrix_sample(fiber, v, theta, g);
            if (draw.dead_end) continue;
            ++alive;
            hits += mat(2, 0);
        }
        double freq = hits / double(alive);
        CHECK(freq > prev);
        prev = freq;
    }
}

TEST_CASE("rasch log weight reductions") {
    MarginFiber fiber({2, 1, 1}, {2, 1, 1});
    RealMatrix v(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v(i, j) = 0.31 * i * j - 0.17 * j;
    std::vector<double> thetas = {-1.0, 0.0, 1.0};
    auto mix = make_theta_mixture(fiber, v, thetas);

    auto all = enumerate_margin_fiber(fiber, 100);
    const BinaryMatrix& x = all[2];

    // theta = 0: the statistic term vanishes
    LogWeight w0 = rasch_log_weight(0.0, x, mix, v);
    CHECK(w0.log_w == doctest::Approx(-mix.log_prob(x)).epsilon(1e-12));
    CHECK_FALSE(w0.normalized);

    // shifting theta by delta adds exactly delta * t(x)
    double delta = 0.75;
    LogWeight w1 = rasch_log_weight(1.0, x, mix, v);
    LogWeight w2 = rasch_log_weight(1.0 + delta, x, mix, v);
    double t = linear_covariate_stat(x, v);
    CHECK(w2.log_w - w1.log_w == doctest::Approx(delta * t).epsilon(1e-12));

    BinaryMatrix outside(3, 3);
    outside.set(0, 0, 1);
    CHECK_THROWS_AS(rasch_log_weight(0.0, outside, mix, v), NotInFiber);
}

TEST_CASE("structured table sampler hits the margins and the statistic floor") {
    Rng g(5150);
    const MarginFiber& fiber = structured_table_fiber();
    for (int i = 0; i < 20; ++i) {
        BinaryMatrix x = structured_table_direct_sample(g);
        CHECK(fiber.contains(x));
        CHECK(column_index_sum(x) >= 1326.0);
    }
    // canonical completion also lands in the fiber
    BinaryMatrix a = structured_matrix_from_row1(table52_observed_a());
    CHECK(fiber.contains(a));
}

TEST_CASE("structured table importance weights are exact") {
    // Q(x) depends only on the first row, so w = P/Q evaluates exactly;
    // check E_Q[w] = 1 empirically.
    const MarginFiber& fiber = structured_table_fiber();
    double log_p = -structured_table_log_fiber_size();
    Rng g(31337);
    const int n = 2000;
    double sum = 0, sumsq = 0;
    int dead = 0;
    for (int i = 0; i < n; ++i) {
        auto [mat, draw] = cp_column_sample(fiber, g);
        if (draw.dead_end) {
            ++dead;
            continue;
        }
        double w = std::exp(log_p - draw.log_q);
        sum += w;
        sumsq += w * w;
    }
    CHECK(dead == 0);  // this fiber has no dead ends
    double mean = sum / n;
    double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::fabs(mean - 1.0) <= 5 * se);
}

TEST_CASE("margin fiber counting matches enumeration on small cases") {
    CHECK(count_margin_fiber(std::vector<int>{1, 1}, std::vector<int>{1, 1}, 1000) == 2);
    CHECK(count_margin_fiber(std::vector<int>{2, 0}, std::vector<int>{1, 1}, 1000) == 1);
    CHECK(count_margin_fiber(std::vector<int>{1, 1, 1}, std::vector<int>{1, 1, 1}, 1000) == 6);
    MarginFiber fiber({2, 1, 1}, {2, 1, 1});
    auto all = enumerate_margin_fiber(fiber, 100);
    CHECK(count_margin_fiber(fiber.row_sums, fiber.col_sums, 1000) == all.size());
    // enumeration refuses oversized fibers
    MarginFiber big({3, 3, 3, 3, 3, 3}, {3, 3, 3, 3, 3, 3});
    CHECK_THROWS_AS(enumerate_margin_fiber(big, 5), TooLarge);
}

TEST_CASE("finch margins have the documented fiber count") {
    const BinaryMatrix& x = darwin_finch_matrix();
    std::uint64_t count = count_margin_fiber(x.row_sums(), x.col_sums(),
                                              1000000000000000000ull);
    CHECK(count == 67149106137567626ull);
}

}  // TEST_SUITE
