#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "ispval/proposals.hpp"
#include "test_util.hpp"

using namespace ispval;

namespace {

// Enumerate all labelings with r ones of m positions.
std::vector<std::vector<int>> all_labelings(int m, int r) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(r);
    for (int i = 0; i < r; ++i) idx[i] = i;
    if (r == 0) {
        out.emplace_back(m, 0);
        return out;
    }
    for (;;) {
        std::vector<int> lab(m, 0);
        for (int i : idx) lab[i] = 1;
        out.push_back(lab);
        int pos = r - 1;
        while (pos >= 0 && idx[pos] == m - r + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int q = pos + 1; q < r; ++q) idx[q] = idx[q - 1] + 1;
    }
    return out;
}

}  // namespace

TEST_SUITE("proposals.gaussian") {

TEST_CASE("log weight closed forms") {
    GaussianPair same(0.0, 1.0);
    Rng g(3);
    for (int i = 0; i < 10; ++i) {
        auto [x, w] = same.sample_and_weight(g);
        CHECK(w.log_w == 0.0);  // Q == P
        CHECK(w.normalized);
        (void)x;
    }

    GaussianPair narrow(0.0, 0.2);
    CHECK(narrow.log_weight_at(0.0) == doctest::Approx(std::log(0.2)).epsilon(1e-14));

    CHECK_THROWS_AS(GaussianPair(0.0, 0.0), DomainError);
}

TEST_CASE("weights have mean one under the proposal") {
    GaussianPair q(0.5, 0.8);
    Rng g(11);
    const int n = 200000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
        auto [x, w] = q.sample_and_weight(g);
        double v = std::exp(w.log_w);
        sum += v;
        sumsq += v * v;
        (void)x;
    }
    double mean = sum / n;
    double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::fabs(mean - 1.0) <= 5.0 * se);
}

}  // TEST_SUITE

TEST_SUITE("proposals.permutation") {

TEST_CASE("theta zero is the uniform law") {
    PermutationFiber fiber({2.0, 1.0, 3.0}, 1);
    TiltedPermutationProposal prop(fiber, 0.0);
    for (const auto& lab : all_labelings(3, 1))
        CHECK(prop.log_prob(lab) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("m=2 r=1 closed form") {
    PermutationFiber fiber({1.0, 4.0}, 1);  // larger value at position 1
    TiltedPermutationProposal prop(fiber, 1.0);
    double e = std::exp(1.0);
    std::vector<int> on_larger = {0, 1};
    std::vector<int> on_smaller = {1, 0};
    CHECK(std::exp(prop.log_prob(on_larger)) == doctest::Approx(e / (1 + e)).epsilon(1e-12));
    CHECK(std::exp(prop.log_prob(on_smaller)) == doctest::Approx(1 / (1 + e)).epsilon(1e-12));
}

TEST_CASE("probabilities sum to one over the fiber") {
    PermutationFiber fiber({0.3, -1.2, 2.0, 0.7, 0.3, -0.5}, 3);
    TiltedPermutationProposal prop(fiber, 2.0);
    double total = 0;
    for (const auto& lab : all_labelings(6, 3)) total += std::exp(prop.log_prob(lab));
    CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("importance weights are exact dP/dQ") {
    PermutationFiber fiber({0.5, 1.5, -0.5, 2.5}, 2);
    TiltedPermutationProposal prop(fiber, 1.5);
    // sum over fiber of Q(lab) * w(lab) must equal 1 (it telescopes to sum P)
    double total = 0;
    for (const auto& lab : all_labelings(4, 2))
        total += std::exp(prop.log_prob(lab)) * std::exp(prop.log_weight(lab).log_w);
    CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("empirical law matches the closed form (chi-square)") {
    PermutationFiber fiber({1.0, 2.0, 3.0, 4.0}, 2);
    TiltedPermutationProposal prop(fiber, 3.0);
    auto labs = all_labelings(4, 2);
    std::map<std::vector<int>, std::size_t> index;
    std::vector<double> probs;
    for (std::size_t i = 0; i < labs.size(); ++i) {
        index[labs[i]] = i;
        probs.push_back(std::exp(prop.log_prob(labs[i])));
    }
    Rng g(42);
    std::vector<long> counts(labs.size(), 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[index.at(prop.sample(g))];
    CHECK(test_util::chi_square_gof_pvalue(counts, probs) > 0.001);
}

TEST_CASE("sampled labelings always carry r ones") {
    PermutationFiber fiber({1.0, -2.0, 0.5, 0.5, 3.0}, 2);
    TiltedPermutationProposal prop(fiber, -1.0);
    Rng g(8);
    for (int i = 0; i < 200; ++i) {
        auto lab = prop.sample(g);
        int ones = 0;
        for (int l : lab) ones += l;
        CHECK(ones == 2);
    }
}

TEST_CASE("log_prob rejects bad labelings") {
    PermutationFiber fiber({1.0, 2.0, 3.0}, 1);
    TiltedPermutationProposal prop(fiber, 0.5);
    std::vector<int> wrong = {1, 1, 0};
    CHECK_THROWS_AS(prop.log_prob(wrong), DomainError);
    CHECK_THROWS_AS(PermutationFiber({1.0, 2.0}, 3), DomainError);
}

}  // TEST_SUITE

TEST_SUITE("proposals.mixture") {

TEST_CASE("single component behaves like the component") {
    PermutationFiber fiber({1.0, 2.0, 3.0, 4.0}, 2);
    auto prop = std::make_shared<TiltedPermutationProposal>(fiber, 1.0);
    std::vector<MixtureComponent<std::vector<int>>> comps(1);
    comps[0].weight = 1.0;
    comps[0].sample = [prop](Rng& g) { return std::optional<std::vector<int>>(prop->sample(g)); };
    comps[0].log_prob = [prop](const std::vector<int>& lab) { return prop->log_prob(lab); };
    MixtureProposal<std::vector<int>> mix(std::move(comps));
    Rng g(1);
    auto draw = mix.sample(g);
    REQUIRE(draw.point.has_value());
    CHECK(draw.log_q == doctest::Approx(prop->log_prob(*draw.point)).epsilon(1e-13));
}

TEST_CASE("two identical components collapse") {
    PermutationFiber fiber({1.0, 2.0, 3.0, 4.0}, 2);
    auto prop = std::make_shared<TiltedPermutationProposal>(fiber, 0.7);
    std::vector<MixtureComponent<std::vector<int>>> comps(2);
    for (auto& c : comps) {
        c.weight = 0.5;
        c.sample = [prop](Rng& g) { return std::optional<std::vector<int>>(prop->sample(g)); };
        c.log_prob = [prop](const std::vector<int>& lab) { return prop->log_prob(lab); };
    }
    MixtureProposal<std::vector<int>> mix(std::move(comps));
    std::vector<int> lab = {1, 0, 1, 0};
    CHECK(mix.log_prob(lab) == doctest::Approx(prop->log_prob(lab)).epsilon(1e-12));
}

TEST_CASE("mixture of two tilts normalizes over the fiber") {
    PermutationFiber fiber({1.0, 2.0, 3.0, 4.0}, 2);
    auto p0 = std::make_shared<TiltedPermutationProposal>(fiber, 0.0);
    auto p2 = std::make_shared<TiltedPermutationProposal>(fiber, 2.0);
    std::vector<MixtureComponent<std::vector<int>>> comps(2);
    comps[0].weight = 0.5;
    comps[0].sample = [p0](Rng& g) { return std::optional<std::vector<int>>(p0->sample(g)); };
    comps[0].log_prob = [p0](const std::vector<int>& lab) { return p0->log_prob(lab); };
    comps[1].weight = 0.5;
    comps[1].sample = [p2](Rng& g) { return std::optional<std::vector<int>>(p2->sample(g)); };
    comps[1].log_prob = [p2](const std::vector<int>& lab) { return p2->log_prob(lab); };
    MixtureProposal<std::vector<int>> mix(std::move(comps));
    double total = 0;
    for (const auto& lab : all_labelings(4, 2)) total += std::exp(mix.log_prob(lab));
    CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("mixture weight validation") {
    std::vector<MixtureComponent<double>> comps(2);
    comps[0].weight = 0.4;
    comps[1].weight = 0.4;
    for (auto& c : comps) {
        c.sample = [](Rng&) { return std::optional<double>(0.0); };
        c.log_prob = [](const double&) { return 0.0; };
    }
    CHECK_THROWS_AS(MixtureProposal<double>(std::move(comps)), DomainError);
}

}  // TEST_SUITE
