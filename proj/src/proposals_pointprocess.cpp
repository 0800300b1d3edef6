#include <algorithm>
#include <cmath>

#include "ispval/proposals.hpp"
#include "ispval/statistics.hpp"

namespace ispval {

std::vector<int> window_counts(std::span<const int> times, int delta, int num_windows) {
    std::vector<int> counts(num_windows, 0);
    for (int t : times) {
        if (t < 0 || t >= delta * num_windows)
            throw DomainError("window_counts: time outside the recording");
        ++counts[t / delta];
    }
    return counts;
}

BinnedPairFiber::BinnedPairFiber(int delta_, int B, std::vector<int> counts_i,
                                 std::vector<int> counts_j)
    : delta(delta_),
      num_windows(delta_ > 0 ? B / delta_ : 0),
      counts_first(std::move(counts_i)),
      counts_second(std::move(counts_j)) {
    if (delta <= 0) throw DomainError("BinnedPairFiber: delta must be positive");
    if (B <= 0 || B % delta != 0)
        throw DomainError("BinnedPairFiber: recording length must be a multiple of delta");
    if (static_cast<int>(counts_first.size()) != num_windows ||
        static_cast<int>(counts_second.size()) != num_windows)
        throw DomainError("BinnedPairFiber: counts must cover every window");
    for (int c : counts_first)
        if (c < 0 || c > delta) throw DomainError("BinnedPairFiber: window count exceeds delta");
    for (int c : counts_second)
        if (c < 0 || c > delta) throw DomainError("BinnedPairFiber: window count exceeds delta");
}

namespace {

double log_omega(std::span<const int> counts, int delta) {
    KahanSum s;
    for (int c : counts) s.add(lchoose(delta, c));
    return s.value();
}

}  // namespace

double BinnedPairFiber::log_omega_first() const { return log_omega(counts_first, delta); }
double BinnedPairFiber::log_omega_second() const { return log_omega(counts_second, delta); }

std::vector<int> sample_uniform_times(std::span<const int> counts, int delta, Rng& g) {
    std::vector<int> times;
    for (int a = 0; a < static_cast<int>(counts.size()); ++a) {
        std::vector<int> offs = sample_without_replacement(g, delta, counts[a]);
        std::sort(offs.begin(), offs.end());
        for (int o : offs) times.push_back(a * delta + o);
    }
    return times;
}

TiltedPointProcess::TiltedPointProcess(BinnedPairFiber fiber, TiltedPointProcessConfig cfg)
    : fiber_(std::move(fiber)), cfg_(std::move(cfg)) {
    cfg_.validate();
}

void TiltedPointProcess::check_member(std::span<const int> t, std::span<const int> counts,
                                      const char* who) const {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] <= t[i - 1]) throw DomainError(std::string(who) + ": times must be strictly increasing");
    std::vector<int> c = window_counts(t, fiber_.delta, fiber_.num_windows);
    if (!std::equal(c.begin(), c.end(), counts.begin(), counts.end()))
        throw DomainError(std::string(who) + ": window counts do not match the fiber");
}

std::vector<int> TiltedPointProcess::sample_rho(std::span<const int> u, int d,
                                                double theta, Rng& g) const {
    const int delta = fiber_.delta;
    const int W = fiber_.num_windows;
    // positions of u+d per window
    std::vector<std::vector<int>> match(W);
    for (int t : u) {
        int s = t + d;
        if (s >= 0 && s < delta * W) match[s / delta].push_back(s);
    }
    std::vector<int> out;
    for (int a = 0; a < W; ++a) {
        int c = fiber_.counts_second[a];
        if (c == 0) continue;
        const auto& slots = match[a];
        int M = static_cast<int>(slots.size());
        int r_lo = std::max(0, c - (delta - M));
        int r_hi = std::min(M, c);
        // draw the match count r with weight C(M,r) C(delta-M, c-r) e^{theta r}
        std::vector<double> logw;
        for (int r = r_lo; r <= r_hi; ++r)
            logw.push_back(lchoose(M, r) + lchoose(delta - M, c - r) + theta * r);
        double shift = *std::max_element(logw.begin(), logw.end());
        double total = 0.0;
        for (double lw : logw) total += std::exp(lw - shift);
        double uu = uniform01(g) * total;
        int r = r_hi;
        double acc = 0.0;
        for (std::size_t i = 0; i < logw.size(); ++i) {
            acc += std::exp(logw[i] - shift);
            if (uu <= acc) {
                r = r_lo + static_cast<int>(i);
                break;
            }
        }
        // place r events on match slots, c - r on the remaining slots
        for (int idx : sample_without_replacement(g, M, r)) out.push_back(slots[idx]);
        std::vector<int> non_match;
        non_match.reserve(delta - M);
        {
            std::size_t k = 0;
            for (int off = 0; off < delta; ++off) {
                int pos = a * delta + off;
                if (k < slots.size() && slots[k] == pos) {
                    ++k;
                    continue;
                }
                non_match.push_back(pos);
            }
        }
        for (int idx : sample_without_replacement(g, delta - M, c - r))
            out.push_back(non_match[idx]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double TiltedPointProcess::log_rho(std::span<const int> u, std::span<const int> s,
                                   int d, double theta) const {
    const int delta = fiber_.delta;
    const int W = fiber_.num_windows;
    std::vector<int> shifted;
    shifted.reserve(u.size());
    for (int t : u) shifted.push_back(t + d);
    long matches = lag_match_count(u, s, d);

    std::vector<int> match_counts(W, 0);
    for (int t : shifted)
        if (t >= 0 && t < delta * W) ++match_counts[t / delta];

    KahanSum log_z;
    for (int a = 0; a < W; ++a) {
        int c = fiber_.counts_second[a];
        int M = match_counts[a];
        int r_lo = std::max(0, c - (delta - M));
        int r_hi = std::min(M, c);
        std::vector<double> logw;
        for (int r = r_lo; r <= r_hi; ++r)
            logw.push_back(lchoose(M, r) + lchoose(delta - M, c - r) + theta * r);
        log_z.add(log_sum_exp(logw));
    }
    return theta * static_cast<double>(matches) - log_z.value();
}

std::pair<std::vector<int>, double> TiltedPointProcess::sample_second(
    std::span<const int> u, Rng& g) const {
    check_member(u, fiber_.counts_first, "sample_second");
    std::size_t pick = uniform_below(g, cfg_.lags.size());
    std::vector<int> s = sample_rho(u, cfg_.lags[pick], cfg_.thetas[pick], g);
    double lq = log_prob_second(u, s);
    return {std::move(s), lq};
}

double TiltedPointProcess::log_prob_second(std::span<const int> u,
                                           std::span<const int> s) const {
    std::vector<double> terms;
    terms.reserve(cfg_.lags.size());
    for (std::size_t i = 0; i < cfg_.lags.size(); ++i)
        terms.push_back(log_rho(u, s, cfg_.lags[i], cfg_.thetas[i]));
    return log_sum_exp(terms) - std::log(static_cast<double>(cfg_.lags.size()));
}

LogWeight TiltedPointProcess::pair_log_weight(std::span<const int> u,
                                              std::span<const int> s) const {
    check_member(u, fiber_.counts_first, "pair_log_weight");
    check_member(s, fiber_.counts_second, "pair_log_weight");
    return LogWeight(-fiber_.log_omega_second() - log_prob_second(u, s), true);
}

std::vector<int> TiltedPointProcess::sample_first_uniform(Rng& g) const {
    return sample_uniform_times(fiber_.counts_first, fiber_.delta, g);
}

std::vector<int> TiltedPointProcess::sample_second_uniform(Rng& g) const {
    return sample_uniform_times(fiber_.counts_second, fiber_.delta, g);
}

}  // namespace ispval
