#include <algorithm>
#include <cmath>
#include <numeric>

#include "ispval/proposals.hpp"

namespace ispval {

PermutationFiber::PermutationFiber(std::vector<double> vals, int r_)
    : m(static_cast<int>(vals.size())), r(r_), values(std::move(vals)) {
    if (r < 0 || r > m) throw DomainError("PermutationFiber: r must lie in [0, m]");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("PermutationFiber: values must be finite");
    order_.resize(m);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return values[a] > values[b]; });
    rank_.resize(m);
    for (int k = 0; k < m; ++k) rank_[order_[k]] = k;
}

TiltedPermutationProposal::TiltedPermutationProposal(const PermutationFiber& fiber,
                                                     double theta)
    : fiber_(fiber), theta_(theta) {
    int m = fiber_.m, r = fiber_.r;
    k_min_ = std::max(0, 2 * r - m);
    std::vector<double> log_terms;
    for (int k = k_min_; k <= r; ++k)
        log_terms.push_back(lchoose(r, k) + lchoose(m - r, r - k) + theta * k);
    log_z_ = log_sum_exp(log_terms);
    double shift = *std::max_element(log_terms.begin(), log_terms.end());
    k_weights_.resize(log_terms.size());
    for (std::size_t i = 0; i < log_terms.size(); ++i)
        k_weights_[i] = std::exp(log_terms[i] - shift);
}

std::vector<int> TiltedPermutationProposal::sample(Rng& g) const {
    int m = fiber_.m, r = fiber_.r;
    // Draw the overlap count k, then place labels uniformly given k.
    double total = 0.0;
    for (double w : k_weights_) total += w;
    double u = uniform01(g) * total;
    std::size_t idx = k_weights_.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < k_weights_.size(); ++i) {
        acc += k_weights_[i];
        if (u <= acc) {
            idx = i;
            break;
        }
    }
    int k = k_min_ + static_cast<int>(idx);

    std::vector<int> labeling(m, 0);
    const auto& order = fiber_.sort_order();
    for (int rank : sample_without_replacement(g, r, k)) labeling[order[rank]] = 1;
    for (int off : sample_without_replacement(g, m - r, r - k)) labeling[order[r + off]] = 1;
    return labeling;
}

std::pair<std::vector<int>, double> TiltedPermutationProposal::sample_with_logprob(
    Rng& g) const {
    std::vector<int> labeling = sample(g);
    double lp = log_prob(labeling);
    return {std::move(labeling), lp};
}

int TiltedPermutationProposal::overlap_count(std::span<const int> labeling) const {
    int ones = 0, k = 0;
    for (int pos = 0; pos < fiber_.m; ++pos) {
        if (labeling[pos]) {
            ++ones;
            if (fiber_.rank_of()[pos] < fiber_.r) ++k;
        }
    }
    if (ones != fiber_.r)
        throw DomainError("TiltedPermutationProposal: labeling must have exactly r ones");
    return k;
}

double TiltedPermutationProposal::log_prob(std::span<const int> labeling) const {
    if (static_cast<int>(labeling.size()) != fiber_.m)
        throw DomainError("TiltedPermutationProposal: labeling length mismatch");
    return theta_ * overlap_count(labeling) - log_z_;
}

}  // namespace ispval
