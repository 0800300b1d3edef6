#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ispval/common.hpp"
#include "ispval/estimators.hpp"
#include "ispval/matrix.hpp"
#include "ispval/special.hpp"

namespace ispval {

// ---------------------------------------------------------------------------
// Gaussian target/proposal pair: target N(0,1), proposal N(mu, sigma).
// ---------------------------------------------------------------------------

struct GaussianPair {
    double mu;
    double sigma;

    GaussianPair(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
        if (!(sigma > 0.0)) throw DomainError("GaussianPair: sigma must be positive");
    }

    double sample(Rng& g) const { return mu + sigma * normal_variate(g); }

    // log dP/dQ at x; exact, so the same evaluator serves the observation.
    double log_weight_at(double x) const {
        return log_normal_pdf(x, 0.0, 1.0) - log_normal_pdf(x, mu, sigma);
    }

    std::pair<double, LogWeight> sample_and_weight(Rng& g) const {
        double x = sample(g);
        return {x, LogWeight(log_weight_at(x), true)};
    }
};

// ---------------------------------------------------------------------------
// Permutation fiber: conditioning on m values and the count r of one-labels.
// ---------------------------------------------------------------------------

struct PermutationFiber {
    int m;
    int r;
    std::vector<double> values;

    PermutationFiber(std::vector<double> vals, int r_);

    // Stable ordering making values non-increasing.
    const std::vector<int>& sort_order() const { return order_; }
    const std::vector<int>& rank_of() const { return rank_; }

private:
    std::vector<int> order_;
    std::vector<int> rank_;
};

// Exponentially tilted distribution over labelings with r ones: a labeling
// whose one-labels overlap the top-r values in k positions has probability
// exp(theta k) / Z. theta = 0 recovers the uniform (null) law.
class TiltedPermutationProposal {
public:
    TiltedPermutationProposal(const PermutationFiber& fiber, double theta);

    std::vector<int> sample(Rng& g) const;
    std::pair<std::vector<int>, double> sample_with_logprob(Rng& g) const;
    double log_prob(std::span<const int> labeling) const;

    // Uniform (target) log-probability of any labeling: -log C(m, r).
    double log_uniform_prob() const { return -lchoose(fiber_.m, fiber_.r); }

    // Exact dP/dQ for a labeling.
    LogWeight log_weight(std::span<const int> labeling) const {
        return LogWeight(log_uniform_prob() - log_prob(labeling), true);
    }

    const PermutationFiber& fiber() const { return fiber_; }
    double theta() const { return theta_; }

private:
    int overlap_count(std::span<const int> labeling) const;

    PermutationFiber fiber_;
    double theta_;
    double log_z_;
    std::vector<double> k_weights_;  // sampling weights for the overlap count
    int k_min_;
};

// ---------------------------------------------------------------------------
// Binary matrices with fixed margins.
// ---------------------------------------------------------------------------

bool gale_ryser_feasible(std::span<const int> row_sums, std::span<const int> col_sums);

struct MarginFiber {
    std::vector<int> row_sums;
    std::vector<int> col_sums;

    MarginFiber(std::vector<int> rows, std::vector<int> cols);

    int num_rows() const { return static_cast<int>(row_sums.size()); }
    int num_cols() const { return static_cast<int>(col_sums.size()); }

    bool contains(const BinaryMatrix& x) const;
};

// Exact fixed-size weighted subset sampling: P(S) proportional to the product
// of the weights of the selected items. Probabilities come from the standard
// dynamic program over elementary symmetric polynomials.
class ConditionalPoissonSubset {
public:
    ConditionalPoissonSubset(std::vector<double> weights, int k);

    std::vector<int> sample(Rng& g) const;
    double log_prob(std::span<const int> sorted_items) const;

private:
    std::vector<double> w_;        // weights scaled by 1/max
    std::vector<double> log_w_;
    std::vector<long double> table_;  // e_c over suffixes, (m+1) x (k+1)
    int m_;
    int k_;

    long double elem(int j, int c) const { return table_[static_cast<std::size_t>(j) * (k_ + 1) + c]; }
};

// One sequential draw from a margin fiber.
struct TableDraw {
    bool dead_end = false;
    double log_q = 0.0;  // meaningful only when !dead_end
};

// Samples columns left to right with conditional-Poisson inclusion weights
// r_i / (cols_remaining - r_i); rows whose residual equals the number of
// remaining columns are forced in before the subset draw. A draw whose
// residual margins fail the Gale-Ryser check is returned as a dead end.
// With covariates v, the inclusion weight of row i in column j is multiplied
// by exp(theta * v_ij); theta = 0 reproduces the untilted sampler exactly.
TableDraw cp_column_sample_into(const MarginFiber& fiber, const RealMatrix* covariates,
                                double theta, Rng& g, BinaryMatrix& out);

std::pair<BinaryMatrix, TableDraw> cp_column_sample(const MarginFiber& fiber, Rng& g);
std::pair<BinaryMatrix, TableDraw> theta_tilted_matrix_sample(const MarginFiber& fiber,
                                                              const RealMatrix& covariates,
                                                              double theta, Rng& g);

// Exact log of the sequential sampling probability of an in-fiber matrix.
double cp_column_logprob(const MarginFiber& fiber, const BinaryMatrix& x);
double theta_tilted_matrix_logprob(const MarginFiber& fiber, const RealMatrix& covariates,
                                   double theta, const BinaryMatrix& x);

// ---------------------------------------------------------------------------
// Finite mixtures of proposals.
// ---------------------------------------------------------------------------

template <typename Point>
struct MixtureComponent {
    double weight;
    std::function<std::optional<Point>(Rng&)> sample;  // nullopt = dead end
    std::function<double(const Point&)> log_prob;
};

template <typename Point>
class MixtureProposal {
public:
    explicit MixtureProposal(std::vector<MixtureComponent<Point>> components)
        : components_(std::move(components)) {
        if (components_.empty()) throw DomainError("MixtureProposal: no components");
        KahanSum total;
        for (const auto& c : components_) {
            if (!(c.weight > 0.0)) throw DomainError("MixtureProposal: weights must be positive");
            total.add(c.weight);
        }
        if (std::fabs(total.value() - 1.0) > 1e-9)
            throw DomainError("MixtureProposal: weights must sum to 1");
    }

    struct Draw {
        std::optional<Point> point;
        double log_q = kNegInf;
    };

    Draw sample(Rng& g) const {
        double u = uniform01(g);
        std::size_t pick = components_.size() - 1;
        double acc = 0.0;
        for (std::size_t l = 0; l < components_.size(); ++l) {
            acc += components_[l].weight;
            if (u <= acc) {
                pick = l;
                break;
            }
        }
        std::optional<Point> point = components_[pick].sample(g);
        if (!point) return Draw{std::nullopt, kNegInf};
        double lq = log_prob(*point);
        return Draw{std::move(point), lq};
    }

    // log sum_l lambda_l Q_l(x), max-shifted.
    double log_prob(const Point& x) const {
        std::vector<double> terms;
        terms.reserve(components_.size());
        for (const auto& c : components_)
            terms.push_back(std::log(c.weight) + c.log_prob(x));
        return log_sum_exp(terms);
    }

    std::size_t size() const { return components_.size(); }

private:
    std::vector<MixtureComponent<Point>> components_;
};

// Mixture of theta-tilted table proposals over a grid of thetas, as used for
// conditional logistic (Rasch-type) inference.
MixtureProposal<BinaryMatrix> make_theta_mixture(const MarginFiber& fiber,
                                                 const RealMatrix& covariates,
                                                 std::span<const double> thetas);

// Unnormalized log importance weight for target P_theta (density proportional
// to exp(theta * t(x)) on the fiber) against a theta-mixture proposal:
// theta * t(x) - log Q(x), up to a constant not depending on x.
LogWeight rasch_log_weight(double theta, const BinaryMatrix& x,
                           const MixtureProposal<BinaryMatrix>& mixture,
                           const RealMatrix& covariates);

// ---------------------------------------------------------------------------
// Conditionally uniform point-process pairs with window-count conditioning.
// ---------------------------------------------------------------------------

// Window-count descriptors for an ordered pair of event-time sequences on
// {0, ..., B-1}, windows [a*delta, (a+1)*delta).
struct BinnedPairFiber {
    int delta;
    int num_windows;
    std::vector<int> counts_first;
    std::vector<int> counts_second;

    BinnedPairFiber(int delta_, int B, std::vector<int> counts_i, std::vector<int> counts_j);

    int B() const { return delta * num_windows; }
    double log_omega_first() const;
    double log_omega_second() const;
};

std::vector<int> window_counts(std::span<const int> times, int delta, int num_windows);

struct TiltedPointProcessConfig {
    std::vector<int> lags{0, 1, 2, 3, 4};
    std::vector<double> thetas{0.0, 0.5, 0.5, 0.5, 0.5};

    // Tilts matched to the two lagged-correlation statistics: positive tilts
    // seek coincidences at lags 1..4, negative tilts avoid them.
    static TiltedPointProcessConfig for_lag_count_plus() { return {}; }
    static TiltedPointProcessConfig for_lag_count_minus() {
        TiltedPointProcessConfig cfg;
        cfg.thetas = {0.0, -0.5, -0.5, -0.5, -0.5};
        return cfg;
    }

    void validate() const {
        if (lags.size() != thetas.size() || lags.empty())
            throw DomainError("TiltedPointProcessConfig: lags and thetas must match");
    }
};

// Proposal over the second sequence given the first: a lag d is drawn
// uniformly from cfg.lags, then within each window the number of events
// matching u+d is exponentially tilted by theta_d.
class TiltedPointProcess {
public:
    TiltedPointProcess(BinnedPairFiber fiber, TiltedPointProcessConfig cfg);

    std::pair<std::vector<int>, double> sample_second(std::span<const int> u, Rng& g) const;
    double log_prob_second(std::span<const int> u, std::span<const int> s) const;

    // log rho(s | u, d, theta): single-lag law over the second sequence.
    double log_rho(std::span<const int> u, std::span<const int> s, int d, double theta) const;
    std::vector<int> sample_rho(std::span<const int> u, int d, double theta, Rng& g) const;

    // Exact dP/dQ of the pair (u, s) when u is drawn uniformly from its fiber:
    // the uniform-first factor cancels, leaving -log|Omega_j| - log q(s|u).
    LogWeight pair_log_weight(std::span<const int> u, std::span<const int> s) const;

    std::vector<int> sample_first_uniform(Rng& g) const;
    std::vector<int> sample_second_uniform(Rng& g) const;

    const BinnedPairFiber& fiber() const { return fiber_; }
    const TiltedPointProcessConfig& config() const { return cfg_; }

private:
    void check_member(std::span<const int> t, std::span<const int> counts, const char* who) const;

    BinnedPairFiber fiber_;
    TiltedPointProcessConfig cfg_;
};

// Uniform draw of event times matching the given window counts.
std::vector<int> sample_uniform_times(std::span<const int> counts, int delta, Rng& g);

// ---------------------------------------------------------------------------
// The structured 52 x 102 table: row sums (51,1,...,1), column sums all 1.
// ---------------------------------------------------------------------------

const MarginFiber& structured_table_fiber();

// Exact uniform draw: the 51 one-columns of row 0 are a uniform subset, the
// remaining rows are a uniform bijection onto the remaining columns.
BinaryMatrix structured_table_direct_sample(Rng& g);

// Just the first-row column indices (1-based, sorted); the column-index-sum
// statistic depends on the matrix only through these.
std::vector<int> structured_row1_sample(Rng& g);

double structured_row1_stat(std::span<const int> one_based_cols);

// Canonical completion: remaining rows take the remaining columns in order.
BinaryMatrix structured_matrix_from_row1(std::span<const int> one_based_cols);

// log |fiber| = log C(102,51) + log 51!.
double structured_table_log_fiber_size();

// First-row column indices of the two observations studied with this fiber;
// both have column-index sum 2813.
std::span<const int> table52_observed_a();
std::span<const int> table52_observed_b();

}  // namespace ispval
