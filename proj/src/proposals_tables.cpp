#include <algorithm>
#include <cmath>
#include <numeric>

#include "ispval/proposals.hpp"
#include "ispval/statistics.hpp"

namespace ispval {

bool gale_ryser_feasible(std::span<const int> row_sums, std::span<const int> col_sums) {
    long total_r = 0, total_c = 0;
    int m = static_cast<int>(row_sums.size());
    int n = static_cast<int>(col_sums.size());
    for (int r : row_sums) {
        if (r < 0 || r > n) return false;
        total_r += r;
    }
    for (int c : col_sums) {
        if (c < 0 || c > m) return false;
        total_c += c;
    }
    if (total_r != total_c) return false;

    std::vector<int> r(row_sums.begin(), row_sums.end());
    std::vector<int> c(col_sums.begin(), col_sums.end());
    std::sort(r.begin(), r.end(), std::greater<>());
    std::sort(c.begin(), c.end(), std::greater<>());
    std::vector<long> c_prefix(n + 1, 0);
    for (int j = 0; j < n; ++j) c_prefix[j + 1] = c_prefix[j] + c[j];

    long r_prefix = 0;
    for (int k = 1; k <= m; ++k) {
        r_prefix += r[k - 1];
        // sum_j min(c_j, k) over c sorted descending
        auto it = std::lower_bound(c.begin(), c.end(), k, std::greater<>());
        // entries before it are >= k... std::lower_bound with greater<> finds
        // the first position where c[idx] < k.
        long idx = it - c.begin();
        long cap = static_cast<long>(k) * idx + (c_prefix[n] - c_prefix[idx]);
        if (r_prefix > cap) return false;
    }
    return true;
}

MarginFiber::MarginFiber(std::vector<int> rows, std::vector<int> cols)
    : row_sums(std::move(rows)), col_sums(std::move(cols)) {
    if (!gale_ryser_feasible(row_sums, col_sums))
        throw InfeasibleMargins("MarginFiber: no 0/1 matrix has these margins");
}

bool MarginFiber::contains(const BinaryMatrix& x) const {
    if (x.rows() != num_rows() || x.cols() != num_cols()) return false;
    return x.row_sums() == row_sums && x.col_sums() == col_sums;
}

// ---------------------------------------------------------------------------
// Conditional Poisson subset sampling
// ---------------------------------------------------------------------------

ConditionalPoissonSubset::ConditionalPoissonSubset(std::vector<double> weights, int k)
    : w_(std::move(weights)), m_(static_cast<int>(w_.size())), k_(k) {
    if (k_ < 0 || k_ > m_) throw DomainError("ConditionalPoissonSubset: k out of range");
    double wmax = 0.0;
    for (double w : w_) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw DomainError("ConditionalPoissonSubset: weights must be positive finite");
        wmax = std::max(wmax, w);
    }
    if (m_ > 0) {
        for (double& w : w_) w /= wmax;
    }
    log_w_.resize(m_);
    for (int i = 0; i < m_; ++i) log_w_[i] = std::log(w_[i]);

    // table_[j][c] = e_c(w_j, ..., w_{m-1})
    table_.assign(static_cast<std::size_t>(m_ + 1) * (k_ + 1), 0.0L);
    table_[static_cast<std::size_t>(m_) * (k_ + 1) + 0] = 1.0L;
    for (int j = m_ - 1; j >= 0; --j) {
        for (int c = 0; c <= k_; ++c) {
            long double v = elem(j + 1, c);
            if (c > 0) v += static_cast<long double>(w_[j]) * elem(j + 1, c - 1);
            table_[static_cast<std::size_t>(j) * (k_ + 1) + c] = v;
        }
    }
}

std::vector<int> ConditionalPoissonSubset::sample(Rng& g) const {
    std::vector<int> chosen;
    chosen.reserve(k_);
    int need = k_;
    for (int j = 0; j < m_ && need > 0; ++j) {
        if (m_ - j == need) {
            // all remaining items are forced
            for (int i = j; i < m_; ++i) chosen.push_back(i);
            need = 0;
            break;
        }
        long double denom = elem(j, need);
        long double p_in = static_cast<long double>(w_[j]) * elem(j + 1, need - 1) / denom;
        if (uniform01(g) < static_cast<double>(p_in)) {
            chosen.push_back(j);
            --need;
        }
    }
    return chosen;
}

double ConditionalPoissonSubset::log_prob(std::span<const int> sorted_items) const {
    if (static_cast<int>(sorted_items.size()) != k_)
        throw DomainError("ConditionalPoissonSubset: subset has wrong size");
    KahanSum lw;
    for (int i : sorted_items) lw.add(log_w_[i]);
    return lw.value() - static_cast<double>(std::log(elem(0, k_)));
}

// ---------------------------------------------------------------------------
// Sequential column sampler
// ---------------------------------------------------------------------------

namespace {

struct ColumnPlan {
    std::vector<int> forced;
    std::vector<int> candidates;
    std::vector<double> weights;
    int free_needed = 0;
    bool impossible = false;
};

ColumnPlan plan_column(std::span<const int> residual, int cols_remaining, int col_sum,
                       const RealMatrix* covariates, double theta, int col) {
    ColumnPlan plan;
    for (int i = 0; i < static_cast<int>(residual.size()); ++i) {
        int r = residual[i];
        if (r <= 0) continue;
        if (r >= cols_remaining) {
            plan.forced.push_back(i);
        } else {
            plan.candidates.push_back(i);
            double w = static_cast<double>(r) / static_cast<double>(cols_remaining - r);
            if (covariates) w *= std::exp(theta * (*covariates)(i, col));
            plan.weights.push_back(w);
        }
    }
    plan.free_needed = col_sum - static_cast<int>(plan.forced.size());
    if (plan.free_needed < 0 ||
        plan.free_needed > static_cast<int>(plan.candidates.size()))
        plan.impossible = true;
    return plan;
}

bool residual_feasible(std::span<const int> residual, std::span<const int> col_sums,
                       int next_col) {
    std::span<const int> rest = col_sums.subspan(next_col);
    return gale_ryser_feasible(residual, rest);
}

}  // namespace

TableDraw cp_column_sample_into(const MarginFiber& fiber, const RealMatrix* covariates,
                                double theta, Rng& g, BinaryMatrix& out) {
    int m = fiber.num_rows();
    int n = fiber.num_cols();
    if (covariates && (covariates->rows() != m || covariates->cols() != n))
        throw ShapeError("cp_column_sample: covariate shape mismatch");
    if (out.rows() != m || out.cols() != n) out = BinaryMatrix(m, n);
    out.fill_zero();

    std::vector<int> residual = fiber.row_sums;
    KahanSum log_q;
    for (int j = 0; j < n; ++j) {
        int cols_remaining = n - j;
        ColumnPlan plan = plan_column(residual, cols_remaining, fiber.col_sums[j],
                                      covariates, theta, j);
        if (plan.impossible) return TableDraw{true, 0.0};

        for (int i : plan.forced) {
            out.set(i, j, 1);
            --residual[i];
        }
        if (plan.free_needed > 0) {
            ConditionalPoissonSubset cps(plan.weights, plan.free_needed);
            std::vector<int> picked = cps.sample(g);
            std::sort(picked.begin(), picked.end());
            log_q.add(cps.log_prob(picked));
            for (int idx : picked) {
                int i = plan.candidates[idx];
                out.set(i, j, 1);
                --residual[i];
            }
        }
        if (j + 1 < n && !residual_feasible(residual, fiber.col_sums, j + 1))
            return TableDraw{true, 0.0};
    }
    return TableDraw{false, log_q.value()};
}

std::pair<BinaryMatrix, TableDraw> cp_column_sample(const MarginFiber& fiber, Rng& g) {
    BinaryMatrix out;
    TableDraw d = cp_column_sample_into(fiber, nullptr, 0.0, g, out);
    return {std::move(out), d};
}

std::pair<BinaryMatrix, TableDraw> theta_tilted_matrix_sample(const MarginFiber& fiber,
                                                              const RealMatrix& covariates,
                                                              double theta, Rng& g) {
    BinaryMatrix out;
    TableDraw d = cp_column_sample_into(fiber, &covariates, theta, g, out);
    return {std::move(out), d};
}

namespace {

double column_logprob_impl(const MarginFiber& fiber, const RealMatrix* covariates,
                           double theta, const BinaryMatrix& x) {
    if (!fiber.contains(x)) throw NotInFiber("matrix margins do not match the fiber");
    int n = fiber.num_cols();
    std::vector<int> residual = fiber.row_sums;
    KahanSum log_q;
    for (int j = 0; j < n; ++j) {
        int cols_remaining = n - j;
        ColumnPlan plan = plan_column(residual, cols_remaining, fiber.col_sums[j],
                                      covariates, theta, j);
        // In-fiber matrices always select every forced row and no excluded row.
        if (plan.free_needed > 0) {
            std::vector<int> picked;
            for (int idx = 0; idx < static_cast<int>(plan.candidates.size()); ++idx)
                if (x(plan.candidates[idx], j)) picked.push_back(idx);
            ConditionalPoissonSubset cps(plan.weights, plan.free_needed);
            log_q.add(cps.log_prob(picked));
        }
        for (int i = 0; i < fiber.num_rows(); ++i)
            if (x(i, j)) --residual[i];
    }
    return log_q.value();
}

}  // namespace

double cp_column_logprob(const MarginFiber& fiber, const BinaryMatrix& x) {
    return column_logprob_impl(fiber, nullptr, 0.0, x);
}

double theta_tilted_matrix_logprob(const MarginFiber& fiber, const RealMatrix& covariates,
                                   double theta, const BinaryMatrix& x) {
    return column_logprob_impl(fiber, &covariates, theta, x);
}

// ---------------------------------------------------------------------------
// Theta mixtures and Rasch-type importance weights
// ---------------------------------------------------------------------------

MixtureProposal<BinaryMatrix> make_theta_mixture(const MarginFiber& fiber,
                                                 const RealMatrix& covariates,
                                                 std::span<const double> thetas) {
    if (thetas.empty()) throw DomainError("make_theta_mixture: empty theta grid");
    std::vector<MixtureComponent<BinaryMatrix>> comps;
    comps.reserve(thetas.size());
    double lambda = 1.0 / static_cast<double>(thetas.size());
    for (double theta : thetas) {
        MixtureComponent<BinaryMatrix> c;
        c.weight = lambda;
        c.sample = [&fiber, &covariates, theta](Rng& g) -> std::optional<BinaryMatrix> {
            auto [mat, draw] = theta_tilted_matrix_sample(fiber, covariates, theta, g);
            if (draw.dead_end) return std::nullopt;
            return std::move(mat);
        };
        c.log_prob = [&fiber, &covariates, theta](const BinaryMatrix& x) {
            return theta_tilted_matrix_logprob(fiber, covariates, theta, x);
        };
        comps.push_back(std::move(c));
    }
    return MixtureProposal<BinaryMatrix>(std::move(comps));
}

LogWeight rasch_log_weight(double theta, const BinaryMatrix& x,
                           const MixtureProposal<BinaryMatrix>& mixture,
                           const RealMatrix& covariates) {
    double t = linear_covariate_stat(x, covariates);
    double log_q = mixture.log_prob(x);  // throws NotInFiber on margin mismatch
    return LogWeight(theta * t - log_q, false);
}

// ---------------------------------------------------------------------------
// The structured 52 x 102 table
// ---------------------------------------------------------------------------

namespace {

constexpr int kTableRows = 52;
constexpr int kTableCols = 102;
constexpr int kRowOneSum = 51;

// First-row one-columns (1-based) of the primary observation; column-index
// sum 2813.
constexpr std::array<int, 51> kObservedA = {
    1,  7,  8,  10, 11, 15, 16, 17, 20, 21, 28, 29, 30, 36, 37, 40, 41,
    42, 48, 49, 51, 54, 55, 56, 57, 58, 60, 61, 62, 63, 65, 67, 68, 69,
    70, 73, 75, 77, 80, 81, 82, 85, 86, 87, 91, 92, 94, 95, 96, 97, 100};

// A second observation with the same column-index sum.
constexpr std::array<int, 51> kObservedB = {
    1,  2,  6,  8,  10, 14, 16, 18, 19, 20, 21, 23, 25, 29, 32, 33, 36,
    38, 42, 44, 46, 49, 50, 53, 54, 57, 60, 62, 63, 67, 68, 69, 70, 72,
    73, 76, 78, 81, 82, 88, 89, 92, 93, 94, 95, 96, 97, 99, 100, 101, 102};

}  // namespace

const MarginFiber& structured_table_fiber() {
    static const MarginFiber fiber = [] {
        std::vector<int> rows(kTableRows, 1);
        rows[0] = kRowOneSum;
        std::vector<int> cols(kTableCols, 1);
        return MarginFiber(std::move(rows), std::move(cols));
    }();
    return fiber;
}

std::vector<int> structured_row1_sample(Rng& g) {
    std::vector<int> cols = sample_without_replacement(g, kTableCols, kRowOneSum);
    for (int& c : cols) ++c;  // 1-based
    std::sort(cols.begin(), cols.end());
    return cols;
}

double structured_row1_stat(std::span<const int> one_based_cols) {
    long s = 0;
    for (int c : one_based_cols) s += c;
    return static_cast<double>(s);
}

BinaryMatrix structured_matrix_from_row1(std::span<const int> one_based_cols) {
    if (one_based_cols.size() != kRowOneSum)
        throw ShapeError("structured_matrix_from_row1: need exactly 51 columns");
    BinaryMatrix x(kTableRows, kTableCols);
    std::vector<bool> taken(kTableCols, false);
    for (int c : one_based_cols) {
        if (c < 1 || c > kTableCols || taken[c - 1])
            throw ShapeError("structured_matrix_from_row1: bad column index");
        taken[c - 1] = true;
        x.set(0, c - 1, 1);
    }
    int row = 1;
    for (int j = 0; j < kTableCols; ++j) {
        if (!taken[j]) x.set(row++, j, 1);
    }
    return x;
}

BinaryMatrix structured_table_direct_sample(Rng& g) {
    std::vector<int> row1 = structured_row1_sample(g);
    BinaryMatrix x(kTableRows, kTableCols);
    std::vector<int> rest;
    rest.reserve(kTableCols - kRowOneSum);
    std::vector<bool> taken(kTableCols, false);
    for (int c : row1) {
        taken[c - 1] = true;
        x.set(0, c - 1, 1);
    }
    for (int j = 0; j < kTableCols; ++j)
        if (!taken[j]) rest.push_back(j);
    // uniform bijection of rows 1..51 onto the free columns
    shuffle_vector(g, rest);
    for (int i = 1; i < kTableRows; ++i) x.set(i, rest[i - 1], 1);
    return x;
}

double structured_table_log_fiber_size() {
    return lchoose(kTableCols, kRowOneSum) + std::lgamma(kTableRows);
}

std::span<const int> table52_observed_a() { return kObservedA; }
std::span<const int> table52_observed_b() { return kObservedB; }

}  // namespace ispval
