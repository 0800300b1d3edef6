#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ispval/experiments.hpp"
#include "ispval/inference.hpp"
#include "ispval/io.hpp"
#include "ispval/proposals.hpp"
#include "ispval/special.hpp"
#include "ispval/statistics.hpp"

namespace ispval {

// ---------------------------------------------------------------------------
// Accelerated multiple permutation testing
// ---------------------------------------------------------------------------

const char* multitest_estimator_name(MultiTestEstimator e) {
    switch (e) {
        case MultiTestEstimator::PBar: return "p_bar";
        case MultiTestEstimator::PBarStar: return "p_bar_star";
        case MultiTestEstimator::PHat: return "p_hat";
        case MultiTestEstimator::PHatStar: return "p_hat_star";
        case MultiTestEstimator::QHat: return "q_hat";
    }
    return "unknown";
}

namespace {

// Median difference for a labeling over fixed values; scratch buffers reused.
struct MedianDiffEval {
    std::vector<double> ones;
    std::vector<double> zeros;

    double operator()(const std::vector<double>& values, std::span<const int> labeling) {
        ones.clear();
        zeros.clear();
        for (std::size_t i = 0; i < values.size(); ++i)
            (labeling[i] ? ones : zeros).push_back(values[i]);
        return quick_median(ones) - quick_median(zeros);
    }

    static double quick_median(std::vector<double>& v) {
        std::size_t n = v.size();
        std::size_t mid = n / 2;
        std::nth_element(v.begin(), v.begin() + mid, v.end());
        double hi = v[mid];
        if (n % 2 == 1) return hi;
        double lo = *std::max_element(v.begin(), v.begin() + mid);
        return 0.5 * (lo + hi);
    }
};

// Per-dataset rejection flags for the five estimators.
struct DatasetVerdicts {
    bool reject[5] = {false, false, false, false, false};
};

DatasetVerdicts multitest_one_dataset(const MultiTestConfig& cfg, std::size_t n,
                                      bool false_null, Rng& g) {
    const int m = cfg.m, r = cfg.r;
    // observed data: labels on the first r positions
    std::vector<double> values(m);
    std::vector<int> labels(m, 0);
    for (int i = 0; i < r; ++i) labels[i] = 1;
    for (int i = 0; i < m; ++i) {
        values[i] = cauchy_variate(g);
        if (false_null && i < r) values[i] += cfg.shift;
    }

    MedianDiffEval stat;
    double t_obs = stat(values, labels);

    PermutationFiber fiber(values, r);
    TiltedPermutationProposal uniform_prop(fiber, 0.0);
    TiltedPermutationProposal tilted_prop(fiber, cfg.theta_proposal);

    // direct sampling
    std::vector<WeightedDraw> direct;
    direct.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> lab = uniform_prop.sample(g);
        direct.emplace_back(stat(values, lab), LogWeight(0.0, true));
    }
    ObservedPoint obs_direct(t_obs, LogWeight(0.0, true));

    // importance sampling with exact weights
    std::vector<WeightedDraw> tilted;
    tilted.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> lab = tilted_prop.sample(g);
        tilted.emplace_back(stat(values, lab), tilted_prop.log_weight(lab));
    }
    ObservedPoint obs_tilted(t_obs, tilted_prop.log_weight(labels));

    double threshold = cfg.alpha / static_cast<double>(cfg.n_tests);
    DatasetVerdicts v;
    v.reject[0] = p_hat(t_obs, direct) <= threshold;
    v.reject[1] = p_hat_star(obs_direct, direct) <= threshold;
    v.reject[2] = p_hat(t_obs, tilted) <= threshold;
    v.reject[3] = p_hat_star(obs_tilted, tilted) <= threshold;
    double level = 1.0 - cfg.alpha / (2.0 * static_cast<double>(cfg.n_tests));
    double q_hat = wald_upper_limit(p_hat(t_obs, tilted),
                                    n >= 2 ? p_hat_std_error(t_obs, tilted) : 0.0, level);
    v.reject[4] = q_hat <= cfg.alpha / (2.0 * static_cast<double>(cfg.n_tests));
    return v;
}

}  // namespace

std::vector<MultiTestRow> compute_multitest(const MultiTestConfig& cfg, std::uint64_t seed,
                                            unsigned threads) {
    std::vector<MultiTestRow> rows;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        for (std::size_t ni = 0; ni < cfg.ns.size(); ++ni) {
            std::size_t n = cfg.ns[ni];
            std::uint64_t block_seed = derive_seed(seed, rep * 1000 + ni);
            std::vector<DatasetVerdicts> verdicts(cfg.n_tests);
            parallel_for(cfg.n_tests, threads, [&](std::size_t d) {
                Rng g = make_stream(block_seed, d);
                verdicts[d] = multitest_one_dataset(cfg, n, d < cfg.false_nulls, g);
            });
            for (int e = 0; e < 5; ++e) {
                MultiTestRow row;
                row.repetition = rep;
                row.n = n;
                row.estimator = static_cast<MultiTestEstimator>(e);
                row.correct = 0;
                row.incorrect = 0;
                for (std::size_t d = 0; d < cfg.n_tests; ++d) {
                    if (!verdicts[d].reject[e]) continue;
                    if (d < cfg.false_nulls)
                        ++row.correct;
                    else
                        ++row.incorrect;
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

ExperimentOutput run_multitest(const MultiTestConfig& cfg, const RunContext& ctx) {
    auto rows = compute_multitest(cfg, ctx.seed, ctx.effective_threads());

    CsvWriter csv({"repetition", "n", "estimator", "correct", "incorrect"});
    for (const auto& r : rows) {
        std::vector<std::string> cells = {
            std::to_string(r.repetition), std::to_string(r.n),
            multitest_estimator_name(r.estimator), std::to_string(r.correct),
            std::to_string(r.incorrect)};
        csv.add_row_raw(cells);
    }

    CsvWriter agg({"n", "estimator", "mean_correct", "mean_incorrect",
                   "reps_with_zero_incorrect"});
    for (std::size_t n : cfg.ns) {
        for (int e = 0; e < 5; ++e) {
            double sum_c = 0, sum_i = 0;
            std::size_t zero_inc = 0, count = 0;
            for (const auto& r : rows) {
                if (r.n != n || static_cast<int>(r.estimator) != e) continue;
                sum_c += static_cast<double>(r.correct);
                sum_i += static_cast<double>(r.incorrect);
                zero_inc += (r.incorrect == 0);
                ++count;
            }
            std::vector<std::string> cells = {
                std::to_string(n), multitest_estimator_name(static_cast<MultiTestEstimator>(e)),
                CsvWriter::format(sum_c / count), CsvWriter::format(sum_i / count),
                std::to_string(zero_inc)};
            agg.add_row_raw(cells);
        }
    }

    nlohmann::json params;
    params["n_tests"] = cfg.n_tests;
    params["false_nulls"] = cfg.false_nulls;
    params["m"] = cfg.m;
    params["r"] = cfg.r;
    params["shift"] = cfg.shift;
    params["theta_proposal"] = cfg.theta_proposal;
    params["ns"] = cfg.ns;
    params["repetitions"] = cfg.repetitions;
    params["alpha"] = cfg.alpha;

    ExperimentOutput out;
    out.experiment = "multitest";
    out.parameters_json = params.dump();
    out.files.emplace_back("multitest.csv", csv.to_string());
    out.files.emplace_back("multitest_aggregate.csv", agg.to_string());
    out.summary = "multitest: " + std::to_string(cfg.repetitions) + " repetitions over " +
                  std::to_string(cfg.n_tests) + " tests";
    return out;
}

// ---------------------------------------------------------------------------
// Rasch-type confidence intervals
// ---------------------------------------------------------------------------

namespace {

std::vector<double> default_theta_range(double lo, double hi, double step) {
    std::vector<double> out;
    long count = std::lround((hi - lo) / step);
    for (long i = 0; i <= count; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

struct RaschProblem {
    std::vector<double> row_effects;
    std::vector<double> col_effects;
    RealMatrix covariates;
    std::vector<double> mixture_thetas;
    std::vector<double> grid;
};

RaschProblem build_problem(const RaschSimConfig& cfg) {
    RaschProblem p;
    Rng g = make_stream(cfg.covariate_seed, 0);
    p.row_effects = cfg.row_effects;
    if (p.row_effects.empty()) {
        p.row_effects.resize(cfg.num_rows);
        for (int i = 0; i < cfg.num_rows; ++i)
            p.row_effects[i] = -0.8 + 0.9 * uniform01(g);
    }
    if (static_cast<int>(p.row_effects.size()) != cfg.num_rows)
        throw ShapeError("rasch: row effects length mismatch");
    p.row_effects.back() = 0.0;

    p.col_effects = cfg.col_effects;
    if (p.col_effects.empty()) {
        p.col_effects.resize(cfg.num_cols);
        for (int j = 0; j < cfg.num_cols; ++j)
            p.col_effects[j] = -0.4 + 0.8 * uniform01(g);
    }
    if (static_cast<int>(p.col_effects.size()) != cfg.num_cols)
        throw ShapeError("rasch: column effects length mismatch");
    p.col_effects.back() = 0.0;

    if (cfg.covariates.rows() > 0) {
        if (cfg.covariates.rows() != cfg.num_rows || cfg.covariates.cols() != cfg.num_cols)
            throw ShapeError("rasch: covariate shape mismatch");
        p.covariates = cfg.covariates;
    } else {
        p.covariates = RealMatrix(cfg.num_rows, cfg.num_cols);
        for (int i = 0; i < cfg.num_rows; ++i)
            for (int j = 0; j < cfg.num_cols; ++j)
                p.covariates(i, j) = 2.0 * uniform01(g) - 1.0;
    }

    p.mixture_thetas =
        cfg.mixture_thetas.empty() ? default_theta_range(-3.0, 3.0, 0.25) : cfg.mixture_thetas;
    p.grid = cfg.grid.empty() ? default_theta_range(-3.0, 3.0, 0.02) : cfg.grid;
    return p;
}

}  // namespace

RaschCiResult compute_rasch_ci(const RaschSimConfig& cfg, std::uint64_t seed,
                               unsigned threads) {
    RaschProblem prob = build_problem(cfg);
    std::size_t R = cfg.replications;
    std::vector<std::optional<RaschCiRow>> rows(R);

    parallel_for(R, threads, [&](std::size_t rep) {
        Rng g = make_stream(derive_seed(seed, 31), rep);
        // simulate the observed matrix from the logistic model
        BinaryMatrix x(cfg.num_rows, cfg.num_cols);
        for (int i = 0; i < cfg.num_rows; ++i) {
            for (int j = 0; j < cfg.num_cols; ++j) {
                double eta = cfg.kappa + prob.row_effects[i] + prob.col_effects[j] +
                             cfg.theta_true * prob.covariates(i, j);
                double pij = 1.0 / (1.0 + std::exp(-eta));
                x.set(i, j, uniform01(g) < pij);
            }
        }
        std::vector<int> rs = x.row_sums();
        std::vector<int> cs = x.col_sums();
        std::optional<MarginFiber> maybe_fiber;
        try {
            maybe_fiber.emplace(std::move(rs), std::move(cs));
        } catch (const InfeasibleMargins&) {
            return;  // replication skipped and counted
        }
        const MarginFiber& fiber = *maybe_fiber;
        auto mixture = make_theta_mixture(fiber, prob.covariates, prob.mixture_thetas);

        StoredRaschSample sample;
        sample.t_obs = linear_covariate_stat(x, prob.covariates);
        sample.log_q_obs = mixture.log_prob(x);
        sample.t_draws.reserve(cfg.n);
        std::size_t dead = 0;
        for (std::size_t k = 0; k < cfg.n; ++k) {
            auto draw = mixture.sample(g);
            if (!draw.point) {
                sample.t_draws.push_back(0.0);
                sample.log_q_draws.push_back(0.0);
                sample.alive.push_back(false);
                ++dead;
                continue;
            }
            sample.t_draws.push_back(linear_covariate_stat(*draw.point, prob.covariates));
            sample.log_q_draws.push_back(draw.log_q);
            sample.alive.push_back(true);
        }

        auto cs_unc = invert_confidence_set(
            prob.grid,
            [&](double th) {
                return two_sided_rasch_pvalue(th, sample, CorrectionKind::Uncorrected);
            },
            cfg.alpha);
        auto cs_corr = invert_confidence_set(
            prob.grid,
            [&](double th) {
                return two_sided_rasch_pvalue(th, sample, CorrectionKind::Corrected);
            },
            cfg.alpha);

        RaschCiRow row;
        row.replication = rep;
        row.covered_uncorrected = cs_unc.contains(cfg.theta_true);
        row.covered_corrected = cs_corr.contains(cfg.theta_true);
        row.length_uncorrected = cs_unc.hull_length();
        row.length_corrected = cs_corr.hull_length();
        row.contiguous_uncorrected = cs_unc.contiguous;
        row.contiguous_corrected = cs_corr.contiguous;
        row.dead_draws = dead;
        rows[rep] = row;
    });

    RaschCiResult res;
    std::vector<double> len_u, len_c;
    for (std::size_t rep = 0; rep < R; ++rep) {
        if (!rows[rep]) {
            ++res.skipped;
            continue;
        }
        res.rows.push_back(*rows[rep]);
        res.coverage_uncorrected += rows[rep]->covered_uncorrected;
        res.coverage_corrected += rows[rep]->covered_corrected;
        len_u.push_back(rows[rep]->length_uncorrected);
        len_c.push_back(rows[rep]->length_corrected);
    }
    double count = static_cast<double>(res.rows.size());
    res.coverage_uncorrected /= count;
    res.coverage_corrected /= count;
    res.median_length_uncorrected = median(len_u);
    res.median_length_corrected = median(len_c);
    return res;
}

ExperimentOutput run_rasch_ci(const RaschSimConfig& cfg, const RunContext& ctx) {
    RaschCiResult res = compute_rasch_ci(cfg, ctx.seed, ctx.effective_threads());

    CsvWriter csv({"replication", "covered_uncorrected", "covered_corrected",
                   "length_uncorrected", "length_corrected", "contiguous_uncorrected",
                   "contiguous_corrected", "dead_draws"});
    for (const auto& r : res.rows) {
        std::vector<std::string> cells = {std::to_string(r.replication),
                                          std::to_string(int(r.covered_uncorrected)),
                                          std::to_string(int(r.covered_corrected)),
                                          CsvWriter::format(r.length_uncorrected),
                                          CsvWriter::format(r.length_corrected),
                                          std::to_string(int(r.contiguous_uncorrected)),
                                          std::to_string(int(r.contiguous_corrected)),
                                          std::to_string(r.dead_draws)};
        csv.add_row_raw(cells);
    }

    CsvWriter agg({"kind", "coverage", "median_length"});
    {
        std::vector<std::string> a = {"p_tilde", CsvWriter::format(res.coverage_uncorrected),
                                      CsvWriter::format(res.median_length_uncorrected)};
        agg.add_row_raw(a);
        std::vector<std::string> b = {"p_tilde_star",
                                      CsvWriter::format(res.coverage_corrected),
                                      CsvWriter::format(res.median_length_corrected)};
        agg.add_row_raw(b);
    }

    nlohmann::json params;
    params["num_rows"] = cfg.num_rows;
    params["num_cols"] = cfg.num_cols;
    params["kappa"] = cfg.kappa;
    params["theta_true"] = cfg.theta_true;
    params["covariate_seed"] = cfg.covariate_seed;
    params["n"] = cfg.n;
    params["replications"] = cfg.replications;
    params["alpha"] = cfg.alpha;
    params["mixture_components"] =
        cfg.mixture_thetas.empty() ? 25 : cfg.mixture_thetas.size();
    params["synthetic_covariates"] = true;

    ExperimentOutput out;
    out.experiment = "rasch-ci";
    out.parameters_json = params.dump();
    out.files.emplace_back("rasch_ci.csv", csv.to_string());
    out.files.emplace_back("rasch_ci_aggregate.csv", agg.to_string());
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "rasch-ci: coverage %.3f (corrected) vs %.3f (uncorrected), median "
                  "length %.3f vs %.3f",
                  res.coverage_corrected, res.coverage_uncorrected,
                  res.median_length_corrected, res.median_length_uncorrected);
    out.summary = buf;
    return out;
}

}  // namespace ispval
