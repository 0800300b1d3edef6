#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ispval/common.hpp"
#include "ispval/matrix.hpp"
#include "ispval/oracle.hpp"

namespace ispval {

// ---------------------------------------------------------------------------
// Run plumbing
// ---------------------------------------------------------------------------

struct RunContext {
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = hardware default
    std::filesystem::path out_dir = "runs";

    unsigned effective_threads() const {
        return threads == 0 ? default_thread_count() : threads;
    }
};

// One finished experiment: named artifacts plus manifest metadata. Artifact
// bytes are a pure function of (seed, parameters); wall clock and thread
// count live only in the manifest.
struct ExperimentOutput {
    std::string experiment;
    std::string parameters_json;  // rendered JSON object
    std::vector<std::pair<std::string, std::string>> files;  // name -> bytes
    std::string summary;
};

// Writes manifest.json (status "running", outputs listed) before any artifact,
// then the artifacts, then the final manifest with wall clock.
void write_experiment(const ExperimentOutput& out, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Mismatched-Gaussian experiments
// ---------------------------------------------------------------------------

struct GaussianCell {
    double mu;
    double sigma;
    std::size_t n;
};

struct GaussianMseConfig {
    std::vector<GaussianCell> cells;
    std::size_t replications = 100000;

    static GaussianMseConfig standard_grid(std::size_t replications, std::vector<std::size_t> ns);
};

struct GaussianMseRow {
    GaussianCell cell;
    double mse[4];  // clamped p_hat, clamped p_hat_star, p_tilde, p_tilde_star
    double se[4];
};

std::vector<GaussianMseRow> compute_gaussian_mse(const GaussianMseConfig& cfg,
                                                 std::uint64_t seed, unsigned threads);
ExperimentOutput run_gaussian_mse(const GaussianMseConfig& cfg, const RunContext& ctx);

struct GaussianCdfConfig {
    std::vector<GaussianCell> cells;
    std::size_t replications = 100000;
    std::vector<double> alphas{0.01, 0.05, 0.1, 0.25, 0.5};

    static GaussianCdfConfig standard_grid(std::size_t replications, std::size_t n);
};

struct GaussianCdfRow {
    GaussianCell cell;
    EstimatorKind estimator;
    double alpha;
    double cdf;
    double se;
    bool violation;
};

std::vector<GaussianCdfRow> compute_gaussian_cdf(const GaussianCdfConfig& cfg,
                                                 std::uint64_t seed, unsigned threads);
ExperimentOutput run_gaussian_cdf(const GaussianCdfConfig& cfg, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Accelerated multiple permutation testing (Cauchy / median-difference)
// ---------------------------------------------------------------------------

struct MultiTestConfig {
    std::size_t n_tests = 1000;
    std::size_t false_nulls = 10;
    int m = 100;
    int r = 40;
    double shift = 2.0;
    double theta_proposal = 3.0;
    std::vector<std::size_t> ns{10, 200};
    std::size_t repetitions = 20;
    double alpha = 0.05;
};

// Estimators reported by the multi-test experiment.
enum class MultiTestEstimator { PBar, PBarStar, PHat, PHatStar, QHat };
const char* multitest_estimator_name(MultiTestEstimator e);

struct MultiTestRow {
    std::size_t repetition;
    std::size_t n;
    MultiTestEstimator estimator;
    std::size_t correct;
    std::size_t incorrect;
};

std::vector<MultiTestRow> compute_multitest(const MultiTestConfig& cfg, std::uint64_t seed,
                                            unsigned threads);
ExperimentOutput run_multitest(const MultiTestConfig& cfg, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Conditional logistic (Rasch-type) confidence intervals
// ---------------------------------------------------------------------------

struct RaschSimConfig {
    int num_rows = 30;
    int num_cols = 8;
    double kappa = -0.5;
    std::vector<double> row_effects;  // empty = synthesized; last entry forced 0
    std::vector<double> col_effects;
    double theta_true = 2.0;
    std::uint64_t covariate_seed = 7;  // synthetic U(-1,1) covariates
    RealMatrix covariates;               // empty = synthesized from covariate_seed
    std::vector<double> mixture_thetas;  // empty = -3..3 step 0.25
    std::vector<double> grid;            // empty = -3..3 step 0.02
    std::size_t n = 50;
    std::size_t replications = 200;
    double alpha = 0.05;
};

struct RaschCiRow {
    std::size_t replication;
    bool covered_uncorrected;
    bool covered_corrected;
    double length_uncorrected;
    double length_corrected;
    bool contiguous_uncorrected;
    bool contiguous_corrected;
    std::size_t dead_draws;
};

struct RaschCiResult {
    std::vector<RaschCiRow> rows;
    double coverage_uncorrected = 0;
    double coverage_corrected = 0;
    double median_length_uncorrected = 0;
    double median_length_corrected = 0;
    std::size_t skipped = 0;
};

RaschCiResult compute_rasch_ci(const RaschSimConfig& cfg, std::uint64_t seed,
                               unsigned threads);
ExperimentOutput run_rasch_ci(const RaschSimConfig& cfg, const RunContext& ctx);

// ---------------------------------------------------------------------------
// The structured 52 x 102 table
// ---------------------------------------------------------------------------

struct Table52Config {
    std::size_t n_direct = 1000000;   // exact-symmetry direct draws
    std::size_t n_importance = 100000;
    std::size_t checkpoints = 40;     // log-spaced trajectory checkpoints
    std::size_t extra_observations = 0;  // conditioned draws t(X)=2813 (slow mode)
};

struct Table52Result {
    double direct_estimate = 0;
    double direct_se = 0;
    std::vector<std::size_t> checkpoint_ns;
    std::vector<double> p_tilde_traj;
    std::vector<double> p_hat_traj;
    // corrected trajectories per observation (A, B, then any extras)
    std::vector<std::vector<double>> p_tilde_star_traj;
    std::vector<double> ess_final;  // ESS heuristic at the final checkpoint
    double cv2_final = 0;
};

Table52Result compute_table52(const Table52Config& cfg, std::uint64_t seed,
                              unsigned threads);
ExperimentOutput run_table52(const Table52Config& cfg, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Darwin finch occurrence analysis
// ---------------------------------------------------------------------------

struct FinchConfig {
    std::size_t n = 100000;
    BinaryMatrix observed;  // empty = the embedded finch matrix
};

struct FinchResult {
    double t_obs = 0;
    double p_tilde = 0;
    double p_tilde_se = 0;
    double p_tilde_star = 0;
    std::size_t dead_draws = 0;
    double ess = 0;
};

FinchResult compute_finch(const FinchConfig& cfg, std::uint64_t seed, unsigned threads);
ExperimentOutput run_finch(const FinchConfig& cfg, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Point-process validity on synthetic null pairs
// ---------------------------------------------------------------------------

struct PointProcessValidityConfig {
    int delta = 10;
    int B = 200;
    double rate = 0.1;  // per-tick event probability for the synthetic nulls
    std::size_t n = 100;
    std::size_t replications = 100000;
    std::vector<double> alphas{1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5};
};

struct PointProcessValidityResult {
    ValidityReport plus;   // statistic t+ with thetas (0,.5,.5,.5,.5)
    ValidityReport minus;  // statistic t- with thetas (0,-.5,-.5,-.5,-.5)
};

PointProcessValidityResult compute_pp_validity(const PointProcessValidityConfig& cfg,
                                               std::uint64_t seed, unsigned threads);
ExperimentOutput run_pp_validity(const PointProcessValidityConfig& cfg,
                                 const RunContext& ctx);

// ---------------------------------------------------------------------------
// Randomized Lemma-style inequality sweep
// ---------------------------------------------------------------------------

struct Lemma1SweepResult {
    std::size_t instances = 0;
    std::size_t holds = 0;
    double worst_margin = kPosInf;  // min over instances of alpha - lhs
};

Lemma1SweepResult run_lemma1_sweep(std::size_t instances, std::uint64_t seed);
ExperimentOutput run_lemma1(std::size_t instances, const RunContext& ctx);

}  // namespace ispval
