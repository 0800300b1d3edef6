#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ispval/experiments.hpp"
#include "ispval/io.hpp"

using namespace ispval;
namespace fs = std::filesystem;

TEST_SUITE("experiments") {

TEST_CASE("gaussian mse reproduces the known direct-sampling value") {
    GaussianMseConfig cfg;
    cfg.cells = {{0.0, 1.0, 1000}};
    cfg.replications = 5000;
    auto rows = compute_gaussian_mse(cfg, 11, 2);
    REQUIRE(rows.size() == 1);
    // direct sampling at n=1000: MSE = 1/(6*1000) for every estimator
    for (int k = 0; k < 4; ++k)
        CHECK(rows[0].mse[k] == doctest::Approx(1.0 / 6000.0).epsilon(0.15));
}

TEST_CASE("gaussian cdf flags the liberal estimators only") {
    GaussianCdfConfig cfg;
    cfg.cells = {{0.0, 0.2, 10}};
    cfg.replications = 5000;
    auto rows = compute_gaussian_cdf(cfg, 5, 2);
    for (const auto& r : rows) {
        if (r.estimator == EstimatorKind::PHatStar || r.estimator == EstimatorKind::PTildeStar)
            CHECK_FALSE(r.violation);
        if (r.estimator == EstimatorKind::PHat && r.alpha == 0.05) CHECK(r.cdf > 0.10);
    }
}

TEST_CASE("experiment artifacts are identical across thread counts") {
    GaussianCdfConfig cfg;
    cfg.cells = {{0.0, 0.2, 10}};
    cfg.replications = 2000;
    RunContext one;
    one.seed = 42;
    one.threads = 1;
    RunContext many;
    many.seed = 42;
    many.threads = 4;
    auto a = run_gaussian_cdf(cfg, one);
    auto b = run_gaussian_cdf(cfg, many);
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].first == b.files[i].first);
        CHECK(a.files[i].second == b.files[i].second);
    }
}

TEST_CASE("write_experiment lays down manifest plus artifacts") {
    ExperimentOutput out;
    out.experiment = "demo";
    out.parameters_json = "{\"k\":1}";
    out.files.emplace_back("a.csv", "x\n1\n");
    out.files.emplace_back("b.json", "{}\n");
    out.summary = "demo";
    RunContext ctx;
    ctx.seed = 9;
    ctx.out_dir = fs::temp_directory_path() / "ispval_demo_run";
    fs::remove_all(ctx.out_dir);
    write_experiment(out, ctx);
    CHECK(fs::exists(ctx.out_dir / "manifest.json"));
    CHECK(fs::exists(ctx.out_dir / "a.csv"));
    CHECK(fs::exists(ctx.out_dir / "b.json"));
    std::ifstream in(ctx.out_dir / "manifest.json");
    std::string manifest((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    CHECK(manifest.find("\"complete\"") != std::string::npos);
    CHECK(manifest.find("a.csv") != std::string::npos);
    CHECK(manifest.find("b.json") != std::string::npos);
    CHECK(manifest.find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("multitest: the direct-sampling corrected estimator cannot reject") {
    MultiTestConfig cfg;
    cfg.n_tests = 50;
    cfg.false_nulls = 5;
    cfg.m = 40;
    cfg.r = 16;
    cfg.ns = {10};
    cfg.repetitions = 2;
    auto rows = compute_multitest(cfg, 3, 2);
    // p_bar_star >= 1/(n+1) = 1/11 > alpha/N = 1e-3: no rejections possible
    for (const auto& r : rows) {
        if (r.estimator == MultiTestEstimator::PBarStar) {
            CHECK(r.correct == 0);
            CHECK(r.incorrect == 0);
        }
        if (r.estimator == MultiTestEstimator::PHatStar) CHECK(r.incorrect == 0);
    }
}

TEST_CASE("rasch ci: corrected sets dominate uncorrected sets") {
    RaschSimConfig cfg;
    cfg.num_rows = 12;
    cfg.num_cols = 6;
    cfg.n = 20;
    cfg.replications = 20;
    cfg.mixture_thetas = {-2.0, -1.0, 0.0, 1.0, 2.0};
    auto res = compute_rasch_ci(cfg, 21, 2);
    REQUIRE(res.rows.size() == 20);
    CHECK(res.coverage_corrected >= res.coverage_uncorrected);
    for (const auto& r : res.rows)
        CHECK(r.length_corrected >= r.length_uncorrected - 1e-12);
}

TEST_CASE("table52: dominance along the whole trajectory") {
    Table52Config cfg;
    cfg.n_direct = 20000;
    cfg.n_importance = 5000;
    auto res = compute_table52(cfg, 13, 2);
    CHECK(std::fabs(res.direct_estimate - 0.107) < 0.01);
    for (std::size_t k = 0; k < res.checkpoint_ns.size(); ++k)
        for (const auto& traj : res.p_tilde_star_traj)
            CHECK(traj[k] >= res.p_tilde_traj[k] - 1e-12);
}

TEST_CASE("finch run basics") {
    FinchConfig cfg;
    cfg.n = 2000;
    auto res = compute_finch(cfg, 2, 2);
    CHECK(std::fabs(res.t_obs - 53.1) < 0.05);
    CHECK(res.p_tilde >= 0.0);
    CHECK(res.p_tilde_star >= res.p_tilde);
    CHECK(res.p_tilde_star <= 1.0);
    CHECK(res.dead_draws < cfg.n);
}

TEST_CASE("lemma sweep holds everywhere") {
    auto res = run_lemma1_sweep(2000, 77);
    CHECK(res.holds == res.instances);
    CHECK(res.worst_margin >= 0.0);
}

TEST_CASE("pp validity on a tiny run") {
    PointProcessValidityConfig cfg;
    cfg.replications = 800;
    cfg.n = 20;
    cfg.B = 100;
    auto res = compute_pp_validity(cfg, 6, 2);
    CHECK(res.plus.all_valid());
    CHECK(res.minus.all_valid());
}

}  // TEST_SUITE
