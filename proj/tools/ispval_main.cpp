#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ispval/experiments.hpp"
#include "ispval/io.hpp"

using namespace ispval;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out;
    std::string config;
};

void add_global(CLI::App* cmd, GlobalOptions& g, const std::string& default_out) {
    g.out = default_out;
    cmd->add_option("--seed", g.seed, "Master seed (all outputs deterministic in it)");
    cmd->add_option("--threads", g.threads, "Worker threads, 0 = hardware");
    cmd->add_option("--out", g.out, "Output directory");
    cmd->add_option("--config", g.config,
                    "Plain key=value configuration file; command-line flags win");
}

// Applies key=value pairs to the subcommand's options; keys already given on
// the command line keep their values. Returns false on an unknown key.
bool apply_config_file(CLI::App* cmd, const std::string& path) {
    auto kv = read_key_value_config(path);
    for (const auto& [key, value] : kv) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) {
            std::cerr << "unknown config key '" << key << "' for subcommand "
                      << cmd->get_name() << "\n";
            return false;
        }
        if (opt->count() > 0 || key == "config") continue;
        std::string spaced = value;
        for (char& c : spaced)
            if (c == ',') c = ' ';
        std::stringstream ss(spaced);
        std::string piece;
        bool any = false;
        while (ss >> piece) {
            opt->add_result(piece);
            any = true;
        }
        if (any) opt->run_callback();
    }
    return true;
}

RunContext context_of(const GlobalOptions& g) {
    RunContext ctx;
    ctx.seed = g.seed;
    ctx.threads = g.threads;
    ctx.out_dir = g.out;
    return ctx;
}

void finish(const ExperimentOutput& out, const RunContext& ctx) {
    write_experiment(out, ctx);
    std::printf("%s\n", out.summary.c_str());
    std::printf("outputs in %s\n", ctx.out_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo p-values with importance-sampling validity corrections"};
    app.require_subcommand(1);

    // ---- pvalue ----
    GlobalOptions g_pv;
    std::string pv_input;
    std::string pv_estimator;
    auto* pvalue = app.add_subcommand(
        "pvalue", "Compute one estimator from a CSV of draws (stat,log_w; first row observed)");
    add_global(pvalue, g_pv, "");
    pvalue->add_option("--input", pv_input, "Draw file")->required();
    pvalue
        ->add_option("--estimator", pv_estimator,
                     "one of p_hat, p_tilde, p_hat_star, p_tilde_star")
        ->required();

    // ---- gaussian-mse ----
    GlobalOptions g_mse;
    std::size_t mse_reps = 100000;
    std::vector<std::size_t> mse_ns = {10, 1000};
    auto* gmse = app.add_subcommand("gaussian-mse",
                                    "MSE of the four estimators, mismatched-Gaussian grid");
    add_global(gmse, g_mse, "runs/gaussian-mse");
    gmse->add_option("--replications", mse_reps, "Monte Carlo replications per cell");
    gmse->add_option("--n", mse_ns, "Importance sample sizes");

    // ---- gaussian-cdf ----
    GlobalOptions g_cdf;
    std::size_t cdf_reps = 100000;
    std::size_t cdf_n = 10;
    auto* gcdf = app.add_subcommand("gaussian-cdf",
                                    "Null cdfs of the four estimators with validity verdicts");
    add_global(gcdf, g_cdf, "runs/gaussian-cdf");
    gcdf->add_option("--replications", cdf_reps, "Monte Carlo replications per cell");
    gcdf->add_option("--n", cdf_n, "Importance sample size");

    // ---- multitest ----
    GlobalOptions g_mt;
    MultiTestConfig mt;
    auto* mtest = app.add_subcommand(
        "multitest", "Bonferroni-corrected multiple permutation testing simulation");
    add_global(mtest, g_mt, "runs/multitest");
    mtest->add_option("--tests", mt.n_tests, "Number of simultaneous tests");
    mtest->add_option("--false-nulls", mt.false_nulls, "How many null hypotheses are false");
    mtest->add_option("--m", mt.m, "Values per dataset");
    mtest->add_option("--r", mt.r, "One-labels per dataset");
    mtest->add_option("--shift", mt.shift, "Location shift under the alternative");
    mtest->add_option("--theta", mt.theta_proposal, "Proposal tilt");
    mtest->add_option("--n", mt.ns, "Monte Carlo sample sizes");
    mtest->add_option("--repetitions", mt.repetitions, "Experiment repetitions");
    mtest->add_option("--alpha", mt.alpha, "Family-wise level");

    // ---- rasch-ci ----
    GlobalOptions g_rc;
    RaschSimConfig rc;
    std::string rc_covariates;
    auto* rasch = app.add_subcommand(
        "rasch-ci", "Coverage of inverted conditional tests in a logistic matrix model");
    add_global(rasch, g_rc, "runs/rasch-ci");
    rasch->add_option("--rows", rc.num_rows, "Matrix rows");
    rasch->add_option("--cols", rc.num_cols, "Matrix columns");
    rasch->add_option("--kappa", rc.kappa, "Intercept");
    rasch->add_option("--theta-true", rc.theta_true, "True covariate effect");
    rasch->add_option("--covariate-seed", rc.covariate_seed,
                      "Seed for the synthetic covariates");
    rasch->add_option("--covariates", rc_covariates, "Optional covariate CSV");
    rasch->add_option("--n", rc.n, "Importance draws per replication");
    rasch->add_option("--replications", rc.replications, "Replications");
    rasch->add_option("--alpha", rc.alpha, "1 - confidence level");

    // ---- table52 ----
    GlobalOptions g_t52;
    Table52Config t52;
    auto* table52 = app.add_subcommand(
        "table52", "Structured 52x102 binary table: direct oracle and importance run");
    add_global(table52, g_t52, "runs/table52");
    table52->add_option("--n", t52.n_importance, "Importance draws");
    table52->add_option("--n-direct", t52.n_direct, "Exact-symmetry direct draws");
    table52->add_option("--checkpoints", t52.checkpoints, "Trajectory checkpoints");
    table52->add_option("--extra-observations", t52.extra_observations,
                        "Extra observations conditioned on t = 2813 (slow)");

    // ---- finch ----
    GlobalOptions g_f;
    FinchConfig fc;
    std::string finch_matrix;
    auto* finch = app.add_subcommand("finch", "Darwin finch occurrence-matrix analysis");
    add_global(finch, g_f, "runs/finch");
    finch->add_option("--n", fc.n, "Importance draws");
    finch->add_option("--matrix", finch_matrix,
                      "Optional 0/1 CSV occurrence matrix replacing the embedded data");

    // ---- ppvalidity ----
    GlobalOptions g_pp;
    PointProcessValidityConfig ppc;
    auto* pp = app.add_subcommand(
        "ppvalidity", "Validity of corrected p-values for lagged point-process tests");
    add_global(pp, g_pp, "runs/ppvalidity");
    pp->add_option("--delta", ppc.delta, "Window length");
    pp->add_option("--B", ppc.B, "Recording length");
    pp->add_option("--rate", ppc.rate, "Synthetic event rate per tick");
    pp->add_option("--n", ppc.n, "Importance draws per test");
    pp->add_option("--replications", ppc.replications, "Replications");

    // ---- lemma1 ----
    GlobalOptions g_l;
    std::size_t lemma_instances = 10000;
    auto* lemma = app.add_subcommand("lemma1",
                                     "Randomized sweep of the weighted-indicator inequality");
    add_global(lemma, g_l, "runs/lemma1");
    lemma->add_option("--instances", lemma_instances, "Random instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help exits clean, usage errors exit 1
    }

    // resolve --config for the active subcommand before dispatching
    {
        const std::pair<CLI::App*, GlobalOptions*> scopes[] = {
            {pvalue, &g_pv}, {gmse, &g_mse},   {gcdf, &g_cdf}, {mtest, &g_mt},
            {rasch, &g_rc},  {table52, &g_t52}, {finch, &g_f},  {pp, &g_pp},
            {lemma, &g_l}};
        for (const auto& [cmd, globals] : scopes) {
            if (!cmd->parsed() || globals->config.empty()) continue;
            try {
                if (!apply_config_file(cmd, globals->config)) return 1;
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
    }

    try {
        if (*pvalue) {
            DrawFile file = read_draw_file(pv_input);
            PValueReport report;
            if (pv_estimator == "p_hat") {
                if (!file.normalized)
                    throw NonNormalizedWeights("p_hat requires normalized weights");
                double v = p_hat(file.observed.stat, file.draws);
                report = make_report(v, EstimatorKind::PHat, file.draws.size(),
                                     file.draws.size() >= 2
                                         ? std::optional<double>(p_hat_std_error(
                                               file.observed.stat, file.draws))
                                         : std::nullopt);
            } else if (pv_estimator == "p_tilde") {
                report = make_report(p_tilde(file.observed.stat, file.draws),
                                     EstimatorKind::PTilde, file.draws.size());
            } else if (pv_estimator == "p_hat_star") {
                if (!file.normalized)
                    throw NonNormalizedWeights("p_hat_star requires normalized weights");
                report = make_report(p_hat_star(file.observed, file.draws),
                                     EstimatorKind::PHatStar, file.draws.size());
            } else if (pv_estimator == "p_tilde_star") {
                report = make_report(p_tilde_star(file.observed, file.draws),
                                     EstimatorKind::PTildeStar, file.draws.size());
            } else {
                std::cerr << "unknown estimator: " << pv_estimator << "\n";
                return 1;
            }
            std::string json = pvalue_report_to_json(report);
            std::printf("%s\n", json.c_str());
            if (!g_pv.out.empty()) {
                ExperimentOutput out;
                out.experiment = "pvalue";
                out.parameters_json =
                    std::string("{\"estimator\":\"") + pv_estimator + "\"}";
                out.files.emplace_back("pvalue.json", json + "\n");
                out.summary = "pvalue: " + std::to_string(report.estimate);
                write_experiment(out, context_of(g_pv));
            }
            return 0;
        }
        if (*gmse) {
            GaussianMseConfig cfg = GaussianMseConfig::standard_grid(mse_reps, mse_ns);
            finish(run_gaussian_mse(cfg, context_of(g_mse)), context_of(g_mse));
            return 0;
        }
        if (*gcdf) {
            GaussianCdfConfig cfg = GaussianCdfConfig::standard_grid(cdf_reps, cdf_n);
            finish(run_gaussian_cdf(cfg, context_of(g_cdf)), context_of(g_cdf));
            return 0;
        }
        if (*mtest) {
            finish(run_multitest(mt, context_of(g_mt)), context_of(g_mt));
            return 0;
        }
        if (*rasch) {
            if (!rc_covariates.empty()) rc.covariates = read_real_matrix_csv(rc_covariates);
            finish(run_rasch_ci(rc, context_of(g_rc)), context_of(g_rc));
            return 0;
        }
        if (*table52) {
            finish(run_table52(t52, context_of(g_t52)), context_of(g_t52));
            return 0;
        }
        if (*finch) {
            if (!finch_matrix.empty()) fc.observed = read_binary_matrix_csv(finch_matrix);
            finish(run_finch(fc, context_of(g_f)), context_of(g_f));
            return 0;
        }
        if (*pp) {
            finish(run_pp_validity(ppc, context_of(g_pp)), context_of(g_pp));
            return 0;
        }
        if (*lemma) {
            finish(run_lemma1(lemma_instances, context_of(g_l)), context_of(g_l));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
