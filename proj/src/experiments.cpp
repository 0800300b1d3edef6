#include "ispval/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ispval/io.hpp"
#include "ispval/proposals.hpp"
#include "ispval/special.hpp"

namespace ispval {

namespace {

void write_manifest(const std::filesystem::path& dir, const ExperimentOutput& out,
                    const RunContext& ctx, const std::string& status,
                    std::optional<double> wall_clock) {
    nlohmann::json j;
    j["experiment"] = out.experiment;
    j["seed"] = ctx.seed;
    j["threads"] = ctx.effective_threads();
    j["parameters"] = nlohmann::json::parse(out.parameters_json);
    std::vector<std::string> names;
    for (const auto& [name, bytes] : out.files) {
        names.push_back(name);
        (void)bytes;
    }
    j["outputs"] = names;
    j["status"] = status;
    if (wall_clock)
        j["wall_clock_sec"] = *wall_clock;
    else
        j["wall_clock_sec"] = nullptr;
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    if (!f) throw Error("cannot write manifest in " + dir.string());
    f << j.dump(2) << "\n";
}

}  // namespace

void write_experiment(const ExperimentOutput& out, const RunContext& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    std::filesystem::path dir = ctx.out_dir;
    std::filesystem::create_directories(dir);
    write_manifest(dir, out, ctx, "running", std::nullopt);
    for (const auto& [name, bytes] : out.files) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / name).string());
        f << bytes;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, out, ctx, "complete", secs);
}

// ---------------------------------------------------------------------------
// Mismatched Gaussians
// ---------------------------------------------------------------------------

GaussianMseConfig GaussianMseConfig::standard_grid(std::size_t replications,
                                                std::vector<std::size_t> ns) {
    GaussianMseConfig cfg;
    cfg.replications = replications;
    for (double mu : {0.0, 3.0, -3.0})
        for (double sigma : {0.2, 1.0, 5.0})
            for (std::size_t n : ns) cfg.cells.push_back({mu, sigma, n});
    return cfg;
}

GaussianCdfConfig GaussianCdfConfig::standard_grid(std::size_t replications, std::size_t n) {
    GaussianCdfConfig cfg;
    cfg.replications = replications;
    for (double mu : {0.0, 3.0, -3.0})
        for (double sigma : {0.2, 1.0, 5.0}) cfg.cells.push_back({mu, sigma, n});
    return cfg;
}

namespace {

// All four estimates for one simulated experiment, plus the simulated truth.
struct FourEstimates {
    double x;
    double hat, hat_star, tilde, tilde_star;
};

FourEstimates gaussian_four(const GaussianCell& cell, Rng& g) {
    GaussianPair q(cell.mu, cell.sigma);
    double x = normal_variate(g);
    ObservedPoint obs(x, LogWeight(q.log_weight_at(x), true));
    std::vector<WeightedDraw> draws;
    draws.reserve(cell.n);
    for (std::size_t i = 0; i < cell.n; ++i) {
        auto [y, w] = q.sample_and_weight(g);
        draws.emplace_back(y, w);
    }
    FourEstimates e;
    e.x = x;
    e.hat = p_hat(x, draws);
    e.hat_star = p_hat_star(obs, draws);
    e.tilde = p_tilde(x, draws);
    e.tilde_star = p_tilde_star(obs, draws);
    return e;
}

}  // namespace

std::vector<GaussianMseRow> compute_gaussian_mse(const GaussianMseConfig& cfg,
                                                 std::uint64_t seed, unsigned threads) {
    std::vector<GaussianMseRow> rows;
    for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
        const GaussianCell& cell = cfg.cells[c];
        std::uint64_t cell_seed = derive_seed(seed, c);
        std::size_t R = cfg.replications;
        std::vector<std::array<double, 4>> sq(R);
        parallel_for(R, threads, [&](std::size_t rep) {
            Rng g = make_stream(cell_seed, rep);
            FourEstimates e = gaussian_four(cell, g);
            double truth = normal_sf(e.x);
            auto err2 = [truth](double v) { return (v - truth) * (v - truth); };
            sq[rep] = {err2(std::min(e.hat, 1.0)), err2(std::min(e.hat_star, 1.0)),
                       err2(e.tilde), err2(e.tilde_star)};
        });
        GaussianMseRow row;
        row.cell = cell;
        for (int k = 0; k < 4; ++k) {
            KahanSum s;
            for (std::size_t rep = 0; rep < R; ++rep) s.add(sq[rep][k]);
            double mean = s.value() / static_cast<double>(R);
            KahanSum ss;
            for (std::size_t rep = 0; rep < R; ++rep)
                ss.add((sq[rep][k] - mean) * (sq[rep][k] - mean));
            row.mse[k] = mean;
            row.se[k] = std::sqrt(ss.value() / static_cast<double>(R - 1) /
                                  static_cast<double>(R));
        }
        rows.push_back(row);
    }
    return rows;
}

ExperimentOutput run_gaussian_mse(const GaussianMseConfig& cfg, const RunContext& ctx) {
    auto rows = compute_gaussian_mse(cfg, ctx.seed, ctx.effective_threads());
    CsvWriter csv({"mu", "sigma", "n", "mse_phat", "se_phat", "mse_phat_star",
                   "se_phat_star", "mse_ptilde", "se_ptilde", "mse_ptilde_star",
                   "se_ptilde_star"});
    for (const auto& r : rows) {
        std::vector<double> vals = {r.cell.mu,  r.cell.sigma, double(r.cell.n),
                                    r.mse[0],   r.se[0],      r.mse[1],
                                    r.se[1],    r.mse[2],     r.se[2],
                                    r.mse[3],   r.se[3]};
        csv.add_row(vals);
    }

    nlohmann::json params;
    params["replications"] = cfg.replications;
    params["cells"] = cfg.cells.size();

    ExperimentOutput out;
    out.experiment = "gaussian-mse";
    out.parameters_json = params.dump();
    out.files.emplace_back("gaussian_mse.csv", csv.to_string());
    out.summary = "gaussian-mse: " + std::to_string(rows.size()) + " cells at " +
                  std::to_string(cfg.replications) + " replications";
    return out;
}

std::vector<GaussianCdfRow> compute_gaussian_cdf(const GaussianCdfConfig& cfg,
                                                 std::uint64_t seed, unsigned threads) {
    std::vector<GaussianCdfRow> rows;
    const EstimatorKind kinds[4] = {EstimatorKind::PHat, EstimatorKind::PHatStar,
                                    EstimatorKind::PTilde, EstimatorKind::PTildeStar};
    for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
        const GaussianCell& cell = cfg.cells[c];
        std::uint64_t cell_seed = derive_seed(seed, c);
        std::size_t R = cfg.replications;
        std::vector<std::array<double, 4>> pv(R);
        parallel_for(R, threads, [&](std::size_t rep) {
            Rng g = make_stream(cell_seed, rep);
            FourEstimates e = gaussian_four(cell, g);
            pv[rep] = {e.hat, e.hat_star, e.tilde, e.tilde_star};
        });
        double R_d = static_cast<double>(R);
        for (int k = 0; k < 4; ++k) {
            for (double alpha : cfg.alphas) {
                std::size_t hits = 0;
                for (std::size_t rep = 0; rep < R; ++rep) hits += (pv[rep][k] <= alpha);
                GaussianCdfRow row;
                row.cell = cell;
                row.estimator = kinds[k];
                row.alpha = alpha;
                row.cdf = static_cast<double>(hits) / R_d;
                row.se = std::sqrt(row.cdf * (1.0 - row.cdf) / R_d);
                row.violation = row.cdf > alpha + 3.0 * row.se;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

ExperimentOutput run_gaussian_cdf(const GaussianCdfConfig& cfg, const RunContext& ctx) {
    auto rows = compute_gaussian_cdf(cfg, ctx.seed, ctx.effective_threads());
    CsvWriter csv({"mu", "sigma", "n", "estimator", "alpha", "cdf", "se", "verdict"});
    for (const auto& r : rows) {
        std::vector<std::string> cells = {
            CsvWriter::format(r.cell.mu),
            CsvWriter::format(r.cell.sigma),
            CsvWriter::format(static_cast<double>(r.cell.n)),
            estimator_name(r.estimator),
            CsvWriter::format(r.alpha),
            CsvWriter::format(r.cdf),
            CsvWriter::format(r.se),
            r.violation ? "Violation" : "Valid"};
        csv.add_row_raw(cells);
    }

    // one cdf plot per (mu, sigma) cell
    ExperimentOutput out;
    out.experiment = "gaussian-cdf";
    for (const auto& cell : cfg.cells) {
        std::vector<SvgSeries> series(4);
        const char* names[4] = {"p_hat", "p_hat_star", "p_tilde", "p_tilde_star"};
        const char* colors[4] = {"#c04040", "#4040c0", "#e09030", "#309060"};
        for (int k = 0; k < 4; ++k) {
            series[k].label = names[k];
            series[k].color = colors[k];
        }
        for (const auto& r : rows) {
            if (r.cell.mu != cell.mu || r.cell.sigma != cell.sigma || r.cell.n != cell.n)
                continue;
            int k = r.estimator == EstimatorKind::PHat        ? 0
                    : r.estimator == EstimatorKind::PHatStar  ? 1
                    : r.estimator == EstimatorKind::PTilde    ? 2
                                                              : 3;
            series[k].x.push_back(r.alpha);
            series[k].y.push_back(r.cdf);
        }
        char name[96];
        std::snprintf(name, sizeof(name), "cdf_mu%g_sigma%g_n%zu.svg", cell.mu,
                      cell.sigma, cell.n);
        char title[96];
        std::snprintf(title, sizeof(title), "P(p <= alpha), mu=%g sigma=%g n=%zu",
                      cell.mu, cell.sigma, cell.n);
        out.files.emplace_back(name, render_svg_lines(title, series, true, false));
    }

    nlohmann::json params;
    params["replications"] = cfg.replications;
    params["alphas"] = cfg.alphas;
    params["cells"] = cfg.cells.size();
    out.parameters_json = params.dump();

    std::size_t violations = 0, corrected_violations = 0;
    for (const auto& r : rows) {
        violations += r.violation;
        if (r.estimator == EstimatorKind::PHatStar || r.estimator == EstimatorKind::PTildeStar)
            corrected_violations += r.violation;
    }
    CsvWriter csv_out = std::move(csv);
    out.files.emplace_back("gaussian_cdf.csv", csv_out.to_string());
    out.summary = "gaussian-cdf: " + std::to_string(violations) + " violations total, " +
                  std::to_string(corrected_violations) + " among corrected estimators";
    return out;
}

// ---------------------------------------------------------------------------
// Lemma sweep
// ---------------------------------------------------------------------------

Lemma1SweepResult run_lemma1_sweep(std::size_t instances, std::uint64_t seed) {
    Lemma1SweepResult res;
    res.instances = instances;
    for (std::size_t i = 0; i < instances; ++i) {
        Rng g = make_stream(seed, i);
        std::size_t n = 1 + uniform_below(g, 60);
        std::vector<double> t(n), w(n);
        for (std::size_t k = 0; k < n; ++k) {
            double u = uniform01(g);
            if (u < 0.08)
                t[k] = kPosInf;
            else if (u < 0.16)
                t[k] = kNegInf;
            else
                t[k] = std::round(4.0 * normal_variate(g)) / 2.0;
            double v = uniform01(g);
            w[k] = v < 0.15 ? 0.0 : std::exp(2.5 * normal_variate(g));
        }
        double alpha = std::exp(3.0 * (uniform01(g) - 0.5));
        auto check = lemma1_check(t, w, alpha);
        res.holds += check.holds;
        res.worst_margin = std::min(res.worst_margin, alpha - check.lhs);
    }
    return res;
}

ExperimentOutput run_lemma1(std::size_t instances, const RunContext& ctx) {
    auto res = run_lemma1_sweep(instances, ctx.seed);
    nlohmann::json j;
    j["instances"] = res.instances;
    j["holds"] = res.holds;
    j["worst_margin"] = res.worst_margin;

    ExperimentOutput out;
    out.experiment = "lemma1";
    nlohmann::json params;
    params["instances"] = instances;
    out.parameters_json = params.dump();
    out.files.emplace_back("lemma1.json", j.dump(2) + "\n");
    out.summary = std::to_string(res.holds) + "/" + std::to_string(res.instances) +
                  " hold";
    return out;
}

}  // namespace ispval
