#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ispval/experiments.hpp"
#include "ispval/finch_data.hpp"
#include "ispval/io.hpp"
#include "ispval/proposals.hpp"
#include "ispval/statistics.hpp"

namespace ispval {

namespace {

// Delta-method standard error of the self-normalized ratio estimator.
double p_tilde_se(double p, std::span<const double> log_w,
                  std::span<const std::uint8_t> exceed, double shift) {
    KahanSum num, den;
    for (std::size_t i = 0; i < log_w.size(); ++i) {
        double w = std::exp(log_w[i] - shift);
        den.add(w);
        double d = (exceed[i] ? 1.0 : 0.0) - p;
        num.add(w * w * d * d);
    }
    if (den.value() == 0.0) return 0.0;
    return std::sqrt(num.value()) / den.value();
}

}  // namespace

// ---------------------------------------------------------------------------
// Structured 52 x 102 table
// ---------------------------------------------------------------------------

Table52Result compute_table52(const Table52Config& cfg, std::uint64_t seed,
                              unsigned threads) {
    Table52Result res;
    const double t_ref = 2813.0;

    // exact-symmetry direct sampling estimate of P(t >= 2813)
    {
        const std::size_t blocks = 512;
        std::size_t per = (cfg.n_direct + blocks - 1) / blocks;
        std::vector<std::size_t> hits(blocks, 0), counts(blocks, 0);
        std::uint64_t s = derive_seed(seed, 1);
        parallel_for(blocks, threads, [&](std::size_t b) {
            Rng g = make_stream(s, b);
            std::size_t lo = b * per;
            std::size_t hi = std::min(cfg.n_direct, lo + per);
            for (std::size_t i = lo; i < hi; ++i) {
                std::vector<int> row1 = structured_row1_sample(g);
                hits[b] += (structured_row1_stat(row1) >= t_ref);
                ++counts[b];
            }
        });
        std::size_t total_hits = 0, total = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            total_hits += hits[b];
            total += counts[b];
        }
        res.direct_estimate = static_cast<double>(total_hits) / static_cast<double>(total);
        res.direct_se = std::sqrt(res.direct_estimate * (1.0 - res.direct_estimate) /
                                  static_cast<double>(total));
    }

    // conditional-Poisson importance run, shared by every observation
    const MarginFiber& fiber = structured_table_fiber();
    const double log_p = -structured_table_log_fiber_size();
    std::size_t n = cfg.n_importance;
    std::vector<double> stat(n), log_w(n);
    std::vector<std::uint8_t> alive(n, 0);
    {
        const std::size_t blocks = 256;
        std::size_t per = (n + blocks - 1) / blocks;
        std::uint64_t s = derive_seed(seed, 2);
        parallel_for(blocks, threads, [&](std::size_t b) {
            Rng g = make_stream(s, b);
            BinaryMatrix scratch;
            for (std::size_t i = b * per; i < std::min(n, (b + 1) * per); ++i) {
                TableDraw d = cp_column_sample_into(fiber, nullptr, 0.0, g, scratch);
                if (d.dead_end) {
                    stat[i] = 0.0;
                    log_w[i] = kNegInf;
                    alive[i] = 0;
                } else {
                    stat[i] = column_index_sum(scratch);
                    log_w[i] = log_p - d.log_q;
                    alive[i] = 1;
                }
            }
        });
    }

    // observations: the two embedded first rows, plus optional conditioned extras
    std::vector<std::vector<int>> observations;
    observations.emplace_back(table52_observed_a().begin(), table52_observed_a().end());
    observations.emplace_back(table52_observed_b().begin(), table52_observed_b().end());
    {
        Rng g = make_stream(derive_seed(seed, 3), 0);
        while (observations.size() < 2 + cfg.extra_observations) {
            std::vector<int> row1 = structured_row1_sample(g);
            if (structured_row1_stat(row1) == t_ref) observations.push_back(row1);
        }
    }
    std::vector<double> obs_log_w;
    for (const auto& row1 : observations) {
        BinaryMatrix x = structured_matrix_from_row1(row1);
        obs_log_w.push_back(log_p - cp_column_logprob(fiber, x));
    }

    // log-spaced checkpoints
    std::vector<std::size_t> ns;
    for (std::size_t k = 0; k < cfg.checkpoints; ++k) {
        double f = static_cast<double>(k + 1) / static_cast<double>(cfg.checkpoints);
        std::size_t v = static_cast<std::size_t>(std::llround(std::pow(
            static_cast<double>(n), f)));
        v = std::max<std::size_t>(v, 2);
        if (ns.empty() || v > ns.back()) ns.push_back(v);
    }
    if (ns.empty() || ns.back() != n) ns.push_back(n);

    // prefix sums under one global shift
    double shift = kNegInf;
    for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, log_w[i]);
    for (double lw : obs_log_w) shift = std::max(shift, lw);

    res.checkpoint_ns = ns;
    res.p_tilde_star_traj.assign(observations.size(), {});
    KahanSum sum_w, sum_w_exceed;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n && next < ns.size(); ++i) {
        if (alive[i] && log_w[i] != kNegInf) {
            double w = std::exp(log_w[i] - shift);
            sum_w.add(w);
            if (stat[i] >= t_ref) sum_w_exceed.add(w);
        }
        if (i + 1 == ns[next]) {
            double denom = sum_w.value();
            double numer = sum_w_exceed.value();
            res.p_tilde_traj.push_back(denom > 0 ? numer / denom : 0.0);
            res.p_hat_traj.push_back(numer * std::exp(shift) /
                                     static_cast<double>(ns[next]));
            for (std::size_t o = 0; o < observations.size(); ++o) {
                double w_obs = std::exp(obs_log_w[o] - shift);
                double star = (w_obs + numer) / (w_obs + denom);
                res.p_tilde_star_traj[o].push_back(std::min(star, 1.0));
            }
            ++next;
        }
    }

    // weight diagnostics on the full run
    {
        std::vector<WeightedDraw> draws;
        draws.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            draws.emplace_back(stat[i], LogWeight(log_w[i], true));
        double ess = ess_diagnostic(draws);
        res.ess_final.push_back(ess);
        res.cv2_final = static_cast<double>(n) / ess - 1.0;
    }
    return res;
}

ExperimentOutput run_table52(const Table52Config& cfg, const RunContext& ctx) {
    Table52Result res = compute_table52(cfg, ctx.seed, ctx.effective_threads());

    CsvWriter direct({"n", "estimate", "se"});
    {
        std::vector<double> row = {static_cast<double>(cfg.n_direct), res.direct_estimate,
                                   res.direct_se};
        direct.add_row(row);
    }

    std::vector<std::string> header = {"n", "p_tilde", "p_hat"};
    for (std::size_t o = 0; o < res.p_tilde_star_traj.size(); ++o)
        header.push_back("p_tilde_star_obs" + std::to_string(o + 1));
    CsvWriter traj(header);
    for (std::size_t k = 0; k < res.checkpoint_ns.size(); ++k) {
        std::vector<double> row = {static_cast<double>(res.checkpoint_ns[k]),
                                   res.p_tilde_traj[k], res.p_hat_traj[k]};
        for (const auto& t : res.p_tilde_star_traj) row.push_back(t[k]);
        traj.add_row(row);
    }

    std::vector<SvgSeries> series;
    {
        SvgSeries truth;
        truth.label = "direct estimate";
        truth.color = "#202020";
        for (std::size_t k = 0; k < res.checkpoint_ns.size(); ++k) {
            truth.x.push_back(static_cast<double>(res.checkpoint_ns[k]));
            truth.y.push_back(res.direct_estimate);
        }
        series.push_back(truth);
        SvgSeries tilde;
        tilde.label = "p_tilde";
        tilde.color = "#b03030";
        for (std::size_t k = 0; k < res.checkpoint_ns.size(); ++k) {
            tilde.x.push_back(static_cast<double>(res.checkpoint_ns[k]));
            tilde.y.push_back(res.p_tilde_traj[k]);
        }
        series.push_back(tilde);
        const char* colors[2] = {"#3060b0", "#30a070"};
        for (std::size_t o = 0; o < res.p_tilde_star_traj.size() && o < 2; ++o) {
            SvgSeries s;
            s.label = "p_tilde_star obs" + std::to_string(o + 1);
            s.color = colors[o];
            for (std::size_t k = 0; k < res.checkpoint_ns.size(); ++k) {
                s.x.push_back(static_cast<double>(res.checkpoint_ns[k]));
                s.y.push_back(res.p_tilde_star_traj[o][k]);
            }
            series.push_back(s);
        }
    }

    nlohmann::json params;
    params["n_direct"] = cfg.n_direct;
    params["n_importance"] = cfg.n_importance;
    params["checkpoints"] = cfg.checkpoints;
    params["extra_observations"] = cfg.extra_observations;

    nlohmann::json diag;
    diag["direct_estimate"] = res.direct_estimate;
    diag["direct_se"] = res.direct_se;
    diag["cv2"] = res.cv2_final;
    diag["ess"] = res.ess_final.empty() ? 0.0 : res.ess_final[0];

    ExperimentOutput out;
    out.experiment = "table52";
    out.parameters_json = params.dump();
    out.files.emplace_back("direct.csv", direct.to_string());
    out.files.emplace_back("trajectory.csv", traj.to_string());
    out.files.emplace_back("trajectory.svg",
                           render_svg_lines("p-value trajectories", series, false, true));
    out.files.emplace_back("diagnostics.json", diag.dump(2) + "\n");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "table52: direct P(t>=2813) = %.4f +- %.4f, ess %.0f",
                  res.direct_estimate, res.direct_se,
                  res.ess_final.empty() ? 0.0 : res.ess_final[0]);
    out.summary = buf;
    return out;
}

// ---------------------------------------------------------------------------
// Darwin finch analysis
// ---------------------------------------------------------------------------

FinchResult compute_finch(const FinchConfig& cfg, std::uint64_t seed, unsigned threads) {
    const bool embedded = cfg.observed.rows() == 0;
    const BinaryMatrix& x = embedded ? darwin_finch_matrix() : cfg.observed;
    if (embedded) {
        std::vector<int> rs = x.row_sums();
        std::vector<int> cs = x.col_sums();
        std::sort(rs.begin(), rs.end(), std::greater<>());
        std::sort(cs.begin(), cs.end(), std::greater<>());
        if (rs != finch_sorted_row_margins() || cs != finch_sorted_col_margins())
            throw Error("finch: embedded matrix margins do not match the recorded margins");
    }
    const MarginFiber fiber(x.row_sums(), x.col_sums());

    FinchResult res;
    res.t_obs = finch_s2bar(x);

    std::size_t n = cfg.n;
    std::vector<double> stat(n), log_w(n);
    std::vector<std::uint8_t> alive(n, 0);
    const std::size_t blocks = 256;
    std::size_t per = (n + blocks - 1) / blocks;
    std::uint64_t s = derive_seed(seed, 5);
    parallel_for(blocks, threads, [&](std::size_t b) {
        Rng g = make_stream(s, b);
        BinaryMatrix scratch;
        for (std::size_t i = b * per; i < std::min(n, (b + 1) * per); ++i) {
            TableDraw d = cp_column_sample_into(fiber, nullptr, 0.0, g, scratch);
            if (d.dead_end) {
                stat[i] = 0.0;
                log_w[i] = kNegInf;
                alive[i] = 0;
            } else {
                stat[i] = finch_s2bar(scratch);
                log_w[i] = -d.log_q;  // target known up to a constant
                alive[i] = 1;
            }
        }
    });

    double shift = kNegInf;
    for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, log_w[i]);
    double lq_obs = cp_column_logprob(fiber, x);
    double lw_obs = -lq_obs;
    shift = std::max(shift, lw_obs);

    KahanSum den, num;
    std::vector<std::uint8_t> exceed(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i] || log_w[i] == kNegInf) continue;
        double w = std::exp(log_w[i] - shift);
        den.add(w);
        if (stat[i] >= res.t_obs) {
            num.add(w);
            exceed[i] = 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i) res.dead_draws += !alive[i];

    res.p_tilde = den.value() > 0 ? num.value() / den.value() : 0.0;
    res.p_tilde_se = p_tilde_se(res.p_tilde, log_w, exceed, shift);
    double w_obs = std::exp(lw_obs - shift);
    res.p_tilde_star = std::min((w_obs + num.value()) / (w_obs + den.value()), 1.0);

    std::vector<WeightedDraw> draws;
    draws.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        draws.emplace_back(stat[i], LogWeight(log_w[i], false));
    res.ess = ess_diagnostic(draws);
    return res;
}

ExperimentOutput run_finch(const FinchConfig& cfg, const RunContext& ctx) {
    FinchResult res = compute_finch(cfg, ctx.seed, ctx.effective_threads());

    nlohmann::json j;
    j["t_obs"] = res.t_obs;
    j["n"] = cfg.n;
    j["p_tilde"] = res.p_tilde;
    j["p_tilde_se"] = res.p_tilde_se;
    j["p_tilde_star"] = res.p_tilde_star;
    j["dead_draws"] = res.dead_draws;
    j["ess"] = res.ess;

    CsvWriter csv({"n", "t_obs", "p_tilde", "p_tilde_se", "p_tilde_star", "dead_draws",
                   "ess"});
    std::vector<double> row = {static_cast<double>(cfg.n), res.t_obs,       res.p_tilde,
                               res.p_tilde_se,             res.p_tilde_star,
                               static_cast<double>(res.dead_draws), res.ess};
    csv.add_row(row);

    nlohmann::json params;
    params["n"] = cfg.n;
    params["embedded_matrix"] = cfg.observed.rows() == 0;

    ExperimentOutput out;
    out.experiment = "finch";
    out.parameters_json = params.dump();
    out.files.emplace_back("finch.json", j.dump(2) + "\n");
    out.files.emplace_back("finch.csv", csv.to_string());
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "finch: t(X) = %.4f, p_tilde = %.3e +- %.3e, p_tilde_star = %.3e",
                  res.t_obs, res.p_tilde, res.p_tilde_se, res.p_tilde_star);
    out.summary = buf;
    return out;
}

// ---------------------------------------------------------------------------
// Point-process validity
// ---------------------------------------------------------------------------

namespace {

std::vector<int> bernoulli_train(int B, double rate, Rng& g) {
    std::vector<int> t;
    for (int i = 0; i < B; ++i)
        if (uniform01(g) < rate) t.push_back(i);
    return t;
}

ValidityReport pp_validity_one_sign(const PointProcessValidityConfig& cfg, bool plus,
                                    std::uint64_t seed, unsigned threads) {
    TiltedPointProcessConfig tilt = plus ? TiltedPointProcessConfig::for_lag_count_plus()
                                         : TiltedPointProcessConfig::for_lag_count_minus();

    std::size_t R = cfg.replications;
    std::vector<double> pvals(R);
    parallel_for(R, threads, [&](std::size_t rep) {
        Rng g = make_stream(seed, rep);
        // null pair: conditionally uniform given window counts by construction
        std::vector<int> u = bernoulli_train(cfg.B, cfg.rate, g);
        std::vector<int> sv = bernoulli_train(cfg.B, cfg.rate, g);
        BinnedPairFiber fiber(cfg.delta, cfg.B, window_counts(u, cfg.delta, cfg.B / cfg.delta),
                              window_counts(sv, cfg.delta, cfg.B / cfg.delta));
        TiltedPointProcess pp(fiber, tilt);

        PairedEventTimes obs_pair{u, sv};
        double t_obs = plus ? lag_count_plus(obs_pair) : lag_count_minus(obs_pair);
        ObservedPoint obs(t_obs, pp.pair_log_weight(u, sv));

        std::vector<WeightedDraw> draws;
        draws.reserve(cfg.n);
        for (std::size_t k = 0; k < cfg.n; ++k) {
            std::vector<int> up = pp.sample_first_uniform(g);
            auto [sp, lq] = pp.sample_second(up, g);
            (void)lq;
            PairedEventTimes pair{up, sp};
            double t = plus ? lag_count_plus(pair) : lag_count_minus(pair);
            draws.emplace_back(t, pp.pair_log_weight(up, sp));
        }
        pvals[rep] = p_hat_star(obs, draws);
    });

    ValidityReport report;
    report.alphas = cfg.alphas;
    report.replications = R;
    report.k_sigma = 3.0;
    double Rd = static_cast<double>(R);
    for (double alpha : cfg.alphas) {
        std::size_t hits = 0;
        for (double p : pvals) hits += (p <= alpha);
        double cdf = static_cast<double>(hits) / Rd;
        double se = std::sqrt(cdf * (1.0 - cdf) / Rd);
        report.cdf_hat.push_back(cdf);
        report.se.push_back(se);
        report.violation.push_back(cdf > alpha + 3.0 * se);
    }
    return report;
}

}  // namespace

PointProcessValidityResult compute_pp_validity(const PointProcessValidityConfig& cfg,
                                               std::uint64_t seed, unsigned threads) {
    PointProcessValidityResult res;
    res.plus = pp_validity_one_sign(cfg, true, derive_seed(seed, 11), threads);
    res.minus = pp_validity_one_sign(cfg, false, derive_seed(seed, 12), threads);
    return res;
}

ExperimentOutput run_pp_validity(const PointProcessValidityConfig& cfg,
                                 const RunContext& ctx) {
    PointProcessValidityResult res =
        compute_pp_validity(cfg, ctx.seed, ctx.effective_threads());

    CsvWriter csv({"statistic", "alpha", "cdf_hat", "se", "verdict"});
    auto add = [&](const char* name, const ValidityReport& rep) {
        for (std::size_t i = 0; i < rep.alphas.size(); ++i) {
            std::vector<std::string> cells = {
                name, CsvWriter::format(rep.alphas[i]), CsvWriter::format(rep.cdf_hat[i]),
                CsvWriter::format(rep.se[i]), rep.violation[i] ? "Violation" : "Valid"};
            csv.add_row_raw(cells);
        }
    };
    add("t_plus", res.plus);
    add("t_minus", res.minus);

    nlohmann::json params;
    params["delta"] = cfg.delta;
    params["B"] = cfg.B;
    params["rate"] = cfg.rate;
    params["n"] = cfg.n;
    params["replications"] = cfg.replications;
    params["alphas"] = cfg.alphas;

    ExperimentOutput out;
    out.experiment = "ppvalidity";
    out.parameters_json = params.dump();
    out.files.emplace_back("ppvalidity.csv", csv.to_string());
    out.files.emplace_back("ppvalidity_plus.json", validity_report_to_json(res.plus) + "\n");
    out.files.emplace_back("ppvalidity_minus.json",
                           validity_report_to_json(res.minus) + "\n");
    bool ok = res.plus.all_valid() && res.minus.all_valid();
    out.summary = std::string("ppvalidity: ") + (ok ? "all levels valid" : "VIOLATIONS");
    return out;
}

}  // namespace ispval
