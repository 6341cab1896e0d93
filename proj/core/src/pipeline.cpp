#include "lph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "lph/distfit.hpp"
#include "lph/em_fit.hpp"
#include "lph/fpca.hpp"
#include "lph/linear_phase_type.hpp"
#include "lph/rng.hpp"
#include "lph/serialize.hpp"

namespace fs = std::filesystem;

namespace lph {

namespace {

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error("'" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

std::string format_t(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

// Built-in score law of the generator: a 3-phase feedback chain (loop back
// from the last stage with probability 0.4) with unit mean, pushed through
// xi = (Y - 1) / 1000 so score magnitudes mimic functional-PCA scores.  The
// echo humps of the loop keep the law well separated from the classical
// two-parameter candidates.
PhaseType synth_score_ph() {
    Vector alpha(3);
    alpha << 1.0, 0.0, 0.0;
    Matrix T(3, 3);
    T << -5.0, 5.0, 0.0, 0.0, -5.0, 5.0, 2.0, 0.0, -5.0;
    return PhaseType(alpha, T);
}
constexpr double kSynthA = 1.0;
constexpr double kSynthB = 1000.0;

nlohmann::json tolerances_json() {
    return {{"mat_exp_rel", tol::mat_exp_rel},
            {"solve_residual", tol::solve_residual},
            {"condition_limit", tol::condition_limit},
            {"symmetry_abs", tol::symmetry_abs},
            {"eigen_gram", tol::eigen_gram},
            {"eigen_residual", tol::eigen_residual},
            {"stochastic_slack", tol::stochastic_slack},
            {"row_sum_slack", tol::row_sum_slack},
            {"entry_slack", tol::entry_slack},
            {"slope_match", tol::slope_match},
            {"zero_weight", tol::zero_weight},
            {"density_floor", tol::density_floor}};
}

[[noreturn]] void stage_fail(const char* stage, const std::exception& e) {
    throw error(std::string("stage ") + stage + ": " + e.what());
}

} // namespace

double synth_mean(double u) { return 1e-3 * (0.3 + 0.2 * u + 1.1 * u * u); }
double synth_f1(double u) { return std::sqrt(2.0) * std::sin(M_PI * u); }
double synth_f2(double u) { return std::sqrt(2.0) * std::sin(2.0 * M_PI * u); }

void run_synth(const SynthConfig& cfg) {
    if (cfg.n_curves < 2)
        throw argument_error("run_synth: need at least two curves");
    if (cfg.points_per_curve < 4)
        throw argument_error("run_synth: need at least four points per curve");

    const LinearPhaseType score_law =
        cfg.score_law_json.empty()
            ? LinearPhaseType(synth_score_ph(), kSynthA, kSynthB)
            : LinearPhaseType::from_json(read_json_file(cfg.score_law_json));
    const std::size_t n = static_cast<std::size_t>(cfg.n_curves);

    Rng domain_rng = Rng::derived(cfg.seed, 1);
    std::vector<double> xi1 = score_law.sample(n, Rng::derived(cfg.seed, 2).raw());
    Rng second_rng = Rng::derived(cfg.seed, 3);
    Rng noise_rng = Rng::derived(cfg.seed, 4);

    std::vector<double> xi2(n, 0.0), x_max(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (cfg.second_weight > 0.0) xi2[i] = second_rng.normal(0.0, cfg.second_weight);
        x_max[i] = domain_rng.uniform(0.9, 1.4);
    }

    CurveSet cs;
    char idbuf[32];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(idbuf, sizeof idbuf, "c%03zu", i + 1);
        Curve c;
        c.id = idbuf;
        c.x_max = x_max[i];
        const int pts = cfg.points_per_curve;
        for (int j = 0; j < pts; ++j) {
            const double u = static_cast<double>(j) / (pts - 1);
            c.x.push_back(u * x_max[i]);
            double y = synth_mean(u) + xi1[i] * synth_f1(u) + xi2[i] * synth_f2(u);
            if (cfg.noise_sd > 0.0) y += noise_rng.normal(0.0, cfg.noise_sd);
            c.y.push_back(y);
        }
        cs.curves.push_back(std::move(c));
    }
    save_curveset_csv(cs, cfg.output_csv);

    nlohmann::json truth = {
        {"score_law",
         {{"a", score_law.a()},
          {"b", score_law.b()},
          {"ph", score_law.underlying().to_json()}}},
        {"xi1", xi1},
        {"xi2", cfg.second_weight > 0.0 ? nlohmann::json(xi2) : nlohmann::json(nullptr)},
        {"x_max", x_max},
        {"noise_sd", cfg.noise_sd},
        {"seed", cfg.seed},
        {"mean", "1e-3*(0.3 + 0.2 u + 1.1 u^2)"},
        {"f1", "sqrt(2) sin(pi u)"},
        {"f2", "sqrt(2) sin(2 pi u)"}};
    write_json_file(cfg.truth_json, truth);
}

void PipelineConfig::validate() const {
    if (input_csv.empty())
        throw argument_error("PipelineConfig: input path is required");
    if (!(cutoff_percent > 0.0) || cutoff_percent > 100.0)
        throw argument_error("PipelineConfig: cut-off must lie in (0, 100]");
    if (affine_b == 0.0)
        throw argument_error("PipelineConfig: affine slope b must be nonzero");
    if (phase_sweep.empty())
        throw argument_error("PipelineConfig: phase sweep must not be empty");
    for (int m : phase_sweep)
        if (m < 1)
            throw argument_error("PipelineConfig: phase counts must be positive");
    for (double t : eval_t)
        if (t < 0.0 || t > 1.0)
            throw argument_error("PipelineConfig: eval t values must lie in [0, 1]");
    basis.validate();
}

nlohmann::json PipelineConfig::to_json() const {
    return {{"input", input_csv},
            {"sidecar", sidecar_json},
            {"outdir", outdir},
            {"basis", basis.to_json()},
            {"cutoff", cutoff_percent},
            {"affine_a", affine_a},
            {"affine_b", affine_b},
            {"phases", phase_sweep},
            {"restarts", em_restarts},
            {"max_iter", em_max_iter},
            {"rel_tol", em_rel_tol},
            {"seed", seed},
            {"eval_t", eval_t},
            {"ad_bootstrap", ad_bootstrap}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    cfg.input_csv = j.value("input", cfg.input_csv);
    cfg.sidecar_json = j.value("sidecar", cfg.sidecar_json);
    cfg.outdir = j.value("outdir", cfg.outdir);
    if (j.contains("basis")) cfg.basis = BasisSpec::from_json(j["basis"]);
    cfg.cutoff_percent = j.value("cutoff", cfg.cutoff_percent);
    cfg.affine_a = j.value("affine_a", cfg.affine_a);
    cfg.affine_b = j.value("affine_b", cfg.affine_b);
    cfg.phase_sweep = j.value("phases", cfg.phase_sweep);
    cfg.em_restarts = j.value("restarts", cfg.em_restarts);
    cfg.em_max_iter = j.value("max_iter", cfg.em_max_iter);
    cfg.em_rel_tol = j.value("rel_tol", cfg.em_rel_tol);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.eval_t = j.value("eval_t", cfg.eval_t);
    cfg.ad_bootstrap = j.value("ad_bootstrap", cfg.ad_bootstrap);
    return cfg;
}

void run_fit(const PipelineConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.outdir);
    fs::create_directories(fs::path(cfg.outdir) / "plots");

    CurveSet raw;
    try {
        raw = load_curveset_csv(cfg.input_csv, cfg.sidecar_json);
    } catch (const std::exception& e) {
        stage_fail("load", e);
    }

    CurveSet registered;
    try {
        registered = register_curves(raw);
    } catch (const std::exception& e) {
        stage_fail("register", e);
    }

    Matrix coefs;
    BSplineBasis basis(cfg.basis);
    try {
        coefs = psmooth(registered, basis);
    } catch (const std::exception& e) {
        stage_fail("smooth", e);
    }

    KLModel model;
    try {
        std::vector<std::string> ids;
        for (const Curve& c : registered.curves) ids.push_back(c.id);
        model = fpca_fit(coefs, cfg.basis, cfg.cutoff_percent, std::move(ids));
    } catch (const std::exception& e) {
        stage_fail("fpca", e);
    }
    write_json_file(fs::path(cfg.outdir) / "klmodel.json", model.to_json());

    const int q = model.selected_q;
    {
        std::ofstream sc(fs::path(cfg.outdir) / "scores.csv");
        sc << "curve_id";
        for (int j = 1; j <= q; ++j) sc << ",xi_" << j;
        sc << "\n";
        char buf[64];
        for (Eigen::Index i = 0; i < model.scores.rows(); ++i) {
            sc << model.curve_ids[static_cast<std::size_t>(i)];
            for (int j = 0; j < q; ++j) {
                std::snprintf(buf, sizeof buf, ",%.17g", model.scores(i, j));
                sc << buf;
            }
            sc << "\n";
        }
    }

    // Affine transform of the first principal component score.
    std::vector<double> transformed;
    try {
        for (Eigen::Index i = 0; i < model.scores.rows(); ++i) {
            const double s = cfg.affine_a + cfg.affine_b * model.scores(i, 0);
            if (!(s > 0.0))
                throw argument_error(
                    "transformed score a + b*xi is nonpositive for curve '" +
                    model.curve_ids[static_cast<std::size_t>(i)] +
                    "' (value " + std::to_string(s) +
                    "); adjust --affine-a/--affine-b so all transformed scores are positive");
            transformed.push_back(s);
        }
    } catch (const std::exception& e) {
        stage_fail("transform", e);
    }

    // EM sweep over the configured phase counts.
    std::vector<std::pair<int, EmResult>> fits;
    try {
        for (int m : cfg.phase_sweep) {
            EmConfig em;
            em.phases = m;
            em.max_iter = cfg.em_max_iter;
            em.rel_tol = cfg.em_rel_tol;
            em.seed = cfg.seed;
            em.restarts = cfg.em_restarts;
            EmResult res = fit_phase_type(transformed, em);
            write_json_file(fs::path(cfg.outdir) / ("phmodel_m" + std::to_string(m) + ".json"),
                            res.model.to_json());
            write_json_file(fs::path(cfg.outdir) / ("emtrace_m" + std::to_string(m) + ".json"),
                            res.trace.to_json());
            fits.emplace_back(m, std::move(res));
        }
    } catch (const std::exception& e) {
        stage_fail("emfit", e);
    }

    FitReport report;
    std::vector<FittedModel> plot_models;
    int best_m = 0;
    try {
        std::size_t candidate = 0;
        const auto ad_seed = [&](std::size_t k) {
            return cfg.seed + 1000000 + k * static_cast<std::uint64_t>(cfg.ad_bootstrap + 1);
        };

        double best_ll = -std::numeric_limits<double>::infinity();
        const PhaseType* best_ph = nullptr;
        for (const auto& [m, res] : fits) {
            const PhaseType ph = res.model;
            const CdfFn cdf = [ph](double x) { return ph.cdf(x); };
            const SamplerFn sampler = [ph](std::size_t k, std::uint64_t s) {
                return ph.sample(k, s);
            };
            FitRow row;
            row.name = "PH(m=" + std::to_string(m) + ")";
            row.params = {{"phases", m},
                          {"alpha", vector_to_json(ph.alpha())},
                          {"T", matrix_to_json(ph.subgenerator())}};
            row.loglik = res.trace.loglik_per_iter.back();
            const KsResult ks = ks_test(transformed, cdf);
            row.ks_stat = ks.stat;
            row.ks_pvalue = ks.pvalue;
            const AdResult ad = ad_test(transformed, cdf, sampler, ad_seed(candidate),
                                        cfg.ad_bootstrap);
            row.ad_stat = ad.stat;
            row.ad_pvalue = ad.pvalue;
            report.rows.push_back(std::move(row));
            if (res.trace.loglik_per_iter.back() > best_ll) {
                best_ll = res.trace.loglik_per_iter.back();
                best_m = m;
                best_ph = &res.model;
            }
            ++candidate;
        }

        const WeibullParams wp = fit_weibull_mle(transformed);
        const NormalParams np = fit_normal_mle(transformed);
        const CauchyParams cp = fit_cauchy_mle(transformed);
        struct Classical {
            std::string name;
            nlohmann::json params;
            double loglik;
            CdfFn cdf;
            std::function<double(double)> pdf;
            SamplerFn sampler;
        };
        const std::vector<Classical> classical = {
            {"Weibull",
             {{"shape", wp.shape}, {"scale", wp.scale}},
             weibull_loglik(wp, transformed),
             [wp](double x) { return weibull_cdf(wp, x); },
             [wp](double x) { return weibull_pdf(wp, x); },
             [wp](std::size_t k, std::uint64_t s) { return weibull_sample(wp, k, s); }},
            {"Normal",
             {{"mu", np.mu}, {"sigma", np.sigma}},
             normal_loglik(np, transformed),
             [np](double x) { return normal_cdf(np, x); },
             [np](double x) { return normal_pdf(np, x); },
             [np](std::size_t k, std::uint64_t s) { return normal_sample(np, k, s); }},
            {"Cauchy",
             {{"location", cp.location}, {"scale", cp.scale}},
             cauchy_loglik(cp, transformed),
             [cp](double x) { return cauchy_cdf(cp, x); },
             [cp](double x) { return cauchy_pdf(cp, x); },
             [cp](std::size_t k, std::uint64_t s) { return cauchy_sample(cp, k, s); }}};
        for (const Classical& c : classical) {
            FitRow row;
            row.name = c.name;
            row.params = c.params;
            row.loglik = c.loglik;
            const KsResult ks = ks_test(transformed, c.cdf);
            row.ks_stat = ks.stat;
            row.ks_pvalue = ks.pvalue;
            const AdResult ad =
                ad_test(transformed, c.cdf, c.sampler, ad_seed(candidate), cfg.ad_bootstrap);
            row.ad_stat = ad.stat;
            row.ad_pvalue = ad.pvalue;
            report.rows.push_back(std::move(row));
            plot_models.push_back({c.name, c.cdf, c.pdf});
            ++candidate;
        }

        report.sort_by_loglik();
        write_json_file(fs::path(cfg.outdir) / "fitreport.json", report.to_json());
        std::ofstream tab(fs::path(cfg.outdir) / "fitreport.txt");
        tab << report.to_table();

        // Score law: the best phase-type fit pulled back through the affine
        // transform, xi = (Y - a) / b.
        const LinearPhaseType score_law(*best_ph, cfg.affine_a, cfg.affine_b);
        write_json_file(fs::path(cfg.outdir) / "scorelaw.json", score_law.to_json());

        const PhaseType bestcopy = *best_ph;
        plot_models.insert(plot_models.begin(),
                           {"PH", [bestcopy](double x) { return bestcopy.cdf(x); },
                            [bestcopy](double x) { return bestcopy.density(x); }});

        // Point law of the process at the requested registration points.
        for (double t : cfg.eval_t) {
            const double f1 = model.eval_eigenfunction(0, t);
            const double mu = model.eval_mean(t);
            nlohmann::json j;
            if (std::abs(f1) < tol::zero_weight) {
                j = {{"t", t},
                     {"mean_shift", mu},
                     {"point_mass", true},
                     {"note", "eigenfunction weight vanishes at t; the law is a point mass "
                              "at the mean"}};
            } else {
                const ProcessPointLaw law = process_point_law({score_law}, {f1}, mu, t);
                try {
                    j = law.to_json();
                } catch (const numeric_error&) {
                    // The 4-tuple of a stiff representation can exceed
                    // floating-point range; the law still evaluates through
                    // its canonical form.
                    j = {{"t", t},
                         {"mean_shift", mu},
                         {"representation_overflow", true},
                         {"note", "beta = alpha e^{Ta} exceeds floating-point range for "
                                  "this representation"}};
                }
            }
            write_json_file(fs::path(cfg.outdir) / ("pointlaw_" + format_t(t) + ".json"), j);
        }
    } catch (const std::exception& e) {
        stage_fail("report", e);
    }

    try {
        const PlotTables tables = empirical_curves(transformed, plot_models);
        const fs::path plots = fs::path(cfg.outdir) / "plots";
        write_plot_csv(tables.cdf, (plots / "cdf.csv").string());
        write_plot_csv(tables.reliability, (plots / "reliability.csv").string());
        write_plot_csv(tables.cumhaz, (plots / "cumhaz.csv").string());
        write_plot_csv(tables.density, (plots / "density.csv").string());
    } catch (const std::exception& e) {
        stage_fail("plots", e);
    }

    nlohmann::json manifest = {{"config", cfg.to_json()},
                               {"tolerances", tolerances_json()},
                               {"selected_q", q},
                               {"degenerate", model.degenerate},
                               {"best_phase_count", best_m},
                               {"note_q",
                                "only the first principal component score is fitted and used "
                                "in the point laws; scores are assumed independent where sums "
                                "of components are formed"}};
    write_json_file(fs::path(cfg.outdir) / "run_manifest.json", manifest);
}

void run_eval(const EvalConfig& cfg) {
    if (cfg.mc_samples < 1)
        throw argument_error("run_eval: mc_samples must be positive");
    for (double t : cfg.eval_t)
        if (t < 0.0 || t > 1.0)
            throw domain_error("run_eval: t values must lie in [0, 1]");

    const KLModel model = KLModel::from_json(read_json_file(cfg.klmodel_json));
    const LinearPhaseType score_law =
        LinearPhaseType::from_json(read_json_file(cfg.scorelaw_json));
    fs::create_directories(cfg.outdir);

    for (double t : cfg.eval_t) {
        const double f1 = model.eval_eigenfunction(0, t);
        const double mu = model.eval_mean(t);
        const std::string tag = format_t(t);
        if (std::abs(f1) < tol::zero_weight) {
            write_json_file(fs::path(cfg.outdir) / ("pointlaw_" + tag + ".json"),
                            {{"t", t},
                             {"mean_shift", mu},
                             {"point_mass", true},
                             {"note", "eigenfunction weight vanishes at t; the law is a "
                                      "point mass at the mean"}});
            continue;
        }
        const ProcessPointLaw law = process_point_law({score_law}, {f1}, mu, t);
        write_json_file(fs::path(cfg.outdir) / ("pointlaw_" + tag + ".json"), law.to_json());

        // Grid table with a Monte-Carlo reliability cross-check.
        const double mean = law.rep.mean();
        const double sd = std::sqrt(law.rep.variance());
        const int grid_n = 201;
        std::vector<double> draws =
            score_law.sample(static_cast<std::size_t>(cfg.mc_samples), cfg.seed);
        for (double& v : draws) v = mu + f1 * v;
        std::sort(draws.begin(), draws.end());

        std::ofstream out(fs::path(cfg.outdir) / ("pointlaw_" + tag + "_grid.csv"));
        if (!out)
            throw io_error("cannot write point-law grid for t = " + tag);
        out << "x,reliability,density,mc_reliability\n";
        char buf[128];
        for (int i = 0; i < grid_n; ++i) {
            const double x = mean - 5.0 * sd + 10.0 * sd * static_cast<double>(i) / (grid_n - 1);
            const auto it = std::upper_bound(draws.begin(), draws.end(), x);
            const double mc_rel =
                1.0 - static_cast<double>(it - draws.begin()) / static_cast<double>(draws.size());
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x,
                          law.rep.reliability(x), law.rep.density(x), mc_rel);
            out << buf;
        }
    }
}

} // namespace lph
