#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lph/pipeline.hpp"

namespace {

lph::PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw lph::io_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    in >> j;
    return lph::PipelineConfig::from_json(j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-type and linear-phase-type modelling of curve ensembles"};
    app.require_subcommand(1);

    // --- synth ---------------------------------------------------------
    lph::SynthConfig synth;
    auto* synth_cmd = app.add_subcommand(
        "synth", "Generate a synthetic curve ensemble with a known score law");
    synth_cmd->add_option("--n", synth.n_curves, "Number of curves");
    synth_cmd->add_option("--points", synth.points_per_curve, "Samples per curve");
    synth_cmd->add_option("--seed", synth.seed, "Random seed");
    synth_cmd->add_option("--noise-sd", synth.noise_sd, "Observation noise sd");
    synth_cmd->add_option("--second-weight", synth.second_weight,
                          "Sd of the optional second score component (0 disables)");
    synth_cmd->add_option("--output", synth.output_csv, "Curve CSV path");
    synth_cmd->add_option("--truth", synth.truth_json, "Ground-truth JSON path");

    // --- fit -----------------------------------------------------------
    lph::PipelineConfig fit;
    std::string config_path;
    int basis_dim = fit.basis.dimension;
    int knots = fit.basis.interior_knots;
    double penalty = fit.basis.penalty_lambda;
    int penalty_order = fit.basis.penalty_order;

    auto* fit_cmd = app.add_subcommand("fit", "Run the full modelling workflow");
    fit_cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    auto* o_input = fit_cmd->add_option("--input", fit.input_csv, "Curve CSV (curve_id,x,y[,x_max])");
    auto* o_sidecar = fit_cmd->add_option("--sidecar", fit.sidecar_json, "Sidecar JSON of x_max per curve");
    auto* o_outdir = fit_cmd->add_option("--outdir", fit.outdir, "Output directory");
    auto* o_cutoff = fit_cmd->add_option("--cutoff", fit.cutoff_percent, "Explained-variance cut-off percent");
    auto* o_a = fit_cmd->add_option("--affine-a", fit.affine_a, "Affine offset applied to the first score");
    auto* o_b = fit_cmd->add_option("--affine-b", fit.affine_b, "Affine slope applied to the first score");
    auto* o_phases = fit_cmd->add_option("--phases", fit.phase_sweep, "Phase counts to sweep");
    auto* o_restarts = fit_cmd->add_option("--restarts", fit.em_restarts, "EM restarts per phase count");
    auto* o_maxit = fit_cmd->add_option("--max-iter", fit.em_max_iter, "EM iteration cap");
    auto* o_reltol = fit_cmd->add_option("--rel-tol", fit.em_rel_tol, "EM relative logL tolerance");
    auto* o_seed = fit_cmd->add_option("--seed", fit.seed, "Random seed");
    auto* o_evalt = fit_cmd->add_option("--eval-t", fit.eval_t, "Registered points t for process laws");
    auto* o_adboot = fit_cmd->add_option("--ad-bootstrap", fit.ad_bootstrap, "Anderson-Darling bootstrap replicates");
    auto* o_bdim = fit_cmd->add_option("--basis-dim", basis_dim, "Basis dimension");
    auto* o_knots = fit_cmd->add_option("--knots", knots, "Interior knot count");
    auto* o_pen = fit_cmd->add_option("--penalty", penalty, "Smoothing penalty lambda");
    auto* o_penord = fit_cmd->add_option("--penalty-order", penalty_order, "Difference penalty order");

    // --- eval ----------------------------------------------------------
    lph::EvalConfig eval;
    auto* eval_cmd =
        app.add_subcommand("eval", "Point laws of the process from saved model files");
    eval_cmd->add_option("--model", eval.klmodel_json, "klmodel.json path")->required();
    eval_cmd->add_option("--scorelaw", eval.scorelaw_json, "scorelaw.json path")->required();
    eval_cmd->add_option("--outdir", eval.outdir, "Output directory");
    eval_cmd->add_option("--eval-t", eval.eval_t, "Registered points t");
    eval_cmd->add_option("--mc-n", eval.mc_samples, "Monte-Carlo cross-check sample size");
    eval_cmd->add_option("--seed", eval.seed, "Random seed for the cross-check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            lph::run_synth(synth);
        } else if (fit_cmd->parsed()) {
            if (!config_path.empty()) {
                // Config file first, explicit flags override.
                lph::PipelineConfig base = load_config_file(config_path);
                if (!*o_input) fit.input_csv = base.input_csv;
                if (!*o_sidecar) fit.sidecar_json = base.sidecar_json;
                if (!*o_outdir) fit.outdir = base.outdir;
                if (!*o_cutoff) fit.cutoff_percent = base.cutoff_percent;
                if (!*o_a) fit.affine_a = base.affine_a;
                if (!*o_b) fit.affine_b = base.affine_b;
                if (!*o_phases) fit.phase_sweep = base.phase_sweep;
                if (!*o_restarts) fit.em_restarts = base.em_restarts;
                if (!*o_maxit) fit.em_max_iter = base.em_max_iter;
                if (!*o_reltol) fit.em_rel_tol = base.em_rel_tol;
                if (!*o_seed) fit.seed = base.seed;
                if (!*o_evalt) fit.eval_t = base.eval_t;
                if (!*o_adboot) fit.ad_bootstrap = base.ad_bootstrap;
                if (!*o_bdim) basis_dim = base.basis.dimension;
                if (!*o_knots) knots = base.basis.interior_knots;
                if (!*o_pen) penalty = base.basis.penalty_lambda;
                if (!*o_penord) penalty_order = base.basis.penalty_order;
            }
            fit.basis.dimension = basis_dim;
            fit.basis.interior_knots = knots;
            fit.basis.penalty_lambda = penalty;
            fit.basis.penalty_order = penalty_order;
            lph::run_fit(fit);
        } else if (eval_cmd->parsed()) {
            lph::run_eval(eval);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
