#ifndef LPH_PIPELINE_HPP
#define LPH_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lph/bspline.hpp"

namespace lph {

/// Synthetic curve ensemble: X_i(u) = mu(u) + xi_1 f_1(u) [+ xi_2 f_2(u)]
/// plus Gaussian noise, sampled on per-curve native domains [0, x_max_i].
/// The first score is drawn from a built-in 3-phase law through the affine
/// map xi = (Y - a) / b, so the transformed score a + b xi is phase-type by
/// construction.  Writes the curve CSV plus a ground-truth JSON.
struct SynthConfig {
    int n_curves = 232;
    int points_per_curve = 201;
    std::uint64_t seed = 1;
    double noise_sd = 2e-5;
    double second_weight = 0.0;  // sd of the optional second score; 0 disables
    std::string score_law_json;  // optional law file {a, b, beta, S}; empty = builtin
    std::string output_csv = "curves.csv";
    std::string truth_json = "truth.json";
};
void run_synth(const SynthConfig& cfg);

struct PipelineConfig {
    std::string input_csv;
    std::string sidecar_json;
    std::string outdir = "out";
    BasisSpec basis;
    double cutoff_percent = 99.0;
    double affine_a = 1.0;
    double affine_b = 1000.0;
    std::vector<int> phase_sweep = {4, 8, 16, 21};
    int em_restarts = 3;
    int em_max_iter = 2000;
    double em_rel_tol = 1e-8;
    std::uint64_t seed = 1;
    std::vector<double> eval_t = {0.25, 0.5, 0.75};
    int ad_bootstrap = 1000;

    void validate() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

/// Full workflow: load -> register -> smooth -> expansion fit -> truncate at
/// the variance cut-off -> affine transform of the first score -> EM sweep
/// over phase counts -> classical candidate fits -> fit report -> point laws
/// of the process at the requested t values -> plot tables.  All artifacts
/// land in cfg.outdir; byte-identical outputs for identical config and seed.
void run_fit(const PipelineConfig& cfg);

struct EvalConfig {
    std::string klmodel_json;
    std::string scorelaw_json;
    std::string outdir = "out";
    std::vector<double> eval_t = {0.5};
    int mc_samples = 100000;
    std::uint64_t seed = 7;
};

/// Point law of the process at each t from saved model files: the law JSON
/// plus a grid table of analytic reliability/density next to a Monte-Carlo
/// reliability column.
void run_eval(const EvalConfig& cfg);

// Built-in synthetic ground truth, exposed for tests.
double synth_mean(double u);
double synth_f1(double u);
double synth_f2(double u);

} // namespace lph

#endif
