#ifndef LPH_DISTFIT_HPP
#define LPH_DISTFIT_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lph {

struct WeibullParams {
    double shape = 1.0;
    double scale = 1.0;
};
struct NormalParams {
    double mu = 0.0;
    double sigma = 1.0;
};
struct CauchyParams {
    double location = 0.0;
    double scale = 1.0;
};

/// Maximum-likelihood fits.  Weibull: Newton on the profile shape equation
/// (tolerance 1e-10, positive data required).  Normal: closed form with the
/// MLE variance.  Cauchy: Newton on the score equations initialized at
/// (median, half interquartile range).  Non-convergence after 200 iterations
/// throws fit_error.
WeibullParams fit_weibull_mle(const std::vector<double>& data);
NormalParams fit_normal_mle(const std::vector<double>& data);
CauchyParams fit_cauchy_mle(const std::vector<double>& data);

double weibull_cdf(const WeibullParams& p, double x);
double weibull_pdf(const WeibullParams& p, double x);
double normal_cdf(const NormalParams& p, double x);
double normal_pdf(const NormalParams& p, double x);
double cauchy_cdf(const CauchyParams& p, double x);
double cauchy_pdf(const CauchyParams& p, double x);

double weibull_loglik(const WeibullParams& p, const std::vector<double>& data);
double normal_loglik(const NormalParams& p, const std::vector<double>& data);
double cauchy_loglik(const CauchyParams& p, const std::vector<double>& data);

/// Inverse-cdf samplers, deterministic in the seed.
std::vector<double> weibull_sample(const WeibullParams& p, std::size_t n, std::uint64_t seed);
std::vector<double> normal_sample(const NormalParams& p, std::size_t n, std::uint64_t seed);
std::vector<double> cauchy_sample(const CauchyParams& p, std::size_t n, std::uint64_t seed);

using CdfFn = std::function<double(double)>;
using SamplerFn = std::function<std::vector<double>(std::size_t, std::uint64_t)>;

struct KsResult {
    double stat = 0.0;
    double pvalue = 1.0;
};

/// Two-sided Kolmogorov-Smirnov statistic against a fully specified cdf,
/// with the asymptotic Kolmogorov p-value at sqrt(n) * stat.
KsResult ks_test(std::vector<double> data, const CdfFn& cdf);

struct AdResult {
    double stat = 0.0;
    double pvalue = 1.0;
    bool clamped = false; // cdf values outside (0,1) were clamped
};

/// Anderson-Darling A^2 with a simple-hypothesis parametric bootstrap
/// p-value: `bootstrap` resamples are drawn from the fitted model (no refit)
/// with per-replicate seeds derived from `seed`, and the p-value is the
/// fraction of bootstrap statistics at or above the observed one.
AdResult ad_test(std::vector<double> data, const CdfFn& cdf, const SamplerFn& sampler,
                 std::uint64_t seed, int bootstrap = 1000);

struct FitRow {
    std::string name;
    nlohmann::json params;
    double loglik = 0.0;
    double ks_stat = 0.0;
    double ks_pvalue = 0.0;
    double ad_stat = 0.0;
    double ad_pvalue = 0.0;
};

struct FitReport {
    std::vector<FitRow> rows;

    void sort_by_loglik(); // descending
    nlohmann::json to_json() const;
    /// Aligned text table: Distribution, p-value K-S,
    /// p-value Anderson-Darling, LogL.
    std::string to_table() const;
};

/// A fitted candidate's curves for plot tables.
struct FittedModel {
    std::string name;
    CdfFn cdf;
    std::function<double(double)> pdf;
};

struct PlotTable {
    std::vector<double> grid;
    std::vector<double> empirical;
    std::vector<std::pair<std::string, std::vector<double>>> fitted;
};

struct PlotTables {
    PlotTable cdf;         // empirical distribution function
    PlotTable reliability; // 1 - ECDF
    PlotTable cumhaz;      // Nelson-Aalen cumulative hazard
    PlotTable density;     // histogram with Freedman-Diaconis bins
};

/// Gridded empirical curves paired with each model's fitted curve on the
/// same grid; models may be empty for empirical-only tables.
PlotTables empirical_curves(const std::vector<double>& data,
                            const std::vector<FittedModel>& models);

void write_plot_csv(const PlotTable& table, const std::string& path);

} // namespace lph

#endif
