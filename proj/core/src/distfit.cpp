#include "lph/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "lph/errors.hpp"
#include "lph/rng.hpp"

namespace lph {

namespace {

constexpr int kNewtonMaxIter = 200;
constexpr double kNewtonTol = 1e-10;

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

} // namespace

WeibullParams fit_weibull_mle(const std::vector<double>& data) {
    if (data.size() < 2)
        throw argument_error("fit_weibull_mle: need at least two observations");
    for (double x : data)
        if (!(x > 0.0))
            throw domain_error("fit_weibull_mle: data must be strictly positive");

    const double n = static_cast<double>(data.size());
    double mean_log = 0.0, var_log = 0.0;
    for (double x : data) mean_log += std::log(x);
    mean_log /= n;
    for (double x : data) var_log += (std::log(x) - mean_log) * (std::log(x) - mean_log);
    var_log /= n;
    // Moment-based start from the extreme-value log scale.
    double k = var_log > 0.0 ? M_PI / std::sqrt(6.0 * var_log) : 1.0;

    for (int it = 0; it < kNewtonMaxIter; ++it) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (double x : data) {
            const double xk = std::pow(x, k);
            const double lx = std::log(x);
            s0 += xk;
            s1 += xk * lx;
            s2 += xk * lx * lx;
        }
        const double g = 1.0 / k + mean_log - s1 / s0;
        const double dg = -1.0 / (k * k) - (s2 * s0 - s1 * s1) / (s0 * s0);
        const double step = g / dg;
        k -= step;
        if (!(k > 0.0) || !std::isfinite(k))
            throw fit_error("fit_weibull_mle: Newton iteration left the parameter domain");
        if (std::abs(step) < kNewtonTol * std::max(1.0, k)) {
            double s0f = 0.0;
            for (double x : data) s0f += std::pow(x, k);
            return {k, std::pow(s0f / n, 1.0 / k)};
        }
    }
    throw fit_error("fit_weibull_mle: no convergence after 200 Newton iterations");
}

NormalParams fit_normal_mle(const std::vector<double>& data) {
    if (data.size() < 2)
        throw argument_error("fit_normal_mle: need at least two observations");
    const double n = static_cast<double>(data.size());
    const double mu = std::accumulate(data.begin(), data.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : data) ss += (x - mu) * (x - mu);
    return {mu, std::sqrt(ss / n)};
}

CauchyParams fit_cauchy_mle(const std::vector<double>& data) {
    if (data.size() < 2)
        throw argument_error("fit_cauchy_mle: need at least two observations");
    std::vector<double> sorted = data;
    std::sort(sorted.begin(), sorted.end());
    double mu = quantile_sorted(sorted, 0.5);
    double gamma = 0.5 * (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25));
    if (!(gamma > 0.0)) gamma = 1.0;

    const auto loglik = [&](double m, double g) {
        double ll = data.size() * std::log(g / M_PI);
        for (double x : data) ll -= std::log(g * g + (x - m) * (x - m));
        return ll;
    };

    double ll = loglik(mu, gamma);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        // Score and Hessian of the log-likelihood in (mu, gamma).
        double su = 0.0, sg = 0.0, huu = 0.0, hug = 0.0, hgg = 0.0;
        const double n = static_cast<double>(data.size());
        for (double x : data) {
            const double d = x - mu;
            const double q = gamma * gamma + d * d;
            su += 2.0 * d / q;
            sg += -2.0 * gamma / q;
            huu += 2.0 * (d * d - gamma * gamma) / (q * q);
            hug += 4.0 * gamma * d / (q * q);
            hgg += 2.0 * (gamma * gamma - d * d) / (q * q);
        }
        sg += n / gamma;
        hgg -= n / (gamma * gamma);
        hug = -hug; // d2l/dmu dgamma = -sum 4 gamma d / q^2

        const double det = huu * hgg - hug * hug;
        if (!std::isfinite(det) || std::abs(det) < 1e-300)
            throw fit_error("fit_cauchy_mle: singular Hessian in Newton step");
        double dmu = (hgg * su - hug * sg) / det;
        double dga = (huu * sg - hug * su) / det;

        // Damped step: halve until the likelihood does not decrease.
        double step = 1.0;
        double mu2 = mu, ga2 = gamma, ll2 = ll;
        for (int h = 0; h < 60; ++h) {
            mu2 = mu - step * dmu;
            ga2 = gamma - step * dga;
            if (ga2 > 0.0) {
                ll2 = loglik(mu2, ga2);
                if (ll2 >= ll - 1e-12) break;
            }
            step *= 0.5;
        }
        const double change = std::abs(mu2 - mu) + std::abs(ga2 - gamma);
        mu = mu2;
        gamma = ga2;
        ll = ll2;
        if (change < kNewtonTol * std::max(1.0, std::abs(mu) + gamma))
            return {mu, gamma};
    }
    throw fit_error("fit_cauchy_mle: no convergence after 200 Newton iterations");
}

double weibull_cdf(const WeibullParams& p, double x) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-std::pow(x / p.scale, p.shape));
}

double weibull_pdf(const WeibullParams& p, double x) {
    if (x <= 0.0) return 0.0;
    const double z = x / p.scale;
    return p.shape / p.scale * std::pow(z, p.shape - 1.0) * std::exp(-std::pow(z, p.shape));
}

double normal_cdf(const NormalParams& p, double x) {
    return 0.5 * std::erfc(-(x - p.mu) / (p.sigma * M_SQRT2));
}

double normal_pdf(const NormalParams& p, double x) {
    const double z = (x - p.mu) / p.sigma;
    return std::exp(-0.5 * z * z) / (p.sigma * std::sqrt(2.0 * M_PI));
}

double cauchy_cdf(const CauchyParams& p, double x) {
    return 0.5 + std::atan((x - p.location) / p.scale) / M_PI;
}

double cauchy_pdf(const CauchyParams& p, double x) {
    const double d = x - p.location;
    return p.scale / (M_PI * (p.scale * p.scale + d * d));
}

double weibull_loglik(const WeibullParams& p, const std::vector<double>& data) {
    double ll = 0.0;
    for (double x : data) ll += std::log(std::max(weibull_pdf(p, x), 1e-300));
    return ll;
}

double normal_loglik(const NormalParams& p, const std::vector<double>& data) {
    double ll = 0.0;
    for (double x : data) ll += std::log(std::max(normal_pdf(p, x), 1e-300));
    return ll;
}

double cauchy_loglik(const CauchyParams& p, const std::vector<double>& data) {
    double ll = 0.0;
    for (double x : data) ll += std::log(std::max(cauchy_pdf(p, x), 1e-300));
    return ll;
}

std::vector<double> weibull_sample(const WeibullParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = p.scale * std::pow(-std::log1p(-rng.uniform()), 1.0 / p.shape);
    return out;
}

std::vector<double> normal_sample(const NormalParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = rng.normal(p.mu, p.sigma);
    return out;
}

std::vector<double> cauchy_sample(const CauchyParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& v : out) v = p.location + p.scale * std::tan(M_PI * (rng.uniform() - 0.5));
    return out;
}

namespace {

// Q(z) = P(K > z) for the Kolmogorov distribution, by the pair of theta
// series (small-z and large-z forms).
double kolmogorov_q(double z) {
    if (z < 1e-8) return 1.0;
    if (z < 1.18) {
        const double v = M_PI * M_PI / (8.0 * z * z);
        double p = 0.0;
        for (int k = 1; k <= 20; k += 2) {
            const double term = std::exp(-v * k * k);
            p += term;
            if (term < 1e-16 * p) break;
        }
        p *= std::sqrt(2.0 * M_PI) / z;
        return std::clamp(1.0 - p, 0.0, 1.0);
    }
    double q = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * z * z);
        q += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * q, 0.0, 1.0);
}

double ad_statistic(const std::vector<double>& sorted, const CdfFn& cdf, bool* clamped) {
    const std::size_t n = sorted.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = cdf(sorted[i]);
        if (v < 1e-12 || v > 1.0 - 1e-12) {
            if (clamped) *clamped = true;
            v = std::clamp(v, 1e-12, 1.0 - 1e-12);
        }
        u[i] = v;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += (2.0 * static_cast<double>(i) + 1.0) *
             (std::log(u[i]) + std::log1p(-u[n - 1 - i]));
    return -static_cast<double>(n) - s / static_cast<double>(n);
}

} // namespace

KsResult ks_test(std::vector<double> data, const CdfFn& cdf) {
    if (data.empty())
        throw argument_error("ks_test: empty data");
    std::sort(data.begin(), data.end());
    const double n = static_cast<double>(data.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f = cdf(data[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        stat = std::max({stat, hi, lo});
    }
    return {stat, kolmogorov_q(std::sqrt(n) * stat)};
}

AdResult ad_test(std::vector<double> data, const CdfFn& cdf, const SamplerFn& sampler,
                 std::uint64_t seed, int bootstrap) {
    if (data.size() < 2)
        throw argument_error("ad_test: need at least two observations");
    if (bootstrap < 1)
        throw argument_error("ad_test: need at least one bootstrap replicate");
    std::sort(data.begin(), data.end());
    AdResult out;
    out.stat = ad_statistic(data, cdf, &out.clamped);

    int count = 0;
    for (int b = 0; b < bootstrap; ++b) {
        std::vector<double> rep = sampler(data.size(), seed + static_cast<std::uint64_t>(b));
        std::sort(rep.begin(), rep.end());
        if (ad_statistic(rep, cdf, nullptr) >= out.stat) ++count;
    }
    out.pvalue = static_cast<double>(count) / static_cast<double>(bootstrap);
    return out;
}

void FitReport::sort_by_loglik() {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const FitRow& a, const FitRow& b) { return a.loglik > b.loglik; });
}

nlohmann::json FitReport::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const FitRow& r : rows)
        out.push_back({{"name", r.name},
                       {"params", r.params},
                       {"loglik", r.loglik},
                       {"ks_stat", r.ks_stat},
                       {"ks_pvalue", r.ks_pvalue},
                       {"ad_stat", r.ad_stat},
                       {"ad_pvalue", r.ad_pvalue}});
    return out;
}

std::string FitReport::to_table() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %14s %26s %12s\n", "Distribution", "p-value K-S",
                  "p-value Anderson-Darling", "LogL");
    out += buf;
    out += std::string(16 + 1 + 14 + 1 + 26 + 1 + 12, '-') + "\n";
    for (const FitRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%-16s %14.4g %26.4g %12.4f\n", r.name.c_str(),
                      r.ks_pvalue, r.ad_pvalue, r.loglik);
        out += buf;
    }
    return out;
}

PlotTables empirical_curves(const std::vector<double>& data,
                            const std::vector<FittedModel>& models) {
    if (data.size() < 2)
        throw argument_error("empirical_curves: need at least two observations");
    std::vector<double> sorted = data;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double lo = sorted.front(), hi = sorted.back();

    PlotTables out;
    constexpr int kGridPoints = 200;
    std::vector<double> grid(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (kGridPoints - 1);

    // Nelson-Aalen increments at the order statistics.
    std::vector<double> na(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += 1.0 / static_cast<double>(n - i);
        na[i] = acc;
    }

    out.cdf.grid = grid;
    out.reliability.grid = grid;
    out.cumhaz.grid = grid;
    for (double g : grid) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), g);
        const std::size_t count = static_cast<std::size_t>(it - sorted.begin());
        const double ecdf = static_cast<double>(count) / static_cast<double>(n);
        out.cdf.empirical.push_back(ecdf);
        out.reliability.empirical.push_back(1.0 - ecdf);
        out.cumhaz.empirical.push_back(count == 0 ? 0.0 : na[count - 1]);
    }

    // Freedman-Diaconis histogram density at bin centers.
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
    if (!(width > 0.0)) width = (hi - lo) > 0.0 ? (hi - lo) : 1.0;
    const int nbins = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
    width = (hi - lo) > 0.0 ? (hi - lo) / nbins : width;
    std::vector<int> counts(nbins, 0);
    for (double x : sorted) {
        int bin = width > 0.0 ? static_cast<int>((x - lo) / width) : 0;
        bin = std::clamp(bin, 0, nbins - 1);
        ++counts[bin];
    }
    for (int b = 0; b < nbins; ++b) {
        out.density.grid.push_back(lo + (b + 0.5) * width);
        out.density.empirical.push_back(static_cast<double>(counts[b]) /
                                        (static_cast<double>(n) * width));
    }

    for (const FittedModel& m : models) {
        std::vector<double> fc, fr, fh, fd;
        for (double g : grid) {
            const double F = m.cdf(g);
            fc.push_back(F);
            fr.push_back(1.0 - F);
            fh.push_back(F < 1.0 ? -std::log1p(-F) : std::numeric_limits<double>::infinity());
        }
        for (double g : out.density.grid) fd.push_back(m.pdf(g));
        out.cdf.fitted.emplace_back(m.name, std::move(fc));
        out.reliability.fitted.emplace_back(m.name, std::move(fr));
        out.cumhaz.fitted.emplace_back(m.name, std::move(fh));
        out.density.fitted.emplace_back(m.name, std::move(fd));
    }
    return out;
}

void write_plot_csv(const PlotTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write plot table '" + path + "'");
    out << "grid_x,empirical";
    for (const auto& [name, values] : table.fitted) out << ",fitted_" << name;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < table.grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", table.grid[i]);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", table.empirical[i]);
        out << buf;
        for (const auto& [name, values] : table.fitted) {
            std::snprintf(buf, sizeof buf, ",%.17g", values[i]);
            out << buf;
        }
        out << "\n";
    }
}

} // namespace lph
