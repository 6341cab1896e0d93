#ifndef LPH_FPCA_HPP
#define LPH_FPCA_HPP

#include <string>
#include <vector>

#include "lph/bspline.hpp"

namespace lph {

/// One discretely observed sample curve.  x_max is the native domain
/// endpoint (the registration divisor); after registration the abscissas
/// live in [0, 1] and x_max still holds the original endpoint so the map
/// can be inverted.
struct Curve {
    std::string id;
    std::vector<double> x;
    std::vector<double> y;
    double x_max = 0.0;
};

struct CurveSet {
    std::vector<Curve> curves;
    bool registered = false;

    /// >= 4 samples per curve, strictly increasing abscissas,
    /// x_max >= last abscissa.  Throws construction_error.
    void validate() const;
};

/// Maps each curve's abscissas onto [0, 1] by u = x / x_max.
CurveSet register_curves(const CurveSet& cs);

/// Penalized least-squares smoothing of each registered curve: one row of
/// basis coefficients per curve, minimizing the residual sum of squares
/// plus penalty_lambda times the squared difference penalty.
Matrix psmooth(const CurveSet& cs, const BSplineBasis& basis);

/// Truncated orthogonal expansion of a curve ensemble: mean and
/// eigenfunctions in basis coordinates, eigenvalues (score variances),
/// per-curve scores and explained-variance percentages.
struct KLModel {
    BasisSpec basis;
    Vector mean_coefs;
    Matrix eigenfunction_coefs; // basis dim x components
    Vector eigenvalues;         // descending, nonnegative
    Matrix scores;              // curves x components
    Vector explained;           // percent per component
    int selected_q = 1;         // smallest q reaching the variance cut-off
    bool degenerate = false;    // zero total variance
    std::vector<std::string> curve_ids;

    int components() const { return static_cast<int>(eigenvalues.size()); }
    double eval_mean(double t) const;
    double eval_eigenfunction(int j, double t) const;
    /// Coefficient rows mean + sum_j score_ij f_j rebuilt from the retained
    /// components.
    Matrix reconstruct() const;

    nlohmann::json to_json() const;
    static KLModel from_json(const nlohmann::json& j);
};

/// Eigendecomposition of the sample covariance operator in basis
/// coordinates: with Gram matrix G, the symmetric eigenproblem of
/// G^{1/2} Cov G^{1/2} gives orthonormal eigenfunctions; scores are the
/// exact inner products of the centered curves with the eigenfunctions.
/// Eigenfunction signs are fixed so the integral of each eigenfunction is
/// nonnegative (value at t = 0.5 breaks ties).  All basis-dimension many
/// components are retained; selected_q is the cut-off-rule choice.
KLModel fpca_fit(const Matrix& coefs, const BasisSpec& spec, double cutoff_percent,
                 std::vector<std::string> curve_ids = {});

/// Model restricted to the first q components.
KLModel kl_truncate(const KLModel& model, int q);

/// CSV with header curve_id,x,y or curve_id,x,y,x_max; the optional sidecar
/// JSON maps curve_id to x_max.  Without either source, x_max defaults to
/// the last abscissa.
CurveSet load_curveset_csv(const std::string& path, const std::string& sidecar_path = "");
void save_curveset_csv(const CurveSet& cs, const std::string& path);

} // namespace lph

#endif
