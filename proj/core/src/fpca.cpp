#include "lph/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lph/serialize.hpp"

namespace lph {

void CurveSet::validate() const {
    if (curves.empty())
        throw construction_error("CurveSet: no curves");
    for (const Curve& c : curves) {
        if (c.x.size() != c.y.size())
            throw construction_error("CurveSet: curve '" + c.id +
                                     "' has mismatched abscissa/ordinate counts");
        if (c.x.size() < 4)
            throw construction_error("CurveSet: curve '" + c.id + "' has fewer than 4 samples");
        for (std::size_t i = 1; i < c.x.size(); ++i)
            if (!(c.x[i] > c.x[i - 1]))
                throw construction_error("CurveSet: curve '" + c.id +
                                         "' abscissas are not strictly increasing");
        if (registered) {
            // x_max keeps the native endpoint so the map can be inverted;
            // the abscissas themselves must lie in [0, 1].
            if (c.x.front() < 0.0 || c.x.back() > 1.0 + 1e-12)
                throw construction_error("CurveSet: registered curve '" + c.id +
                                         "' has abscissas outside [0, 1]");
        } else if (c.x_max < c.x.back() * (1.0 - 1e-12)) {
            throw construction_error("CurveSet: curve '" + c.id +
                                     "' has x_max below its last abscissa");
        }
        for (double v : c.x)
            if (!std::isfinite(v))
                throw construction_error("CurveSet: curve '" + c.id + "' has non-finite abscissa");
        for (double v : c.y)
            if (!std::isfinite(v))
                throw construction_error("CurveSet: curve '" + c.id + "' has non-finite ordinate");
    }
}

CurveSet register_curves(const CurveSet& cs) {
    cs.validate();
    CurveSet out = cs;
    for (Curve& c : out.curves) {
        if (!(c.x_max > 0.0))
            throw domain_error("register_curves: curve '" + c.id +
                               "' has nonpositive domain endpoint");
        for (double& v : c.x) v /= c.x_max;
    }
    out.registered = true;
    return out;
}

Matrix psmooth(const CurveSet& cs, const BSplineBasis& basis) {
    cs.validate();
    for (const Curve& c : cs.curves)
        for (double v : c.x)
            if (v < 0.0 || v > 1.0 + 1e-12)
                throw argument_error("psmooth: curve '" + c.id +
                                     "' is not registered to [0, 1]");

    const int p = basis.size();
    const double lambda = basis.spec().penalty_lambda;
    const Matrix pen = lambda > 0.0 ? Matrix(lambda * basis.penalty()) : Matrix();

    Matrix coefs(static_cast<Eigen::Index>(cs.curves.size()), p);
    for (std::size_t i = 0; i < cs.curves.size(); ++i) {
        const Curve& c = cs.curves[i];
        std::vector<double> u = c.x;
        for (double& v : u) v = std::min(v, 1.0);
        const Matrix d = basis.design(u);
        Matrix normal = d.transpose() * d;
        if (lambda > 0.0) normal += pen;
        const Vector rhs =
            d.transpose() * Eigen::Map<const Vector>(c.y.data(), static_cast<Eigen::Index>(c.y.size()));
        coefs.row(static_cast<Eigen::Index>(i)) = solve(normal, rhs).transpose();
    }
    return coefs;
}

double KLModel::eval_mean(double t) const {
    return BSplineBasis(basis).eval_coefs(mean_coefs, t);
}

double KLModel::eval_eigenfunction(int j, double t) const {
    if (j < 0 || j >= components())
        throw argument_error("eval_eigenfunction: component index out of range");
    return BSplineBasis(basis).eval_coefs(eigenfunction_coefs.col(j), t);
}

Matrix KLModel::reconstruct() const {
    Matrix out = scores * eigenfunction_coefs.transpose();
    out.rowwise() += mean_coefs.transpose();
    return out;
}

nlohmann::json KLModel::to_json() const {
    return {{"basis", basis.to_json()},
            {"mean_coefs", vector_to_json(mean_coefs)},
            {"eigenfunction_coefs", matrix_to_json(eigenfunction_coefs)},
            {"eigenvalues", vector_to_json(eigenvalues)},
            {"scores", matrix_to_json(scores)},
            {"explained", vector_to_json(explained)},
            {"selected_q", selected_q},
            {"degenerate", degenerate},
            {"curve_ids", curve_ids}};
}

KLModel KLModel::from_json(const nlohmann::json& j) {
    KLModel m;
    m.basis = BasisSpec::from_json(j.at("basis"));
    m.mean_coefs = json_to_vector(j.at("mean_coefs"));
    m.eigenfunction_coefs = json_to_matrix(j.at("eigenfunction_coefs"));
    m.eigenvalues = json_to_vector(j.at("eigenvalues"));
    m.scores = json_to_matrix(j.at("scores"));
    m.explained = json_to_vector(j.at("explained"));
    m.selected_q = j.at("selected_q").get<int>();
    m.degenerate = j.at("degenerate").get<bool>();
    m.curve_ids = j.value("curve_ids", std::vector<std::string>{});
    return m;
}

KLModel fpca_fit(const Matrix& coefs, const BasisSpec& spec, double cutoff_percent,
                 std::vector<std::string> curve_ids) {
    const Eigen::Index n = coefs.rows();
    if (n < 2)
        throw argument_error("fpca_fit: need at least two curves");
    if (!(cutoff_percent > 0.0) || cutoff_percent > 100.0)
        throw argument_error("fpca_fit: cut-off must lie in (0, 100]");
    BSplineBasis basis(spec);
    const int p = basis.size();
    if (coefs.cols() != p)
        throw dimension_error("fpca_fit: coefficient matrix does not match the basis dimension");

    const Matrix& gram = basis.gram();
    const SymEigen ge = sym_eigen(gram);
    if (ge.values.minCoeff() <= 0.0)
        throw numeric_error("fpca_fit: Gram matrix is not positive definite");
    const Matrix sqrt_g =
        ge.vectors * ge.values.cwiseSqrt().asDiagonal() * ge.vectors.transpose();
    const Matrix inv_sqrt_g =
        ge.vectors * ge.values.cwiseSqrt().cwiseInverse().asDiagonal() * ge.vectors.transpose();

    KLModel model;
    model.basis = spec;
    model.curve_ids = std::move(curve_ids);
    model.mean_coefs = coefs.colwise().mean().transpose();

    const Matrix centered = coefs.rowwise() - model.mean_coefs.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Matrix sym = sqrt_g * cov * sqrt_g;
    sym = 0.5 * (sym + sym.transpose()).eval();

    const SymEigen ce = sym_eigen(sym);
    model.eigenvalues = ce.values.cwiseMax(0.0);
    model.eigenfunction_coefs = inv_sqrt_g * ce.vectors;
    model.scores = centered * gram * model.eigenfunction_coefs;

    // Deterministic sign: integral of each eigenfunction nonnegative, the
    // value at t = 0.5 breaking ties.
    const Vector half = basis.eval_all(0.5);
    for (int j = 0; j < p; ++j) {
        double s = model.eigenfunction_coefs.col(j).dot(basis.integrals());
        if (std::abs(s) <= 1e-12) s = model.eigenfunction_coefs.col(j).dot(half);
        if (s < 0.0) {
            model.eigenfunction_coefs.col(j) = -model.eigenfunction_coefs.col(j);
            model.scores.col(j) = -model.scores.col(j);
        }
    }

    const double total = model.eigenvalues.sum();
    model.explained = Vector::Zero(p);
    if (total <= 1e-28) {
        model.degenerate = true;
        model.selected_q = 1;
        return model;
    }
    model.explained = 100.0 / total * model.eigenvalues;
    double cum = 0.0;
    model.selected_q = p;
    for (int j = 0; j < p; ++j) {
        cum += model.explained(j);
        if (cum >= cutoff_percent) {
            model.selected_q = j + 1;
            break;
        }
    }
    return model;
}

KLModel kl_truncate(const KLModel& model, int q) {
    if (q < 1 || q > model.components())
        throw argument_error("kl_truncate: q must lie in [1, available components]");
    KLModel out = model;
    out.eigenfunction_coefs = model.eigenfunction_coefs.leftCols(q);
    out.eigenvalues = model.eigenvalues.head(q);
    out.scores = model.scores.leftCols(q);
    out.explained = model.explained.head(q);
    out.selected_q = std::min(model.selected_q, q);
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw io_error("could not parse number '" + s + "' in " + where);
    }
}

} // namespace

CurveSet load_curveset_csv(const std::string& path, const std::string& sidecar_path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open curve file '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw io_error("curve file '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    const bool has_xmax_col = header.size() == 4 && header[3] == "x_max";
    if (!(header.size() >= 3 && header[0] == "curve_id" && header[1] == "x" && header[2] == "y" &&
          (header.size() == 3 || has_xmax_col)))
        throw io_error("curve file '" + path + "' must start with header curve_id,x,y[,x_max]");

    CurveSet cs;
    std::map<std::string, std::size_t> index;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw io_error("line " + std::to_string(lineno) + " of '" + path +
                           "' has the wrong number of fields");
        const std::string& id = fields[0];
        auto it = index.find(id);
        if (it == index.end()) {
            index.emplace(id, cs.curves.size());
            cs.curves.push_back(Curve{id, {}, {}, 0.0});
            it = index.find(id);
        }
        Curve& c = cs.curves[it->second];
        const std::string where = "line " + std::to_string(lineno) + " of '" + path + "'";
        c.x.push_back(parse_double(fields[1], where));
        c.y.push_back(parse_double(fields[2], where));
        if (has_xmax_col) c.x_max = parse_double(fields[3], where);
    }

    if (!sidecar_path.empty()) {
        std::ifstream sj(sidecar_path);
        if (!sj)
            throw io_error("cannot open sidecar file '" + sidecar_path + "'");
        nlohmann::json j;
        try {
            sj >> j;
        } catch (const nlohmann::json::exception& e) {
            throw io_error("sidecar '" + sidecar_path + "' is not valid JSON: " + e.what());
        }
        for (Curve& c : cs.curves)
            if (j.contains(c.id)) c.x_max = j[c.id].get<double>();
    }
    for (Curve& c : cs.curves)
        if (c.x_max == 0.0 && !c.x.empty()) c.x_max = c.x.back();

    cs.validate();
    return cs;
}

void save_curveset_csv(const CurveSet& cs, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write curve file '" + path + "'");
    out << "curve_id,x,y,x_max\n";
    char buf[96];
    for (const Curve& c : cs.curves) {
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", c.x[i], c.y[i], c.x_max);
            out << c.id << buf;
        }
    }
}

} // namespace lph
