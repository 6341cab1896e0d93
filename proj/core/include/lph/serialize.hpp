#ifndef LPH_SERIALIZE_HPP
#define LPH_SERIALIZE_HPP

#include <nlohmann/json.hpp>

#include "lph/errors.hpp"
#include "lph/linalg.hpp"

namespace lph {

inline nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

inline Vector json_to_vector(const nlohmann::json& j) {
    if (!j.is_array()) throw io_error("expected a JSON array of numbers");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

inline Matrix json_to_matrix(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw io_error("expected a JSON array of arrays");
    const std::size_t rows = j.size(), cols = j[0].size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols) throw io_error("ragged JSON matrix");
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
    return m;
}

} // namespace lph

#endif
