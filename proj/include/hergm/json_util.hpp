#ifndef HERGM_JSON_UTIL_HPP
#define HERGM_JSON_UTIL_HPP

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <json.hpp>

namespace hergm {

/// Non-finite entries become null.
inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    auto j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i]))
            j.push_back(v[i]);
        else
            j.push_back(nullptr);
    }
    return j;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] =
            j[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[i].get<double>();
    return v;
}

}  // namespace hergm

#endif
