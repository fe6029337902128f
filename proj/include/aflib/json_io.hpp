#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>

namespace aflib {

using json = nlohmann::json;

// Canonical serialization: object keys sorted (nlohmann default map order),
// floating-point values printed with %.17g so identical inputs produce
// byte-identical reports.
std::string dump_canonical(const json& j, int indent = 2);
void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

json vector_to_json(const Eigen::VectorXd& v);
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd json_to_vector(const json& j);
Eigen::MatrixXd json_to_matrix(const json& j);

}  // namespace aflib
