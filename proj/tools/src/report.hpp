#pragma once

#include <complex>
#include <span>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "netsync/graph.hpp"

namespace netsync::cli {

using Json = nlohmann::ordered_json;

// Rounded to 12 significant digits; non-finite values become null.
Json num(double x);
Json num(std::complex<double> z);
Json nums(const Eigen::VectorXd& v);
Json nums(const Eigen::VectorXcd& v);
// 0-based ids shifted to the 1-based ids of the edge-list file.
Json node_ids(std::span<const NodeId> nodes);

std::string dump(const Json& j);

// Writes text to path, or to out when path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out);

// CSV field with 12 significant digits.
std::string csv_num(double x);

}  // namespace netsync::cli
