#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "netsync/error.hpp"

namespace netsync::cli {

Json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  const double rounded = std::strtod(buf, nullptr);
  return rounded == 0.0 ? 0.0 : rounded;
}

Json num(std::complex<double> z) { return Json{{"re", num(z.real())}, {"im", num(z.imag())}}; }

Json nums(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json nums(const Eigen::VectorXcd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json node_ids(std::span<const NodeId> nodes) {
  Json a = Json::array();
  for (NodeId v : nodes) a.push_back(v + 1);
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) {
    throw Error(ErrorKind::kInvalidArgument, "cannot write '" + path + "'");
  }
}

std::string csv_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace netsync::cli
