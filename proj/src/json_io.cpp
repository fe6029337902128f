#include "aflib/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "aflib/common.hpp"

namespace aflib {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_rec(const json& j, std::ostream& os, int indent, int depth) {
  std::string pad(static_cast<size_t>(indent) * depth, ' ');
  std::string pad_in(static_cast<size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in << json(it.key()).dump() << ": ";
        dump_rec(it.value(), os, indent, depth + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in;
        dump_rec(el, os, indent, depth + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace

std::string dump_canonical(const json& j, int indent) {
  std::ostringstream os;
  dump_rec(j, os, indent, 0);
  os << "\n";
  return os.str();
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("IoError", "cannot open for writing: " + path);
  f << dump_canonical(j);
}

json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("IoError", "cannot open for reading: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    fail("ParseError", std::string(e.what()) + " in " + path);
  }
  return j;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd json_to_vector(const json& j) {
  if (!j.is_array()) fail("ParseError", "expected array for vector");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail("ParseError", "vector entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd json_to_matrix(const json& j) {
  if (!j.is_array() || j.empty()) fail("ParseError", "expected non-empty array of rows");
  size_t cols = 0;
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array()) fail("ParseError", "matrix rows must be arrays");
    if (r == 0)
      cols = j[r].size();
    else if (j[r].size() != cols)
      fail("ShapeError", "ragged matrix rows");
  }
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r)
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail("ParseError", "matrix entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  return m;
}

}  // namespace aflib
