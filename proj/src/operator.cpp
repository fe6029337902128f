#include "aflib/operator.hpp"

#include <cmath>
#include <sstream>

#include "aflib/json_io.hpp"

namespace aflib {

double monomial(const Eigen::VectorXd& xi, const MultiIndex& alpha) {
  double p = 1.0;
  for (size_t i = 0; i < alpha.entries.size(); ++i)
    for (int rep = 0; rep < alpha.entries[i]; ++rep) p *= xi(static_cast<Eigen::Index>(i));
  return p;
}

OperatorSpec::OperatorSpec(int d, int N, int n, int k,
                           std::map<MultiIndex, Eigen::MatrixXd> terms)
    : d_(d), N_(N), n_(n), k_(k) {
  if (d < 1 || N < 1 || n < 1 || k < 0) fail("ParseError", "d, N, n must be >= 1 and k >= 0");
  bool top_order_nonzero = false;
  for (auto& [alpha, mat] : terms) {
    if (static_cast<int>(alpha.entries.size()) != d)
      fail("ParseError", "multi-index length does not match spatial dimension");
    for (int e : alpha.entries)
      if (e < 0) fail("ParseError", "negative multi-index entry");
    if (alpha.order() > k) fail("OrderError", "term order exceeds declared k");
    if (mat.rows() != n || mat.cols() != N)
      fail("ShapeError", "coefficient matrix is not n x N");
    if (mat.norm() == 0.0) continue;  // canonical form: drop zero matrices
    if (alpha.order() == k) top_order_nonzero = true;
    terms_.emplace(alpha, (mat.array() + 0.0).matrix());  // normalize -0 to +0
  }
  if (!top_order_nonzero)
    fail("OrderError", "no nonzero coefficient at the declared top order k");
}

bool OperatorSpec::homogeneous() const {
  for (const auto& [alpha, mat] : terms_)
    if (alpha.order() != k_) return false;
  return true;
}

Eigen::MatrixXd OperatorSpec::order_part_at(int h, const Eigen::VectorXd& xi) const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_, N_);
  for (const auto& [alpha, mat] : terms_)
    if (alpha.order() == h) M += monomial(xi, alpha) * mat;
  return M;
}

std::string OperatorSpec::print() const {
  json j;
  j["d"] = d_;
  j["N"] = N_;
  j["n"] = n_;
  j["k"] = k_;
  json terms = json::array();
  for (const auto& [alpha, mat] : terms_) {  // std::map iterates sorted
    json t;
    t["alpha"] = alpha.entries;
    t["matrix"] = matrix_to_json(mat);
    terms.push_back(t);
  }
  j["terms"] = terms;
  return dump_canonical(j);
}

OperatorSpec OperatorSpec::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("ParseError", e.what());
  }
  for (const char* key : {"d", "N", "n", "k", "terms"})
    if (!j.contains(key)) fail("ParseError", std::string("missing field: ") + key);
  if (!j["d"].is_number_integer() || !j["N"].is_number_integer() ||
      !j["n"].is_number_integer() || !j["k"].is_number_integer())
    fail("ParseError", "d, N, n, k must be integers");
  int d = j["d"].get<int>(), N = j["N"].get<int>(), n = j["n"].get<int>(), k = j["k"].get<int>();
  if (!j["terms"].is_array()) fail("ParseError", "terms must be an array");
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  for (const auto& t : j["terms"]) {
    if (!t.contains("alpha") || !t.contains("matrix"))
      fail("ParseError", "each term needs alpha and matrix");
    MultiIndex alpha;
    for (const auto& e : t["alpha"]) {
      if (!e.is_number_integer()) fail("ParseError", "alpha entries must be integers");
      alpha.entries.push_back(e.get<int>());
    }
    Eigen::MatrixXd mat = json_to_matrix(t["matrix"]);
    if (!terms.emplace(alpha, mat).second) fail("ParseError", "duplicate multi-index");
  }
  return OperatorSpec(d, N, n, k, std::move(terms));
}

SymbolMatrix principal_symbol(const OperatorSpec& op, const Eigen::VectorXd& xi) {
  if (xi.size() != op.d()) fail("ShapeError", "frequency vector has wrong dimension");
  if (!xi.allFinite()) fail("ParseError", "frequency vector must be finite");
  return SymbolMatrix{xi, op.order_part_at(op.k(), xi), op.k()};
}

Eigen::MatrixXcd full_symbol(const OperatorSpec& op, const Eigen::VectorXd& xi) {
  const std::complex<double> two_pi_i(0.0, 2.0 * M_PI);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(op.n(), op.N());
  for (int h = 0; h <= op.k(); ++h) {
    Eigen::MatrixXd Mh = op.order_part_at(h, xi);
    if (Mh.norm() == 0.0) continue;
    A += std::pow(two_pi_i, h) * Mh;
  }
  return A;
}

OperatorSpec rescale_operator(const OperatorSpec& op, double r) {
  if (!(r > 0.0)) fail("NonPositiveScale", "blow-up scale must be positive");
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  for (const auto& [alpha, mat] : op.terms())
    terms.emplace(alpha, std::pow(r, op.k() - alpha.order()) * mat);
  return OperatorSpec(op.d(), op.N(), op.n(), op.k(), std::move(terms));
}

namespace {

MultiIndex unit_index(int d, int axis, int count = 1) {
  MultiIndex a;
  a.entries.assign(d, 0);
  a.entries[axis] = count;
  return a;
}

// Row-wise divergence: for fields u : R^d -> R^{m x d} (row-major components
// u_{i,l}), equation i is sum_l d_l u_{i,l}.
OperatorSpec make_div(int d, int m) {
  int N = m * d, n = m;
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  for (int l = 0; l < d; ++l) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, N);
    for (int i = 0; i < m; ++i) A(i, i * d + l) = 1.0;
    terms.emplace(unit_index(d, l), A);
  }
  return OperatorSpec(d, N, n, 1, std::move(terms));
}

// Row-wise curl: equations (i, l<r): d_l u_{i,r} - d_r u_{i,l}.
OperatorSpec make_curl(int d, int m) {
  int N = m * d, n = m * d * (d - 1) / 2;
  if (n < 1) fail("UnknownName", "curl requires d >= 2");
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  for (int axis = 0; axis < d; ++axis) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, N);
    int row = 0;
    for (int i = 0; i < m; ++i)
      for (int l = 0; l < d; ++l)
        for (int r = l + 1; r < d; ++r) {
          if (axis == l) A(row, i * d + r) += 1.0;
          if (axis == r) A(row, i * d + l) -= 1.0;
          ++row;
        }
    terms.emplace(unit_index(d, axis), A);
  }
  return OperatorSpec(d, N, n, 1, std::move(terms));
}

// Saint-Venant compatibility operator on symmetric matrix fields in the
// reduced encoding u_{jk}, j <= k. Equation (j,k):
//   sum_i [ d_i d_k u_{ij} + d_i d_j u_{ik} - d_j d_k u_{ii} - d_i d_i u_{jk} ].
// Rows that vanish identically or duplicate an earlier row (up to scale) are
// dropped; for d = 2 this leaves the single equation
//   d22 u11 - 2 d12 u12 + d11 u22 = 0.
OperatorSpec make_curlcurl(int d) {
  if (d < 2) fail("UnknownName", "curlcurl requires d >= 2");
  int N = d * (d + 1) / 2;
  auto sym = [&](int a, int b) {  // component index of u_{ab} in the reduced encoding
    if (a > b) std::swap(a, b);
    // pairs ordered (0,0),(0,1),...,(0,d-1),(1,1),...
    return a * d - a * (a - 1) / 2 + (b - a);
  };
  int n_full = d * (d + 1) / 2;
  // second-order multi-indices d_a d_b
  auto didx = [&](int a, int b) {
    MultiIndex mi;
    mi.entries.assign(d, 0);
    mi.entries[a] += 1;
    mi.entries[b] += 1;
    return mi;
  };
  std::map<MultiIndex, Eigen::MatrixXd> full;
  int row = 0;
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) {
      for (int i = 0; i < d; ++i) {
        auto add = [&](const MultiIndex& mi, int col, double w) {
          auto it = full.find(mi);
          if (it == full.end())
            it = full.emplace(mi, Eigen::MatrixXd::Zero(n_full, N)).first;
          it->second(row, col) += w;
        };
        add(didx(i, k), sym(i, j), 1.0);
        add(didx(i, j), sym(i, k), 1.0);
        add(didx(j, k), sym(i, i), -1.0);
        add(didx(i, i), sym(j, k), -1.0);
      }
      ++row;
    }
  // collect per-row coefficient blocks to test for zero / duplicate rows
  std::vector<int> keep;
  std::vector<Eigen::VectorXd> flat(n_full, Eigen::VectorXd());
  for (int r = 0; r < n_full; ++r) {
    std::vector<double> coeffs;
    for (const auto& [mi, mat] : full)
      for (int c = 0; c < N; ++c) coeffs.push_back(mat(r, c));
    flat[r] = Eigen::Map<Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  }
  std::vector<double> sign;
  for (int r = 0; r < n_full; ++r) {
    if (flat[r].norm() == 0.0) continue;
    bool dup = false;
    for (size_t s = 0; s < keep.size(); ++s) {
      double denom = flat[keep[s]].squaredNorm();
      double proj = flat[r].dot(flat[keep[s]]) / denom;
      if ((flat[r] - proj * flat[keep[s]]).norm() <= 1e-12 * flat[r].norm()) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    // normalize so the first nonzero coefficient is positive
    double s = 1.0;
    for (Eigen::Index i = 0; i < flat[r].size(); ++i)
      if (flat[r](i) != 0.0) {
        s = flat[r](i) > 0.0 ? 1.0 : -1.0;
        break;
      }
    keep.push_back(r);
    sign.push_back(s);
  }
  int n = static_cast<int>(keep.size());
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  for (const auto& [mi, mat] : full) {
    Eigen::MatrixXd sel(n, N);
    for (int r = 0; r < n; ++r) sel.row(r) = sign[r] * mat.row(keep[r]);
    terms.emplace(mi, sel);
  }
  return OperatorSpec(d, N, n, 2, std::move(terms));
}

}  // namespace

OperatorSpec builtin_operator(const std::string& name, int d, int m) {
  if (d < 1) fail("UnknownName", "dimension must be >= 1");
  if (m < 1) fail("UnknownName", "row count must be >= 1");
  if (name == "div") return make_div(d, m);
  if (name == "curl") return make_curl(d, m);
  if (name == "curlcurl") return make_curlcurl(d);
  fail("UnknownName", "unknown builtin operator: " + name +
                          " (expected div, curl, curlcurl, or laplace_coeff via its own entry point)");
}

OperatorSpec laplace_coeff_operator(int d, const Eigen::MatrixXd& A0) {
  if (A0.size() == 0) fail("ShapeError", "laplace_coeff needs a nonzero coefficient matrix");
  std::map<MultiIndex, Eigen::MatrixXd> terms;
  for (int axis = 0; axis < d; ++axis) {
    MultiIndex mi;
    mi.entries.assign(d, 0);
    mi.entries[axis] = 2;
    terms.emplace(mi, A0);
  }
  return OperatorSpec(d, static_cast<int>(A0.cols()), static_cast<int>(A0.rows()), 2,
                      std::move(terms));
}

}  // namespace aflib
