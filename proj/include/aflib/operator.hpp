#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "aflib/common.hpp"

namespace aflib {

// Multi-index alpha = (alpha_1,...,alpha_d) with |alpha| = sum alpha_i.
struct MultiIndex {
  std::vector<int> entries;

  int order() const {
    int s = 0;
    for (int e : entries) s += e;
    return s;
  }
  bool operator<(const MultiIndex& o) const { return entries < o.entries; }
  bool operator==(const MultiIndex& o) const { return entries == o.entries; }
};

// xi^alpha = xi_1^a1 * ... * xi_d^ad (0^0 = 1)
double monomial(const Eigen::VectorXd& xi, const MultiIndex& alpha);

// A k-th order constant-coefficient operator A = sum_{|alpha| <= k} A_alpha d^alpha
// acting on R^N-valued fields with values in R^n. Terms are kept in canonical
// form: sorted multi-indices, zero matrices dropped.
class OperatorSpec {
public:
  OperatorSpec(int d, int N, int n, int k, std::map<MultiIndex, Eigen::MatrixXd> terms);

  int d() const { return d_; }
  int N() const { return N_; }
  int n() const { return n_; }
  int k() const { return k_; }
  const std::map<MultiIndex, Eigen::MatrixXd>& terms() const { return terms_; }

  // true iff only |alpha| = k terms are present
  bool homogeneous() const;

  // sum_{|alpha| = h} xi^alpha A_alpha
  Eigen::MatrixXd order_part_at(int h, const Eigen::VectorXd& xi) const;

  std::string print() const;                  // canonical JSON text
  static OperatorSpec parse(const std::string& text);

private:
  int d_, N_, n_, k_;
  std::map<MultiIndex, Eigen::MatrixXd> terms_;
};

// Principal symbol with the scalar (2 pi i)^k factored out: the real matrix
// M(xi) = sum_{|alpha|=k} xi^alpha A_alpha together with the suppressed phase
// power k. ker M(xi) = ker A^k(xi), so every kernel/rank computation can work
// on the real part alone.
struct SymbolMatrix {
  Eigen::VectorXd xi;
  Eigen::MatrixXd real_part;
  int phase_power;
};

SymbolMatrix principal_symbol(const OperatorSpec& op, const Eigen::VectorXd& xi);

// Full complex symbol sum_alpha (2 pi i)^{|alpha|} xi^alpha A_alpha, used where
// the operator is actually applied (spectral residuals).
Eigen::MatrixXcd full_symbol(const OperatorSpec& op, const Eigen::VectorXd& xi);

// T^r_* A = sum_h r^{k-h} A^h: each term of order h scaled by r^{k-h}.
OperatorSpec rescale_operator(const OperatorSpec& op, double r);

// Built-in operators.
//   div          row-wise divergence of m x d fields          (n = m, N = m d)
//   curl         row-wise curl of m x d fields    (n = m d(d-1)/2, N = m d)
//   curlcurl     Saint-Venant compatibility operator on symmetric fields,
//                reduced encoding (d = 2: components (u11, u12, u22), n = 1)
//   laplace_coeff  A0 * Laplacian for a given coefficient matrix A0
OperatorSpec builtin_operator(const std::string& name, int d, int m = 1);
OperatorSpec laplace_coeff_operator(int d, const Eigen::MatrixXd& A0);

}  // namespace aflib
