#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aflib/common.hpp"
#include "aflib/json_io.hpp"

namespace aflib {

// A linear-growth integrand f(x, A) with |f(x,A)| <= growth_M (1 + |A|).
// Recession and subgradient are optional analytic extras; when absent the
// numeric fallbacks below are used.
struct Integrand {
  std::string name;
  json params;

  std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& A)> eval;
  double growth_M = 1.0;
  std::optional<double> lip_A;
  // omega(t) with |f(x,A) - f(y,A)| <= omega(|x-y|) (1+|A|)
  std::optional<std::function<double(double)>> modulus;
  std::optional<std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>>
      analytic_recession;
  std::optional<std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>>
      subgradient_A;
  bool convex = false;

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& A) const {
    return eval(x, A);
  }
};

struct RecessionEstimate {
  double upper = 0.0;  // estimate of f^#(x, A)
  double lower = 0.0;  // estimate of f_#(x, A)
  bool exists = false; // |upper - lower| <= tol (1 + |upper|)
  std::vector<double> t_grid;
  std::string warning;
};

// f(x, tA)/t sampled on a geometric t-grid; sup/inf taken over the top half of
// the grid. Computed on A/|A| and rescaled, so the result is exactly
// 1-homogeneous in A.
RecessionEstimate estimate_recession(const Integrand& f, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& A, double t_max = 1e6,
                                     int levels = 40, double exists_tol = 1e-3);

// Recession value in the requested mode; falls back to estimate_recession.
enum class RecessionMode { Analytic, Upper, Lower };
double recession_value(const Integrand& f, const Eigen::VectorXd& x, const Eigen::VectorXd& A,
                       RecessionMode mode);

// (1 - |Ahat|) f(x, Ahat / (1 - |Ahat|)) for |Ahat| < 1.
double s_transform(const Integrand& f, const Eigen::VectorXd& x, const Eigen::VectorXd& Ahat);

struct ConvexityViolation {
  Eigen::VectorXd base;
  Eigen::VectorXd dir;
  double s = 0.0;
  double gap = 0.0;  // f(A) - (f(A-sP)+f(A+sP))/2, positive means violated
};

struct ConvexityReport {
  std::vector<ConvexityViolation> violations;
  double worst_gap = 0.0;
  std::int64_t checks = 0;
};

// Midpoint convexity test of f along the given cone directions.
ConvexityReport lambda_convexity_check(const Integrand& f,
                                       const std::vector<Eigen::VectorXd>& cone_dirs,
                                       const std::vector<Eigen::VectorXd>& base_points,
                                       double span, int steps, double tol = 1e-9,
                                       const Eigen::VectorXd* x = nullptr);

// Built-in registry. Names: abs, area, twowell (params.P0), aniso (params.a,
// params.b, params.e). Optional params.x_weight = {x0, coeff} multiplies the
// base by (1 + coeff |x - x0|).
Integrand make_integrand(const std::string& name, const json& params, int N);
std::vector<std::string> integrand_names();

}  // namespace aflib
