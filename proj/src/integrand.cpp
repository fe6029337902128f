#include "aflib/integrand.hpp"

#include <cmath>

namespace aflib {

RecessionEstimate estimate_recession(const Integrand& f, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& A, double t_max, int levels,
                                     double exists_tol) {
  if (t_max < 1e3) fail("ParseError", "t_max must be >= 1e3");
  if (levels < 20) fail("ParseError", "need at least 20 scale levels");
  RecessionEstimate est;
  if (!f.lip_A.has_value())
    est.warning = "MissingLipschitz: t-only recession limits assume Lipschitz continuity in A";
  double scale = A.norm();
  if (scale == 0.0) {
    est.exists = true;
    return est;
  }
  Eigen::VectorXd Ahat = A / scale;
  double ratio = std::pow(t_max, 1.0 / (levels - 1));
  est.t_grid.resize(levels);
  std::vector<double> slopes(levels);
  double t = 1.0;
  for (int i = 0; i < levels; ++i) {
    est.t_grid[i] = t;
    slopes[i] = f(x, t * Ahat) / t;
    t *= ratio;
  }
  int half = levels / 2;
  double hi = slopes[half], lo = slopes[half];
  for (int i = half; i < levels; ++i) {
    hi = std::max(hi, slopes[i]);
    lo = std::min(lo, slopes[i]);
  }
  est.upper = hi * scale;
  est.lower = lo * scale;
  est.exists = std::abs(est.upper - est.lower) <= exists_tol * (1.0 + std::abs(est.upper));
  return est;
}

double recession_value(const Integrand& f, const Eigen::VectorXd& x, const Eigen::VectorXd& A,
                       RecessionMode mode) {
  if (mode == RecessionMode::Analytic) {
    if (!f.analytic_recession.has_value())
      fail("MissingRecession", "integrand " + f.name + " has no analytic recession");
    return (*f.analytic_recession)(x, A);
  }
  RecessionEstimate est = estimate_recession(f, x, A);
  return mode == RecessionMode::Upper ? est.upper : est.lower;
}

double s_transform(const Integrand& f, const Eigen::VectorXd& x, const Eigen::VectorXd& Ahat) {
  double r = Ahat.norm();
  if (r >= 1.0) fail("OutOfBall", "S-transform argument must satisfy |Ahat| < 1");
  double w = 1.0 - r;
  return w * f(x, Eigen::VectorXd(Ahat / w));
}

ConvexityReport lambda_convexity_check(const Integrand& f,
                                       const std::vector<Eigen::VectorXd>& cone_dirs,
                                       const std::vector<Eigen::VectorXd>& base_points,
                                       double span, int steps, double tol,
                                       const Eigen::VectorXd* x) {
  ConvexityReport rep;
  Eigen::VectorXd x0 = x ? *x : Eigen::VectorXd();
  if (!x && !base_points.empty()) x0 = Eigen::VectorXd::Zero(base_points[0].size());
  for (const auto& A : base_points)
    for (const auto& P : cone_dirs) {
      for (int i = 1; i <= steps; ++i) {
        double s = span * i / steps;
        double mid = f(x0, A);
        double avg = 0.5 * (f(x0, A - s * P) + f(x0, A + s * P));
        double gap = mid - avg;
        ++rep.checks;
        if (gap > tol) {
          rep.violations.push_back({A, P, s, gap});
          rep.worst_gap = std::max(rep.worst_gap, gap);
        }
      }
    }
  return rep;
}

namespace {

using VecFn = std::function<double(const Eigen::VectorXd&)>;

// wraps an x-independent base (value, recession, subgradient) with the optional
// multiplicative x-weight (1 + c |x - x0|)
Integrand assemble(const std::string& name, const json& params, int /*N*/, VecFn base,
                   double growth, double lip, bool convex, VecFn base_rec,
                   std::function<Eigen::VectorXd(const Eigen::VectorXd&)> base_sub) {
  Integrand f;
  f.name = name;
  f.params = params;
  f.growth_M = growth;
  f.lip_A = lip;
  f.convex = convex;
  double coeff = 0.0;
  Eigen::VectorXd x0;
  if (params.contains("x_weight")) {
    coeff = params["x_weight"].value("coeff", 0.0);
    x0 = json_to_vector(params["x_weight"]["x0"]);
  }
  auto weight = [coeff, x0](const Eigen::VectorXd& x) {
    if (coeff == 0.0 || x.size() == 0 || x0.size() == 0) return 1.0;
    return 1.0 + coeff * (x - x0).norm();
  };
  f.eval = [base, weight](const Eigen::VectorXd& x, const Eigen::VectorXd& A) {
    return weight(x) * base(A);
  };
  f.analytic_recession = [base_rec, weight](const Eigen::VectorXd& x, const Eigen::VectorXd& A) {
    return weight(x) * base_rec(A);
  };
  f.subgradient_A = [base_sub, weight](const Eigen::VectorXd& x, const Eigen::VectorXd& A) {
    return Eigen::VectorXd(weight(x) * base_sub(A));
  };
  if (coeff > 0.0) {
    double g = growth;
    f.modulus = [coeff, g](double t) { return coeff * t * g; };
  } else {
    f.modulus = [](double) { return 0.0; };
  }
  return f;
}

}  // namespace

Integrand make_integrand(const std::string& name, const json& params, int N) {
  if (name == "abs") {
    return assemble(
        name, params, N, [](const Eigen::VectorXd& A) { return A.norm(); }, 1.0, 1.0, true,
        [](const Eigen::VectorXd& A) { return A.norm(); },
        [](const Eigen::VectorXd& A) {
          double n = A.norm();
          return n == 0.0 ? Eigen::VectorXd(Eigen::VectorXd::Zero(A.size()))
                          : Eigen::VectorXd(A / n);
        });
  }
  if (name == "area") {
    return assemble(
        name, params, N,
        [](const Eigen::VectorXd& A) { return std::sqrt(1.0 + A.squaredNorm()); }, 1.0, 1.0,
        true, [](const Eigen::VectorXd& A) { return A.norm(); },
        [](const Eigen::VectorXd& A) {
          return Eigen::VectorXd(A / std::sqrt(1.0 + A.squaredNorm()));
        });
  }
  if (name == "twowell") {
    Eigen::VectorXd P0 = params.contains("P0") ? json_to_vector(params["P0"])
                                               : Eigen::VectorXd(Eigen::VectorXd::Unit(N, 0));
    if (P0.size() != N) fail("ShapeError", "twowell P0 has wrong dimension");
    auto base = [P0](const Eigen::VectorXd& A) {
      return std::min((A - P0).norm(), (A + P0).norm());
    };
    auto sub = [P0](const Eigen::VectorXd& A) {
      double dp = (A - P0).norm(), dm = (A + P0).norm();
      Eigen::VectorXd well = (dp <= dm) ? Eigen::VectorXd(P0) : Eigen::VectorXd(-P0);
      Eigen::VectorXd r = A - well;
      double n = r.norm();
      return n == 0.0 ? Eigen::VectorXd(Eigen::VectorXd::Zero(A.size())) : Eigen::VectorXd(r / n);
    };
    return assemble(
        name, params, N, base, std::max(1.0, P0.norm()), 1.0, false,
        [](const Eigen::VectorXd& A) { return A.norm(); }, sub);
  }
  if (name == "aniso") {
    double a = params.value("a", 1.0), b = params.value("b", 1.0);
    if (a < 0.0 || b < 0.0) fail("ParseError", "aniso weights must be nonnegative");
    Eigen::VectorXd e = params.contains("e") ? json_to_vector(params["e"])
                                             : Eigen::VectorXd(Eigen::VectorXd::Unit(N, 0));
    if (e.size() != N) fail("ShapeError", "aniso direction has wrong dimension");
    e.normalize();
    auto base = [a, b, e](const Eigen::VectorXd& A) { return a * A.norm() + b * std::abs(A.dot(e)); };
    auto sub = [a, b, e](const Eigen::VectorXd& A) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(A.size());
      double n = A.norm();
      if (n > 0.0) g += a * A / n;
      double p = A.dot(e);
      if (p != 0.0) g += b * (p > 0 ? 1.0 : -1.0) * e;
      return g;
    };
    return assemble(name, params, N, base, a + b, a + b, true, base, sub);
  }
  fail("UnknownName", "unknown integrand: " + name);
}

std::vector<std::string> integrand_names() { return {"abs", "area", "twowell", "aniso"}; }

}  // namespace aflib
