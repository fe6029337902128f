#pragma once

#include "aflib/integrand.hpp"
#include "aflib/projection.hpp"
#include "aflib/wave_cone.hpp"

namespace aflib {

struct EnvelopeConfig {
  std::vector<int> grid;          // default 64^d, set on use
  int restarts = 8;
  int max_iters = 500;
  double step0 = 0.5;             // initial step for backtracking
  int backtracks = 20;            // halvings per line search
  double stop_rel_decrease = 1e-6;
  int stop_window = 50;
  bool warm_starts = true;        // include laminate-based initial fields
  std::uint64_t seed = 1;
};

struct RestartSummary {
  int restart = 0;
  std::string init;          // "zero" | "laminate" | "gaussian"
  double value = 0.0;
  int iters = 0;
};

struct EnvelopeResult {
  double value = 0.0;              // upper bound on the discrete cell-problem infimum
  PeriodicField argmin_field;      // zero-mean, discretely A-free corrector w
  std::vector<double> trace;       // objective per iteration of the best restart
  std::vector<RestartSummary> restarts_summary;
};

// min over theta and s of  theta f(A0 + (1-theta) s P0) + (1-theta) f(A0 - theta s P0);
// the optimal two-point laminate along P0, a certified upper bound for the
// envelope at A0. P0 must pass wave cone membership.
double laminate_oracle(const Integrand& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& A0,
                       const Eigen::VectorXd& P0, const OperatorSpec* op = nullptr);

// Estimates Q_A f(x0, A0) by minimizing the cell average of f over zero-mean
// periodic A-free correctors w = P z (projected subgradient descent with
// monotone backtracking, random + laminate restarts).
EnvelopeResult quasiconvex_envelope(const OperatorSpec& op, const Integrand& f,
                                    const Eigen::VectorXd& x0, const Eigen::VectorXd& A0,
                                    const EnvelopeConfig& cfg);

// Recession of t -> envelope(t dir)/t over a geometric t-grid.
RecessionEstimate envelope_recession(const OperatorSpec& op, const Integrand& f,
                                     const Eigen::VectorXd& x0, const Eigen::VectorXd& dir,
                                     const std::vector<double>& t_grid,
                                     const EnvelopeConfig& cfg, double noise_tol = 5e-2);

}  // namespace aflib
