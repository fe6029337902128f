#include "aflib/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace aflib {

namespace {

struct LaminateOptimum {
  double value = 0.0;
  double theta = 0.5;
  double s = 0.0;
};

double laminate_value(const Integrand& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& A0,
                      const Eigen::VectorXd& P0, double theta, double s) {
  return theta * f(x0, A0 + (1.0 - theta) * s * P0) + (1.0 - theta) * f(x0, A0 - theta * s * P0);
}

// theta-grid x geometric s-grid scan followed by golden-section polish in each
// variable. The s-grid hits powers of 2^(1/4), so the classic two-well optima
// (s = 2) are on the grid exactly.
LaminateOptimum laminate_search(const Integrand& f, const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& A0, const Eigen::VectorXd& P0) {
  LaminateOptimum best;
  best.value = f(x0, A0);  // theta in {0,1} or s -> 0
  best.theta = 0.5;
  best.s = 0.0;
  const int theta_steps = 1000;
  for (int j = -48; j <= 48; ++j) {
    double s = std::pow(2.0, 0.25 * j);
    for (int i = 0; i <= theta_steps; ++i) {
      double theta = static_cast<double>(i) / theta_steps;
      double v = laminate_value(f, x0, A0, P0, theta, s);
      if (v < best.value) best = {v, theta, s};
    }
  }
  if (best.s == 0.0) return best;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int round = 0; round < 3; ++round) {
    {  // polish s on a bracket around the current best
      double lo = best.s / std::pow(2.0, 0.25), hi = best.s * std::pow(2.0, 0.25);
      double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
      double fc = laminate_value(f, x0, A0, P0, best.theta, c);
      double fd = laminate_value(f, x0, A0, P0, best.theta, d);
      for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
          hi = d; d = c; fd = fc;
          c = hi - gr * (hi - lo);
          fc = laminate_value(f, x0, A0, P0, best.theta, c);
        } else {
          lo = c; c = d; fc = fd;
          d = lo + gr * (hi - lo);
          fd = laminate_value(f, x0, A0, P0, best.theta, d);
        }
      }
      double s = (fc < fd) ? c : d;
      double v = laminate_value(f, x0, A0, P0, best.theta, s);
      if (v < best.value) {
        best.value = v;
        best.s = s;
      }
    }
    {  // polish theta
      double lo = std::max(0.0, best.theta - 1.0 / theta_steps);
      double hi = std::min(1.0, best.theta + 1.0 / theta_steps);
      double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
      double fc = laminate_value(f, x0, A0, P0, c, best.s);
      double fd = laminate_value(f, x0, A0, P0, d, best.s);
      for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
          hi = d; d = c; fd = fc;
          c = hi - gr * (hi - lo);
          fc = laminate_value(f, x0, A0, P0, c, best.s);
        } else {
          lo = c; c = d; fc = fd;
          d = lo + gr * (hi - lo);
          fd = laminate_value(f, x0, A0, P0, d, best.s);
        }
      }
      double theta = (fc < fd) ? c : d;
      double v = laminate_value(f, x0, A0, P0, theta, best.s);
      if (v < best.value) {
        best.value = v;
        best.theta = theta;
      }
    }
  }
  return best;
}

// smoothed 1-periodic two-level profile: (1-theta) on [0,theta), -theta on
// [theta,1), transitions of half-width eps around the jumps. Written in terms
// of the distance to the up-plateau center so both transitions share one
// formula; the continuum mean is exactly zero.
double laminate_profile(double s, double theta, double eps) {
  auto smooth = [](double t) {  // C^2 step from 0 to 1 on [0,1]
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  };
  double u = s - 0.5 * theta;
  u -= std::floor(u + 0.5);  // wrap to [-1/2, 1/2)
  double T = 1.0 - smooth((std::abs(u) - (0.5 * theta - eps)) / (2.0 * eps));
  return -theta + T;
}

struct Objective {
  const Integrand* f;
  Eigen::VectorXd x0;
  Eigen::VectorXd A0;

  double operator()(const PeriodicField& w) const {
    std::int64_t nn = w.num_nodes();
    double acc = 0.0;
    for (std::int64_t i = 0; i < nn; ++i) acc += (*f)(x0, A0 + w.at(i));
    return acc / static_cast<double>(nn);
  }

  PeriodicField subgradient_field(const PeriodicField& w) const {
    PeriodicField g(w.grid, w.N);
    std::int64_t nn = w.num_nodes();
    for (std::int64_t i = 0; i < nn; ++i)
      g.at(i) = (*(f->subgradient_A))(x0, Eigen::VectorXd(A0 + w.at(i)));
    return g;
  }
};

struct DescentOutcome {
  double value = 0.0;
  PeriodicField w;
  std::vector<double> trace;
  int iters = 0;
};

// Monotone backtracking line search while it makes progress; once it stalls
// twice, plain subgradient steps with a diminishing schedule take over (the
// objective is non-smooth, so a stalled line search does not mean optimality).
// The trace records the running best, which the returned field realizes.
DescentOutcome descend(const ProjectorTable& table, const Objective& obj, PeriodicField w,
                       const EnvelopeConfig& cfg) {
  DescentOutcome out;
  double cur = obj(w);
  PeriodicField best = w;
  double best_val = cur;
  out.trace.push_back(best_val);
  double step_base = cfg.step0 * (1.0 + obj.A0.norm());
  int consecutive_failures = 0;
  bool diminishing = false;
  int forced_steps = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    PeriodicField g = obj.subgradient_field(w);
    PeriodicField dir = project_afree(table, g);
    double dir_rms = dir.values.norm() / std::sqrt(static_cast<double>(dir.values.size()));
    if (dir_rms < 1e-14) break;
    if (!diminishing) {
      double step = step_base / dir_rms;
      bool accepted = false;
      PeriodicField cand = w;
      for (int bt = 0; bt < cfg.backtracks; ++bt) {
        cand.values = w.values - step * dir.values;
        double v = obj(cand);
        if (v < cur) {
          w.values.swap(cand.values);
          cur = v;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (accepted) {
        consecutive_failures = 0;
      } else {
        ++consecutive_failures;
        step_base *= 0.5;
        if (consecutive_failures >= 2) diminishing = true;
      }
    } else {
      double alpha = step_base / (1.0 + forced_steps / 20.0) / dir_rms;
      ++forced_steps;
      w.values -= alpha * dir.values;
      cur = obj(w);
    }
    if (cur < best_val) {
      best_val = cur;
      best = w;
    }
    out.trace.push_back(best_val);
    int wnd = cfg.stop_window;
    if (static_cast<int>(out.trace.size()) > wnd) {
      double before = out.trace[out.trace.size() - 1 - wnd];
      if (before - best_val <= cfg.stop_rel_decrease * std::max(1.0, std::abs(before))) break;
    }
  }
  out.value = best_val;
  out.w = std::move(best);
  out.iters = static_cast<int>(out.trace.size()) - 1;
  return out;
}

// small integer frequency candidates carrying exactly representable laminates
std::vector<Eigen::VectorXi> integer_frequencies(int d) {
  std::vector<Eigen::VectorXi> qs;
  for (int axis = 0; axis < d; ++axis) {
    Eigen::VectorXi q = Eigen::VectorXi::Zero(d);
    q(axis) = 1;
    qs.push_back(q);
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int sb : {1, -1}) {
        Eigen::VectorXi q = Eigen::VectorXi::Zero(d);
        q(a) = 1;
        q(b) = sb;
        qs.push_back(q);
      }
  return qs;
}

struct LaminateStart {
  Eigen::VectorXd P;
  Eigen::VectorXi q;
  LaminateOptimum opt;
  int eps_cells = 4;
};

}  // namespace

double laminate_oracle(const Integrand& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& A0,
                       const Eigen::VectorXd& P0, const OperatorSpec* op) {
  if (op) {
    SphereSampling sampling = SphereSampling::standard(op->d());
    WaveConeReport rep = wavecone_membership(*op, P0, sampling);
    if (!rep.member)
      fail("NotInWaveCone", "laminate direction fails wave cone membership (residual " +
                                std::to_string(rep.residual) + ")");
  }
  return laminate_search(f, x0, A0, P0).value;
}

EnvelopeResult quasiconvex_envelope(const OperatorSpec& op, const Integrand& f,
                                    const Eigen::VectorXd& x0, const Eigen::VectorXd& A0,
                                    const EnvelopeConfig& cfg) {
  if (!f.subgradient_A.has_value())
    fail("MissingSubgradient", "envelope descent needs a subgradient oracle");
  if (cfg.restarts < 1 || cfg.max_iters < 1)
    fail("ParseError", "restarts and max_iters must be >= 1");
  std::vector<int> grid = cfg.grid;
  if (grid.empty()) grid.assign(op.d(), 64);
  auto table = build_projector_table(op, grid);  // rejects non-homogeneous / rank violations

  Objective obj{&f, x0, A0};

  // laminate warm starts: kernel directions of small integer frequencies,
  // ranked by their two-point laminate value
  std::vector<LaminateStart> laminates;
  if (cfg.warm_starts) {
    for (const auto& q : integer_frequencies(op.d())) {
      Eigen::VectorXd xi = q.cast<double>();
      Eigen::MatrixXd M = op.order_part_at(op.k(), xi);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      double smax = sv.size() > 0 ? sv(0) : 0.0;
      int r = 0;
      if (smax > 0)
        for (Eigen::Index i = 0; i < sv.size(); ++i)
          if (sv(i) > 1e-10 * smax) ++r;
      Eigen::MatrixXd K = svd.matrixV().rightCols(op.N() - r);
      for (Eigen::Index c = 0; c < K.cols(); ++c) {
        LaminateStart ls;
        ls.P = K.col(c);
        ls.q = q;
        ls.opt = laminate_search(f, x0, A0, ls.P);
        if (ls.opt.s > 0.0) laminates.push_back(std::move(ls));
      }
    }
    std::sort(laminates.begin(), laminates.end(),
              [](const LaminateStart& a, const LaminateStart& b) {
                return a.opt.value < b.opt.value;
              });
    // the mollification scale changes which discrete local minimum the start
    // falls into, so each direction is tried at several sharpnesses;
    // eps_cells = 0 is the sharp two-level profile with jumps between cells
    std::vector<LaminateStart> widened;
    for (int eps_cells : {0, 4, 2, 1})
      for (const auto& ls : laminates) {
        widened.push_back(ls);
        widened.back().eps_cells = eps_cells;
      }
    std::stable_sort(widened.begin(), widened.end(),
                     [](const LaminateStart& a, const LaminateStart& b) {
                       return a.opt.value < b.opt.value;
                     });
    laminates = std::move(widened);
    // leave room for at least two gaussian restarts
    size_t cap = static_cast<size_t>(std::max(0, cfg.restarts - 3));
    if (laminates.size() > cap) laminates.resize(cap);
  }

  auto make_init = [&](int restart, std::string& kind) {
    PeriodicField w(grid, op.N());
    if (restart == 0) {
      kind = "zero";
      return w;
    }
    int li = restart - 1;
    if (li < static_cast<int>(laminates.size()) && cfg.warm_starts) {
      kind = "laminate";
      const LaminateStart& ls = laminates[li];
      int m_min = *std::min_element(grid.begin(), grid.end());
      double eps = ls.eps_cells * ls.q.cwiseAbs().sum() / static_cast<double>(m_min);
      eps = std::min(eps, 0.45 * std::min(ls.opt.theta, 1.0 - ls.opt.theta));
      eps = std::max(eps, 1e-12);
      std::int64_t nn = w.num_nodes();
      for (std::int64_t i = 0; i < nn; ++i) {
        double s = ls.q.cast<double>().dot(w.node_center(i));
        w.at(i) = ls.P * (ls.opt.s * laminate_profile(s, ls.opt.theta, eps));
      }
      w.subtract_mean();
    } else {
      kind = "gaussian";
      Rng rng(cfg.seed * 1000003ull + static_cast<std::uint64_t>(restart));
      double sigma = 0.5 * (1.0 + A0.norm());
      for (Eigen::Index i = 0; i < w.values.size(); ++i) w.values(i) = sigma * rng.normal();
      w.subtract_mean();
    }
    return project_afree(*table, w);
  };

  std::vector<DescentOutcome> outcomes(cfg.restarts);
  std::vector<std::string> kinds(cfg.restarts);
  parallel_for(cfg.restarts, [&](std::int64_t r) {
    PeriodicField w0 = make_init(static_cast<int>(r), kinds[r]);
    outcomes[r] = descend(*table, obj, std::move(w0), cfg);
  });

  EnvelopeResult res;
  int best = 0;
  for (int r = 1; r < cfg.restarts; ++r)
    if (outcomes[r].value < outcomes[best].value) best = r;
  res.value = outcomes[best].value;
  res.argmin_field = outcomes[best].w;
  res.trace = outcomes[best].trace;
  for (int r = 0; r < cfg.restarts; ++r)
    res.restarts_summary.push_back(
        {r, kinds[r], outcomes[r].value, outcomes[r].iters});
  return res;
}

RecessionEstimate envelope_recession(const OperatorSpec& op, const Integrand& f,
                                     const Eigen::VectorXd& x0, const Eigen::VectorXd& dir,
                                     const std::vector<double>& t_grid,
                                     const EnvelopeConfig& cfg, double noise_tol) {
  if (t_grid.size() < 2) fail("ParseError", "need at least two scales");
  RecessionEstimate est;
  est.t_grid = t_grid;
  std::vector<double> slopes(t_grid.size());
  for (size_t i = 0; i < t_grid.size(); ++i) {
    double t = t_grid[i];
    if (!(t > 0)) fail("ParseError", "scales must be positive");
    EnvelopeResult r = quasiconvex_envelope(op, f, x0, Eigen::VectorXd(t * dir), cfg);
    slopes[i] = r.value / t;
  }
  size_t half = t_grid.size() / 2;
  double hi = slopes[half], lo = slopes[half];
  for (size_t i = half; i < slopes.size(); ++i) {
    hi = std::max(hi, slopes[i]);
    lo = std::min(lo, slopes[i]);
  }
  est.upper = hi;
  est.lower = lo;
  est.exists = std::abs(hi - lo) <= noise_tol * (1.0 + std::abs(hi));
  return est;
}

}  // namespace aflib
