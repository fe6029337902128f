#include "aflib/wave_cone.hpp"

#include <algorithm>
#include <cmath>

namespace aflib {

namespace {

// Canonical antipodal representative: flip sign so the first nonzero
// coordinate is positive.
Eigen::VectorXd canonical(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > 0) return v;
    if (v(i) < 0) return -v;
  }
  return v;
}

}  // namespace

SphereSampling SphereSampling::standard(int d, int count, std::uint64_t seed) {
  if (d < 1) fail("ParseError", "sampling dimension must be >= 1");
  SphereSampling s;
  s.d = d;
  if (d == 1) {
    s.points.push_back(Eigen::VectorXd::Ones(1));
    return s;
  }
  if (count <= 0) count = (d == 2) ? 720 : 2048;
  if (d == 2) {
    // angles in [0, pi): antipodal pairs appear once
    for (int i = 0; i < count; ++i) {
      double a = M_PI * i / count;
      Eigen::VectorXd p(2);
      p << std::cos(a), std::sin(a);
      s.points.push_back(p);
    }
  } else if (d == 3) {
    // Fibonacci sphere, deduplicated to canonical hemisphere representatives
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < count; ++i) {
      double z = 1.0 - (2.0 * i + 1.0) / count;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = 2.0 * M_PI * i / golden;
      Eigen::VectorXd p(3);
      p << r * std::cos(a), r * std::sin(a), z;
      if (p(0) < 0 || (p(0) == 0 && (p(1) < 0 || (p(1) == 0 && p(2) < 0)))) continue;
      s.points.push_back(p);
    }
  } else {
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd p(d);
      for (int c = 0; c < d; ++c) p(c) = rng.normal();
      double nrm = p.norm();
      if (nrm < 1e-12) continue;
      s.points.push_back(canonical(p / nrm));
    }
  }
  for (int axis = 0; axis < d; ++axis) s.points.push_back(Eigen::VectorXd::Unit(d, axis));
  return s;
}

double symbol_residual(const OperatorSpec& op, const Eigen::VectorXd& P,
                       const Eigen::VectorXd& xi) {
  Eigen::MatrixXd M = op.order_part_at(op.k(), xi);
  double mf = M.norm();
  double pn = P.norm();
  if (mf == 0.0 || pn == 0.0) return 0.0;
  return (M * P).norm() / (mf * pn);
}

namespace {

int rank_at(const OperatorSpec& op, const Eigen::VectorXd& xi, double tol, double* sigma_max) {
  Eigen::MatrixXd M = op.order_part_at(op.k(), xi);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (sigma_max) *sigma_max = smax;
  if (smax == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * smax) ++r;
  return r;
}

// Orthonormal basis of ker M(xi) (columns of V past the numerical rank).
Eigen::MatrixXd kernel_basis(const OperatorSpec& op, const Eigen::VectorXd& xi, double tol) {
  Eigen::MatrixXd M = op.order_part_at(op.k(), xi);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  if (smax > 0.0)
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol * smax) ++r;
  return svd.matrixV().rightCols(op.N() - r);
}

// Derivative-free minimization of a function on the unit sphere, started at
// xi0. d=2 uses golden-section on the angle; d>=3 runs Nelder-Mead on a
// tangent chart and renormalizes.
Eigen::VectorXd refine_on_sphere(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd xi0, double bracket, int max_iters) {
  int d = static_cast<int>(xi0.size());
  if (d == 1) return xi0;
  if (d == 2) {
    double a0 = std::atan2(xi0(1), xi0(0));
    auto eval = [&](double a) {
      Eigen::VectorXd p(2);
      p << std::cos(a), std::sin(a);
      return f(p);
    };
    double lo = a0 - bracket, hi = a0 + bracket;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), dpt = lo + gr * (hi - lo);
    double fc = eval(c), fd = eval(dpt);
    for (int it = 0; it < max_iters && (hi - lo) > 1e-14; ++it) {
      if (fc < fd) {
        hi = dpt;
        dpt = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = eval(c);
      } else {
        lo = c;
        c = dpt;
        fc = fd;
        dpt = lo + gr * (hi - lo);
        fd = eval(dpt);
      }
    }
    double a = (fc < fd) ? c : dpt;
    Eigen::VectorXd p(2);
    p << std::cos(a), std::sin(a);
    return p;
  }
  // tangent chart at xi0
  Eigen::MatrixXd xiMat = xi0;
  Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(xiMat);
  Eigen::MatrixXd Qfull = qr.matrixQ();
  Eigen::MatrixXd U = Qfull.rightCols(d - 1);  // orthonormal complement of xi0
  auto lift = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd p = xi0 + U * u;
    double nrm = p.norm();
    return (nrm > 0) ? Eigen::VectorXd(p / nrm) : xi0;
  };
  auto eval = [&](const Eigen::VectorXd& u) { return f(lift(u)); };

  int m = d - 1;
  std::vector<Eigen::VectorXd> simplex(m + 1, Eigen::VectorXd::Zero(m));
  std::vector<double> fv(m + 1);
  for (int i = 1; i <= m; ++i) simplex[i](i - 1) = bracket;
  for (int i = 0; i <= m; ++i) fv[i] = eval(simplex[i]);
  for (int it = 0; it < max_iters; ++it) {
    // order
    std::vector<int> idx(m + 1);
    for (int i = 0; i <= m; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::vector<Eigen::VectorXd> sx(m + 1);
    std::vector<double> sf(m + 1);
    for (int i = 0; i <= m; ++i) {
      sx[i] = simplex[idx[i]];
      sf[i] = fv[idx[i]];
    }
    simplex = sx;
    fv = sf;
    if ((simplex[m] - simplex[0]).norm() < 1e-14) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) centroid += simplex[i];
    centroid /= m;
    Eigen::VectorXd xr = centroid + (centroid - simplex[m]);
    double fr = eval(xr);
    if (fr < fv[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[m]);
      double fe = eval(xe);
      if (fe < fr) {
        simplex[m] = xe;
        fv[m] = fe;
      } else {
        simplex[m] = xr;
        fv[m] = fr;
      }
    } else if (fr < fv[m - 1]) {
      simplex[m] = xr;
      fv[m] = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (simplex[m] - centroid);
      double fc = eval(xc);
      if (fc < fv[m]) {
        simplex[m] = xc;
        fv[m] = fc;
      } else {
        for (int i = 1; i <= m; ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          fv[i] = eval(simplex[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= m; ++i)
    if (fv[i] < fv[best]) best = i;
  return lift(simplex[best]);
}

}  // namespace

RankProfile rank_profile(const OperatorSpec& op, const SphereSampling& sampling, double tol) {
  if (sampling.points.empty()) fail("ParseError", "empty sampling");
  if (!(tol > 0.0 && tol <= 1e-2)) fail("ParseError", "rank tolerance must lie in (0, 1e-2]");
  RankProfile prof;
  prof.tol = tol;
  prof.ranks.resize(sampling.points.size());
  std::vector<double> smax(sampling.points.size());
  parallel_for(static_cast<std::int64_t>(sampling.points.size()), [&](std::int64_t i) {
    prof.ranks[i] = rank_at(op, sampling.points[i], tol, &smax[i]);
  });
  bool degenerate = true;
  for (double s : smax)
    if (s > 0.0) degenerate = false;
  if (degenerate) fail("DegenerateOperator", "principal symbol vanishes on all samples");
  prof.min_rank = prof.max_rank = prof.ranks[0];
  prof.witness_min = prof.witness_max = sampling.points[0];
  for (size_t i = 1; i < prof.ranks.size(); ++i) {
    if (prof.ranks[i] < prof.min_rank) {
      prof.min_rank = prof.ranks[i];
      prof.witness_min = sampling.points[i];
    }
    if (prof.ranks[i] > prof.max_rank) {
      prof.max_rank = prof.ranks[i];
      prof.witness_max = sampling.points[i];
    }
  }
  prof.is_constant = (prof.min_rank == prof.max_rank);
  return prof;
}

WaveConeReport wavecone_membership(const OperatorSpec& op, const Eigen::VectorXd& P,
                                   const SphereSampling& sampling, double tol_member) {
  if (P.size() != op.N()) fail("ShapeError", "query vector has wrong dimension");
  if (P.norm() == 0.0) fail("ZeroVector", "wave cone membership of the zero vector is trivial");
  auto f = [&](const Eigen::VectorXd& xi) { return symbol_residual(op, P, xi); };

  std::vector<double> res(sampling.points.size());
  parallel_for(static_cast<std::int64_t>(sampling.points.size()),
               [&](std::int64_t i) { res[i] = f(sampling.points[i]); });

  std::vector<int> order(sampling.points.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return res[a] < res[b]; });

  double coarse_step = (sampling.d == 2) ? M_PI / std::max(1, sampling.count())
                                         : 2.0 / std::sqrt(std::max(1, sampling.count()));
  WaveConeReport rep;
  rep.query = P;
  rep.tol_member = tol_member;
  rep.residual = res[order[0]];
  rep.witness_xi = sampling.points[order[0]];
  int starts = std::min<int>(4, static_cast<int>(order.size()));
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd xi = refine_on_sphere(f, sampling.points[order[s]], 2.0 * coarse_step, 200);
    double r = f(xi);
    if (r < rep.residual) {
      rep.residual = r;
      rep.witness_xi = xi;
    }
  }
  rep.member = rep.residual <= tol_member;
  return rep;
}

SpanResult wavecone_span(const OperatorSpec& op, const SphereSampling& sampling) {
  SpanResult out;
  RankProfile prof = rank_profile(op, sampling);
  out.constant_rank_ok = prof.is_constant;
  std::vector<Eigen::MatrixXd> bases(sampling.points.size());
  parallel_for(static_cast<std::int64_t>(sampling.points.size()), [&](std::int64_t i) {
    bases[i] = kernel_basis(op, sampling.points[i], kDefaultRankTol);
  });
  Eigen::Index total = 0;
  for (const auto& b : bases) total += b.cols();
  if (total == 0) {
    out.basis = Eigen::MatrixXd::Zero(op.N(), 0);
    out.dim = 0;
    return out;
  }
  Eigen::MatrixXd stacked(op.N(), total);
  Eigen::Index c = 0;
  for (const auto& b : bases) {
    stacked.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  int dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (smax > 0 && sv(i) > 1e-10 * smax) ++dim;
  out.basis = svd.matrixU().leftCols(dim);
  out.dim = dim;
  return out;
}

CharacteristicSetReport characteristic_set(const OperatorSpec& op, const Eigen::VectorXd& P0,
                                           const SphereSampling& sampling, double root_tol) {
  WaveConeReport member = wavecone_membership(op, P0, sampling, root_tol);
  if (!member.member)
    fail("NotInWaveCone", "query direction fails wave cone membership; no characteristic set");
  auto f = [&](const Eigen::VectorXd& xi) { return symbol_residual(op, P0, xi); };

  std::vector<double> res(sampling.points.size());
  parallel_for(static_cast<std::int64_t>(sampling.points.size()),
               [&](std::int64_t i) { res[i] = f(sampling.points[i]); });

  double coarse_step = (sampling.d == 2) ? M_PI / std::max(1, sampling.count())
                                         : 2.0 / std::sqrt(std::max(1, sampling.count()));
  // refine every sample within roughly one sample spacing of the root set
  // (the residual grows linearly with distance), then deduplicate at the
  // sampling resolution so root manifolds keep distinct representatives
  double coarse_gate = std::max({50.0 * root_tol, coarse_step, 1e-3});
  double dedupe_radius = std::max(2.0 * coarse_step, 1e-6);
  CharacteristicSetReport rep;
  rep.P0 = P0;
  for (size_t i = 0; i < sampling.points.size(); ++i) {
    if (res[i] > coarse_gate) continue;
    Eigen::VectorXd xi = refine_on_sphere(f, sampling.points[i], 2.0 * coarse_step, 200);
    if (f(xi) > root_tol) continue;
    xi = canonical(xi);
    bool dup = false;
    for (const auto& r : rep.roots)
      if ((r - xi).norm() < dedupe_radius || (r + xi).norm() < dedupe_radius) {
        dup = true;
        break;
      }
    if (!dup) rep.roots.push_back(xi);
  }
  if (rep.roots.empty()) {
    rep.roots.push_back(canonical(member.witness_xi));
  }
  Eigen::MatrixXd R(op.d(), static_cast<Eigen::Index>(rep.roots.size()));
  for (size_t i = 0; i < rep.roots.size(); ++i) R.col(static_cast<Eigen::Index>(i)) = rep.roots[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  int dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (smax > 0 && sv(i) > 1e-6 * smax) ++dim;
  rep.subspace_dim = dim;
  rep.subspace_basis = svd.matrixU().leftCols(dim);
  rep.max_deviation = 0.0;
  for (const auto& r : rep.roots) {
    Eigen::VectorXd proj = rep.subspace_basis * (rep.subspace_basis.transpose() * r);
    rep.max_deviation = std::max(rep.max_deviation, (r - proj).norm());
  }
  return rep;
}

}  // namespace aflib
