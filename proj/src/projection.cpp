#include "aflib/projection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "aflib/wave_cone.hpp"

namespace aflib {

namespace {

constexpr double kNullTol = 1e-10;  // SVD null-space cutoff, relative to sigma_max

// true if any axis index sits on an un-paired Nyquist line (even M, index M/2)
bool touches_nyquist(const std::vector<int>& idx, const std::vector<int>& grid) {
  for (size_t i = 0; i < grid.size(); ++i)
    if (grid[i] % 2 == 0 && idx[i] == grid[i] / 2) return true;
  return false;
}

Eigen::MatrixXd kernel_projector(const OperatorSpec& op, const Eigen::VectorXd& xi) {
  Eigen::MatrixXd M = op.order_part_at(op.k(), xi);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  if (smax > 0.0)
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kNullTol * smax) ++r;
  Eigen::MatrixXd V = svd.matrixV().rightCols(op.N() - r);
  return V * V.transpose();
}

}  // namespace

ProjectorTable::ProjectorTable(const OperatorSpec& op, std::vector<int> grid)
    : op_(op), grid_(std::move(grid)) {
  if (static_cast<int>(grid_.size()) != op.d())
    fail("GridMismatch", "grid dimension does not match the operator");
  if (!op.homogeneous())
    fail("NonHomogeneousOperator",
         "the Fourier projection exists for homogeneous operators only");
  {
    SphereSampling sampling = SphereSampling::standard(op.d());
    RankProfile prof = rank_profile(op, sampling);
    if (!prof.is_constant)
      fail("ConstantRankViolation", "principal symbol rank varies over the sphere");
  }
  std::int64_t nn = 1;
  for (int m : grid_) nn *= m;
  P_.assign(nn, Eigen::MatrixXd());

  // assemble one projector per antipodal pair, mirror to the partner
  std::vector<std::int64_t> todo;
  todo.reserve(nn);
  std::vector<int> idx;
  for (std::int64_t node = 0; node < nn; ++node) {
    unflatten(grid_, node, idx);
    bool zero = true, canonical_rep = false;
    for (size_t i = 0; i < idx.size(); ++i) {
      int f = lattice_frequency(idx[i], grid_[i]);
      if (f != 0) {
        zero = false;
        canonical_rep = f > 0;
        break;
      }
    }
    if (zero || touches_nyquist(idx, grid_)) {
      P_[node] = Eigen::MatrixXd::Zero(op.N(), op.N());
      continue;
    }
    if (canonical_rep) todo.push_back(node);
  }
  parallel_for(static_cast<std::int64_t>(todo.size()), [&](std::int64_t t) {
    std::vector<int> id;
    unflatten(grid_, todo[t], id);
    Eigen::VectorXd xi(op_.d());
    for (int i = 0; i < op_.d(); ++i) xi(i) = lattice_frequency(id[i], grid_[i]);
    P_[todo[t]] = kernel_projector(op_, xi);
  });
  // mirror: P(-xi) = P(xi)
  for (std::int64_t node : todo) {
    unflatten(grid_, node, idx);
    std::vector<int> mirror(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) mirror[i] = (grid_[i] - idx[i]) % grid_[i];
    P_[flat_index(grid_, mirror)] = P_[node];
  }
}

std::shared_ptr<const ProjectorTable> build_projector_table(const OperatorSpec& op,
                                                            const std::vector<int>& grid) {
  static std::map<std::pair<std::string, std::vector<int>>,
                  std::shared_ptr<const ProjectorTable>>
      cache;
  static std::mutex mtx;
  auto key = std::make_pair(op.print(), grid);
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const ProjectorTable>(op, grid);
  std::lock_guard<std::mutex> lock(mtx);
  cache.emplace(std::move(key), table);
  return table;
}

PeriodicField project_afree(const ProjectorTable& table, const PeriodicField& u,
                            ProjectionStats* stats) {
  if (u.grid != table.grid() || u.N != table.op().N())
    fail("GridMismatch", "field does not match the projector table");
  std::vector<std::complex<double>> coeffs;
  fft_forward(u, coeffs);
  std::int64_t nn = u.num_nodes();
  Eigen::VectorXcd tmp(u.N);
  for (std::int64_t node = 0; node < nn; ++node) {
    Eigen::Map<Eigen::VectorXcd> c(coeffs.data() + node * u.N, u.N);
    tmp.noalias() = table.at(node) * c;
    c = tmp;
  }
  PeriodicField out;
  double imag = 0.0;
  fft_inverse(u.grid, u.N, coeffs, out, &imag);
  if (stats) stats->imag_residue = imag;
  return out;
}

double afree_residual(const OperatorSpec& op, const PeriodicField& u) {
  if (static_cast<int>(u.grid.size()) != op.d() || u.N != op.N())
    fail("GridMismatch", "field does not match the operator");
  double unorm = u.l2_norm();
  if (unorm == 0.0) return 0.0;
  std::vector<std::complex<double>> coeffs;
  fft_forward(u, coeffs);
  std::int64_t nn = u.num_nodes();
  std::vector<int> idx;
  double acc = 0.0;
  Eigen::VectorXd xi(op.d());
  for (std::int64_t node = 0; node < nn; ++node) {
    unflatten(u.grid, node, idx);
    for (int i = 0; i < op.d(); ++i) xi(i) = lattice_frequency(idx[i], u.grid[i]);
    Eigen::MatrixXcd A = full_symbol(op, xi);
    Eigen::Map<Eigen::VectorXcd> c(coeffs.data() + node * u.N, u.N);
    acc += (A * c).squaredNorm();
  }
  return std::sqrt(acc) / unorm;
}

double sobolev_negative_norm(const PeriodicField& u, int k, double q) {
  if (k < 0) fail("ParseError", "order must be >= 0");
  if (!(q > 1.0)) fail("ParseError", "exponent must satisfy q > 1");
  double unorm = u.l2_norm();
  if (unorm == 0.0) return 0.0;
  if (u.mean().norm() > 1e-10 * (1.0 + u.sup_norm()))
    fail("NonzeroMean", "the |xi|^{-k} multiplier requires zero-mean data");
  std::vector<std::complex<double>> coeffs;
  fft_forward(u, coeffs);
  std::int64_t nn = u.num_nodes();
  std::vector<int> idx;
  for (std::int64_t node = 0; node < nn; ++node) {
    unflatten(u.grid, node, idx);
    double xi2 = 0.0;
    for (size_t i = 0; i < idx.size(); ++i) {
      double f = lattice_frequency(idx[i], u.grid[i]);
      xi2 += f * f;
    }
    double mult = (xi2 == 0.0) ? 0.0 : std::pow(xi2, -0.5 * k);
    for (int c = 0; c < u.N; ++c) coeffs[node * u.N + c] *= mult;
  }
  PeriodicField v;
  fft_inverse(u.grid, u.N, coeffs, v);
  double acc = 0.0;
  for (std::int64_t node = 0; node < nn; ++node) acc += std::pow(v.at(node).norm(), q);
  return std::pow(acc * v.dx(), 1.0 / q);
}

std::vector<double> bump_weights_1d(int radius_cells) {
  if (radius_cells < 1) fail("ParseError", "mollifier radius must be >= 1 cell");
  std::vector<double> w(2 * radius_cells + 1);
  double sum = 0.0;
  for (int i = -radius_cells; i <= radius_cells; ++i) {
    double t = static_cast<double>(i) / (radius_cells + 1);
    double v = std::pow(1.0 - t * t, 3);
    w[i + radius_cells] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

PeriodicField mollify_periodic(const PeriodicField& u, int radius_cells) {
  if (radius_cells == 0) return u;  // sub-cell scale: identity on sampled data
  std::vector<double> w = bump_weights_1d(radius_cells);
  PeriodicField cur = u;
  std::vector<int> idx;
  for (int axis = 0; axis < u.d(); ++axis) {
    PeriodicField next(u.grid, u.N);
    std::int64_t nn = u.num_nodes();
    for (std::int64_t node = 0; node < nn; ++node) {
      unflatten(u.grid, node, idx);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(u.N);
      std::vector<int> shifted = idx;
      for (int off = -radius_cells; off <= radius_cells; ++off) {
        shifted[axis] = idx[axis] + off;
        acc += w[off + radius_cells] * cur.at(flat_index(u.grid, shifted));
      }
      next.at(node) = acc;
    }
    cur = std::move(next);
  }
  return cur;
}

PeriodicField periodic_afree_correction(const OperatorSpec& op, const PeriodicField& u,
                                        double cutoff_margin, int mollify_radius_cells,
                                        CorrectionDiagnostics* diag) {
  if (!(cutoff_margin > 0.0 && cutoff_margin < 0.5))
    fail("ParseError", "cutoff margin must lie in (0, 1/2)");
  CorrectionDiagnostics local;
  local.input_afree_residual = afree_residual(op, u);

  // quintic smoothstep from 0 on the boundary to 1 at distance >= margin
  auto smoothstep = [](double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  };
  PeriodicField cut = u;
  std::int64_t nn = u.num_nodes();
  double removed = 0.0;
  for (std::int64_t node = 0; node < nn; ++node) {
    Eigen::VectorXd x = u.node_center(node);
    double psi = 1.0;
    for (int i = 0; i < u.d(); ++i) {
      double dist = 0.5 - std::abs(x(i));
      psi *= smoothstep(dist / cutoff_margin);
    }
    removed += (1.0 - psi) * u.at(node).norm();
    cut.at(node) = psi * u.at(node);
  }
  local.cutoff_mass_removed = removed * u.dx();

  PeriodicField smooth = mollify_periodic(cut, mollify_radius_cells);
  smooth.subtract_mean();
  auto table = build_projector_table(op, u.grid);
  PeriodicField z = project_afree(*table, smooth);

  double change = 0.0;
  for (std::int64_t node = 0; node < nn; ++node) {
    Eigen::VectorXd x = u.node_center(node);
    bool interior = true;
    for (int i = 0; i < u.d(); ++i)
      if (0.5 - std::abs(x(i)) < cutoff_margin) interior = false;
    if (interior) change += (z.at(node) - u.at(node)).norm();
  }
  local.l1_change_interior = change * u.dx();
  if (diag) *diag = local;
  return z;
}

}  // namespace aflib
