#pragma once

#include <memory>

#include "aflib/field.hpp"
#include "aflib/operator.hpp"

namespace aflib {

// Per-frequency orthogonal projectors P(xi) onto ker M(xi) for all lattice
// frequencies of a grid. P(0) = 0 (zero-mean rule) and frequencies touching an
// un-paired Nyquist index are zeroed to preserve real symmetry. P(-xi) = P(xi)
// holds exactly: each antipodal pair is assembled once and mirrored.
class ProjectorTable {
public:
  ProjectorTable(const OperatorSpec& op, std::vector<int> grid);

  const OperatorSpec& op() const { return op_; }
  const std::vector<int>& grid() const { return grid_; }
  const Eigen::MatrixXd& at(std::int64_t node) const { return P_[node]; }
  std::int64_t size() const { return static_cast<std::int64_t>(P_.size()); }

private:
  OperatorSpec op_;
  std::vector<int> grid_;
  std::vector<Eigen::MatrixXd> P_;
};

// Cached table per (canonical op text, grid).
std::shared_ptr<const ProjectorTable> build_projector_table(const OperatorSpec& op,
                                                            const std::vector<int>& grid);

struct ProjectionStats {
  double imag_residue = 0.0;  // L2 norm of the imaginary residue dropped on output
};

// u -> real field with hat(Pu)(xi) = P(xi) hat(u)(xi); output has mean zero
// and is discretely A^k-free.
PeriodicField project_afree(const ProjectorTable& table, const PeriodicField& u,
                            ProjectionStats* stats = nullptr);

// L2 norm of the full symbol applied frequency-wise, normalized by |u|_L2.
double afree_residual(const OperatorSpec& op, const PeriodicField& u);

// Lq norm of F^{-1}[ hat u(xi) / |xi|^k ] for zero-mean u; the discrete stand-in
// for the W^{-k,q}_per norm of u.
double sobolev_negative_norm(const PeriodicField& u, int k, double q);

struct CorrectionDiagnostics {
  double input_afree_residual = 0.0;
  double cutoff_mass_removed = 0.0;  // L1 mass of u scaled away by the cutoff
  double l1_change_interior = 0.0;   // |z - u|_L1 over the cutoff-interior region
};

// One-shot version of the boundary-values correction pipeline: cutoff near the
// torus boundary, mollify with an even bump, remove the mean, project. The
// result is an exactly zero-mean, discretely A-free periodic field.
PeriodicField periodic_afree_correction(const OperatorSpec& op, const PeriodicField& u,
                                        double cutoff_margin, int mollify_radius_cells,
                                        CorrectionDiagnostics* diag = nullptr);

// Tensor-product even polynomial bump weights on [-radius, radius] cells,
// normalized to sum 1; shared by mollifiers here and in the measure module.
std::vector<double> bump_weights_1d(int radius_cells);

// Periodic separable convolution of all components with the bump.
PeriodicField mollify_periodic(const PeriodicField& u, int radius_cells);

}  // namespace aflib
