#pragma once

#include "aflib/integrand.hpp"
#include "aflib/operator.hpp"
#include "aflib/wave_cone.hpp"

namespace aflib {

// Axis-aligned box domain.
struct Box {
  Eigen::VectorXd lo, hi;

  int d() const { return static_cast<int>(lo.size()); }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < d(); ++i) v *= hi(i) - lo(i);
    return v;
  }
  bool contains(const Eigen::VectorXd& x) const {
    for (int i = 0; i < d(); ++i)
      if (x(i) < lo(i) || x(i) > hi(i)) return false;
    return true;
  }
  static Box unit_cube(int d) {
    return Box{Eigen::VectorXd::Constant(d, -0.5), Eigen::VectorXd::Constant(d, 0.5)};
  }
};

// Singular structures are limited to atoms and hyperplane slabs; both carry a
// unit polar vector and a nonnegative total-variation mass. For hyperplanes
// the mass is spread uniformly over the section {x.xi = c} /\ domain.
struct SingularPiece {
  enum class Kind { Atom, Hyperplane };
  Kind kind = Kind::Atom;
  Eigen::VectorXd x0;   // atom location
  Eigen::VectorXd xi;   // hyperplane normal (unit)
  double offset = 0.0;  // hyperplane {x . xi = offset}
  double mass = 0.0;
  Eigen::VectorXd polar;

  static SingularPiece atom(Eigen::VectorXd x0, double mass, Eigen::VectorXd polar);
  static SingularPiece hyperplane(Eigen::VectorXd xi, double offset, double mass,
                                  Eigen::VectorXd polar);
};

// Density on a uniform grid over the box plus singular pieces.
struct GridMeasure {
  Box domain;
  std::vector<int> grid;
  int N = 0;
  Eigen::VectorXd density;  // node-major x N, values of d mu / d L^d at cell centers
  std::vector<SingularPiece> singular;

  GridMeasure() = default;
  GridMeasure(Box domain_, std::vector<int> grid_, int N_);

  int d() const { return static_cast<int>(grid.size()); }
  std::int64_t num_nodes() const;
  double cell_volume() const;
  Eigen::VectorXd node_center(std::int64_t node) const;
  Eigen::Map<Eigen::VectorXd> at(std::int64_t node) {
    return Eigen::Map<Eigen::VectorXd>(density.data() + node * N, N);
  }
  Eigen::Map<const Eigen::VectorXd> at(std::int64_t node) const {
    return Eigen::Map<const Eigen::VectorXd>(density.data() + node * N, N);
  }

  double total_variation() const;  // sum_cells |density| dx + sum masses
};

// weighted sample points representing a piece's mass distribution
struct PieceSamples {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;  // sums to the restricted mass
};
PieceSamples piece_samples(const SingularPiece& piece, const Box& domain, int resolution = 256);

// (d-1)-measure of {x.xi = c} /\ box (general direction for d = 2,
// axis-aligned for any d)
double hyperplane_section_measure(const Box& box, const Eigen::VectorXd& xi, double c);

// F[mu] = int f(x, density) dx + int rec(x, polar) d|mu^s|
double evaluate_functional(const Integrand& f, const GridMeasure& mu,
                           RecessionMode mode = RecessionMode::Analytic);

// int sqrt(1 + |density|^2) dx + |mu^s|(Omega)
double area_functional(const GridMeasure& mu);

// Convolves the density and splats singular pieces with the even bump kernel;
// output is purely absolutely continuous and carries the same total mass
// (per-source renormalization keeps boundary cells exact).
GridMeasure mollify_measure(const GridMeasure& mu, int eps_cells);

enum class BlowupScaling { Lebesgue, Mass };

// c T^{(x0,r)}_# mu restricted to the unit cube, with c = r^{-d} (lebesgue)
// or c = |mu|(Q_r(x0))^{-1} (mass). Q_r(x0) = x0 + r Q must lie inside the
// domain.
GridMeasure blowup_measure(const GridMeasure& mu, const Eigen::VectorXd& x0, double r,
                           BlowupScaling scaling);

struct PolarCheck {
  int piece = 0;
  bool member = false;
  double residual = 0.0;
  Eigen::VectorXd witness_xi;
};
// Wave cone membership of each singular piece's polar vector; a flagged piece
// is incompatible with mu being A-free.
std::vector<PolarCheck> singular_polar_check(const GridMeasure& mu, const OperatorSpec& op);

// Measure files: a JSON document with domain, grid, N, a density (inline array
// or a sidecar field binary via "density_file"), and the singular piece list.
GridMeasure read_measure_file(const std::string& path);
void write_measure_file(const std::string& path, const GridMeasure& mu,
                        const std::string& density_file = "");

}  // namespace aflib
