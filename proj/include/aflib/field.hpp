#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "aflib/common.hpp"

namespace aflib {

// Real N-vector-valued field on a uniform grid over the torus Q = (-1/2,1/2)^d.
// Storage is node-major (row-major over dimensions, last axis fastest) with
// the N components interleaved per node.
struct PeriodicField {
  std::vector<int> grid;   // per-axis resolution (M_1,...,M_d)
  int N = 0;
  Eigen::VectorXd values;  // size = num_nodes() * N

  PeriodicField() = default;
  PeriodicField(std::vector<int> grid_, int N_);

  int d() const { return static_cast<int>(grid.size()); }
  std::int64_t num_nodes() const;
  double dx() const;  // cell volume = prod 1/M_i

  Eigen::Map<Eigen::VectorXd> at(std::int64_t node) {
    return Eigen::Map<Eigen::VectorXd>(values.data() + node * N, N);
  }
  Eigen::Map<const Eigen::VectorXd> at(std::int64_t node) const {
    return Eigen::Map<const Eigen::VectorXd>(values.data() + node * N, N);
  }

  // cell-center coordinate of a node, in Q
  Eigen::VectorXd node_center(std::int64_t node) const;

  Eigen::VectorXd mean() const;
  void subtract_mean();

  double l2_norm() const;   // (sum |u|^2 dx)^(1/2)
  double l1_norm() const;
  double sup_norm() const;
};

// node index <-> per-axis indices
std::int64_t flat_index(const std::vector<int>& grid, const std::vector<int>& idx);
void unflatten(const std::vector<int>& grid, std::int64_t node, std::vector<int>& idx);

// signed lattice frequency of a per-axis index: j -> j, or j - M for j >= M/2+1;
// for even M the index M/2 maps to the un-paired Nyquist frequency -M/2.
int lattice_frequency(int index, int M);

// Forward/inverse DFT of all N components. Forward produces Fourier
// coefficients hat u(xi) = (1/#nodes) sum_x u(x) e^{-2 pi i xi.x}; inverse is
// the exact inverse of that. Coefficient layout matches the field layout.
void fft_forward(const PeriodicField& u, std::vector<std::complex<double>>& coeffs);
void fft_inverse(const std::vector<int>& grid, int N,
                 const std::vector<std::complex<double>>& coeffs, PeriodicField& out,
                 double* imag_residue = nullptr);

// Flat binary field format: int64 d, int64 N, int64 dims[d], then
// little-endian f64 values, node-major. CSV import for d = 2 uses rows
// "i,j,v_1,...,v_N".
void write_field(const std::string& path, const PeriodicField& u);
PeriodicField read_field(const std::string& path);
PeriodicField read_field_csv(const std::string& path, int M1, int M2, int N);

}  // namespace aflib
