#pragma once

#include "aflib/measure.hpp"

namespace aflib {

// A spatial weight tensored with a linear-growth integrand; the finite test
// battery standing in for the countable separation family.
struct TestPair {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> phi;
  Integrand h;
};

// Fixed battery of at most 32 pairs: polynomially-weighted phi's against the
// built-in h's plus the linear components A -> A.e_i.
std::vector<TestPair> standard_test_pairs(int N, int d, int max_pairs = 32);

struct EmpiricalYoungMeasure {
  std::vector<std::string> pair_names;
  // moments[p][j] = <<phi_p (x) h_p, delta[mu_j]>>
  std::vector<std::vector<double>> moments;
  std::vector<double> tail_mean;   // mean over the final third per pair
  std::vector<double> cesaro;      // Cesaro average per pair
  std::vector<double> last;        // last sequence element per pair
  GridMeasure barycenter_field;    // averaged densities with singular parts splatted
};

// Moments of the elementary Young measures delta[mu_j] along a sequence, with
// convergence diagnostics. Extra integrands are paired with phi == 1.
EmpiricalYoungMeasure ym_moments(const std::vector<GridMeasure>& sequence,
                                 const std::vector<TestPair>& pairs,
                                 const std::vector<Integrand>& f_extras = {});

// single pairing <<phi (x) h, delta[mu]>>
double pair_measure(const TestPair& pair, const GridMeasure& mu);

}  // namespace aflib
