#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "aflib/operator.hpp"

namespace aflib {

// Unit frequency directions used for all wave-cone scans. Points are
// antipodally deduplicated (ker M(-xi) = ker M(xi) by homogeneity) and the
// coordinate axes are always included so that axis-aligned rank drops cannot
// slip between samples.
struct SphereSampling {
  int d = 0;
  std::vector<Eigen::VectorXd> points;

  int count() const { return static_cast<int>(points.size()); }

  // schemes: angular grid (d=2), Fibonacci sphere (d=3),
  // seeded random orthant-symmetrized (d>=4)
  static SphereSampling standard(int d, int count = 0, std::uint64_t seed = 1234);
};

struct RankProfile {
  std::vector<int> ranks;
  int min_rank = 0;
  int max_rank = 0;
  double tol = 0.0;
  bool is_constant = false;
  Eigen::VectorXd witness_min;
  Eigen::VectorXd witness_max;
};

struct WaveConeReport {
  Eigen::VectorXd query;
  double residual = 0.0;   // min_xi |M(xi) P| / (|M(xi)|_F |P|)
  Eigen::VectorXd witness_xi;
  bool member = false;
  double tol_member = 0.0;
};

struct CharacteristicSetReport {
  Eigen::VectorXd P0;
  std::vector<Eigen::VectorXd> roots;   // unit xi with M(xi) P0 ~ 0, one per antipodal pair
  int subspace_dim = 0;
  Eigen::MatrixXd subspace_basis;       // d x subspace_dim, orthonormal
  double max_deviation = 0.0;           // worst distance of a root from the fitted subspace
};

inline constexpr double kDefaultRankTol = 1e-8;
inline constexpr double kDefaultMemberTol = 1e-6;

// Normalized symbol residual |M(xi)P| / (|M(xi)|_F |P|); scale-invariant in
// both xi and P.
double symbol_residual(const OperatorSpec& op, const Eigen::VectorXd& P,
                       const Eigen::VectorXd& xi);

RankProfile rank_profile(const OperatorSpec& op, const SphereSampling& sampling,
                         double tol = kDefaultRankTol);

WaveConeReport wavecone_membership(const OperatorSpec& op, const Eigen::VectorXd& P,
                                   const SphereSampling& sampling,
                                   double tol_member = kDefaultMemberTol);

// Orthonormal basis of V_A = span Lambda_A, accumulated from the null spaces
// of M(xi) over the sampling. Emits a warning flag (returned via
// constant_rank_ok) instead of aborting when the profile is not constant.
struct SpanResult {
  Eigen::MatrixXd basis;  // N x dim
  int dim = 0;
  bool constant_rank_ok = true;
};
SpanResult wavecone_span(const OperatorSpec& op, const SphereSampling& sampling);

CharacteristicSetReport characteristic_set(const OperatorSpec& op, const Eigen::VectorXd& P0,
                                           const SphereSampling& sampling,
                                           double root_tol = kDefaultMemberTol);

}  // namespace aflib
