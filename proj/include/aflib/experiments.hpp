#pragma once

#include "aflib/envelope.hpp"
#include "aflib/measure.hpp"
#include "aflib/young.hpp"

namespace aflib {

// A-free one-directional oscillation: density A0 + P0 chi_eps(j x.xi) on the
// unit cube, where chi_eps is the mollified two-level (1-theta)/(-theta)
// profile. The field is synthesized band-limited on the grid, so it is
// discretely A-free to rounding for homogeneous operators.
GridMeasure oscillation_sequence(const OperatorSpec& op, const Eigen::VectorXd& A0,
                                 const Eigen::VectorXd& P0, const Eigen::VectorXi& xi,
                                 double theta, double eps, int j,
                                 const std::vector<int>& grid);

// the weak* limit of the family: constant density A0
GridMeasure oscillation_limit(const Eigen::VectorXd& A0, int d, const std::vector<int>& grid);

// Concentration along {x.xi = c}: density P0 j 1{|x.xi - c| < 1/(2j)}.
GridMeasure concentration_sequence(const OperatorSpec& op, const Eigen::VectorXd& P0,
                                   const Eigen::VectorXi& xi, int j, double c_plane,
                                   const std::vector<int>& grid);

// the j -> infinity limit: zero density plus a hyperplane piece with polar
// P0/|P0| and mass |P0| times the section measure
GridMeasure concentration_limit(const Eigen::VectorXd& P0, const Eigen::VectorXi& xi,
                                double c_plane, int d, const std::vector<int>& grid);

// 1D period average of h along the synthesized oscillation profile; the exact
// oracle for the spatial moments of the oscillation family.
double oscillation_profile_average(const Integrand& h, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& A0, const Eigen::VectorXd& P0,
                                   double theta, double eps, int modes, int samples = 1 << 14);

// Config-driven experiment pipelines; each returns a full JSON report with a
// "verdict" field. See the README for the config schema.
OperatorSpec op_from_config(const json& cfg);
Integrand integrand_from_config(const json& cfg, int N);

json lsc_experiment(const json& cfg);
json relaxation_experiment(const json& cfg);
json jensen_check(const json& cfg);  // cfg["location"] in {"regular", "singular"}

}  // namespace aflib
