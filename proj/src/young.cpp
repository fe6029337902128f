#include "aflib/young.hpp"

#include <algorithm>
#include <cmath>

#include "aflib/field.hpp"

namespace aflib {

namespace {

Integrand linear_component(int N, int comp) {
  Integrand h;
  h.name = "id_e" + std::to_string(comp + 1);
  h.growth_M = 1.0;
  h.lip_A = 1.0;
  h.convex = true;
  h.eval = [comp](const Eigen::VectorXd&, const Eigen::VectorXd& A) { return A(comp); };
  h.analytic_recession = [comp](const Eigen::VectorXd&, const Eigen::VectorXd& A) {
    return A(comp);
  };
  h.subgradient_A = [N, comp](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Unit(N, comp));
  };
  return h;
}

Integrand abs_component(int N, int comp) {
  Integrand h;
  h.name = "abs_e" + std::to_string(comp + 1);
  h.growth_M = 1.0;
  h.lip_A = 1.0;
  h.convex = true;
  h.eval = [comp](const Eigen::VectorXd&, const Eigen::VectorXd& A) {
    return std::abs(A(comp));
  };
  h.analytic_recession = h.eval;
  h.subgradient_A = [N, comp](const Eigen::VectorXd&, const Eigen::VectorXd& A) {
    double s = A(comp) > 0 ? 1.0 : (A(comp) < 0 ? -1.0 : 0.0);
    return Eigen::VectorXd(s * Eigen::VectorXd::Unit(N, comp));
  };
  return h;
}

}  // namespace

std::vector<TestPair> standard_test_pairs(int N, int d, int max_pairs) {
  std::vector<std::pair<std::string, std::function<double(const Eigen::VectorXd&)>>> phis;
  phis.emplace_back("1", [](const Eigen::VectorXd&) { return 1.0; });
  for (int i = 0; i < std::min(d, 2); ++i)
    phis.emplace_back("(x" + std::to_string(i + 1) + "+1/2)",
                      [i](const Eigen::VectorXd& x) { return x(i) + 0.5; });
  phis.emplace_back("|x|^2", [](const Eigen::VectorXd& x) { return x.squaredNorm(); });

  std::vector<Integrand> hs;
  hs.push_back(make_integrand("abs", json::object(), N));
  hs.push_back(make_integrand("area", json::object(), N));
  for (int c = 0; c < std::min(N, 2); ++c) {
    hs.push_back(linear_component(N, c));
    hs.push_back(abs_component(N, c));
  }

  std::vector<TestPair> pairs;
  for (const auto& [pname, phi] : phis)
    for (const auto& h : hs) {
      if (static_cast<int>(pairs.size()) >= max_pairs) return pairs;
      pairs.push_back({pname + "(x)" + h.name, phi, h});
    }
  return pairs;
}

double pair_measure(const TestPair& pair, const GridMeasure& mu) {
  double acc = 0.0;
  std::int64_t nn = mu.num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) {
    Eigen::VectorXd x = mu.node_center(i);
    acc += pair.phi(x) * pair.h(x, mu.at(i));
  }
  acc *= mu.cell_volume();
  for (const auto& piece : mu.singular) {
    if (piece.mass == 0.0) continue;
    PieceSamples s = piece_samples(piece, mu.domain);
    for (size_t i = 0; i < s.points.size(); ++i)
      acc += s.weights[i] * pair.phi(s.points[i]) *
             recession_value(pair.h, s.points[i], piece.polar, RecessionMode::Analytic);
  }
  return acc;
}

EmpiricalYoungMeasure ym_moments(const std::vector<GridMeasure>& sequence,
                                 const std::vector<TestPair>& pairs,
                                 const std::vector<Integrand>& f_extras) {
  if (sequence.empty()) fail("DomainMismatch", "empty measure sequence");
  for (const auto& mu : sequence)
    if (mu.grid != sequence[0].grid || mu.N != sequence[0].N ||
        (mu.domain.lo - sequence[0].domain.lo).norm() > 0 ||
        (mu.domain.hi - sequence[0].domain.hi).norm() > 0)
      fail("DomainMismatch", "sequence measures must share domain, grid, and dimension");

  std::vector<TestPair> all = pairs;
  for (const auto& f : f_extras)
    all.push_back({"1(x)" + f.name, [](const Eigen::VectorXd&) { return 1.0; }, f});

  EmpiricalYoungMeasure out;
  size_t J = sequence.size();
  out.moments.assign(all.size(), std::vector<double>(J, 0.0));
  for (size_t p = 0; p < all.size(); ++p) {
    out.pair_names.push_back(all[p].name);
    for (size_t j = 0; j < J; ++j) out.moments[p][j] = pair_measure(all[p], sequence[j]);
  }
  size_t tail_start = (2 * J) / 3;
  if (tail_start >= J) tail_start = J - 1;
  for (size_t p = 0; p < all.size(); ++p) {
    double tm = 0.0, cs = 0.0;
    for (size_t j = tail_start; j < J; ++j) tm += out.moments[p][j];
    for (size_t j = 0; j < J; ++j) cs += out.moments[p][j];
    out.tail_mean.push_back(tm / static_cast<double>(J - tail_start));
    out.cesaro.push_back(cs / static_cast<double>(J));
    out.last.push_back(out.moments[p][J - 1]);
  }

  // barycenter estimate: average densities, splat singular parts
  const GridMeasure& ref = sequence[0];
  out.barycenter_field = GridMeasure(ref.domain, ref.grid, ref.N);
  for (const auto& mu : sequence) {
    out.barycenter_field.density += mu.density / static_cast<double>(J);
    for (const auto& piece : mu.singular) {
      PieceSamples s = piece_samples(piece, mu.domain);
      for (size_t i = 0; i < s.points.size(); ++i) {
        // radius-1 splat of the piece's share of the average
        GridMeasure& b = out.barycenter_field;
        std::vector<int> idx(b.d());
        bool inside = true;
        for (int k = 0; k < b.d(); ++k) {
          double h = (b.domain.hi(k) - b.domain.lo(k)) / b.grid[k];
          int c = static_cast<int>(std::floor((s.points[i](k) - b.domain.lo(k)) / h));
          if (c < 0 || c >= b.grid[k]) inside = false;
          idx[k] = std::clamp(c, 0, b.grid[k] - 1);
        }
        if (!inside) continue;
        b.at(flat_index(b.grid, idx)) +=
            (s.weights[i] / static_cast<double>(J) / b.cell_volume()) * piece.polar;
      }
    }
  }
  return out;
}

}  // namespace aflib
