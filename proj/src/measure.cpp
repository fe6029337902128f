#include "aflib/measure.hpp"

#include <algorithm>
#include <cmath>

#include "aflib/field.hpp"
#include "aflib/projection.hpp"

namespace aflib {

SingularPiece SingularPiece::atom(Eigen::VectorXd x0, double mass, Eigen::VectorXd polar) {
  if (mass < 0.0) fail("ParseError", "singular mass must be nonnegative");
  double pn = polar.norm();
  if (std::abs(pn - 1.0) > 1e-12) {
    if (pn == 0.0) fail("ParseError", "polar vector must be nonzero");
    polar /= pn;
  }
  SingularPiece p;
  p.kind = Kind::Atom;
  p.x0 = std::move(x0);
  p.mass = mass;
  p.polar = std::move(polar);
  return p;
}

SingularPiece SingularPiece::hyperplane(Eigen::VectorXd xi, double offset, double mass,
                                        Eigen::VectorXd polar) {
  if (mass < 0.0) fail("ParseError", "singular mass must be nonnegative");
  double xn = xi.norm();
  if (xn == 0.0) fail("ParseError", "hyperplane normal must be nonzero");
  xi /= xn;
  double pn = polar.norm();
  if (pn == 0.0) fail("ParseError", "polar vector must be nonzero");
  polar /= pn;
  SingularPiece p;
  p.kind = Kind::Hyperplane;
  p.xi = std::move(xi);
  p.offset = offset / xn;
  p.mass = mass;
  p.polar = std::move(polar);
  return p;
}

GridMeasure::GridMeasure(Box domain_, std::vector<int> grid_, int N_)
    : domain(std::move(domain_)), grid(std::move(grid_)), N(N_) {
  if (static_cast<int>(grid.size()) != domain.d())
    fail("ShapeError", "grid dimension does not match the domain");
  for (int m : grid)
    if (m < 1) fail("ParseError", "grid resolution must be >= 1");
  density = Eigen::VectorXd::Zero(num_nodes() * N);
}

std::int64_t GridMeasure::num_nodes() const {
  std::int64_t n = 1;
  for (int m : grid) n *= m;
  return n;
}

double GridMeasure::cell_volume() const {
  double v = domain.volume();
  for (int m : grid) v /= m;
  return v * 1.0;
}

Eigen::VectorXd GridMeasure::node_center(std::int64_t node) const {
  std::vector<int> idx;
  unflatten(grid, node, idx);
  Eigen::VectorXd x(d());
  for (int i = 0; i < d(); ++i)
    x(i) = domain.lo(i) + (idx[i] + 0.5) * (domain.hi(i) - domain.lo(i)) / grid[i];
  return x;
}

double GridMeasure::total_variation() const {
  double tv = 0.0;
  std::int64_t nn = num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) tv += at(i).norm();
  tv *= cell_volume();
  for (const auto& p : singular) tv += p.mass;
  return tv;
}

double hyperplane_section_measure(const Box& box, const Eigen::VectorXd& xi, double c) {
  int d = box.d();
  // axis-aligned normal: section is a (d-1)-box
  for (int a = 0; a < d; ++a) {
    if (std::abs(std::abs(xi(a)) - 1.0) < 1e-14) {
      double pos = c * xi(a);  // offset along +axis
      if (pos < box.lo(a) || pos > box.hi(a)) return 0.0;
      double m = 1.0;
      for (int i = 0; i < d; ++i)
        if (i != a) m *= box.hi(i) - box.lo(i);
      return m;
    }
  }
  if (d != 2)
    fail("ParseError", "general hyperplane directions are supported in d = 2 only");
  // clip the line {x.xi = c} to the box, return the segment length
  Eigen::Vector2d tau(-xi(1), xi(0));
  Eigen::Vector2d p0 = c * Eigen::Vector2d(xi(0), xi(1));
  double tmin = -1e300, tmax = 1e300;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(tau(i)) < 1e-15) {
      if (p0(i) < box.lo(i) || p0(i) > box.hi(i)) return 0.0;
      continue;
    }
    double t1 = (box.lo(i) - p0(i)) / tau(i);
    double t2 = (box.hi(i) - p0(i)) / tau(i);
    tmin = std::max(tmin, std::min(t1, t2));
    tmax = std::min(tmax, std::max(t1, t2));
  }
  return std::max(0.0, tmax - tmin);
}

PieceSamples piece_samples(const SingularPiece& piece, const Box& domain, int resolution) {
  PieceSamples s;
  if (piece.kind == SingularPiece::Kind::Atom) {
    if (!domain.contains(piece.x0)) return s;
    s.points.push_back(piece.x0);
    s.weights.push_back(piece.mass);
    return s;
  }
  int d = domain.d();
  // axis-aligned normal
  for (int a = 0; a < d; ++a) {
    if (std::abs(std::abs(piece.xi(a)) - 1.0) < 1e-14) {
      double pos = piece.offset * piece.xi(a);
      if (pos < domain.lo(a) || pos > domain.hi(a)) return s;
      std::vector<int> res;
      std::vector<int> axes;
      for (int i = 0; i < d; ++i)
        if (i != a) {
          axes.push_back(i);
          res.push_back(resolution);
        }
      std::int64_t total = 1;
      for (int r : res) total *= r;
      double w = piece.mass / static_cast<double>(total);
      std::vector<int> idx;
      for (std::int64_t node = 0; node < total; ++node) {
        unflatten(res, node, idx);
        Eigen::VectorXd x(d);
        x(a) = pos;
        for (size_t i = 0; i < axes.size(); ++i) {
          int ax = axes[i];
          x(ax) = domain.lo(ax) + (idx[i] + 0.5) * (domain.hi(ax) - domain.lo(ax)) / res[i];
        }
        s.points.push_back(x);
        s.weights.push_back(w);
      }
      return s;
    }
  }
  if (d != 2)
    fail("ParseError", "general hyperplane directions are supported in d = 2 only");
  Eigen::Vector2d tau(-piece.xi(1), piece.xi(0));
  Eigen::Vector2d p0 = piece.offset * Eigen::Vector2d(piece.xi(0), piece.xi(1));
  double tmin = -1e300, tmax = 1e300;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(tau(i)) < 1e-15) {
      if (p0(i) < domain.lo(i) || p0(i) > domain.hi(i)) return s;
      continue;
    }
    double t1 = (domain.lo(i) - p0(i)) / tau(i);
    double t2 = (domain.hi(i) - p0(i)) / tau(i);
    tmin = std::max(tmin, std::min(t1, t2));
    tmax = std::min(tmax, std::max(t1, t2));
  }
  if (tmax <= tmin) return s;
  double w = piece.mass / resolution;
  for (int i = 0; i < resolution; ++i) {
    double t = tmin + (i + 0.5) * (tmax - tmin) / resolution;
    Eigen::VectorXd x = p0 + t * tau;
    s.points.push_back(x);
    s.weights.push_back(w);
  }
  return s;
}

double evaluate_functional(const Integrand& f, const GridMeasure& mu, RecessionMode mode) {
  double acc = 0.0;
  std::int64_t nn = mu.num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) acc += f(mu.node_center(i), mu.at(i));
  acc *= mu.cell_volume();
  for (const auto& piece : mu.singular) {
    if (piece.mass == 0.0) continue;
    if (mode == RecessionMode::Analytic && !f.analytic_recession.has_value())
      fail("MissingRecession",
           "integrand has no analytic recession but the measure has a singular part");
    PieceSamples s = piece_samples(piece, mu.domain);
    for (size_t i = 0; i < s.points.size(); ++i)
      acc += s.weights[i] * recession_value(f, s.points[i], piece.polar, mode);
  }
  return acc;
}

double area_functional(const GridMeasure& mu) {
  double acc = 0.0;
  std::int64_t nn = mu.num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) acc += std::sqrt(1.0 + mu.at(i).squaredNorm());
  acc *= mu.cell_volume();
  for (const auto& piece : mu.singular) acc += piece.mass;
  return acc;
}

namespace {

// distributes weight w over the cells around x; per-source renormalization over
// in-domain targets keeps total mass exact
void splat(GridMeasure& out, const Eigen::VectorXd& x, const Eigen::VectorXd& payload,
           const std::vector<double>& w1, int radius) {
  int d = out.d();
  std::vector<int> base(d), lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    double h = (out.domain.hi(i) - out.domain.lo(i)) / out.grid[i];
    double rel = (x(i) - out.domain.lo(i)) / h - 0.5;
    base[i] = static_cast<int>(std::lround(rel));
    lo[i] = std::max(0, base[i] - radius);
    hi[i] = std::min(out.grid[i] - 1, base[i] + radius);
    if (lo[i] > hi[i]) return;
  }
  // tensor weights over the valid window
  std::vector<int> idx(d);
  double total = 0.0;
  std::function<void(int, double, bool)> walk = [&](int axis, double wacc, bool accumulate) {
    if (axis == d) {
      if (accumulate) {
        std::int64_t node = flat_index(out.grid, idx);
        out.at(node) += payload * (wacc / total / out.cell_volume());
      } else {
        total += wacc;
      }
      return;
    }
    for (int i = lo[axis]; i <= hi[axis]; ++i) {
      int off = i - base[axis];
      idx[axis] = i;
      walk(axis + 1, wacc * w1[off + radius], accumulate);
    }
  };
  walk(0, 1.0, false);
  if (total <= 0.0) return;
  walk(0, 1.0, true);
}

}  // namespace

GridMeasure mollify_measure(const GridMeasure& mu, int eps_cells) {
  if (eps_cells < 1) fail("ParseError", "mollification radius must be >= 1 cell");
  std::vector<double> w1 = bump_weights_1d(eps_cells);
  GridMeasure out(mu.domain, mu.grid, mu.N);

  // density: separable per-axis smoothing with per-source renormalization
  Eigen::VectorXd cur = mu.density;
  std::int64_t nn = mu.num_nodes();
  std::vector<int> idx;
  for (int axis = 0; axis < mu.d(); ++axis) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(cur.size());
    for (std::int64_t node = 0; node < nn; ++node) {
      unflatten(mu.grid, node, idx);
      int lo = std::max(0, idx[axis] - eps_cells);
      int hi = std::min(mu.grid[axis] - 1, idx[axis] + eps_cells);
      double total = 0.0;
      for (int i = lo; i <= hi; ++i) total += w1[i - idx[axis] + eps_cells];
      std::vector<int> tgt = idx;
      for (int i = lo; i <= hi; ++i) {
        tgt[axis] = i;
        std::int64_t t = flat_index(mu.grid, tgt);
        double w = w1[i - idx[axis] + eps_cells] / total;
        for (int c = 0; c < mu.N; ++c) next(t * mu.N + c) += w * cur(node * mu.N + c);
      }
    }
    cur.swap(next);
  }
  out.density = cur;

  for (const auto& piece : mu.singular) {
    PieceSamples s = piece_samples(piece, mu.domain);
    for (size_t i = 0; i < s.points.size(); ++i)
      splat(out, s.points[i], Eigen::VectorXd(s.weights[i] * piece.polar), w1, eps_cells);
  }
  return out;
}

GridMeasure blowup_measure(const GridMeasure& mu, const Eigen::VectorXd& x0, double r,
                           BlowupScaling scaling) {
  if (!(r > 0.0)) fail("NonPositiveScale", "blow-up radius must be positive");
  int d = mu.d();
  Box window{Eigen::VectorXd(x0.array() - 0.5 * r), Eigen::VectorXd(x0.array() + 0.5 * r)};
  for (int i = 0; i < d; ++i)
    if (window.lo(i) < mu.domain.lo(i) || window.hi(i) > mu.domain.hi(i))
      fail("OutOfDomain", "blow-up window leaves the domain");

  // |mu|(Q_r(x0)) for the mass normalization
  double tv_window = 0.0;
  {
    std::int64_t nn = mu.num_nodes();
    for (std::int64_t i = 0; i < nn; ++i)
      if (window.contains(mu.node_center(i))) tv_window += mu.at(i).norm() * mu.cell_volume();
    for (const auto& piece : mu.singular) {
      if (piece.kind == SingularPiece::Kind::Atom) {
        if (window.contains(piece.x0)) tv_window += piece.mass;
      } else {
        double inside = hyperplane_section_measure(window, piece.xi, piece.offset);
        double whole = hyperplane_section_measure(mu.domain, piece.xi, piece.offset);
        if (whole > 0.0) tv_window += piece.mass * inside / whole;
      }
    }
  }
  double c;
  if (scaling == BlowupScaling::Lebesgue) {
    c = std::pow(r, -d);
  } else {
    if (tv_window <= 0.0) fail("OutOfDomain", "mass scaling needs |mu|(Q_r(x0)) > 0");
    c = 1.0 / tv_window;
  }

  GridMeasure out(Box::unit_cube(d), mu.grid, mu.N);
  double crd = c * std::pow(r, d);
  std::int64_t nn = out.num_nodes();
  std::vector<int> src_idx(d);
  for (std::int64_t node = 0; node < nn; ++node) {
    Eigen::VectorXd y = out.node_center(node);
    Eigen::VectorXd x = x0 + r * y;
    for (int i = 0; i < d; ++i) {
      double h = (mu.domain.hi(i) - mu.domain.lo(i)) / mu.grid[i];
      int j = static_cast<int>(std::floor((x(i) - mu.domain.lo(i)) / h));
      src_idx[i] = std::clamp(j, 0, mu.grid[i] - 1);
    }
    out.at(node) = crd * mu.at(flat_index(mu.grid, src_idx));
  }
  for (const auto& piece : mu.singular) {
    if (piece.kind == SingularPiece::Kind::Atom) {
      if (!window.contains(piece.x0)) continue;
      Eigen::VectorXd y = (piece.x0 - x0) / r;
      out.singular.push_back(SingularPiece::atom(y, c * piece.mass, piece.polar));
    } else {
      double inside = hyperplane_section_measure(window, piece.xi, piece.offset);
      double whole = hyperplane_section_measure(mu.domain, piece.xi, piece.offset);
      if (inside <= 0.0 || whole <= 0.0) continue;
      double new_offset = (piece.offset - x0.dot(piece.xi)) / r;
      out.singular.push_back(SingularPiece::hyperplane(
          piece.xi, new_offset, c * piece.mass * inside / whole, piece.polar));
    }
  }
  return out;
}

std::vector<PolarCheck> singular_polar_check(const GridMeasure& mu, const OperatorSpec& op) {
  std::vector<PolarCheck> checks;
  SphereSampling sampling = SphereSampling::standard(op.d());
  for (size_t i = 0; i < mu.singular.size(); ++i) {
    WaveConeReport rep = wavecone_membership(op, mu.singular[i].polar, sampling);
    checks.push_back({static_cast<int>(i), rep.member, rep.residual, rep.witness_xi});
  }
  return checks;
}

GridMeasure read_measure_file(const std::string& path) {
  json j = read_json_file(path);
  Box box{json_to_vector(j.at("domain").at("lo")), json_to_vector(j.at("domain").at("hi"))};
  std::vector<int> grid = j.at("grid").get<std::vector<int>>();
  int N = j.at("N").get<int>();
  GridMeasure mu(box, grid, N);
  if (j.contains("density_file")) {
    std::string dir;
    auto slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash + 1);
    PeriodicField f = read_field(dir + j["density_file"].get<std::string>());
    if (f.grid != grid || f.N != N) fail("ShapeError", "density file does not match header");
    mu.density = f.values;
  } else if (j.contains("density")) {
    Eigen::VectorXd v = json_to_vector(j["density"]);
    if (v.size() != mu.density.size()) fail("ShapeError", "inline density has wrong length");
    mu.density = v;
  }
  for (const auto& p : j.value("singular", json::array())) {
    std::string type = p.at("type").get<std::string>();
    if (type == "atom")
      mu.singular.push_back(SingularPiece::atom(json_to_vector(p.at("x0")),
                                                p.at("mass").get<double>(),
                                                json_to_vector(p.at("polar"))));
    else if (type == "hyperplane")
      mu.singular.push_back(SingularPiece::hyperplane(
          json_to_vector(p.at("xi")), p.at("c").get<double>(), p.at("mass").get<double>(),
          json_to_vector(p.at("polar"))));
    else
      fail("ParseError", "singular piece type must be atom or hyperplane");
  }
  return mu;
}

void write_measure_file(const std::string& path, const GridMeasure& mu,
                        const std::string& density_file) {
  json j;
  j["domain"] = {{"lo", vector_to_json(mu.domain.lo)}, {"hi", vector_to_json(mu.domain.hi)}};
  j["grid"] = mu.grid;
  j["N"] = mu.N;
  if (!density_file.empty()) {
    PeriodicField f(mu.grid, mu.N);
    f.values = mu.density;
    std::string dir;
    auto slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash + 1);
    write_field(dir + density_file, f);
    j["density_file"] = density_file;
  } else {
    j["density"] = vector_to_json(mu.density);
  }
  json pieces = json::array();
  for (const auto& p : mu.singular) {
    if (p.kind == SingularPiece::Kind::Atom)
      pieces.push_back({{"type", "atom"},
                        {"x0", vector_to_json(p.x0)},
                        {"mass", p.mass},
                        {"polar", vector_to_json(p.polar)}});
    else
      pieces.push_back({{"type", "hyperplane"},
                        {"xi", vector_to_json(p.xi)},
                        {"c", p.offset},
                        {"mass", p.mass},
                        {"polar", vector_to_json(p.polar)}});
  }
  j["singular"] = pieces;
  write_json_file(path, j);
}

}  // namespace aflib
