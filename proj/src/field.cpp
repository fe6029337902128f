#include "aflib/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace aflib {

PeriodicField::PeriodicField(std::vector<int> grid_, int N_) : grid(std::move(grid_)), N(N_) {
  for (int m : grid)
    if (m < 1) fail("ParseError", "grid resolution must be >= 1");
  if (N < 1) fail("ParseError", "field must have at least one component");
  values = Eigen::VectorXd::Zero(num_nodes() * N);
}

std::int64_t PeriodicField::num_nodes() const {
  std::int64_t n = 1;
  for (int m : grid) n *= m;
  return n;
}

double PeriodicField::dx() const {
  double v = 1.0;
  for (int m : grid) v /= m;
  return v;
}

Eigen::VectorXd PeriodicField::node_center(std::int64_t node) const {
  std::vector<int> idx;
  unflatten(grid, node, idx);
  Eigen::VectorXd x(d());
  for (int i = 0; i < d(); ++i) x(i) = (idx[i] + 0.5) / grid[i] - 0.5;
  return x;
}

Eigen::VectorXd PeriodicField::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(N);
  std::int64_t nn = num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) m += at(i);
  return m / static_cast<double>(nn);
}

void PeriodicField::subtract_mean() {
  Eigen::VectorXd m = mean();
  std::int64_t nn = num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) at(i) -= m;
}

double PeriodicField::l2_norm() const { return values.norm() * std::sqrt(dx()); }

double PeriodicField::l1_norm() const {
  double s = 0.0;
  std::int64_t nn = num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) s += at(i).norm();
  return s * dx();
}

double PeriodicField::sup_norm() const {
  double s = 0.0;
  std::int64_t nn = num_nodes();
  for (std::int64_t i = 0; i < nn; ++i) s = std::max(s, at(i).norm());
  return s;
}

std::int64_t flat_index(const std::vector<int>& grid, const std::vector<int>& idx) {
  std::int64_t f = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    int j = idx[i] % grid[i];
    if (j < 0) j += grid[i];
    f = f * grid[i] + j;
  }
  return f;
}

void unflatten(const std::vector<int>& grid, std::int64_t node, std::vector<int>& idx) {
  idx.resize(grid.size());
  for (size_t i = grid.size(); i-- > 0;) {
    idx[i] = static_cast<int>(node % grid[i]);
    node /= grid[i];
  }
}

int lattice_frequency(int index, int M) {
  return (index <= (M - 1) / 2) ? index : index - M;
}

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanKey {
  std::vector<int> grid;
  int N;
  int sign;
  bool operator<(const PlanKey& o) const {
    return std::tie(grid, N, sign) < std::tie(o.grid, o.N, o.sign);
  }
};

struct PlanCache {
  std::map<PlanKey, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

fftw_plan get_plan(const std::vector<int>& grid, int N, int sign,
                   std::complex<double>* buf) {
  static PlanCache cache_holder;
  auto& cache = cache_holder.plans;
  std::lock_guard<std::mutex> lock(planner_mutex());
  PlanKey key{grid, N, sign};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<int> dims(grid.begin(), grid.end());
  // interleaved components: stride N, distance 1, N transforms
  fftw_plan p = fftw_plan_many_dft(
      static_cast<int>(dims.size()), dims.data(), N, reinterpret_cast<fftw_complex*>(buf),
      nullptr, N, 1, reinterpret_cast<fftw_complex*>(buf), nullptr, N, 1, sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) fail("IoError", "FFTW plan creation failed");
  cache.emplace(key, p);
  return p;
}

}  // namespace

void fft_forward(const PeriodicField& u, std::vector<std::complex<double>>& coeffs) {
  std::int64_t total = u.num_nodes() * u.N;
  coeffs.resize(total);
  for (std::int64_t i = 0; i < total; ++i) coeffs[i] = u.values(i);
  fftw_plan p = get_plan(u.grid, u.N, FFTW_FORWARD, coeffs.data());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(coeffs.data()),
                   reinterpret_cast<fftw_complex*>(coeffs.data()));
  double scale = 1.0 / static_cast<double>(u.num_nodes());
  for (auto& c : coeffs) c *= scale;
}

void fft_inverse(const std::vector<int>& grid, int N,
                 const std::vector<std::complex<double>>& coeffs, PeriodicField& out,
                 double* imag_residue) {
  out = PeriodicField(grid, N);
  std::int64_t total = out.num_nodes() * N;
  if (static_cast<std::int64_t>(coeffs.size()) != total)
    fail("GridMismatch", "coefficient array does not match grid");
  std::vector<std::complex<double>> buf(coeffs);
  fftw_plan p = get_plan(grid, N, FFTW_BACKWARD, buf.data());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(buf.data()));
  double imag2 = 0.0;
  for (std::int64_t i = 0; i < total; ++i) {
    out.values(i) = buf[i].real();
    imag2 += buf[i].imag() * buf[i].imag();
  }
  if (imag_residue) *imag_residue = std::sqrt(imag2 * out.dx());
}

void write_field(const std::string& path, const PeriodicField& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("IoError", "cannot open for writing: " + path);
  auto put_i64 = [&](std::int64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    f.write(reinterpret_cast<char*>(b), 8);
  };
  put_i64(u.d());
  put_i64(u.N);
  for (int m : u.grid) put_i64(m);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    double v = u.values(i);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int j = 0; j < 8; ++j) b[j] = static_cast<unsigned char>((bits >> (8 * j)) & 0xff);
    f.write(reinterpret_cast<char*>(b), 8);
  }
}

PeriodicField read_field(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("IoError", "cannot open for reading: " + path);
  auto get_i64 = [&]() {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    if (!f) fail("ParseError", "truncated field file: " + path);
    std::int64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  };
  std::int64_t d = get_i64();
  std::int64_t N = get_i64();
  if (d < 1 || d > 8 || N < 1 || N > 4096) fail("ParseError", "implausible field header");
  std::vector<int> grid(d);
  for (auto& m : grid) m = static_cast<int>(get_i64());
  PeriodicField u(grid, static_cast<int>(N));
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    if (!f) fail("ParseError", "truncated field file: " + path);
    std::uint64_t bits = 0;
    for (int j = 7; j >= 0; --j) bits = (bits << 8) | b[j];
    double v;
    std::memcpy(&v, &bits, 8);
    u.values(i) = v;
  }
  return u;
}

PeriodicField read_field_csv(const std::string& path, int M1, int M2, int N) {
  std::ifstream f(path);
  if (!f) fail("IoError", "cannot open for reading: " + path);
  PeriodicField u({M1, M2}, N);
  std::string line;
  std::int64_t rows = 0;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (static_cast<int>(vals.size()) != 2 + N)
      fail("ParseError", "CSV row must be i,j,v_1..v_N");
    int i = static_cast<int>(vals[0]), j = static_cast<int>(vals[1]);
    if (i < 0 || i >= M1 || j < 0 || j >= M2) fail("ParseError", "CSV index out of range");
    std::int64_t node = static_cast<std::int64_t>(i) * M2 + j;
    for (int c = 0; c < N; ++c) u.values(node * N + c) = vals[2 + c];
    ++rows;
  }
  if (rows != static_cast<std::int64_t>(M1) * M2)
    fail("ParseError", "CSV does not cover the full grid");
  return u;
}

}  // namespace aflib
