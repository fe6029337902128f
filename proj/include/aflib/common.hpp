#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aflib {

// All recoverable failures are reported as Error with a stable machine-readable
// kind string ("ParseError", "ShapeError", ...). The CLI maps kinds into the
// structured error object of its JSON reports.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& message) {
  throw Error(kind, message);
}

// Deterministic uniform/normal generator. Uses splitmix64 so that streams are
// reproducible across standard libraries (std::normal_distribution is not).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in (0,1); never returns 0 so log() below is safe
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Number of worker threads: min(hardware, AFLIB_THREADS if set).
int max_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks; results
// must be written to disjoint slots so the outcome is order-independent.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace aflib
