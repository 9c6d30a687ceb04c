#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fockconc {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Thrown when an input violates an operation's precondition.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot deliver its contract
/// (non-convergence, tolerance not reachable, overflow).
class numerical_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by the text/binary readers on malformed files.
class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Process-wide worker count used by the parallel loops. 0 means "machine parallelism".
inline std::atomic<unsigned>& worker_setting() {
  static std::atomic<unsigned> w{0};
  return w;
}

inline void set_workers(unsigned n) { worker_setting().store(n); }

inline unsigned workers() {
  unsigned w = worker_setting().load();
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return w;
}

/// Runs fn(i) for i in [0, n) split into contiguous chunks over workers().
/// Every index is visited exactly once, so results written per-index are
/// independent of the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t w = std::min<std::size_t>(workers(), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

/// Neumaier-compensated accumulator.
template <class T>
class compensated_sum {
 public:
  void add(T x) {
    T t = sum_ + x;
    if constexpr (std::is_same_v<T, cplx>) {
      comp_ += cplx(neumaier(sum_.real(), x.real(), t.real()), neumaier(sum_.imag(), x.imag(), t.imag()));
    } else {
      comp_ += neumaier(sum_, x, t);
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  static double neumaier(double s, double x, double t) {
    return std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
  }
  T sum_{};
  T comp_{};
};

/// Shortest text form that round-trips a double (17 significant digits).
inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline double log_factorial(unsigned k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace fockconc
