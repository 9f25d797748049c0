#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace torusflow {

/// Points and fields live on the d-torus with 2 <= d <= 4. Vectors are
/// dynamically sized but stack-allocated (no heap traffic in hot loops).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1, 0, 4, 1>;

constexpr int kMinDim = 2;
constexpr int kMaxDim = 4;

inline constexpr double two_pi = 6.283185307179586476925286766559;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Componentwise x - floor(x), i.e. the representative in [0,1)^d.
inline Vec wrap_unit(const Vec& x) {
  Vec y = x;
  for (int i = 0; i < y.size(); ++i) y[i] -= std::floor(y[i]);
  return y;
}

/// Componentwise floor, as the winding count of a lifted point.
inline IVec winding_of(const Vec& x) {
  IVec w(x.size());
  for (int i = 0; i < x.size(); ++i)
    w[i] = static_cast<std::int64_t>(std::floor(x[i]));
  return w;
}

inline Vec make_vec(std::initializer_list<double> v) {
  Vec x(static_cast<int>(v.size()));
  int i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

/// Van der Corput radical inverse in the given base.
inline double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

/// First n points of the d-dimensional Halton sequence (bases 2,3,5,7),
/// skipping `skip` leading points.
std::vector<Vec> halton_points(int n, int dim, int skip = 0);

/// Uniform tensor grid of midpoints, m per axis, in [0,1)^d.
std::vector<Vec> midpoint_grid(int m, int dim);

/// Runs fn(begin, end) over [0,n) split into contiguous chunks, one per
/// worker. Caller is responsible for combining results in chunk order if
/// determinism matters.
void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

/// Global worker count used by default across the library (set from the CLI
/// --threads flag; defaults to hardware concurrency).
int default_threads();
void set_default_threads(int n);

}  // namespace torusflow
