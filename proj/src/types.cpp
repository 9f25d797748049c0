#include "torusflow/types.hpp"

#include <algorithm>
#include <atomic>

namespace torusflow {

namespace {
std::atomic<int> g_threads{0};
}

std::vector<Vec> halton_points(int n, int dim, int skip) {
  static const unsigned bases[kMaxDim] = {2, 3, 5, 7};
  if (dim < 1 || dim > kMaxDim) throw ConfigError("halton_points: bad dim");
  std::vector<Vec> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec p(dim);
    for (int j = 0; j < dim; ++j)
      p[j] = radical_inverse(static_cast<std::uint64_t>(skip + i + 1), bases[j]);
    pts.push_back(p);
  }
  return pts;
}

std::vector<Vec> midpoint_grid(int m, int dim) {
  std::vector<Vec> pts;
  std::size_t total = 1;
  for (int j = 0; j < dim; ++j) total *= static_cast<std::size_t>(m);
  pts.reserve(total);
  std::vector<int> idx(dim, 0);
  for (std::size_t c = 0; c < total; ++c) {
    Vec p(dim);
    for (int j = 0; j < dim; ++j) p[j] = (idx[j] + 0.5) / m;
    pts.push_back(p);
    for (int j = dim - 1; j >= 0; --j) {
      if (++idx[j] < m) break;
      idx[j] = 0;
    }
  }
  return pts;
}

void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (threads <= 0) threads = default_threads();
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (nt <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    std::size_t b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

int default_threads() {
  int v = g_threads.load();
  if (v > 0) return v;
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 4;
}

void set_default_threads(int n) { g_threads.store(n); }

}  // namespace torusflow
