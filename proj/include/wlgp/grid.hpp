#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wlgp {

// Strictly increasing, strictly positive observation times.  t = 0 is
// excluded: the processes here start pinned at zero, so the origin
// carries no information and breaks covariance positive-definiteness.
struct TimeGrid {
  std::vector<double> times;
};

inline void validate_grid(const TimeGrid& grid) {
  if (grid.times.empty()) {
    throw std::invalid_argument("grid: must contain at least one time");
  }
  double prev = 0.0;
  for (double t : grid.times) {
    if (!(t > prev)) {
      throw std::invalid_argument(
          "grid: times must be strictly increasing and positive (saw " +
          std::to_string(t) + " after " + std::to_string(prev) + ")");
    }
    prev = t;
  }
}

// {T/n, 2T/n, ..., T}
inline TimeGrid uniform_grid(double horizon, int n) {
  if (!(horizon > 0.0) || n < 1) {
    throw std::invalid_argument("uniform_grid: need horizon > 0 and n >= 1");
  }
  TimeGrid g;
  g.times.reserve(n);
  const double step = horizon / n;
  for (int i = 1; i <= n; ++i) g.times.push_back(step * i);
  return g;
}

// Worker count: explicit request, else LOGRANGE_GP_THREADS, else hardware.
inline int resolve_thread_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LOGRANGE_GP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace wlgp
