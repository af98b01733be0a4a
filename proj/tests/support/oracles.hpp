#pragma once
// Independent reference implementations used as test oracles. Nothing here
// calls into the library's fitting or plant code.

#include <array>
#include <cmath>
#include <vector>

namespace oracle {

// Reference cohort: per-subject slopes with their JND and Weber values.
inline constexpr std::array<double, 10> kCohortK = {5.048, 11.15, 3.846, 2.478, 4.989,
                                                   8.557, 2.477, 5.008, 4.574, 5.102};
inline constexpr std::array<double, 10> kCohortJnd = {0.218, 0.099, 0.286, 0.443, 0.220,
                                                     0.128, 0.444, 0.219, 0.240, 0.215};
inline constexpr std::array<double, 10> kCohortWeber = {10.88, 4.927, 14.28, 22.17, 11.01,
                                                       6.419, 22.18, 10.97, 12.01, 10.77};
inline constexpr double kPooledK = 4.678;
inline constexpr double kPooledJnd = 0.235;
inline constexpr double kPooledWeber = 11.74;

inline constexpr std::array<double, 7> kTestPressures = {1.5, 1.75, 1.875, 2.0, 2.125, 2.25, 2.5};
inline constexpr double kReference = 2.0;

inline double sigmoid_percent(double p, double p0, double k) {
  return 100.0 / (1.0 + std::exp(-k * (p - p0)));
}

struct Point {
  double p;
  double q;
};

inline double residual(const std::vector<Point>& pts, double p0, double k) {
  double s = 0.0;
  for (const Point& pt : pts) {
    const double r = pt.q - sigmoid_percent(pt.p, p0, k);
    s += r * r;
  }
  return s;
}

// Exhaustive scan of k over [lo, hi] at fixed resolution.
inline double grid_search_k(const std::vector<Point>& pts, double p0, double lo = 0.01,
                            double hi = 100.0, double step = 1e-4) {
  double best_k = lo;
  double best = residual(pts, p0, lo);
  const long n = std::lround((hi - lo) / step);
  for (long i = 1; i <= n; ++i) {
    const double k = lo + step * static_cast<double>(i);
    const double r = residual(pts, p0, k);
    if (r < best) {
      best = r;
      best_k = k;
    }
  }
  return best_k;
}

// First-order fill from p toward reg: time to reach level.
inline double fill_crossing_time(double p, double reg, double level, double tau) {
  return tau * std::log((reg - p) / (reg - level));
}

}  // namespace oracle
