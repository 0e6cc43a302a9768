#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace rfstrack {

/// Uniform 1-D grid with composite trapezoid weights. All desk-scale
/// integrals in this library run on these grids; Gaussian integrands get
/// near-spectral accuracy as long as the window swallows their tails.
struct QuadratureGrid {
  double lo;
  double hi;
  int points;

  QuadratureGrid(double lo_, double hi_, int points_) : lo(lo_), hi(hi_), points(points_) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || hi <= lo) {
      throw std::invalid_argument("QuadratureGrid: window must be finite with hi > lo");
    }
    if (points < 2) {
      throw std::invalid_argument("QuadratureGrid: need at least 2 points");
    }
  }

  double step() const { return (hi - lo) / (points - 1); }

  std::vector<double> nodes() const {
    std::vector<double> x(points);
    const double h = step();
    for (int i = 0; i < points; ++i) x[i] = lo + h * i;
    x.back() = hi;
    return x;
  }

  std::vector<double> weights() const {
    std::vector<double> w(points, step());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
  }
};

inline double logsumexp(std::span<const double> log_terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : log_terms) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;  // all -inf (or a nan dominates)
  double acc = 0.0;
  for (double v : log_terms) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

/// Odometer step over a multi-index with `base` values per digit.
/// Returns false once the index wraps around to all zeros.
inline bool advance_multi_index(std::vector<int>& idx, int base) {
  for (std::size_t d = 0; d < idx.size(); ++d) {
    if (++idx[d] < base) return true;
    idx[d] = 0;
  }
  return false;
}

}  // namespace rfstrack
