#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfstrack/labeled.hpp"
#include "rfstrack/models.hpp"
#include "rfstrack/rfs.hpp"

namespace rfstrack::metrics {

using models::StateVector;

struct OspaParams {
  double cutoff = 1.0;  // c > 0
  double order = 1.0;   // p >= 1

  OspaParams(double c, double p) : cutoff(c), order(p) {
    if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
      throw std::invalid_argument("OspaParams: cutoff must be finite and positive");
    }
    if (!(order >= 1.0) || !std::isfinite(order)) {
      throw std::invalid_argument("OspaParams: order must be finite and >= 1");
    }
  }
};

namespace detail {

/// Minimum-cost injection of the rows into the columns, rows <= cols.
/// Exhaustive search over column subsets/permutations.
inline double min_injection_cost_exhaustive(const std::vector<std::vector<double>>& cost) {
  const std::size_t rows = cost.size();
  const std::size_t cols = cost.front().size();
  std::vector<int> pick(cols);
  std::iota(pick.begin(), pick.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // Permute all columns; the first `rows` entries define the injection.
  std::vector<int> perm(pick);
  std::sort(perm.begin(), perm.end());
  do {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += cost[r][perm[r]];
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Jonker-Volgenant style rectangular assignment with potentials, rows <= cols.
inline double min_injection_cost_auction(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  const int cols = static_cast<int>(cost.front().size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> match(cols + 1, 0);  // match[j] = row assigned to column j (1-based)
  for (int r = 1; r <= rows; ++r) {
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    std::vector<int> way(cols + 1, 0);
    int j0 = 0;
    match[0] = r;
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= cols; ++j) {
    if (match[j] != 0) total += cost[match[j] - 1][j - 1];
  }
  return total;
}

inline double min_injection_cost(const std::vector<std::vector<double>>& cost) {
  if (cost.size() <= 6) return min_injection_cost_exhaustive(cost);
  return min_injection_cost_auction(cost);
}

}  // namespace detail

/// OSPA distance between two finite state sets: for |X| <= |Y|,
///   ( (min-injection sum of min(c, d)^p + c^p (|Y| - |X|)) / |Y| )^(1/p).
/// Symmetric, bounded by the cutoff, zero on equal sets; two empty sets give
/// zero by convention.
inline double ospa(std::span<const StateVector> X, std::span<const StateVector> Y,
                   const OspaParams& params) {
  if (X.empty() && Y.empty()) return 0.0;
  // Canonical argument order: by size, then lexicographically. Equal-size
  // arguments then run the identical arithmetic in both directions, which
  // makes symmetry exact rather than exact-up-to-rounding.
  auto lex_le = [](std::span<const StateVector> p, std::span<const StateVector> q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (Eigen::Index d = 0; d < p[i].size() && d < q[i].size(); ++d) {
        if (p[i][d] != q[i][d]) return p[i][d] < q[i][d];
      }
    }
    return true;
  };
  const bool x_first = X.size() != Y.size() ? X.size() < Y.size() : lex_le(X, Y);
  std::span<const StateVector> a = x_first ? X : Y;
  std::span<const StateVector> b = x_first ? Y : X;
  const double c_p = std::pow(params.cutoff, params.order);
  double assignment_cost = 0.0;
  if (!a.empty()) {
    std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (a[i].size() != b[j].size()) {
          throw std::invalid_argument("ospa: mixed state dimensions");
        }
        const double d = (a[i] - b[j]).norm();
        cost[i][j] = std::pow(std::min(params.cutoff, d), params.order);
      }
    }
    assignment_cost = detail::min_injection_cost(cost);
  }
  const double total = assignment_cost + c_p * static_cast<double>(b.size() - a.size());
  return std::pow(total / static_cast<double>(b.size()), 1.0 / params.order);
}

inline double ospa(const rfs::StateSet& X, const rfs::StateSet& Y, const OspaParams& params) {
  return ospa(std::span(X.elements()), std::span(Y.elements()), params);
}

/// Labels are ignored; only the kinematic states enter the metric.
inline double ospa(const labeled::LabeledStateSet& X, const labeled::LabeledStateSet& Y,
                   const OspaParams& params) {
  const auto xs = X.states();
  const auto ys = Y.states();
  return ospa(std::span(xs), std::span(ys), params);
}

inline std::vector<double> ospa_over_time(std::span<const std::vector<StateVector>> truth,
                                          std::span<const std::vector<StateVector>> est,
                                          const OspaParams& params) {
  if (truth.size() != est.size()) {
    throw std::invalid_argument("ospa_over_time: sequence length mismatch");
  }
  std::vector<double> out;
  out.reserve(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    out.push_back(ospa(std::span(truth[k]), std::span(est[k]), params));
  }
  return out;
}

}  // namespace rfstrack::metrics
