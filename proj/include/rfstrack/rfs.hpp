#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "rfstrack/association.hpp"
#include "rfstrack/models.hpp"
#include "rfstrack/quadrature.hpp"
#include "rfstrack/random.hpp"

namespace rfstrack::rfs {

using association::Mta;
using association::TrackSet;
using models::GaussianDensity;
using models::Measurement;
using models::SensorModel;
using models::StateVector;

namespace detail {

inline bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

inline std::vector<Eigen::VectorXd> canonicalize(std::vector<Eigen::VectorXd> v, const char* what) {
  for (const auto& e : v) {
    if (e.size() == 0 || !e.allFinite()) {
      throw std::invalid_argument(std::string(what) + ": elements must be finite and nonempty");
    }
    if (e.size() != v.front().size()) {
      throw std::invalid_argument(std::string(what) + ": mixed element dimensions");
    }
  }
  std::sort(v.begin(), v.end(), lex_less);
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i - 1] == v[i]) {
      throw std::invalid_argument(std::string(what) + ": duplicate elements");
    }
  }
  return v;
}

/// Splits [0, extent) into chunks, evaluates `partial` on each (possibly on
/// worker threads), and reduces the chunk sums in index order so the result
/// does not depend on scheduling.
inline double parallel_outer_sum(int extent, const std::function<double(int, int)>& partial) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int chunks = static_cast<int>(std::min<unsigned>(hw, 8));
  if (chunks <= 1 || extent < 2 * chunks) return partial(0, extent);
  std::vector<double> sums(chunks, 0.0);
  std::vector<std::thread> workers;
  const int step = (extent + chunks - 1) / chunks;
  for (int c = 0; c < chunks; ++c) {
    const int b = c * step;
    const int e = std::min(extent, b + step);
    if (b >= e) break;
    workers.emplace_back([&sums, &partial, c, b, e] { sums[c] = partial(b, e); });
  }
  for (auto& t : workers) t.join();
  double acc = 0.0;
  for (double s : sums) acc += s;
  return acc;
}

}  // namespace detail

/// Finite set of states, stored canonically sorted (lexicographic on
/// coordinates). The ordering is for deterministic iteration only and never
/// affects values. Exact duplicates are rejected.
class StateSet {
 public:
  StateSet() = default;
  explicit StateSet(std::vector<StateVector> elements)
      : elements_(detail::canonicalize(std::move(elements), "StateSet")) {}

  const std::vector<StateVector>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }

 private:
  std::vector<StateVector> elements_;
};

class MeasurementSet {
 public:
  MeasurementSet() = default;
  explicit MeasurementSet(std::vector<Measurement> elements)
      : elements_(detail::canonicalize(std::move(elements), "MeasurementSet")) {}

  const std::vector<Measurement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }

 private:
  std::vector<Measurement> elements_;
};

/// Multitarget density with a cardinality bound. The evaluator is defined on
/// ordered element lists and must be symmetric; on lists with tied elements
/// it is the continuous extension of the set function, which is what grid
/// quadrature needs (collapsing ties to smaller sets would cost O(h) accuracy).
struct MultitargetDensity {
  std::function<double(const std::vector<StateVector>&)> evaluator;
  int max_cardinality = 0;

  double operator()(const std::vector<StateVector>& elements) const { return evaluator(elements); }
  double operator()(const StateSet& X) const { return evaluator(X.elements()); }
};

/// Multitarget likelihood f(Z|X) of the standard detection/clutter model:
/// the sum over all MTAs of
///   exp(-lambda) * kappa^(Z-Z_alpha) * prod_miss (1-p_D) * prod_det p_D f(z|x).
/// This grouping is algebraically identical to the (1-p_D)^X-prefactor form
/// but stays finite for p_D = 1 and kappa = 0. Defined on ordered element
/// lists; the value is invariant under reorderings of Z and X.
inline double log_multitarget_likelihood(std::span<const Measurement> Z,
                                         std::span<const StateVector> X, const SensorModel& s) {
  const int n = static_cast<int>(X.size());
  const int m = static_cast<int>(Z.size());
  association::check_exhaustive_guard(n, m);
  const double pd = s.detection_probability();
  const double log_pd = pd > 0.0 ? std::log(pd) : -std::numeric_limits<double>::infinity();
  const double log_q = pd < 1.0 ? std::log(1.0 - pd) : -std::numeric_limits<double>::infinity();
  std::vector<double> log_kappa(Z.size());
  for (std::size_t j = 0; j < Z.size(); ++j) {
    const double k = s.clutter_intensity(Z[j]);
    log_kappa[j] = k > 0.0 ? std::log(k) : -std::numeric_limits<double>::infinity();
  }
  std::vector<double> log_terms;
  for (const Mta& a : association::enumerate_mtas(n, m)) {
    double lt = -s.clutter_rate();
    std::vector<char> assigned(Z.size(), 0);
    for (int i = 0; i < n; ++i) {
      if (a(i) > 0) assigned[a(i) - 1] = 1;
    }
    for (int j = 0; j < m; ++j) {
      if (!assigned[j]) lt += log_kappa[j];
    }
    for (int i = 0; i < n; ++i) {
      if (a(i) == 0) {
        lt += log_q;
      } else {
        lt += log_pd + models::log_single_likelihood(Z[a(i) - 1], X[i], s);
      }
    }
    log_terms.push_back(lt);
  }
  return logsumexp(log_terms);
}

inline double multitarget_likelihood(std::span<const Measurement> Z, std::span<const StateVector> X,
                                     const SensorModel& s) {
  const int n = static_cast<int>(X.size());
  const int m = static_cast<int>(Z.size());
  association::check_exhaustive_guard(n, m);
  const double pd = s.detection_probability();
  double total = 0.0;
  for (const Mta& a : association::enumerate_mtas(n, m)) {
    double t = std::exp(-s.clutter_rate());
    std::vector<char> assigned(Z.size(), 0);
    for (int i = 0; i < n; ++i) {
      if (a(i) > 0) assigned[a(i) - 1] = 1;
    }
    for (int j = 0; j < m; ++j) {
      if (!assigned[j]) t *= s.clutter_intensity(Z[j]);
    }
    for (int i = 0; i < n; ++i) {
      t *= a(i) == 0 ? (1.0 - pd) : pd * models::single_likelihood(Z[a(i) - 1], X[i], s);
    }
    total += t;
  }
  return total;
}

inline double log_multitarget_likelihood(const MeasurementSet& Z, const StateSet& X,
                                         const SensorModel& s) {
  return log_multitarget_likelihood(std::span(Z.elements()), std::span(X.elements()), s);
}

inline double multitarget_likelihood(const MeasurementSet& Z, const StateSet& X,
                                     const SensorModel& s) {
  return multitarget_likelihood(std::span(Z.elements()), std::span(X.elements()), s);
}

/// Independent oracle for f(Z|X): the direct sum over ordered partitions
/// W_0 + W_1 + ... + W_n = Z (every assignment of each measurement to the
/// clutter cell or one of the n target cells), with per-cell values
///   1-p_D if W_i is empty, p_D f(z|x_i) if W_i = {z}, 0 if |W_i| > 1.
/// Enumerates all (n+1)^m assignments including the vanishing ones, so it is
/// a genuinely different summation than the MTA enumeration.
inline double multitarget_likelihood_partition_oracle(std::span<const Measurement> Z,
                                                      std::span<const StateVector> X,
                                                      const SensorModel& s) {
  const int n = static_cast<int>(X.size());
  const int m = static_cast<int>(Z.size());
  if (n > 8 || m > 8) {
    throw std::invalid_argument("partition oracle restricted to n,m <= 8");
  }
  const double pd = s.detection_probability();
  const double e_lambda = std::exp(-s.clutter_rate());
  double total = 0.0;
  std::vector<int> cell(static_cast<std::size_t>(m), 0);  // cell[j] in {0..n}
  std::vector<int> load(static_cast<std::size_t>(n) + 1, 0);
  do {
    std::fill(load.begin(), load.end(), 0);
    bool vanishes = false;
    for (int j = 0; j < m; ++j) {
      if (++load[cell[j]] > 1 && cell[j] > 0) {
        vanishes = true;  // |W_i| > 1 for a target cell
        break;
      }
    }
    if (!vanishes) {
      double t = e_lambda;
      for (int j = 0; j < m; ++j) {
        if (cell[j] == 0) t *= s.clutter_intensity(Z[j]);
      }
      for (int i = 1; i <= n; ++i) {
        if (load[i] == 0) {
          t *= 1.0 - pd;
        } else {
          for (int j = 0; j < m; ++j) {
            if (cell[j] == i) t *= pd * models::single_likelihood(Z[j], X[i - 1], s);
          }
        }
      }
      total += t;
    }
  } while (advance_multi_index(cell, n + 1));
  return total;
}

inline double multitarget_likelihood_partition_oracle(const MeasurementSet& Z, const StateSet& X,
                                                      const SensorModel& s) {
  return multitarget_likelihood_partition_oracle(std::span(Z.elements()), std::span(X.elements()), s);
}

/// Prior for n independent tracks with known count:
///   f0(X) = delta_{|X|,n} * sum over permutations of prod f(x_pi(i)|i).
inline MultitargetDensity independent_prior(const TrackSet& ts) {
  const int n = ts.size();
  if (n < 1) throw std::invalid_argument("independent_prior: need at least one track");
  std::vector<std::vector<int>> perms;
  {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  }
  MultitargetDensity d;
  d.max_cardinality = n;
  d.evaluator = [ts, perms, n](const std::vector<StateVector>& elements) -> double {
    if (static_cast<int>(elements.size()) != n) return 0.0;
    double total = 0.0;
    for (const auto& p : perms) {
      double t = 1.0;
      for (int i = 0; i < n; ++i) t *= ts.track(p[i]).pdf(elements[i]);
      total += t;
    }
    return total;
  };
  return d;
}

/// Set integral over 1-D states, truncated at n_max:
///   f(empty) + sum_n (1/n!) * integral of f({x_1..x_n}) dx_1..dx_n
/// by tensor-grid trapezoid quadrature.
inline double set_integral(const MultitargetDensity& f, const QuadratureGrid& grid, int n_max) {
  if (n_max < 0 || n_max > 4) throw std::invalid_argument("set_integral: n_max must be in [0,4]");
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  const int G = grid.points;
  double total = f.evaluator({});
  double log_factorial = 0.0;
  for (int card = 1; card <= n_max; ++card) {
    log_factorial += std::log(static_cast<double>(card));
    const double inv_fact = std::exp(-log_factorial);
    const double card_sum = detail::parallel_outer_sum(G, [&](int b, int e) {
      std::vector<StateVector> pt(card, StateVector(1));
      std::vector<int> idx(static_cast<std::size_t>(card) - 1, 0);
      double acc = 0.0;
      for (int g0 = b; g0 < e; ++g0) {
        pt[0][0] = nodes[g0];
        std::fill(idx.begin(), idx.end(), 0);
        do {
          double weight = w[g0];
          for (int d = 1; d < card; ++d) {
            pt[d][0] = nodes[idx[d - 1]];
            weight *= w[idx[d - 1]];
          }
          acc += weight * f.evaluator(pt);
        } while (advance_multi_index(idx, G));
      }
      return acc;
    });
    total += inv_fact * card_sum;
  }
  return total;
}

/// Multitarget Bayes posterior f(X|Z) = f(Z|X) f0(X) / normalizer, with the
/// normalizer computed once by set-integral quadrature (1-D states).
inline MultitargetDensity multitarget_posterior(const MeasurementSet& Z,
                                                const MultitargetDensity& prior,
                                                const SensorModel& s, const QuadratureGrid& grid,
                                                int n_max) {
  auto joint = [&Z, &prior, &s](const std::vector<StateVector>& elements) {
    const double p = prior.evaluator(elements);
    if (p == 0.0) return 0.0;
    return multitarget_likelihood(std::span(Z.elements()), std::span(elements), s) * p;
  };
  MultitargetDensity joint_density{joint, n_max};
  const double normalizer = set_integral(joint_density, grid, n_max);
  if (!(normalizer > 0.0)) {
    throw std::runtime_error("multitarget_posterior: zero normalizer");
  }
  MultitargetDensity post;
  post.max_cardinality = n_max;
  post.evaluator = [joint, normalizer](const std::vector<StateVector>& elements) {
    return joint(elements) / normalizer;
  };
  return post;
}

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap = 0.0;
};

/// Desk-scale check of the RFS/MTA identity
///   integral of f(Z|X) f0(X) dX  ==  sum over alpha of l_{Z|X}(alpha)
/// with f0 the independent-track prior. The left side is tensor-grid
/// quadrature of the pointwise likelihood (per-node MTA sum over tabulated
/// single-target densities); the right side is the closed-form association
/// sum. 1-D states only; n <= 3, m <= 4.
inline IdentityReport verify_mta_rfs_identity(const MeasurementSet& Z, const TrackSet& ts,
                                              const SensorModel& s, const QuadratureGrid& grid) {
  const int n = ts.size();
  const int m = static_cast<int>(Z.size());
  if (n > 3 || m > 4) {
    throw std::invalid_argument("verify_mta_rfs_identity: restricted to n <= 3, m <= 4");
  }
  const auto& Zv = Z.elements();

  // Right side: closed-form association sum.
  double rhs = 0.0;
  for (const Mta& a : association::enumerate_mtas(n, m)) {
    rhs += association::association_likelihood(a, Zv, ts, s);
  }

  double lhs = 0.0;
  if (n == 0) {
    lhs = multitarget_likelihood(Zv, std::vector<StateVector>{}, s);
  } else {
    if (s.state_dim() != 1 || ts.track(0).dim() != 1) {
      throw std::invalid_argument("verify_mta_rfs_identity: requires 1-D state space");
    }
    const auto nodes = grid.nodes();
    const auto w = grid.weights();
    const int G = grid.points;
    const double pd = s.detection_probability();

    // Tables over the grid: weighted track densities and detection factors.
    std::vector<double> tdens(static_cast<std::size_t>(n) * G);
    std::vector<double> det(static_cast<std::size_t>(G) * std::max(1, m));
    {
      Eigen::VectorXd x(1);
      for (int g = 0; g < G; ++g) {
        x[0] = nodes[g];
        for (int i = 0; i < n; ++i) tdens[i * G + g] = w[g] * ts.track(i).pdf(x);
        for (int j = 0; j < m; ++j) det[g * m + j] = pd * models::single_likelihood(Zv[j], x, s);
      }
    }

    // MTA structure: per-association constant (clutter and miss factors) and
    // the list of (track, measurement) detection pairs.
    struct MtaTerm {
      double cf;
      std::vector<std::pair<int, int>> pairs;
    };
    std::vector<MtaTerm> terms;
    for (const Mta& a : association::enumerate_mtas(n, m)) {
      MtaTerm t;
      double cf = std::exp(-s.clutter_rate());
      std::vector<char> assigned(Zv.size(), 0);
      for (int i = 0; i < n; ++i) {
        if (a(i) > 0) {
          assigned[a(i) - 1] = 1;
          t.pairs.emplace_back(i, a(i) - 1);
        } else {
          cf *= 1.0 - pd;
        }
      }
      for (int j = 0; j < m; ++j) {
        if (!assigned[j]) cf *= s.clutter_intensity(Zv[j]);
      }
      t.cf = cf;
      terms.push_back(std::move(t));
    }

    std::vector<std::vector<int>> perms;
    {
      std::vector<int> p(n);
      std::iota(p.begin(), p.end(), 0);
      do {
        perms.push_back(p);
      } while (std::next_permutation(p.begin(), p.end()));
    }

    const double raw = detail::parallel_outer_sum(G, [&](int b, int e) {
      std::vector<int> g(static_cast<std::size_t>(n), 0);
      double acc = 0.0;
      for (int g0 = b; g0 < e; ++g0) {
        g[0] = g0;
        std::vector<int> inner(static_cast<std::size_t>(n) - 1, 0);
        do {
          for (int d = 1; d < n; ++d) g[d] = inner[d - 1];
          double like = 0.0;
          for (const MtaTerm& t : terms) {
            double v = t.cf;
            for (auto [i, j] : t.pairs) v *= det[g[i] * m + j];
            like += v;
          }
          double prior = 0.0;
          for (const auto& p : perms) {
            double v = 1.0;
            for (int i = 0; i < n; ++i) v *= tdens[p[i] * G + g[i]];
            prior += v;
          }
          acc += like * prior;
        } while (advance_multi_index(inner, G));
      }
      return acc;
    });
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    lhs = raw / fact;
  }

  IdentityReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  rep.relative_gap = std::abs(lhs - rhs) / scale;
  return rep;
}

struct MeasurementIntegralOptions {
  int tensor_max_cardinality = 4;     // pointwise tensor quadrature up to here
  double tail_epsilon = 1e-6;         // truncate once P(|Z| > m_max) < this
  int cardinality_cap = 32;           // absolute safety bound on m_max
  int points_1d = 400;                // also used for the separable factors
  int points_3d = 96;
  int points_4d = 48;
};

/// Truncation point for the measurement-set integral: smallest M with
/// P(#detections + #clutter > M) < eps, from the exact binomial/Poisson
/// convolution of the model constants.
inline int measurement_cardinality_truncation(int n, double pd, double lambda, double eps,
                                              int cap) {
  std::vector<double> binom(static_cast<std::size_t>(n) + 1, 0.0);
  for (int d = 0; d <= n; ++d) {
    double c = 1.0;
    for (int r = 0; r < d; ++r) c = c * (n - r) / (r + 1);
    binom[d] = c * std::pow(pd, d) * std::pow(1.0 - pd, n - d);
  }
  double cum = 0.0;
  for (int M = 0; M <= cap; ++M) {
    // P(|Z| = M) = sum_d binom[d] * Pois(lambda){M - d}
    double pm = 0.0;
    for (int d = 0; d <= std::min(n, M); ++d) {
      const int c = M - d;
      double pois = std::exp(-lambda);
      for (int r = 1; r <= c; ++r) pois *= lambda / r;
      pm += binom[d] * pois;
    }
    cum += pm;
    if (1.0 - cum < eps) return M;
  }
  return cap;
}

/// Cardinality-truncated set integral of f(Z|X) over the measurement space
/// (1-D measurements, integration window = clutter box). Cardinalities up to
/// `tensor_max_cardinality` are integrated by pointwise tensor-grid
/// quadrature of the real likelihood; the remaining (small) cardinalities up
/// to the truncation point are completed per detection subset from 1-D
/// quadratures of the single-target factors, since an 11-dimensional tensor
/// grid is not feasible. Returns a value that must be 1 up to quadrature and
/// truncation error.
inline double measurement_set_integral(std::span<const StateVector> X, const SensorModel& s,
                                       const MeasurementIntegralOptions& opts = {}) {
  if (s.measurement_dim() != 1) {
    throw std::invalid_argument("measurement_set_integral: requires 1-D measurement space");
  }
  const int n = static_cast<int>(X.size());
  const double pd = s.detection_probability();
  const double lambda = s.clutter_rate();
  const int m_max = measurement_cardinality_truncation(n, pd, lambda, opts.tail_epsilon,
                                                       opts.cardinality_cap);
  const models::Box& box = s.clutter_box();

  auto grid_points_for = [&](int m) {
    if (m <= 2) return opts.points_1d;
    if (m == 3) return opts.points_3d;
    return opts.points_4d;
  };

  double total = std::exp(-lambda) * std::pow(1.0 - pd, n);  // m = 0 term: f(empty|X)

  const int tensor_top = std::min(opts.tensor_max_cardinality, m_max);
  for (int m = 1; m <= tensor_top; ++m) {
    const QuadratureGrid grid(box.lo[0], box.hi[0], grid_points_for(m));
    const auto nodes = grid.nodes();
    const auto w = grid.weights();
    const int G = grid.points;

    // Weighted per-node tables: clutter intensity and detection factors.
    std::vector<double> kap(static_cast<std::size_t>(G));
    std::vector<double> detx(static_cast<std::size_t>(G) * std::max(1, n));
    {
      Eigen::VectorXd z(1);
      for (int g = 0; g < G; ++g) {
        z[0] = nodes[g];
        kap[g] = w[g] * s.clutter_intensity(z);
        for (int i = 0; i < n; ++i) {
          detx[g * std::max(1, n) + i] = w[g] * pd * models::single_likelihood(z, X[i], s);
        }
      }
    }

    // Per-MTA constants and the measurement-axis -> track map (-1 = clutter).
    struct Term {
      double cf;
      std::vector<int> axis_track;
    };
    std::vector<Term> terms;
    for (const Mta& a : association::enumerate_mtas(n, m)) {
      Term t;
      t.axis_track.assign(static_cast<std::size_t>(m), -1);
      double cf = std::exp(-lambda);
      for (int i = 0; i < n; ++i) {
        if (a(i) > 0) {
          t.axis_track[a(i) - 1] = i;
        } else {
          cf *= 1.0 - pd;
        }
      }
      t.cf = cf;
      terms.push_back(std::move(t));
    }

    const int nn = std::max(1, n);
    const double raw = detail::parallel_outer_sum(G, [&](int b, int e) {
      std::vector<int> g(static_cast<std::size_t>(m), 0);
      double acc = 0.0;
      for (int g0 = b; g0 < e; ++g0) {
        g[0] = g0;
        std::vector<int> inner(static_cast<std::size_t>(m) - 1, 0);
        do {
          for (int d = 1; d < m; ++d) g[d] = inner[d - 1];
          double like = 0.0;
          for (const Term& t : terms) {
            double v = t.cf;
            for (int j = 0; j < m; ++j) {
              const int trk = t.axis_track[j];
              v *= trk < 0 ? kap[g[j]] : detx[g[j] * nn + trk];
            }
            like += v;
          }
          acc += like;
        } while (advance_multi_index(inner, G));
      }
      return acc;
    });
    double fact = 1.0;
    for (int i = 2; i <= m; ++i) fact *= i;
    total += raw / fact;
  }

  if (m_max > tensor_top) {
    // Separable completion: per-track detection masses and the clutter mass,
    // each from 1-D quadrature over the box, combined per detection subset.
    const QuadratureGrid grid(box.lo[0], box.hi[0], opts.points_1d);
    const auto nodes = grid.nodes();
    const auto w = grid.weights();
    std::vector<double> J(static_cast<std::size_t>(std::max(1, n)), 0.0);
    double I_kappa = 0.0;
    {
      Eigen::VectorXd z(1);
      for (int g = 0; g < grid.points; ++g) {
        z[0] = nodes[g];
        I_kappa += w[g] * s.clutter_intensity(z);
        for (int i = 0; i < n; ++i) J[i] += w[g] * pd * models::single_likelihood(z, X[i], s);
      }
    }
    for (int m = tensor_top + 1; m <= m_max; ++m) {
      double mass = 0.0;
      const int subsets = 1 << n;
      for (int mask = 0; mask < subsets; ++mask) {
        const int nu = __builtin_popcount(static_cast<unsigned>(mask));
        if (nu > m) continue;
        double t = std::exp(-lambda) * std::pow(1.0 - pd, n - nu);
        for (int i = 0; i < n; ++i) {
          if (mask & (1 << i)) t *= J[i];
        }
        double pois_part = 1.0;  // I_kappa^(m-nu) / (m-nu)!
        for (int r = 1; r <= m - nu; ++r) pois_part *= I_kappa / r;
        mass += t * pois_part;
      }
      total += mass;
    }
  }
  return total;
}

/// Monte-Carlo estimate of the multitarget Bayes risk E[C(Xhat(Z), X)] over
/// joint draws of (X, Z). The value is reported as-is; whether to minimize
/// or maximize it is the caller's affair.
inline double multitarget_bayes_risk(
    const std::function<StateSet(const MeasurementSet&)>& estimator,
    const std::function<double(const StateSet&, const StateSet&)>& cost,
    const std::function<std::pair<StateSet, MeasurementSet>(RngStream&)>& sampler, int trials,
    RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("multitarget_bayes_risk: trials must be >= 1");
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto [X, Z] = sampler(rng);
    acc += cost(estimator(Z), X);
  }
  return acc / trials;
}

}  // namespace rfstrack::rfs
