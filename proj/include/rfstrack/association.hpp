#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rfstrack/models.hpp"
#include "rfstrack/quadrature.hpp"

namespace rfstrack::association {

using models::GaussianDensity;
using models::Measurement;
using models::SensorModel;
using models::StateVector;

/// Measurement-to-track association: a total map from track indices to
/// {0, 1, ..., m} with 0 meaning "missed detection" and j >= 1 meaning
/// "generated measurement j". Positive values are pairwise distinct.
/// Track positions are 0-based; assignment values keep the 1-based
/// measurement convention (value j refers to the measurement at index j-1).
class Mta {
 public:
  Mta(std::vector<int> assignments, int measurement_count)
      : a_(std::move(assignments)), m_(measurement_count) {
    if (m_ < 0) throw std::invalid_argument("Mta: negative measurement count");
    std::vector<char> used(static_cast<std::size_t>(m_) + 1, 0);
    for (int v : a_) {
      if (v < 0 || v > m_) throw std::invalid_argument("Mta: assignment value out of range");
      if (v > 0) {
        if (used[v]) throw std::invalid_argument("Mta: duplicate positive assignment");
        used[v] = 1;
      }
    }
  }

  int tracks() const { return static_cast<int>(a_.size()); }
  int measurements() const { return m_; }
  int operator()(int i) const { return a_.at(i); }
  const std::vector<int>& assignments() const { return a_; }

  int detection_count() const {
    return static_cast<int>(std::count_if(a_.begin(), a_.end(), [](int v) { return v > 0; }));
  }

  bool operator==(const Mta& other) const { return m_ == other.m_ && a_ == other.a_; }

 private:
  std::vector<int> a_;
  int m_;
};

/// The 4-tuple view of an MTA: detection count, detected tracks, used
/// measurements, and the pairing between them. Indices here are 0-based.
struct MtaComponents {
  int nu = 0;
  std::vector<int> detected_tracks;
  std::vector<int> used_measurements;
  std::vector<std::pair<int, int>> pairing;  // (track, measurement), 0-based
};

inline MtaComponents mta_components(const Mta& a) {
  MtaComponents c;
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) > 0) {
      c.detected_tracks.push_back(i);
      c.used_measurements.push_back(a(i) - 1);
      c.pairing.emplace_back(i, a(i) - 1);
    }
  }
  std::sort(c.used_measurements.begin(), c.used_measurements.end());
  c.nu = static_cast<int>(c.detected_tracks.size());
  return c;
}

inline Mta mta_from_components(const MtaComponents& c, int n, int m) {
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  for (auto [i, j] : c.pairing) {
    if (i < 0 || i >= n || j < 0 || j >= m) {
      throw std::invalid_argument("mta_from_components: index out of range");
    }
    a[i] = j + 1;
  }
  return Mta(std::move(a), m);
}

/// Number of MTAs for n tracks and m measurements:
/// sum over nu of C(n,nu) * C(m,nu) * nu!.
inline std::uint64_t mta_count(int n, int m) {
  if (n < 0 || m < 0) throw std::invalid_argument("mta_count: negative arguments");
  std::uint64_t total = 0;
  const int cap = std::min(n, m);
  for (int nu = 0; nu <= cap; ++nu) {
    // C(n,nu) * m! / (m-nu)!
    std::uint64_t t = 1;
    for (int r = 0; r < nu; ++r) t = t * static_cast<std::uint64_t>(n - r) / (r + 1);
    for (int r = 0; r < nu; ++r) t *= static_cast<std::uint64_t>(m - r);
    total += t;
  }
  return total;
}

/// Guard for operations that traverse the full MTA set. Enumeration itself
/// is lazy and unguarded; exhaustive consumers call this first.
inline void check_exhaustive_guard(int n, int m) {
  if (n > 8 || m > 8) {
    throw std::invalid_argument("exhaustive MTA traversal restricted to n,m <= 8");
  }
}

/// Lazy range over all MTAs for (n, m) in lexicographic order of the
/// assignment sequence. Forward iteration only; each dereference yields a
/// fresh Mta value.
class MtaRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Mta;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(int n, int m) : a_(static_cast<std::size_t>(n), 0), m_(m), done_(false) {}

    Mta operator*() const { return Mta(a_, m_); }

    iterator& operator++() {
      advance();
      return *this;
    }

    void operator++(int) { advance(); }

    bool operator==(const iterator& other) const {
      if (done_ || other.done_) return done_ == other.done_;
      return a_ == other.a_ && m_ == other.m_;
    }

   private:
    void advance() {
      // Find the rightmost position that can move to its next admissible
      // value; everything to its right resets to 0 (always admissible).
      const int n = static_cast<int>(a_.size());
      for (int i = n - 1; i >= 0; --i) {
        for (int v = a_[i] + 1; v <= m_; ++v) {
          bool clash = false;
          for (int p = 0; p < i; ++p) {
            if (a_[p] == v) {
              clash = true;
              break;
            }
          }
          if (!clash) {
            a_[i] = v;
            std::fill(a_.begin() + i + 1, a_.end(), 0);
            return;
          }
        }
        a_[i] = 0;
      }
      done_ = true;
    }

    std::vector<int> a_;
    int m_ = 0;
    bool done_ = true;
  };

  MtaRange(int n, int m) : n_(n), m_(m) {
    if (n < 0 || m < 0) throw std::invalid_argument("enumerate_mtas: negative arguments");
  }

  iterator begin() const { return iterator(n_, m_); }
  iterator end() const { return iterator(); }

 private:
  int n_;
  int m_;
};

inline MtaRange enumerate_mtas(int n, int m) { return MtaRange(n, m); }

/// Ordered list of track densities f(x|i).
class TrackSet {
 public:
  TrackSet() = default;
  explicit TrackSet(std::vector<GaussianDensity> tracks) : tracks_(std::move(tracks)) {}

  int size() const { return static_cast<int>(tracks_.size()); }
  const GaussianDensity& track(int i) const { return tracks_.at(i); }
  const std::vector<GaussianDensity>& tracks() const { return tracks_; }

 private:
  std::vector<GaussianDensity> tracks_;
};

/// l(z|i): probability density that track i generates z. With constant p_D
/// and the linear-Gaussian channel this is the closed-form convolution
/// p_D * N(z; H mu_i, H P_i H' + R).
inline double log_local_detection_likelihood(int i, const Measurement& z, const TrackSet& ts,
                                             const SensorModel& s) {
  const GaussianDensity& t = ts.track(i);
  const double pd = s.detection_probability();
  if (pd == 0.0) return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd& H = s.observation();
  Eigen::MatrixXd cov = H * t.cov() * H.transpose() + s.noise();
  cov = 0.5 * (cov + cov.transpose().eval());
  GaussianDensity pred(H * t.mean(), std::move(cov));
  return std::log(pd) + pred.log_pdf(z);
}

inline double local_detection_likelihood(int i, const Measurement& z, const TrackSet& ts,
                                         const SensorModel& s) {
  const double pd = s.detection_probability();
  if (pd == 0.0) return 0.0;
  return std::exp(log_local_detection_likelihood(i, z, ts, s));
}

/// l(empty|i): probability that track i goes undetected; 1 - p_D for
/// constant detection probability.
inline double local_miss_probability(int /*i*/, const TrackSet& /*ts*/, const SensorModel& s) {
  return 1.0 - s.detection_probability();
}

/// Quadrature path for state-dependent detection probability (1-D tracks):
/// integral of p_D(x) f(z|x) f(x|i) dx.
inline double local_detection_likelihood_quad(int i, const Measurement& z, const TrackSet& ts,
                                              const SensorModel& s,
                                              const std::function<double(double)>& pd,
                                              const QuadratureGrid& grid) {
  const GaussianDensity& t = ts.track(i);
  if (t.dim() != 1) throw std::invalid_argument("quadrature path requires 1-D state");
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  double acc = 0.0;
  Eigen::VectorXd x(1);
  for (std::size_t g = 0; g < nodes.size(); ++g) {
    x[0] = nodes[g];
    acc += w[g] * pd(nodes[g]) * models::single_likelihood(z, x, s) * t.pdf(x);
  }
  return acc;
}

/// Quadrature companion of local_miss_probability: integral of
/// (1 - p_D(x)) f(x|i) dx.
inline double local_miss_probability_quad(int i, const TrackSet& ts,
                                          const std::function<double(double)>& pd,
                                          const QuadratureGrid& grid) {
  const GaussianDensity& t = ts.track(i);
  if (t.dim() != 1) throw std::invalid_argument("quadrature path requires 1-D state");
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  double acc = 0.0;
  Eigen::VectorXd x(1);
  for (std::size_t g = 0; g < nodes.size(); ++g) {
    x[0] = nodes[g];
    acc += w[g] * (1.0 - pd(nodes[g])) * t.pdf(x);
  }
  return acc;
}

inline void check_association_inputs(const Mta& a, std::span<const Measurement> Z, const TrackSet& ts) {
  if (a.tracks() != ts.size()) {
    throw std::invalid_argument("association: MTA track count does not match track set");
  }
  if (a.measurements() != static_cast<int>(Z.size())) {
    throw std::invalid_argument("association: MTA measurement count does not match scan");
  }
}

/// Global association likelihood:
///   exp(-lambda) * kappa^(Z - Z_alpha) * prod_miss l(empty|i) * prod_det l(z|i).
/// For an empty track set this is exp(-lambda) * kappa^Z.
inline double log_association_likelihood(const Mta& a, std::span<const Measurement> Z,
                                         const TrackSet& ts, const SensorModel& s) {
  check_association_inputs(a, Z, ts);
  double acc = -s.clutter_rate();
  std::vector<char> assigned(Z.size(), 0);
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) > 0) assigned[a(i) - 1] = 1;
  }
  for (std::size_t j = 0; j < Z.size(); ++j) {
    if (!assigned[j]) acc += std::log(s.clutter_intensity(Z[j]));
  }
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) == 0) {
      acc += std::log(local_miss_probability(i, ts, s));
    } else {
      acc += log_local_detection_likelihood(i, Z[a(i) - 1], ts, s);
    }
  }
  return acc;
}

inline double association_likelihood(const Mta& a, std::span<const Measurement> Z, const TrackSet& ts,
                                     const SensorModel& s) {
  check_association_inputs(a, Z, ts);
  double acc = std::exp(-s.clutter_rate());
  std::vector<char> assigned(Z.size(), 0);
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) > 0) assigned[a(i) - 1] = 1;
  }
  for (std::size_t j = 0; j < Z.size(); ++j) {
    if (!assigned[j]) acc *= s.clutter_intensity(Z[j]);
  }
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) == 0) {
      acc *= local_miss_probability(i, ts, s);
    } else {
      acc *= local_detection_likelihood(i, Z[a(i) - 1], ts, s);
    }
  }
  return acc;
}

/// Normalized MTA likelihood:
///   c^Z * prod_det l(z|i) / (c(z) * (1 - l(empty|i))).
/// The c(z) factors of detected measurements cancel against c^Z and are
/// evaluated in the canceled form, so detected measurements may fall outside
/// the clutter support. Integrates to 1 over the measurement variables for a
/// fixed (m, alpha). A detected track with l(empty|i) = 1 cannot have
/// generated anything and is a hard error.
inline double log_normalized_association_likelihood(const Mta& a, std::span<const Measurement> Z,
                                                    const TrackSet& ts, const SensorModel& s) {
  check_association_inputs(a, Z, ts);
  std::vector<char> assigned(Z.size(), 0);
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) > 0) assigned[a(i) - 1] = 1;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < Z.size(); ++j) {
    if (!assigned[j]) acc += std::log(s.clutter_spatial_density(Z[j]));
  }
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) == 0) continue;
    const double miss = local_miss_probability(i, ts, s);
    if (miss >= 1.0) {
      throw std::domain_error(
          "normalized_association_likelihood: undetectable track assigned a detection");
    }
    acc += log_local_detection_likelihood(i, Z[a(i) - 1], ts, s) - std::log(1.0 - miss);
  }
  return acc;
}

inline double normalized_association_likelihood(const Mta& a, std::span<const Measurement> Z,
                                                const TrackSet& ts, const SensorModel& s) {
  check_association_inputs(a, Z, ts);
  std::vector<char> assigned(Z.size(), 0);
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) > 0) assigned[a(i) - 1] = 1;
  }
  double acc = 1.0;
  for (std::size_t j = 0; j < Z.size(); ++j) {
    if (!assigned[j]) acc *= s.clutter_spatial_density(Z[j]);
  }
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) == 0) continue;
    const double miss = local_miss_probability(i, ts, s);
    if (miss >= 1.0) {
      throw std::domain_error(
          "normalized_association_likelihood: undetectable track assigned a detection");
    }
    acc *= local_detection_likelihood(i, Z[a(i) - 1], ts, s) / (1.0 - miss);
  }
  return acc;
}

/// Posterior over (m, alpha) pairs. The delta factor of the disengaged
/// likelihood restricts the support to m = |Z|; weights are normalized.
struct MtaPosterior {
  struct Entry {
    int m;
    Mta alpha;
    double weight;
  };
  std::vector<Entry> support;
};

using MtaPrior = std::function<double(int m, const Mta&)>;

inline MtaPrior uniform_mta_prior() {
  return [](int, const Mta&) { return 1.0; };
}

/// Bayes posterior over MTAs for the scan Z. The prior defaults to uniform
/// over the MTAs consistent with m = |Z|, making the MAP MTA the
/// maximum-likelihood MTA under the normalized likelihood.
inline MtaPosterior mta_posterior(std::span<const Measurement> Z, const TrackSet& ts,
                                  const SensorModel& s, const MtaPrior& prior = uniform_mta_prior()) {
  const int n = ts.size();
  const int m = static_cast<int>(Z.size());
  check_exhaustive_guard(n, m);
  std::vector<Mta> alphas;
  std::vector<double> log_w;
  for (const Mta& a : enumerate_mtas(n, m)) {
    const double p0 = prior(m, a);
    if (p0 < 0.0) throw std::invalid_argument("mta_posterior: negative prior weight");
    const double lw = log_normalized_association_likelihood(a, Z, ts, s) + std::log(p0);
    alphas.push_back(a);
    log_w.push_back(lw);
  }
  const double lse = logsumexp(log_w);
  if (!std::isfinite(lse)) {
    throw std::runtime_error("mta_posterior: all posterior weights are zero");
  }
  MtaPosterior post;
  double total = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const double w = std::exp(log_w[k] - lse);
    total += w;
    post.support.push_back({m, alphas[k], w});
  }
  for (auto& e : post.support) e.weight /= total;
  return post;
}

/// Most probable MTA; ties go to the lexicographically smaller assignment
/// sequence (the enumeration order).
inline std::pair<int, Mta> map_mta(const MtaPosterior& p) {
  if (p.support.empty()) throw std::invalid_argument("map_mta: empty support");
  const MtaPosterior::Entry* best = &p.support.front();
  for (const auto& e : p.support) {
    if (e.weight > best->weight) best = &e;
  }
  return {best->m, best->alpha};
}

/// State estimates implied by a MAP MTA: the Bayes update of each detected
/// track with its assigned measurement. Missed tracks contribute nothing;
/// the estimated target count is the detection count.
inline std::vector<std::pair<int, GaussianDensity>> mta_state_estimate(
    const std::pair<int, Mta>& best, std::span<const Measurement> Z, const TrackSet& ts,
    const SensorModel& s) {
  const Mta& a = best.second;
  check_association_inputs(a, Z, ts);
  std::vector<std::pair<int, GaussianDensity>> out;
  for (int i = 0; i < a.tracks(); ++i) {
    if (a(i) > 0) {
      out.emplace_back(i, models::bayes_update_density(ts.track(i), Z[a(i) - 1], s));
    }
  }
  return out;
}

}  // namespace rfstrack::association
