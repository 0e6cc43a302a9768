#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfstrack/association.hpp"
#include "rfstrack/labeled.hpp"
#include "rfstrack/models.hpp"
#include "rfstrack/quadrature.hpp"
#include "rfstrack/random.hpp"
#include "rfstrack/rfs.hpp"

namespace rfstrack::verify {

using association::TrackSet;
using models::GaussianDensity;
using models::Measurement;
using models::SensorModel;
using models::StateVector;

struct VerifyOptions {
  std::uint64_t seed = 20250101;
  int grid_points = 400;
  double clutter_density_scale = 1.0;  // != 1 corrupts the clutter density
};

struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const CheckRecord& r) {
  return nlohmann::json{{"name", r.name}, {"lhs", r.lhs},
                        {"rhs", r.rhs},   {"relative_gap", r.gap},
                        {"tolerance", r.tolerance}, {"pass", r.pass},
                        {"seed", r.seed}};
}

namespace detail {

inline Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

inline Eigen::MatrixXd mat1(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return m;
}

inline SensorModel make_sensor(double r, double pd, double lambda, double density_scale) {
  const models::Box box(vec1(-12.0), vec1(12.0));
  if (density_scale == 1.0) {
    return SensorModel(mat1(1.0), mat1(r), pd, lambda, box);
  }
  return SensorModel::with_clutter_density(mat1(1.0), mat1(r), pd, lambda, box,
                                           density_scale / box.volume());
}

inline CheckRecord make_record(std::string name, double lhs, double rhs, double tol,
                               std::uint64_t seed) {
  CheckRecord rec;
  rec.name = std::move(name);
  rec.lhs = lhs;
  rec.rhs = rhs;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  rec.gap = std::abs(lhs - rhs) / scale;
  rec.tolerance = tol;
  rec.pass = rec.gap <= tol;
  rec.seed = seed;
  return rec;
}

}  // namespace detail

/// Spatial clutter density integrates to one over its box. The one check
/// that a deliberately unnormalized density must fail.
inline CheckRecord check_clutter_normalization(const VerifyOptions& opts) {
  const SensorModel s = detail::make_sensor(1.0, 0.9, 1.0, opts.clutter_density_scale);
  const QuadratureGrid grid(s.clutter_box().lo[0], s.clutter_box().hi[0], opts.grid_points);
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  double mass = 0.0;
  for (std::size_t g = 0; g < nodes.size(); ++g) {
    mass += w[g] * s.clutter_spatial_density(detail::vec1(nodes[g]));
  }
  return detail::make_record("clutter-density-normalization", mass, 1.0, 1e-6, opts.seed);
}

/// Quadrature left side of the RFS/MTA identity against the closed-form
/// association sum, on seeded 1-D Gaussian instances covering
/// n in {1,2,3}, m in {0..4}, lambda in {0, 0.5, 1}.
inline std::vector<CheckRecord> check_rfs_mta_identity(const VerifyOptions& opts) {
  struct Instance {
    int n;
    int m;
    double lambda;
  };
  const std::vector<Instance> instances{
      {1, 0, 0.0}, {1, 1, 0.5}, {1, 2, 1.0}, {1, 4, 1.0}, {2, 0, 0.5}, {2, 1, 0.0},
      {2, 2, 1.0}, {2, 3, 0.5}, {3, 2, 0.0}, {3, 3, 0.5}, {3, 4, 1.0}, {2, 4, 1.0},
  };
  std::vector<CheckRecord> out;
  const QuadratureGrid grid(-12.0, 12.0, opts.grid_points);
  for (std::size_t idx = 0; idx < instances.size(); ++idx) {
    const auto& inst = instances[idx];
    const std::uint64_t inst_seed = opts.seed + idx;
    RngStream rng(inst_seed, "identity-instance");
    const SensorModel s = detail::make_sensor(0.5 + 0.5 * rng.uniform(), 0.6 + 0.35 * rng.uniform(),
                                              inst.lambda, opts.clutter_density_scale);
    std::vector<GaussianDensity> tracks;
    for (int i = 0; i < inst.n; ++i) {
      tracks.emplace_back(detail::vec1(rng.uniform_range(-3, 3)),
                          detail::mat1(0.5 + rng.uniform()));
    }
    std::vector<Measurement> Z;
    for (int j = 0; j < inst.m; ++j) Z.push_back(detail::vec1(rng.uniform_range(-4, 4)));
    const auto rep = rfs::verify_mta_rfs_identity(rfs::MeasurementSet(Z), TrackSet(tracks), s, grid);
    CheckRecord rec = detail::make_record(
        "rfs-mta-identity/n" + std::to_string(inst.n) + "-m" + std::to_string(inst.m) + "-lambda" +
            std::to_string(inst.lambda).substr(0, 3),
        rep.lhs, rep.rhs, 1e-4, inst_seed);
    out.push_back(rec);
  }
  return out;
}

/// Eq.-(14)-style MTA sum against the partition-sum oracle, exhaustively over
/// n, m <= 3 per seed.
inline std::vector<CheckRecord> check_oracle_equivalence(const VerifyOptions& opts) {
  std::vector<CheckRecord> out;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t inst_seed = opts.seed + 1000 + trial;
    RngStream rng(inst_seed, "oracle-instance");
    const SensorModel s =
        detail::make_sensor(0.5 + rng.uniform(), 0.3 + 0.6 * rng.uniform(),
                            rng.uniform() < 0.2 ? 0.0 : rng.uniform_range(0.2, 1.5),
                            opts.clutter_density_scale);
    double worst = 0.0;
    for (int n = 0; n <= 3; ++n) {
      for (int m = 0; m <= 3; ++m) {
        std::vector<StateVector> X;
        std::vector<Measurement> Z;
        for (int i = 0; i < n; ++i) X.push_back(detail::vec1(rng.uniform_range(-4, 4)));
        for (int j = 0; j < m; ++j) Z.push_back(detail::vec1(rng.uniform_range(-5, 5)));
        const double a = rfs::multitarget_likelihood(Z, X, s);
        const double b = rfs::multitarget_likelihood_partition_oracle(Z, X, s);
        const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
        worst = std::max(worst, std::abs(a - b) / scale);
      }
    }
    CheckRecord rec;
    rec.name = "mta-vs-partition-oracle/seed" + std::to_string(trial);
    rec.lhs = worst;
    rec.rhs = 0.0;
    rec.gap = worst;
    rec.tolerance = 1e-10;
    rec.pass = worst <= rec.tolerance;
    rec.seed = inst_seed;
    out.push_back(rec);
  }
  return out;
}

/// Cardinality-truncated measurement-space normalization of f(Z|X).
inline std::vector<CheckRecord> check_likelihood_normalization(const VerifyOptions& opts) {
  std::vector<CheckRecord> out;
  int idx = 0;
  for (double lambda : {0.5, 1.0}) {
    for (int n = 1; n <= 2; ++n) {
      const std::uint64_t inst_seed = opts.seed + 2000 + idx;
      RngStream rng(inst_seed, "normalization-instance");
      const SensorModel s = detail::make_sensor(0.8, 0.9, lambda, opts.clutter_density_scale);
      std::vector<StateVector> X;
      for (int i = 0; i < n; ++i) X.push_back(detail::vec1(rng.uniform_range(-3, 3)));
      const double mass = rfs::measurement_set_integral(X, s);
      out.push_back(detail::make_record("likelihood-normalization/n" + std::to_string(n) +
                                            "-lambda" + std::to_string(lambda).substr(0, 3),
                                        mass, 1.0, 1e-4, inst_seed));
      ++idx;
    }
  }
  return out;
}

/// Ordered-tuple normalization of the normalized MTA likelihood for fixed
/// (m, alpha), m <= 2.
inline std::vector<CheckRecord> check_mta_likelihood_normalization(const VerifyOptions& opts) {
  const SensorModel s = detail::make_sensor(0.8, 0.9, 1.0, opts.clutter_density_scale);
  const TrackSet ts(std::vector<GaussianDensity>{GaussianDensity(detail::vec1(0.5),
                                                                 detail::mat1(0.8))});
  const double lo = s.clutter_box().lo[0];
  const double hi = s.clutter_box().hi[0];
  const int G = 4 * opts.grid_points + 1;

  auto integrate_1d = [&](auto&& f, double a, double b, int pts) {
    const double h = (b - a) / (pts - 1);
    double acc = 0.5 * (f(a) + f(b));
    for (int i = 1; i < pts - 1; ++i) acc += f(a + h * i);
    return acc * h;
  };

  std::vector<CheckRecord> out;
  {
    // m = 1, detected: integrand extends past the box.
    const association::Mta alpha({1}, 1);
    const double mass = integrate_1d(
        [&](double z) {
          std::vector<Measurement> Z{detail::vec1(z)};
          return association::normalized_association_likelihood(alpha, Z, ts, s);
        },
        lo - 8.0, hi + 8.0, G);
    out.push_back(detail::make_record("mta-likelihood-normalization/m1-detected", mass, 1.0, 1e-5,
                                      opts.seed));
  }
  {
    // m = 1, all clutter.
    const association::Mta alpha({0}, 1);
    const double mass = integrate_1d(
        [&](double z) {
          std::vector<Measurement> Z{detail::vec1(z)};
          return association::normalized_association_likelihood(alpha, Z, ts, s);
        },
        lo, hi, G);
    out.push_back(detail::make_record("mta-likelihood-normalization/m1-clutter", mass, 1.0, 1e-5,
                                      opts.seed));
  }
  {
    // m = 2, detection times clutter (ordered-tuple integral).
    const association::Mta alpha({2}, 2);
    const int g2 = opts.grid_points + 1;
    const double mass = integrate_1d(
        [&](double z1) {
          return integrate_1d(
              [&](double z2) {
                std::vector<Measurement> Z{detail::vec1(z1), detail::vec1(z2)};
                return association::normalized_association_likelihood(alpha, Z, ts, s);
              },
              lo - 8.0, hi + 8.0, g2);
        },
        lo, hi, g2);
    out.push_back(detail::make_record("mta-likelihood-normalization/m2-mixed", mass, 1.0, 1e-5,
                                      opts.seed));
  }
  return out;
}

/// Invariance of f(Z|X) under reorderings of the internal element lists.
inline CheckRecord check_permutation_invariance(const VerifyOptions& opts) {
  RngStream rng(opts.seed + 3000, "permutation");
  const SensorModel s = detail::make_sensor(0.7, 0.85, 1.0, opts.clutter_density_scale);
  std::vector<StateVector> X{detail::vec1(-2.0), detail::vec1(0.3), detail::vec1(1.8)};
  std::vector<Measurement> Z{detail::vec1(-1.5), detail::vec1(0.0), detail::vec1(2.2)};
  const double base = rfs::multitarget_likelihood(Z, X, s);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    for (int i = static_cast<int>(X.size()) - 1; i > 0; --i) std::swap(X[i], X[rng.uniform_int(i + 1)]);
    for (int j = static_cast<int>(Z.size()) - 1; j > 0; --j) std::swap(Z[j], Z[rng.uniform_int(j + 1)]);
    worst = std::max(worst, std::abs(rfs::multitarget_likelihood(Z, X, s) - base) / base);
  }
  CheckRecord rec;
  rec.name = "permutation-invariance";
  rec.lhs = worst;
  rec.rhs = 0.0;
  rec.gap = worst;
  rec.tolerance = 1e-12;
  rec.pass = worst <= rec.tolerance;
  rec.seed = opts.seed + 3000;
  return rec;
}

/// With no clutter and perfect detection the global association likelihood
/// collapses to the permutation product, exactly.
inline std::vector<CheckRecord> check_permutation_specialization(const VerifyOptions& opts) {
  std::vector<CheckRecord> out;
  for (int n = 1; n <= 4; ++n) {
    const std::uint64_t inst_seed = opts.seed + 4000 + static_cast<std::uint64_t>(n);
    RngStream rng(inst_seed, "specialization");
    const SensorModel s = detail::make_sensor(0.5 + rng.uniform(), 1.0, 0.0, 1.0);
    std::vector<GaussianDensity> tracks;
    std::vector<Measurement> Z;
    for (int i = 0; i < n; ++i) {
      tracks.emplace_back(detail::vec1(rng.uniform_range(-3, 3)), detail::mat1(0.5 + rng.uniform()));
      Z.push_back(detail::vec1(rng.uniform_range(-3, 3)));
    }
    const TrackSet ts(tracks);
    double worst = 0.0;
    for (const auto& a : association::enumerate_mtas(n, n)) {
      const double got = association::association_likelihood(a, Z, ts, s);
      double want = 0.0;
      if (a.detection_count() == n) {
        want = 1.0;
        for (int i = 0; i < n; ++i) {
          want *= association::local_detection_likelihood(i, Z[a(i) - 1], ts, s);
        }
      }
      const double scale = std::max({std::abs(got), std::abs(want), 1e-300});
      worst = std::max(worst, std::abs(got - want) / scale);
    }
    CheckRecord rec;
    rec.name = "permutation-specialization/n" + std::to_string(n);
    rec.lhs = worst;
    rec.rhs = 0.0;
    rec.gap = worst;
    rec.tolerance = 1e-12;
    rec.pass = worst <= rec.tolerance;
    rec.seed = inst_seed;
    out.push_back(rec);
  }
  return out;
}

/// Labeled set integral of a constructed GLMB distribution.
inline CheckRecord check_glmb_normalization(const VerifyOptions& opts) {
  using labeled::GlmbDistribution;
  using labeled::Label;
  std::vector<GlmbDistribution::Component> comps;
  {
    GlmbDistribution::Component c;
    c.weight = 0.2;
    comps.push_back(c);
  }
  {
    GlmbDistribution::Component c;
    c.labels = {Label{0, 1}};
    c.densities.emplace_back(detail::vec1(-1.0), detail::mat1(0.8));
    c.weight = 0.45;
    comps.push_back(c);
  }
  {
    GlmbDistribution::Component c;
    c.labels = {Label{0, 1}, Label{1, 2}};
    c.densities.emplace_back(detail::vec1(0.5), detail::mat1(1.2));
    c.densities.emplace_back(detail::vec1(2.0), detail::mat1(0.6));
    c.weight = 0.35;
    comps.push_back(c);
  }
  const GlmbDistribution g(std::move(comps));
  const QuadratureGrid grid(-12.0, 12.0, opts.grid_points);
  const double mass = labeled::glmb_set_integral_quadrature(g, grid);
  return detail::make_record("glmb-set-integral", mass, 1.0, 1e-5, opts.seed);
}

inline std::vector<CheckRecord> run_verification_suite(const VerifyOptions& opts) {
  std::vector<CheckRecord> out;
  out.push_back(check_clutter_normalization(opts));
  for (auto& r : check_rfs_mta_identity(opts)) out.push_back(std::move(r));
  for (auto& r : check_oracle_equivalence(opts)) out.push_back(std::move(r));
  for (auto& r : check_likelihood_normalization(opts)) out.push_back(std::move(r));
  for (auto& r : check_mta_likelihood_normalization(opts)) out.push_back(std::move(r));
  out.push_back(check_permutation_invariance(opts));
  for (auto& r : check_permutation_specialization(opts)) out.push_back(std::move(r));
  out.push_back(check_glmb_normalization(opts));
  return out;
}

}  // namespace rfstrack::verify
