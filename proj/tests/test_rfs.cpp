#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rfstrack/glmb_filter.hpp"
#include "rfstrack/metrics.hpp"
#include "rfstrack/rfs.hpp"

using namespace rfstrack;
using namespace rfstrack::rfs;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

Eigen::MatrixXd mat1(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return m;
}

SensorModel make_sensor(double r, double pd, double lambda) {
  return SensorModel(mat1(1.0), mat1(r), pd, lambda,
                     models::Box(vec1(-12.0), vec1(12.0)));
}

std::vector<Measurement> meas(std::initializer_list<double> zs) {
  std::vector<Measurement> out;
  for (double z : zs) out.push_back(vec1(z));
  return out;
}

std::vector<StateVector> states(std::initializer_list<double> xs) {
  std::vector<StateVector> out;
  for (double x : xs) out.push_back(vec1(x));
  return out;
}

// Counts ordered partition assignments of m measurements into clutter plus n
// target cells where every target cell holds at most one measurement.
int count_admissible_partitions(int n, int m) {
  std::vector<int> cell(static_cast<std::size_t>(m), 0);
  int count = 0;
  if (m == 0) return 1;
  do {
    std::vector<int> load(static_cast<std::size_t>(n) + 1, 0);
    bool ok = true;
    for (int j = 0; j < m; ++j) {
      if (++load[cell[j]] > 1 && cell[j] > 0) {
        ok = false;
        break;
      }
    }
    if (ok) ++count;
  } while (advance_multi_index(cell, n + 1));
  return count;
}

}  // namespace

TEST_CASE("state and measurement sets canonicalize and reject duplicates", "[rfs]") {
  StateSet X(states({2.0, -1.0, 0.5}));
  CHECK(X.elements()[0][0] == -1.0);
  CHECK(X.elements()[2][0] == 2.0);
  CHECK_THROWS_AS(StateSet(states({1.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementSet(meas({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("multitarget likelihood basics", "[rfs]") {
  SECTION("empty state set reduces to the clutter process density") {
    const SensorModel s = make_sensor(1.0, 0.9, 1.5);
    const auto Z = meas({0.0, 3.0});
    const double want = models::clutter_set_density(Z, s);
    CHECK(multitarget_likelihood(Z, {}, s) == Catch::Approx(want).epsilon(1e-13));
  }

  SECTION("single permutation survives with no clutter and perfect detection") {
    const SensorModel s = make_sensor(1.0, 1.0, 0.0);
    const auto Z = meas({0.7});
    const auto X = states({0.2});
    CHECK(multitarget_likelihood(Z, X, s) ==
          Catch::Approx(models::single_likelihood(Z[0], X[0], s)).epsilon(1e-13));
  }
}

TEST_CASE("mta sum equals the partition sum", "[rfs]") {
  RngStream rng(31337, "oracle-eq");
  for (int trial = 0; trial < 20; ++trial) {
    const double pd = 0.3 + 0.6 * rng.uniform();
    const double lambda = rng.uniform() < 0.2 ? 0.0 : rng.uniform_range(0.2, 1.5);
    const SensorModel s = make_sensor(0.5 + rng.uniform(), pd, lambda);
    for (int n = 0; n <= 3; ++n) {
      for (int m = 0; m <= 3; ++m) {
        std::vector<StateVector> X;
        std::vector<Measurement> Z;
        for (int i = 0; i < n; ++i) X.push_back(vec1(rng.uniform_range(-4, 4)));
        for (int j = 0; j < m; ++j) Z.push_back(vec1(rng.uniform_range(-5, 5)));
        const double a = multitarget_likelihood(Z, X, s);
        const double b = multitarget_likelihood_partition_oracle(Z, X, s);
        if (a == 0.0) {
          CHECK(b == 0.0);
        } else {
          CHECK(std::abs(a - b) / std::abs(a) < 1e-10);
        }
      }
    }
  }

  SECTION("partition count with nonzero contribution equals the mta count") {
    CHECK(count_admissible_partitions(2, 2) == 7);
    CHECK(count_admissible_partitions(3, 2) == 13);
  }

  SECTION("two partitions for one track and one measurement") {
    const SensorModel s = make_sensor(1.0, 0.8, 0.5);
    const auto Z = meas({0.3});
    const auto X = states({0.0});
    const double miss = std::exp(-0.5) * s.clutter_intensity(Z[0]) * 0.2;
    const double det = std::exp(-0.5) * 0.8 * models::single_likelihood(Z[0], X[0], s);
    CHECK(multitarget_likelihood_partition_oracle(Z, X, s) ==
          Catch::Approx(miss + det).epsilon(1e-12));
  }
}

TEST_CASE("multitarget likelihood is permutation invariant", "[rfs]") {
  const SensorModel s = make_sensor(0.7, 0.85, 1.0);
  auto X = states({-2.0, 0.3, 1.8});
  auto Z = meas({-1.5, 0.0, 2.2});
  const double base = multitarget_likelihood(Z, X, s);
  RngStream rng(11, "shuffle");
  double max_dev = 0.0;
  for (int t = 0; t < 50; ++t) {
    for (int i = static_cast<int>(X.size()) - 1; i > 0; --i) {
      std::swap(X[i], X[rng.uniform_int(i + 1)]);
    }
    for (int j = static_cast<int>(Z.size()) - 1; j > 0; --j) {
      std::swap(Z[j], Z[rng.uniform_int(j + 1)]);
    }
    max_dev = std::max(max_dev, std::abs(multitarget_likelihood(Z, X, s) - base) / base);
  }
  CHECK(max_dev <= 1e-12);
}

TEST_CASE("point-mass tracks connect the likelihood to the association sum", "[rfs]") {
  const SensorModel s = make_sensor(0.8, 0.9, 0.7);
  const auto X = states({-1.0, 1.5});
  const auto Z = meas({-0.8, 2.0});
  const double like = multitarget_likelihood(Z, X, s);
  double prev_gap = 1e300;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    std::vector<GaussianDensity> tracks;
    for (const auto& x : X) tracks.emplace_back(x, mat1(eps));
    const TrackSet ts(tracks);
    double assoc_sum = 0.0;
    for (const auto& a : association::enumerate_mtas(2, 2)) {
      assoc_sum += association::association_likelihood(a, Z, ts, s);
    }
    const double gap = std::abs(assoc_sum - like) / like;
    CHECK(gap < prev_gap + 1e-15);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-5);
}

TEST_CASE("log and linear multitarget likelihoods agree", "[rfs]") {
  RngStream rng(5, "mtl-loglin");
  for (int t = 0; t < 10; ++t) {
    const SensorModel s = make_sensor(0.5 + rng.uniform(), 0.4 + 0.5 * rng.uniform(),
                                      rng.uniform_range(0.1, 1.2));
    const auto X = states({rng.uniform_range(-3, 3), rng.uniform_range(-3, 3)});
    const auto Z = meas({rng.uniform_range(-4, 4), rng.uniform_range(-4, 4)});
    const double lin = multitarget_likelihood(Z, X, s);
    const double lg = log_multitarget_likelihood(std::span<const Measurement>(Z),
                                                 std::span<const StateVector>(X), s);
    CHECK(std::log(lin) == Catch::Approx(lg).margin(1e-10));
  }
}

TEST_CASE("independent prior", "[rfs]") {
  const TrackSet ts(std::vector<GaussianDensity>{GaussianDensity(vec1(0.0), mat1(1.0)),
                                                 GaussianDensity(vec1(2.0), mat1(0.5))});
  const MultitargetDensity prior = independent_prior(ts);

  SECTION("vanishes off the known cardinality") {
    CHECK(prior(std::vector<StateVector>{}) == 0.0);
    CHECK(prior(states({0.0})) == 0.0);
    CHECK(prior(states({0.0, 1.0, 2.0})) == 0.0);
  }

  SECTION("single track is the track density") {
    const TrackSet one(std::vector<GaussianDensity>{GaussianDensity(vec1(0.0), mat1(1.0))});
    const MultitargetDensity p1 = independent_prior(one);
    CHECK(p1(states({0.4})) == Catch::Approx(one.track(0).pdf(vec1(0.4))).epsilon(1e-14));
  }

  SECTION("coincident points pick up both permutations") {
    const double f1 = ts.track(0).pdf(vec1(1.0));
    const double f2 = ts.track(1).pdf(vec1(1.0));
    CHECK(prior(states({1.0, 1.0 + 1e-12})) == Catch::Approx(2.0 * f1 * f2).epsilon(1e-6));
  }
}

TEST_CASE("set integral", "[rfs]") {
  const QuadratureGrid grid(-12.0, 12.0, 400);

  SECTION("pure empty-set density") {
    MultitargetDensity f;
    f.max_cardinality = 0;
    f.evaluator = [](const std::vector<StateVector>& e) { return e.empty() ? 1.0 : 0.0; };
    CHECK(set_integral(f, grid, 2) == Catch::Approx(1.0));
  }

  SECTION("independent priors integrate to one") {
    const TrackSet one(std::vector<GaussianDensity>{GaussianDensity(vec1(0.5), mat1(1.0))});
    CHECK(set_integral(independent_prior(one), grid, 1) == Catch::Approx(1.0).margin(1e-6));

    const TrackSet two(std::vector<GaussianDensity>{GaussianDensity(vec1(-1.0), mat1(1.0)),
                                                    GaussianDensity(vec1(1.5), mat1(0.8))});
    // The 1/2! bookkeeping against the 2 permutations.
    CHECK(set_integral(independent_prior(two), grid, 2) == Catch::Approx(1.0).margin(1e-5));
  }
}

TEST_CASE("multitarget posterior", "[rfs]") {
  const QuadratureGrid grid(-12.0, 12.0, 400);
  const SensorModel s = make_sensor(1.0, 0.9, 0.5);

  SECTION("prior concentrated on the empty set is unchanged") {
    MultitargetDensity prior;
    prior.max_cardinality = 0;
    prior.evaluator = [](const std::vector<StateVector>& e) { return e.empty() ? 1.0 : 0.0; };
    const MeasurementSet Z(meas({1.0}));
    const MultitargetDensity post = multitarget_posterior(Z, prior, s, grid, 1);
    CHECK(post(std::vector<StateVector>{}) == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(post(states({0.0})) == 0.0);
  }

  SECTION("posterior set-integrates to one and keeps likelihood ratios") {
    const TrackSet two(std::vector<GaussianDensity>{GaussianDensity(vec1(-1.0), mat1(1.0)),
                                                    GaussianDensity(vec1(1.0), mat1(1.0))});
    const MultitargetDensity prior = independent_prior(two);
    const MeasurementSet Z(meas({-0.8, 1.2}));
    const MultitargetDensity post = multitarget_posterior(Z, prior, s, grid, 2);
    CHECK(set_integral(post, grid, 2) == Catch::Approx(1.0).margin(1e-5));

    const auto Xa = states({-0.9, 1.1});
    const auto Xb = states({-0.2, 0.4});
    const double post_ratio = post(Xa) / post(Xb);
    const double joint_ratio =
        multitarget_likelihood(Z.elements(), Xa, s) * prior(Xa) /
        (multitarget_likelihood(Z.elements(), Xb, s) * prior(Xb));
    CHECK(post_ratio == Catch::Approx(joint_ratio).epsilon(1e-12));
  }

  SECTION("zero normalizer is a hard error") {
    const TrackSet one(std::vector<GaussianDensity>{GaussianDensity(vec1(0.0), mat1(1.0))});
    const SensorModel s0 = make_sensor(1.0, 1.0, 0.0);
    const MeasurementSet Z(meas({0.0, 1.0}));  // |Z| = 2 impossible for one target, no clutter
    CHECK_THROWS_AS(multitarget_posterior(Z, independent_prior(one), s0, grid, 1),
                    std::runtime_error);
  }
}

TEST_CASE("rfs-mta identity on seeded instances", "[rfs]") {
  const QuadratureGrid grid(-12.0, 12.0, 400);

  SECTION("no tracks: both sides are the clutter density") {
    const SensorModel s = make_sensor(1.0, 0.9, 1.0);
    const MeasurementSet Z(meas({0.5, 2.0}));
    const auto rep = verify_mta_rfs_identity(Z, TrackSet{}, s, grid);
    CHECK(rep.relative_gap < 1e-12);
    CHECK(rep.rhs == Catch::Approx(models::clutter_set_density(Z.elements(), s)).epsilon(1e-13));
  }

  SECTION("one track, one measurement") {
    const SensorModel s = make_sensor(1.0, 0.9, 0.5);
    const TrackSet ts(std::vector<GaussianDensity>{GaussianDensity(vec1(0.3), mat1(1.1))});
    const auto rep = verify_mta_rfs_identity(MeasurementSet(meas({0.0})), ts, s, grid);
    CHECK(rep.relative_gap <= 1e-4);
  }

  SECTION("two tracks, two measurements, unit clutter rate") {
    const SensorModel s = make_sensor(0.8, 0.85, 1.0);
    const TrackSet ts(std::vector<GaussianDensity>{GaussianDensity(vec1(-1.2), mat1(0.9)),
                                                   GaussianDensity(vec1(1.4), mat1(1.2))});
    const auto rep = verify_mta_rfs_identity(MeasurementSet(meas({-1.0, 1.0})), ts, s, grid);
    CHECK(rep.relative_gap <= 1e-4);
  }

  SECTION("guards") {
    const SensorModel s = make_sensor(1.0, 0.9, 0.5);
    std::vector<GaussianDensity> tracks(4, GaussianDensity(vec1(0.0), mat1(1.0)));
    CHECK_THROWS_AS(verify_mta_rfs_identity(MeasurementSet{}, TrackSet(tracks), s, grid),
                    std::invalid_argument);
  }
}

TEST_CASE("measurement-space set integral of the likelihood is one", "[rfs]") {
  for (double lambda : {0.5, 1.0}) {
    const SensorModel s = make_sensor(1.0, 0.9, lambda);
    CHECK(measurement_set_integral(states({0.4}), s) == Catch::Approx(1.0).margin(1e-4));
    CHECK(measurement_set_integral(states({-1.5, 2.0}), s) == Catch::Approx(1.0).margin(1e-4));
  }
  // Empty state set: pure Poisson clutter mass.
  const SensorModel s = make_sensor(1.0, 0.9, 1.0);
  CHECK(measurement_set_integral({}, s) == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("monte-carlo bayes risk", "[rfs]") {
  SECTION("zero cost function") {
    RngStream rng(1, "risk0");
    auto sampler = [](RngStream& r) {
      return std::make_pair(StateSet(states({r.uniform()})), MeasurementSet{});
    };
    const double risk = multitarget_bayes_risk(
        [](const MeasurementSet&) { return StateSet{}; },
        [](const StateSet&, const StateSet&) { return 0.0; }, sampler, 50, rng);
    CHECK(risk == 0.0);
  }

  SECTION("perfect estimator under a noiseless observable scenario") {
    RngStream rng(2, "risk1");
    const SensorModel s = make_sensor(1e-9, 1.0, 0.0);
    auto sampler = [&s](RngStream& r) {
      const double x = r.uniform_range(-3, 3);
      // Perfect detection, negligible noise: z == x up to 1e-4ish.
      const double z = x + 1e-5 * r.normal();
      return std::make_pair(StateSet(states({x})), MeasurementSet(meas({z})));
    };
    auto estimator = [](const MeasurementSet& Z) {
      std::vector<StateVector> xs;
      for (const auto& z : Z.elements()) xs.push_back(z);
      return StateSet(xs);
    };
    auto cost = [](const StateSet& a, const StateSet& b) {
      if (a.size() != b.size()) return 1.0;
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d += (a.elements()[i] - b.elements()[i]).norm();
      return d;
    };
    const double risk = multitarget_bayes_risk(estimator, cost, sampler, 100, rng);
    CHECK(risk < 1e-3);
  }

  SECTION("the glmb estimator beats the always-empty estimator on two targets") {
    const SensorModel s = make_sensor(0.5, 0.9, 0.5);
    const GaussianDensity prior1(vec1(-3.0), mat1(1.0));
    const GaussianDensity prior2(vec1(3.0), mat1(1.0));
    const metrics::OspaParams params(10.0, 1.0);

    auto sampler = [&](RngStream& r) {
      std::vector<StateVector> xs{vec1(-3.0 + r.normal()), vec1(3.0 + r.normal())};
      std::vector<Measurement> zs;
      for (const auto& x : xs) {
        if (r.uniform() < s.detection_probability()) {
          zs.push_back(vec1(x[0] + std::sqrt(0.5) * r.normal()));
        }
      }
      const int nc = r.poisson(s.clutter_rate());
      for (int j = 0; j < nc; ++j) zs.push_back(vec1(r.uniform_range(-12, 12)));
      // Tie-break identical draws; duplicates are measure-zero anyway.
      std::vector<Measurement> dedup;
      for (const auto& z : zs) {
        bool dup = false;
        for (const auto& d : dedup) dup = dup || d == z;
        if (!dup) dedup.push_back(z);
      }
      return std::make_pair(StateSet(xs), MeasurementSet(dedup));
    };

    auto glmb_estimator = [&](const MeasurementSet& Z) {
      glmb::GlmbDistribution::Component c;
      c.labels = {labeled::Label{0, 1}, labeled::Label{0, 2}};
      c.densities = {prior1, prior2};
      c.weight = 1.0;
      auto st = glmb::state_from_distribution(0, glmb::GlmbDistribution({c}));
      st = glmb::update(st, Z.elements(), s);
      const auto est = glmb::estimate_states(st);
      return est.empty() ? StateSet{} : StateSet(est.states());
    };
    auto empty_estimator = [](const MeasurementSet&) { return StateSet{}; };
    auto cost = [&](const StateSet& a, const StateSet& b) {
      return metrics::ospa(a, b, params);
    };

    RngStream rng_a(9, "risk-glmb");
    RngStream rng_b(9, "risk-glmb");
    const double risk_glmb = multitarget_bayes_risk(glmb_estimator, cost, sampler, 500, rng_a);
    const double risk_empty = multitarget_bayes_risk(empty_estimator, cost, sampler, 500, rng_b);
    CHECK(risk_empty >= risk_glmb);
    CHECK(risk_empty == Catch::Approx(params.cutoff));  // misses both targets every time
    CHECK(risk_glmb < 0.5 * params.cutoff);
  }
}

TEST_CASE("mta enumeration stays lazy at large sizes", "[rfs]") {
  // The generator yields without materializing the full (astronomically
  // large) association set; exhaustive consumers are guarded separately.
  int count = 0;
  for (const auto& a : association::enumerate_mtas(30, 30)) {
    CHECK(a.tracks() == 30);
    if (++count == 5) break;
  }
  CHECK(count == 5);
}
