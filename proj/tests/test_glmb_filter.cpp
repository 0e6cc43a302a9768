#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "rfstrack/glmb_filter.hpp"

using namespace rfstrack;
using namespace rfstrack::glmb;

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
  return SensorModel(mat1(1.0), mat1(r), pd, lambda, models::Box(vec1(-12.0), vec1(12.0)));
}

GlmbFilterState single_track_state(double mean, double var, Label l = Label{0, 1}) {
  GlmbDistribution::Component c;
  c.labels = {l};
  c.densities.emplace_back(vec1(mean), mat1(var));
  c.weight = 1.0;
  return state_from_distribution(0, GlmbDistribution({std::move(c)}));
}

FilterOptions exhaustive_options() {
  FilterOptions o;
  o.max_components = 1000000;
  o.weight_floor = 0.0;
  o.merge_identical = false;
  return o;
}

std::vector<Measurement> meas(std::initializer_list<double> zs) {
  std::vector<Measurement> out;
  for (double z : zs) out.push_back(vec1(z));
  return out;
}

void check_wellformed(const GlmbFilterState& st) {
  CHECK(std::abs(st.distribution.weight_sum() - 1.0) <= 1e-9);
  for (const auto& c : st.distribution.components()) {
    for (std::size_t i = 1; i < c.labels.size(); ++i) {
      CHECK(c.labels[i - 1] < c.labels[i]);
    }
  }
  CHECK(st.meta.size() == st.distribution.components().size());
}

}  // namespace

TEST_CASE("predict", "[glmb]") {
  SECTION("identity dynamics with certain survival is a no-op") {
    const MotionModel mm(mat1(1.0), mat1(0.0), 1.0);
    const auto st = single_track_state(0.7, 1.3);
    const auto out = predict(st, mm, BirthModel{});
    REQUIRE(out.distribution.components().size() == 1);
    const auto& c = out.distribution.components()[0];
    CHECK(c.weight == Catch::Approx(1.0));
    CHECK(c.labels == std::vector<Label>{Label{0, 1}});
    CHECK(c.densities[0].mean()[0] == Catch::Approx(0.7));
    CHECK(c.densities[0].cov()(0, 0) == Catch::Approx(1.3));
    CHECK(out.k == 1);
  }

  SECTION("bernoulli survival expansion") {
    const MotionModel mm(mat1(1.0), mat1(0.1), 0.9);
    const auto out = predict(single_track_state(0.0, 1.0), mm, BirthModel{});
    REQUIRE(out.distribution.components().size() == 2);
    std::map<std::size_t, double> by_card;
    for (const auto& c : out.distribution.components()) by_card[c.labels.size()] += c.weight;
    CHECK(by_card[1] == Catch::Approx(0.9));
    CHECK(by_card[0] == Catch::Approx(0.1));
  }

  SECTION("bernoulli birth from the empty prior") {
    const MotionModel mm(mat1(1.0), mat1(0.1), 0.9);
    BirthModel birth;
    birth.entries.push_back({1, 0.25, GaussianDensity(vec1(0.0), mat1(4.0))});
    const auto out = predict(empty_prior_state(-1), mm, birth);
    REQUIRE(out.distribution.components().size() == 2);
    std::map<std::size_t, double> by_card;
    for (const auto& c : out.distribution.components()) by_card[c.labels.size()] += c.weight;
    CHECK(by_card[1] == Catch::Approx(0.25));
    CHECK(by_card[0] == Catch::Approx(0.75));
    for (const auto& c : out.distribution.components()) {
      if (c.labels.size() == 1) CHECK(c.labels[0] == Label{0, 1});
    }
  }

  SECTION("labels persist and births carry the new time index") {
    const MotionModel mm(mat1(1.0), mat1(0.1), 0.8);
    BirthModel birth;
    birth.entries.push_back({1, 0.3, GaussianDensity(vec1(2.0), mat1(1.0))});
    const auto st = single_track_state(0.0, 1.0, Label{0, 2});
    const auto out = predict(st, mm, birth, exhaustive_options());
    check_wellformed(out);
    for (const auto& c : out.distribution.components()) {
      for (const auto& l : c.labels) {
        const bool persisting = l == Label{0, 2};
        const bool born = l == Label{1, 1};
        CHECK((persisting || born));
      }
    }
  }
}

TEST_CASE("update", "[glmb]") {
  const SensorModel s = make_sensor(1.0, 0.9, 0.5);

  SECTION("empty scan applies the miss factor and renormalizes") {
    const auto st = single_track_state(0.0, 1.0);
    const auto out = update(st, std::vector<Measurement>{}, s);
    REQUIRE(out.distribution.components().size() == 1);
    CHECK(out.distribution.components()[0].weight == Catch::Approx(1.0));
    // the density is untouched by a missed detection
    CHECK(out.distribution.components()[0].densities[0].mean()[0] == Catch::Approx(0.0));
  }

  SECTION("empty hypothesis absorbs any scan as clutter") {
    const auto out = update(empty_prior_state(0), meas({0.3, 2.0}), s);
    REQUIRE(out.distribution.components().size() == 1);
    CHECK(out.distribution.components()[0].labels.empty());
    CHECK(out.distribution.components()[0].weight == Catch::Approx(1.0));
  }

  SECTION("one label, one measurement: miss-to-detect ratio follows the association likelihood") {
    const auto st = single_track_state(0.0, 1.0);
    const auto Z = meas({0.4});
    const auto out = update(st, Z, s, exhaustive_options());
    REQUIRE(out.distribution.components().size() == 2);

    double w_miss = 0.0, w_det = 0.0;
    GaussianDensity det_density(vec1(0.0), mat1(1.0));
    for (std::size_t i = 0; i < out.distribution.components().size(); ++i) {
      const auto& c = out.distribution.components()[i];
      if (out.meta[i].association[0] == 0) {
        w_miss = c.weight;
      } else {
        w_det = c.weight;
        det_density = c.densities[0];
      }
    }

    const association::TrackSet ts(std::vector<GaussianDensity>{GaussianDensity(vec1(0.0), mat1(1.0))});
    const double l_miss = association::association_likelihood(association::Mta({0}, 1), Z, ts, s);
    const double l_det = association::association_likelihood(association::Mta({1}, 1), Z, ts, s);
    CHECK(w_miss / w_det == Catch::Approx(l_miss / l_det).epsilon(1e-12));

    // Cross-module oracle: feeding mta_posterior the prior l/normalized-l
    // turns it into the same (unnormalized-likelihood) posterior.
    const auto prior = [&](int, const association::Mta& a) {
      return association::association_likelihood(a, Z, ts, s) /
             association::normalized_association_likelihood(a, Z, ts, s);
    };
    const auto post = association::mta_posterior(Z, ts, s, prior);
    for (const auto& e : post.support) {
      if (e.alpha.detection_count() == 0) {
        CHECK(e.weight == Catch::Approx(w_miss).epsilon(1e-10));
      } else {
        CHECK(e.weight == Catch::Approx(w_det).epsilon(1e-10));
      }
    }

    // Detected density is the Kalman update.
    const auto want = models::bayes_update_density(st.distribution.components()[0].densities[0],
                                                   Z[0], s);
    CHECK(det_density.mean()[0] == Catch::Approx(want.mean()[0]).epsilon(1e-14));
  }

  SECTION("zero total weight is a hard error") {
    const SensorModel s0 = make_sensor(1.0, 1.0, 0.0);
    const auto st = single_track_state(0.0, 1.0);
    // Perfect detection, no clutter, empty scan: the only MTA has weight 0.
    CHECK_THROWS_AS(update(st, std::vector<Measurement>{}, s0), std::runtime_error);
  }
}

TEST_CASE("filter closure over many steps", "[glmb]") {
  const MotionModel mm(mat1(1.0), mat1(0.05), 0.95);
  const SensorModel s = make_sensor(0.5, 0.9, 0.5);
  BirthModel birth;
  birth.entries.push_back({1, 0.1, GaussianDensity(vec1(-2.0), mat1(4.0))});
  birth.entries.push_back({2, 0.1, GaussianDensity(vec1(2.0), mat1(4.0))});

  FilterOptions opts;
  opts.max_components = 50;

  RngStream rng(515, "closure");
  GlmbFilterState st = empty_prior_state(-1);
  for (int k = 0; k < 30; ++k) {
    st = predict(st, mm, birth, opts);
    check_wellformed(st);
    std::vector<Measurement> Z;
    const int mz = rng.uniform_int(3);
    for (int j = 0; j < mz; ++j) Z.push_back(vec1(rng.uniform_range(-4, 4)));
    st = update(st, Z, s, opts);
    check_wellformed(st);
    // Labels in every component come from past or current births only.
    for (const auto& c : st.distribution.components()) {
      for (const auto& l : c.labels) {
        CHECK(l.k <= st.k);
        CHECK((l.i == 1 || l.i == 2));
      }
    }
  }
}

TEST_CASE("degenerate single-target filter reproduces the kalman recursion", "[glmb]") {
  const MotionModel mm(mat1(1.02), mat1(0.3), 1.0);
  const SensorModel s = make_sensor(0.4, 1.0, 0.0);

  GlmbFilterState st = single_track_state(0.5, 2.0);
  GaussianDensity kalman(vec1(0.5), mat1(2.0));

  for (int k = 0; k < 50; ++k) {
    const double z = 2.0 * std::sin(0.3 * k) + 0.1 * k;
    st = predict(st, mm, BirthModel{});
    st = update(st, meas({z}), s);
    kalman = models::bayes_update_density(models::predict_density(kalman, mm), vec1(z), s);

    REQUIRE(st.distribution.components().size() == 1);
    const auto& d = st.distribution.components()[0].densities[0];
    CHECK(std::abs(d.mean()[0] - kalman.mean()[0]) <= 1e-12);
    CHECK(std::abs(d.cov()(0, 0) - kalman.cov()(0, 0)) <= 1e-12);
    CHECK(st.distribution.components()[0].labels == std::vector<Label>{Label{0, 1}});
  }
}

TEST_CASE("gibbs joint update", "[glmb]") {
  const MotionModel mm(mat1(1.0), mat1(0.1), 1.0);
  const SensorModel s = make_sensor(1.0, 0.9, 0.5);

  SECTION("recovers the exhaustive hypothesis set on a tiny instance") {
    const auto st = single_track_state(0.0, 1.0);
    const auto Z = meas({0.2});

    const auto exhaustive =
        update(predict(st, mm, BirthModel{}, exhaustive_options()), Z, s, exhaustive_options());
    const auto gibbs = joint_update_gibbs(st, Z, mm, BirthModel{}, s, 200, 17, exhaustive_options());

    REQUIRE(exhaustive.distribution.components().size() == 2);
    REQUIRE(gibbs.distribution.components().size() == 2);

    std::map<ComponentKey, double> ex, gs;
    for (std::size_t i = 0; i < exhaustive.distribution.components().size(); ++i) {
      ex[component_key(exhaustive, i)] = exhaustive.distribution.components()[i].weight;
    }
    for (std::size_t i = 0; i < gibbs.distribution.components().size(); ++i) {
      gs[component_key(gibbs, i)] = gibbs.distribution.components()[i].weight;
    }
    REQUIRE(ex.size() == gs.size());
    for (const auto& [key, w] : ex) {
      REQUIRE(gs.count(key) == 1);
      CHECK(gs[key] == Catch::Approx(w).epsilon(1e-10));
    }
  }

  SECTION("deterministic for a fixed seed") {
    const auto st = single_track_state(0.0, 1.0);
    const auto Z = meas({0.2, 1.5});
    const auto a = joint_update_gibbs(st, Z, mm, BirthModel{}, s, 100, 99);
    const auto b = joint_update_gibbs(st, Z, mm, BirthModel{}, s, 100, 99);
    REQUIRE(a.distribution.components().size() == b.distribution.components().size());
    for (std::size_t i = 0; i < a.distribution.components().size(); ++i) {
      CHECK(a.distribution.components()[i].weight == b.distribution.components()[i].weight);
      CHECK(a.meta[i].tag == b.meta[i].tag);
    }
  }

  SECTION("covers the exhaustive posterior mass on a 2-track instance") {
    GlmbDistribution::Component c;
    c.labels = {Label{0, 1}, Label{0, 2}};
    c.densities.emplace_back(vec1(-1.0), mat1(1.0));
    c.densities.emplace_back(vec1(1.0), mat1(1.0));
    c.weight = 1.0;
    const auto st = state_from_distribution(0, GlmbDistribution({std::move(c)}));

    const MotionModel mm2(mat1(1.0), mat1(0.1), 0.9);
    BirthModel birth;
    birth.entries.push_back({1, 0.2, GaussianDensity(vec1(0.0), mat1(4.0))});
    const SensorModel s2 = make_sensor(0.8, 0.8, 0.5);
    const auto Z = meas({-0.8, 1.1});

    const auto exhaustive =
        update(predict(st, mm2, birth, exhaustive_options()), Z, s2, exhaustive_options());
    const auto gibbs =
        joint_update_gibbs(st, Z, mm2, birth, s2, 500, 7, exhaustive_options());

    std::set<ComponentKey> seen;
    for (std::size_t i = 0; i < gibbs.distribution.components().size(); ++i) {
      seen.insert(component_key(gibbs, i));
    }
    double covered = 0.0;
    double top_w = -1.0;
    ComponentKey top_key;
    for (std::size_t i = 0; i < exhaustive.distribution.components().size(); ++i) {
      const double w = exhaustive.distribution.components()[i].weight;
      if (seen.count(component_key(exhaustive, i))) covered += w;
      if (w > top_w) {
        top_w = w;
        top_key = component_key(exhaustive, i);
      }
    }
    CHECK(covered >= 0.99);

    double gibbs_top_w = -1.0;
    ComponentKey gibbs_top;
    for (std::size_t i = 0; i < gibbs.distribution.components().size(); ++i) {
      if (gibbs.distribution.components()[i].weight > gibbs_top_w) {
        gibbs_top_w = gibbs.distribution.components()[i].weight;
        gibbs_top = component_key(gibbs, i);
      }
    }
    CHECK(gibbs_top == top_key);
  }
}

TEST_CASE("estimate_states", "[glmb]") {
  SECTION("empty-dominated posterior estimates nothing") {
    CHECK(estimate_states(empty_prior_state(0)).empty());

    GlmbDistribution::Component empty, one;
    empty.weight = 0.6;
    one.labels = {Label{0, 1}};
    one.densities.emplace_back(vec1(3.0), mat1(0.2));
    one.weight = 0.4;
    const auto st = state_from_distribution(0, GlmbDistribution({empty, one}));
    // Cardinality mode is 0 even though the labeled component is richer.
    CHECK(estimate_states(st).empty());
  }

  SECTION("single certain component reports the density modes") {
    const auto st = single_track_state(1.5, 0.3);
    const auto est = estimate_states(st);
    REQUIRE(est.size() == 1);
    CHECK(est.elements()[0].x[0] == Catch::Approx(1.5));
    CHECK(est.elements()[0].label == Label{0, 1});
  }

  SECTION("picks the heaviest component of the modal cardinality") {
    GlmbDistribution::Component a, b, c;
    a.labels = {Label{0, 1}};
    a.densities.emplace_back(vec1(-1.0), mat1(0.5));
    a.weight = 0.30;
    b.labels = {Label{0, 2}};
    b.densities.emplace_back(vec1(4.0), mat1(0.5));
    b.weight = 0.45;
    c.weight = 0.25;
    const auto st = state_from_distribution(0, GlmbDistribution({a, b, c}));
    const auto est = estimate_states(st);
    REQUIRE(est.size() == 1);
    CHECK(est.elements()[0].label == Label{0, 2});
    CHECK(est.elements()[0].x[0] == Catch::Approx(4.0));
  }
}
