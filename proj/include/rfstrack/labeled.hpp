#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfstrack/models.hpp"
#include "rfstrack/quadrature.hpp"

namespace rfstrack::labeled {

using models::GaussianDensity;
using models::StateVector;

/// Track label (birth time, birth index), totally ordered by time then index.
struct Label {
  int k = 0;
  int i = 1;

  auto operator<=>(const Label&) const = default;
};

inline std::string to_string(const Label& l) {
  return "(" + std::to_string(l.k) + "," + std::to_string(l.i) + ")";
}

struct LabeledState {
  StateVector x;
  Label label;
};

/// Finite set of labeled states with pairwise-distinct labels, stored sorted
/// by label. Distinctness is the delta factor of the GLMB density made into
/// a type invariant.
class LabeledStateSet {
 public:
  LabeledStateSet() = default;
  explicit LabeledStateSet(std::vector<LabeledState> elements) : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end(),
              [](const LabeledState& a, const LabeledState& b) { return a.label < b.label; });
    for (std::size_t i = 1; i < elements_.size(); ++i) {
      if (elements_[i - 1].label == elements_[i].label) {
        throw std::invalid_argument("LabeledStateSet: duplicate labels");
      }
    }
  }

  const std::vector<LabeledState>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(elements_.size());
    for (const auto& e : elements_) out.push_back(e.label);
    return out;
  }

  std::vector<StateVector> states() const {
    std::vector<StateVector> out;
    out.reserve(elements_.size());
    for (const auto& e : elements_) out.push_back(e.x);
    return out;
  }

 private:
  std::vector<LabeledState> elements_;
};

inline std::vector<Label> labels_of(const LabeledStateSet& X) { return X.labels(); }

/// Generalized labeled multi-Bernoulli distribution: a finite list of
/// (label set, weight, per-label track densities). The paper's double index
/// (o, L) is flattened to one component list. Weights are renormalized at
/// construction (tolerance 1e-9 accumulates over filter steps); component
/// order is preserved so parallel metadata stays aligned.
class GlmbDistribution {
 public:
  struct Component {
    std::vector<Label> labels;               // sorted, distinct
    std::vector<GaussianDensity> densities;  // aligned with labels
    double weight = 0.0;

    const GaussianDensity& density_of(const Label& l) const {
      const auto it = std::lower_bound(labels.begin(), labels.end(), l);
      if (it == labels.end() || *it != l) {
        throw std::invalid_argument("GlmbDistribution: label not present in component");
      }
      return densities[static_cast<std::size_t>(it - labels.begin())];
    }
  };

  explicit GlmbDistribution(std::vector<Component> components) : components_(std::move(components)) {
    double total = 0.0;
    for (auto& c : components_) {
      if (!(c.weight >= 0.0)) {
        throw std::invalid_argument("GlmbDistribution: negative component weight");
      }
      if (c.labels.size() != c.densities.size()) {
        throw std::invalid_argument("GlmbDistribution: labels/densities misaligned");
      }
      if (!std::is_sorted(c.labels.begin(), c.labels.end())) {
        throw std::invalid_argument("GlmbDistribution: component labels must be sorted");
      }
      for (std::size_t i = 1; i < c.labels.size(); ++i) {
        if (c.labels[i - 1] == c.labels[i]) {
          throw std::invalid_argument("GlmbDistribution: duplicate labels in a component");
        }
      }
      total += c.weight;
    }
    if (!(total > 0.0)) {
      throw std::invalid_argument("GlmbDistribution: total weight must be positive");
    }
    std::erase_if(components_, [](const Component& c) { return c.weight == 0.0; });
    for (auto& c : components_) c.weight /= total;
  }

  const std::vector<Component>& components() const { return components_; }

  double weight_sum() const {
    double t = 0.0;
    for (const auto& c : components_) t += c.weight;
    return t;
  }

  /// Union of all component label sets, sorted.
  std::vector<Label> label_universe() const {
    std::vector<Label> out;
    for (const auto& c : components_) out.insert(out.end(), c.labels.begin(), c.labels.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::vector<Component> components_;
};

/// GLMB density at a labeled state set: the sum over components whose label
/// set equals the argument's labels of weight times the per-label densities.
inline double glmb_density(const LabeledStateSet& X, const GlmbDistribution& g) {
  const std::vector<Label> lab = X.labels();
  double total = 0.0;
  for (const auto& c : g.components()) {
    if (c.labels != lab) continue;
    double t = c.weight;
    for (std::size_t i = 0; i < lab.size(); ++i) t *= c.densities[i].pdf(X.elements()[i].x);
    total += t;
  }
  return total;
}

/// Cardinality distribution: p(n) = sum of weights of components with n
/// labels. Indexed 0..max cardinality; sums to 1.
inline std::vector<double> glmb_cardinality(const GlmbDistribution& g) {
  std::size_t max_card = 0;
  for (const auto& c : g.components()) max_card = std::max(max_card, c.labels.size());
  std::vector<double> p(max_card + 1, 0.0);
  for (const auto& c : g.components()) p[c.labels.size()] += c.weight;
  return p;
}

inline double expected_cardinality(const GlmbDistribution& g) {
  double acc = 0.0;
  for (const auto& c : g.components()) acc += c.weight * static_cast<double>(c.labels.size());
  return acc;
}

/// PHD at (x, l): sum over components containing l of weight times the
/// track density of l. Integrating over x and summing over labels gives the
/// expected cardinality.
inline double glmb_phd(const StateVector& x, const Label& l, const GlmbDistribution& g) {
  double acc = 0.0;
  for (const auto& c : g.components()) {
    const auto it = std::lower_bound(c.labels.begin(), c.labels.end(), l);
    if (it != c.labels.end() && *it == l) {
      acc += c.weight * c.densities[static_cast<std::size_t>(it - c.labels.begin())].pdf(x);
    }
  }
  return acc;
}

struct PruneResult {
  GlmbDistribution distribution;
  double dropped_mass = 0.0;  // mass removed before renormalization
};

/// Drops components below the weight floor, keeps the top max_components by
/// weight, renormalizes. The cardinality distribution moves by at most the
/// dropped mass, which is reported.
inline PruneResult prune_glmb(const GlmbDistribution& g, double weight_floor,
                              std::size_t max_components) {
  if (!(weight_floor >= 0.0 && weight_floor < 1.0)) {
    throw std::invalid_argument("prune_glmb: weight floor must lie in [0,1)");
  }
  std::vector<std::size_t> order(g.components().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.components()[a].weight > g.components()[b].weight;
  });
  std::vector<GlmbDistribution::Component> kept;
  double kept_mass = 0.0;
  for (std::size_t rank = 0; rank < order.size() && kept.size() < max_components; ++rank) {
    const auto& c = g.components()[order[rank]];
    if (c.weight < weight_floor) break;  // sorted, so everything after is below too
    kept.push_back(c);
    kept_mass += c.weight;
  }
  if (kept.empty()) {
    throw std::runtime_error("prune_glmb: pruning removed every component");
  }
  PruneResult out{GlmbDistribution(std::move(kept)), 1.0 - kept_mass};
  return out;
}

/// Labeled set integral of the GLMB density by 1-D grid quadrature: the sum
/// over the (finitely many) component label sets of the |L|-dimensional
/// integral of the density. Integration dimension is capped at 4.
inline double glmb_set_integral_quadrature(const GlmbDistribution& g, const QuadratureGrid& grid) {
  std::vector<std::vector<Label>> label_sets;
  for (const auto& c : g.components()) {
    if (std::find(label_sets.begin(), label_sets.end(), c.labels) == label_sets.end()) {
      label_sets.push_back(c.labels);
    }
  }
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  const int G = grid.points;
  double total = 0.0;
  for (const auto& lab : label_sets) {
    const int d = static_cast<int>(lab.size());
    if (d > 4) throw std::invalid_argument("glmb_set_integral_quadrature: more than 4 labels");
    if (d == 0) {
      total += glmb_density(LabeledStateSet{}, g);
      continue;
    }
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    double acc = 0.0;
    do {
      double weight = 1.0;
      std::vector<LabeledState> elems;
      elems.reserve(d);
      for (int q = 0; q < d; ++q) {
        weight *= w[idx[q]];
        Eigen::VectorXd x(1);
        x[0] = nodes[idx[q]];
        elems.push_back({x, lab[q]});
      }
      acc += weight * glmb_density(LabeledStateSet(std::move(elems)), g);
    } while (advance_multi_index(idx, G));
    total += acc;
  }
  return total;
}

inline nlohmann::json glmb_to_json(const GlmbDistribution& g) {
  nlohmann::json out;
  out["components"] = nlohmann::json::array();
  for (const auto& c : g.components()) {
    nlohmann::json jc;
    jc["weight"] = c.weight;
    jc["labels"] = nlohmann::json::array();
    jc["densities"] = nlohmann::json::array();
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
      jc["labels"].push_back({c.labels[i].k, c.labels[i].i});
      nlohmann::json jd;
      jd["label"] = {c.labels[i].k, c.labels[i].i};
      jd["mean"] = std::vector<double>(c.densities[i].mean().data(),
                                       c.densities[i].mean().data() + c.densities[i].dim());
      nlohmann::json cov = nlohmann::json::array();
      for (int r = 0; r < c.densities[i].dim(); ++r) {
        std::vector<double> row(c.densities[i].dim());
        for (int q = 0; q < c.densities[i].dim(); ++q) row[q] = c.densities[i].cov()(r, q);
        cov.push_back(row);
      }
      jd["cov"] = cov;
      jc["densities"].push_back(jd);
    }
    out["components"].push_back(jc);
  }
  return out;
}

inline GlmbDistribution glmb_from_json(const nlohmann::json& j) {
  std::vector<GlmbDistribution::Component> comps;
  for (const auto& jc : j.at("components")) {
    std::vector<std::pair<Label, GaussianDensity>> entries;
    for (const auto& jd : jc.at("densities")) {
      const auto jl = jd.at("label");
      const Label label{jl.at(0).get<int>(), jl.at(1).get<int>()};
      const auto jm = jd.at("mean").get<std::vector<double>>();
      Eigen::VectorXd mean(jm.size());
      for (std::size_t q = 0; q < jm.size(); ++q) mean[static_cast<Eigen::Index>(q)] = jm[q];
      const auto& jcov = jd.at("cov");
      Eigen::MatrixXd cov(jm.size(), jm.size());
      for (std::size_t r = 0; r < jm.size(); ++r) {
        for (std::size_t q = 0; q < jm.size(); ++q) {
          cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) =
              jcov.at(r).at(q).get<double>();
        }
      }
      entries.emplace_back(label, GaussianDensity(mean, cov));
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    GlmbDistribution::Component c;
    c.weight = jc.at("weight").get<double>();
    for (auto& [label, density] : entries) {
      c.labels.push_back(label);
      c.densities.push_back(std::move(density));
    }
    comps.push_back(std::move(c));
  }
  return GlmbDistribution(std::move(comps));
}

}  // namespace rfstrack::labeled
