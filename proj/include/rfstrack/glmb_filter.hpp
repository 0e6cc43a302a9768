#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rfstrack/association.hpp"
#include "rfstrack/labeled.hpp"
#include "rfstrack/models.hpp"
#include "rfstrack/quadrature.hpp"
#include "rfstrack/random.hpp"

namespace rfstrack::glmb {

using labeled::GlmbDistribution;
using labeled::Label;
using labeled::LabeledState;
using labeled::LabeledStateSet;
using models::GaussianDensity;
using models::Measurement;
using models::MotionModel;
using models::SensorModel;

/// Per-step birth: a labeled multi-Bernoulli set of candidate tracks. At the
/// prediction into time k the entry with index i becomes label (k, i). The
/// label budget per step is the (finite) length of this list.
struct BirthEntry {
  int index = 1;
  double existence = 0.0;  // r_b
  GaussianDensity density;
};

struct BirthModel {
  std::vector<BirthEntry> entries;
};

/// Audit metadata carried alongside each GLMB component: the association
/// history tag and, aligned with the component's labels, the measurement
/// each label was matched to at the last update (0 = miss).
struct ComponentMeta {
  std::string tag;
  std::vector<int> association;
};

struct GlmbFilterState {
  int k = -1;
  GlmbDistribution distribution;
  std::vector<ComponentMeta> meta;  // aligned with distribution.components()

  GlmbFilterState(int k_, GlmbDistribution d, std::vector<ComponentMeta> m)
      : k(k_), distribution(std::move(d)), meta(std::move(m)) {
    if (meta.size() != distribution.components().size()) {
      throw std::invalid_argument("GlmbFilterState: metadata misaligned with components");
    }
  }
};

/// State holding the single empty hypothesis with weight one.
inline GlmbFilterState empty_prior_state(int k = -1) {
  GlmbDistribution::Component c;
  c.weight = 1.0;
  return GlmbFilterState(k, GlmbDistribution({std::move(c)}), {ComponentMeta{"h0", {}}});
}

inline GlmbFilterState state_from_distribution(int k, GlmbDistribution d) {
  std::vector<ComponentMeta> meta;
  for (std::size_t i = 0; i < d.components().size(); ++i) {
    meta.push_back({"h" + std::to_string(i),
                    std::vector<int>(d.components()[i].labels.size(), 0)});
  }
  return GlmbFilterState(k, std::move(d), std::move(meta));
}

struct FilterOptions {
  std::size_t max_components = 100;
  double weight_floor = 0.0;
  bool merge_identical = true;
  double merge_tol = 1e-9;
};

struct StepInfo {
  double dropped_mass = 0.0;
  std::size_t candidates = 0;   // hypotheses considered before truncation
  std::size_t components = 0;   // hypotheses kept
};

namespace detail {

struct Hypothesis {
  std::vector<Label> labels;
  std::vector<GaussianDensity> densities;
  double log_weight = -std::numeric_limits<double>::infinity();
  ComponentMeta meta;
};

inline bool densities_close(const GaussianDensity& a, const GaussianDensity& b, double tol) {
  if (a.dim() != b.dim()) return false;
  return (a.mean() - b.mean()).cwiseAbs().maxCoeff() <= tol &&
         (a.cov() - b.cov()).cwiseAbs().maxCoeff() <= tol;
}

/// Merge hypotheses with identical label sets and densities equal within
/// tol, summing weights. The dominant contributor keeps the audit tag.
inline void merge_hypotheses(std::vector<Hypothesis>& hyps, double tol) {
  std::vector<Hypothesis> out;
  std::vector<double> out_linear;
  for (auto& h : hyps) {
    const double lin = std::exp(h.log_weight);
    bool merged = false;
    for (std::size_t q = 0; q < out.size(); ++q) {
      if (out[q].labels != h.labels) continue;
      bool same = true;
      for (std::size_t d = 0; d < h.densities.size(); ++d) {
        if (!densities_close(out[q].densities[d], h.densities[d], tol)) {
          same = false;
          break;
        }
      }
      if (!same) continue;
      if (lin > out_linear[q]) out[q].meta = h.meta;
      out_linear[q] += lin;
      out[q].log_weight = std::log(out_linear[q]);
      merged = true;
      break;
    }
    if (!merged) {
      out_linear.push_back(lin);
      out.push_back(std::move(h));
    }
  }
  hyps = std::move(out);
}

/// Normalize, apply the weight floor and the component cap, renormalize,
/// and assemble a filter state. Reports the truncated mass.
inline GlmbFilterState finalize(int k, std::vector<Hypothesis> hyps, const FilterOptions& opts,
                                StepInfo* info) {
  std::vector<double> logw;
  logw.reserve(hyps.size());
  for (const auto& h : hyps) logw.push_back(h.log_weight);
  const double lse = logsumexp(logw);
  if (!std::isfinite(lse)) {
    throw std::runtime_error("glmb filter: zero total hypothesis weight");
  }
  std::vector<std::size_t> order;
  std::vector<double> w(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    w[i] = std::exp(hyps[i].log_weight - lse);
    if (w[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

  std::vector<GlmbDistribution::Component> comps;
  std::vector<ComponentMeta> meta;
  double kept_mass = 0.0;
  for (std::size_t rank = 0; rank < order.size() && comps.size() < opts.max_components; ++rank) {
    const std::size_t i = order[rank];
    if (w[i] < opts.weight_floor) break;
    GlmbDistribution::Component c;
    c.labels = std::move(hyps[i].labels);
    c.densities = std::move(hyps[i].densities);
    c.weight = w[i];
    comps.push_back(std::move(c));
    meta.push_back(std::move(hyps[i].meta));
    kept_mass += w[i];
  }
  if (comps.empty()) {
    throw std::runtime_error("glmb filter: truncation removed every hypothesis");
  }
  if (info) {
    info->dropped_mass = 1.0 - kept_mass;
    info->candidates = hyps.size();
    info->components = comps.size();
  }
  return GlmbFilterState(k, GlmbDistribution(std::move(comps)), std::move(meta));
}

inline std::string mask_string(unsigned mask, int bits) {
  std::string s;
  for (int b = 0; b < bits; ++b) s += (mask & (1u << b)) ? '1' : '0';
  return s;
}

inline std::string assoc_string(const std::vector<int>& assoc) {
  std::string s;
  for (std::size_t i = 0; i < assoc.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(assoc[i]);
  }
  return s;
}

/// log of the closed-form detection likelihood p_D N(z; H mu, H P H' + R)
/// for one track density.
inline std::vector<double> detection_log_likelihoods(const GaussianDensity& track,
                                                     std::span<const Measurement> Z,
                                                     const SensorModel& s) {
  std::vector<double> out(Z.size(), -std::numeric_limits<double>::infinity());
  const double pd = s.detection_probability();
  if (pd == 0.0 || Z.empty()) return out;
  const Eigen::MatrixXd& H = s.observation();
  Eigen::MatrixXd cov = H * track.cov() * H.transpose() + s.noise();
  cov = 0.5 * (cov + cov.transpose().eval());
  const GaussianDensity pred(H * track.mean(), std::move(cov));
  for (std::size_t j = 0; j < Z.size(); ++j) out[j] = std::log(pd) + pred.log_pdf(Z[j]);
  return out;
}

}  // namespace detail

/// Time update. Every persisting label survives with probability p_S (its
/// density pushed through the motion model) or dies; the birth set is
/// appended with labels (k+1, index). Labels never mutate across the update.
inline GlmbFilterState predict(const GlmbFilterState& st, const MotionModel& mm,
                               const BirthModel& birth, const FilterOptions& opts = {},
                               StepInfo* info = nullptr) {
  const int k_new = st.k + 1;
  const double ps = mm.survival_probability();
  const int nb = static_cast<int>(birth.entries.size());

  std::vector<Label> birth_labels;
  for (const auto& b : birth.entries) birth_labels.push_back(Label{k_new, b.index});
  for (int b = 1; b < nb; ++b) {
    if (!(birth_labels[b - 1] < birth_labels[b])) {
      throw std::invalid_argument("predict: birth indices must be strictly increasing");
    }
  }

  std::vector<detail::Hypothesis> hyps;
  const auto& comps = st.distribution.components();
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const auto& c = comps[ci];
    const int nl = static_cast<int>(c.labels.size());
    if (nl > 20 || nb > 10) {
      throw std::invalid_argument("predict: survival/birth expansion too large");
    }
    std::vector<GaussianDensity> predicted;
    predicted.reserve(c.densities.size());
    for (const auto& d : c.densities) predicted.push_back(models::predict_density(d, mm));

    for (unsigned smask = 0; smask < (1u << nl); ++smask) {
      double w_surv = 1.0;
      for (int b = 0; b < nl; ++b) w_surv *= (smask & (1u << b)) ? ps : 1.0 - ps;
      if (w_surv == 0.0) continue;
      for (unsigned bmask = 0; bmask < (1u << nb); ++bmask) {
        double wgt = c.weight * w_surv;
        for (int b = 0; b < nb; ++b) {
          wgt *= (bmask & (1u << b)) ? birth.entries[b].existence
                                     : 1.0 - birth.entries[b].existence;
        }
        if (wgt == 0.0) continue;
        detail::Hypothesis h;
        for (int b = 0; b < nl; ++b) {
          if (smask & (1u << b)) {
            h.labels.push_back(c.labels[b]);
            h.densities.push_back(predicted[b]);
          }
        }
        for (int b = 0; b < nb; ++b) {
          if (bmask & (1u << b)) {
            h.labels.push_back(birth_labels[b]);
            h.densities.push_back(birth.entries[b].density);
          }
        }
        h.log_weight = std::log(wgt);
        h.meta.tag = st.meta[ci].tag + "|p:" + detail::mask_string(smask, nl) + "+" +
                     detail::mask_string(bmask, nb);
        h.meta.association.assign(h.labels.size(), 0);
        hyps.push_back(std::move(h));
      }
    }
  }
  if (opts.merge_identical) detail::merge_hypotheses(hyps, opts.merge_tol);
  return detail::finalize(k_new, std::move(hyps), opts, info);
}

/// Measurement update. For every prior component and every MTA over its
/// labels, one hypothesis is produced with the global association likelihood
/// as its weight factor; detected labels get the Kalman update, missed ones
/// keep their densities. Weights are computed for all candidates first and
/// only the survivors of truncation are materialized.
inline GlmbFilterState update(const GlmbFilterState& st, std::span<const Measurement> Z,
                              const SensorModel& s, const FilterOptions& opts = {},
                              StepInfo* info = nullptr) {
  const int m = static_cast<int>(Z.size());
  const double pd = s.detection_probability();
  const double log_miss =
      pd < 1.0 ? std::log(1.0 - pd) : -std::numeric_limits<double>::infinity();
  std::vector<double> log_kappa(Z.size());
  for (std::size_t j = 0; j < Z.size(); ++j) {
    const double kz = s.clutter_intensity(Z[j]);
    log_kappa[j] = kz > 0.0 ? std::log(kz) : -std::numeric_limits<double>::infinity();
  }

  const auto& comps = st.distribution.components();
  // Detection log-likelihood tables per component and label.
  std::vector<std::vector<std::vector<double>>> det(comps.size());
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    association::check_exhaustive_guard(static_cast<int>(comps[ci].labels.size()), m);
    for (const auto& d : comps[ci].densities) {
      det[ci].push_back(detail::detection_log_likelihoods(d, Z, s));
    }
  }

  struct Candidate {
    std::size_t ci;
    std::size_t ordinal;
    double log_w;
  };
  std::vector<Candidate> cands;
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const int nl = static_cast<int>(comps[ci].labels.size());
    const double log_parent = std::log(comps[ci].weight);
    std::size_t ordinal = 0;
    for (const auto& a : association::enumerate_mtas(nl, m)) {
      double lw = log_parent - s.clutter_rate();
      std::vector<char> assigned(Z.size(), 0);
      for (int t = 0; t < nl; ++t) {
        if (a(t) > 0) assigned[a(t) - 1] = 1;
      }
      for (int j = 0; j < m; ++j) {
        if (!assigned[j]) lw += log_kappa[j];
      }
      for (int t = 0; t < nl; ++t) {
        lw += a(t) == 0 ? log_miss : det[ci][t][a(t) - 1];
      }
      if (std::isfinite(lw)) cands.push_back({ci, ordinal, lw});
      ++ordinal;
    }
  }
  if (cands.empty()) {
    throw std::runtime_error("glmb update: zero total hypothesis weight");
  }

  std::vector<double> logw;
  logw.reserve(cands.size());
  for (const auto& c : cands) logw.push_back(c.log_w);
  const double lse = logsumexp(logw);
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cands[a].log_w > cands[b].log_w;
  });

  // Pick the hypotheses worth materializing.
  std::vector<char> selected(cands.size(), 0);
  std::size_t kept = 0;
  for (std::size_t rank = 0; rank < order.size() && kept < opts.max_components; ++rank) {
    const auto& c = cands[order[rank]];
    if (std::exp(c.log_w - lse) < opts.weight_floor) break;
    selected[order[rank]] = 1;
    ++kept;
  }

  std::vector<detail::Hypothesis> hyps;
  std::size_t cursor = 0;
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const int nl = static_cast<int>(comps[ci].labels.size());
    std::size_t ordinal = 0;
    for (const auto& a : association::enumerate_mtas(nl, m)) {
      while (cursor < cands.size() &&
             (cands[cursor].ci < ci || (cands[cursor].ci == ci && cands[cursor].ordinal < ordinal))) {
        ++cursor;
      }
      const bool is_cand = cursor < cands.size() && cands[cursor].ci == ci &&
                           cands[cursor].ordinal == ordinal;
      if (is_cand && selected[cursor]) {
        detail::Hypothesis h;
        h.labels = comps[ci].labels;
        h.log_weight = cands[cursor].log_w - lse;
        h.meta.association.resize(static_cast<std::size_t>(nl));
        for (int t = 0; t < nl; ++t) {
          h.meta.association[t] = a(t);
          if (a(t) == 0) {
            h.densities.push_back(comps[ci].densities[t]);
          } else {
            h.densities.push_back(models::bayes_update_density(comps[ci].densities[t], Z[a(t) - 1], s));
          }
        }
        h.meta.tag = st.meta[ci].tag + "|a:" + detail::assoc_string(h.meta.association);
        hyps.push_back(std::move(h));
      }
      ++ordinal;
    }
  }
  if (info) info->candidates = cands.size();
  if (opts.merge_identical) detail::merge_hypotheses(hyps, opts.merge_tol);

  StepInfo local;
  GlmbFilterState out = detail::finalize(st.k, std::move(hyps), opts, &local);
  // Truncation happened against the full candidate normalization.
  double kept_raw = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (selected[i]) kept_raw += std::exp(cands[i].log_w - lse);
  }
  if (info) {
    info->dropped_mass = 1.0 - kept_raw;
    info->components = local.components;
  }
  return out;
}

/// Joint (merged time + measurement) update driven by a per-component Gibbs
/// sampler. Each prior track or birth candidate carries one assignment
/// variable with values {dead, missed, measurement j}; single-site sweeps
/// resample each variable from its conditional. Deduplicated samples become
/// hypotheses with their exact weights. Deterministic for a fixed seed.
inline GlmbFilterState joint_update_gibbs(const GlmbFilterState& st, std::span<const Measurement> Z,
                                          const MotionModel& mm, const BirthModel& birth,
                                          const SensorModel& s, int sweeps, std::uint64_t seed,
                                          const FilterOptions& opts = {}, StepInfo* info = nullptr) {
  if (sweeps < 1) throw std::invalid_argument("joint_update_gibbs: sweeps must be >= 1");
  const int k_new = st.k + 1;
  const int m = static_cast<int>(Z.size());
  const double pd = s.detection_probability();
  const double ps = mm.survival_probability();
  const int nb = static_cast<int>(birth.entries.size());
  std::vector<double> kappa(Z.size());
  for (std::size_t j = 0; j < Z.size(); ++j) kappa[j] = s.clutter_intensity(Z[j]);

  const auto& comps = st.distribution.components();
  std::vector<detail::Hypothesis> hyps;

  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const auto& c = comps[ci];
    const int nl = static_cast<int>(c.labels.size());
    const int nt = nl + nb;

    // Track table: persisting labels first (predicted), then births.
    std::vector<Label> labels;
    std::vector<GaussianDensity> base;
    std::vector<double> p_exist;  // p_S or r_b
    for (int t = 0; t < nl; ++t) {
      labels.push_back(c.labels[t]);
      base.push_back(models::predict_density(c.densities[t], mm));
      p_exist.push_back(ps);
    }
    for (int b = 0; b < nb; ++b) {
      labels.push_back(Label{k_new, birth.entries[b].index});
      base.push_back(birth.entries[b].density);
      p_exist.push_back(birth.entries[b].existence);
    }

    // factor[t][v+1], v in {-1, 0, 1..m}.
    std::vector<std::vector<double>> factor(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
      factor[t].assign(static_cast<std::size_t>(m) + 2, 0.0);
      factor[t][0] = 1.0 - p_exist[t];
      factor[t][1] = p_exist[t] * (1.0 - pd);
      const auto det = detail::detection_log_likelihoods(base[t], Z, s);
      for (int j = 0; j < m; ++j) factor[t][2 + j] = p_exist[t] * std::exp(det[j]);
    }

    auto log_joint_weight = [&](const std::vector<int>& gamma) {
      double lw = -s.clutter_rate();
      std::vector<char> claimed(Z.size(), 0);
      for (int t = 0; t < nt; ++t) {
        const double f = factor[t][gamma[t] + 1];
        if (f <= 0.0) return -std::numeric_limits<double>::infinity();
        lw += std::log(f);
        if (gamma[t] > 0) claimed[gamma[t] - 1] = 1;
      }
      for (int j = 0; j < m; ++j) {
        if (!claimed[j]) {
          if (kappa[j] <= 0.0) return -std::numeric_limits<double>::infinity();
          lw += std::log(kappa[j]);
        }
      }
      return lw;
    };

    std::set<std::vector<int>> samples;
    std::vector<double> cand_w(static_cast<std::size_t>(m) + 2);
    std::vector<int> cand_v(static_cast<std::size_t>(m) + 2);

    auto run_chain = [&](std::vector<int> gamma, RngStream& rng, int chain_sweeps,
                         int chain_burn_in, double temper) {
      for (int sweep = 0; sweep < chain_sweeps; ++sweep) {
        for (int t = 0; t < nt; ++t) {
          std::vector<char> claimed(Z.size(), 0);
          for (int u = 0; u < nt; ++u) {
            if (u != t && gamma[u] > 0) claimed[gamma[u] - 1] = 1;
          }
          // Unclaimed clutter product shared by the dead/miss candidates; a
          // measurement claim removes one kappa factor.
          double clutter_all = 1.0;
          for (int j = 0; j < m; ++j) {
            if (!claimed[j]) clutter_all *= kappa[j];
          }
          int nc = 0;
          for (int v = -1; v <= m; ++v) {
            if (v > 0) {
              if (claimed[v - 1]) continue;
              double clutter_rest = 1.0;
              for (int j = 0; j < m; ++j) {
                if (!claimed[j] && j != v - 1) clutter_rest *= kappa[j];
              }
              cand_w[nc] = factor[t][v + 1] * clutter_rest;
            } else {
              cand_w[nc] = factor[t][v + 1] * clutter_all;
            }
            cand_v[nc] = v;
            ++nc;
          }
          double total = 0.0;
          for (int q = 0; q < nc; ++q) total += cand_w[q];
          if (total <= 0.0) continue;  // degenerate conditional; keep current value
          if (sweep >= chain_burn_in) {
            // The conditional just scored every admissible single-site
            // variant; all of them are discovered hypotheses (their final
            // weights are exact, so recording them only sharpens the
            // truncated posterior).
            std::vector<int> variant = gamma;
            for (int q = 0; q < nc; ++q) {
              if (cand_w[q] <= 0.0) continue;
              variant[t] = cand_v[q];
              samples.insert(variant);
            }
          }
          if (temper != 1.0) {
            total = 0.0;
            for (int q = 0; q < nc; ++q) {
              cand_w[q] = std::pow(cand_w[q], temper);
              total += cand_w[q];
            }
          }
          double u = rng.uniform() * total;
          int pick = nc - 1;
          for (int q = 0; q < nc; ++q) {
            u -= cand_w[q];
            if (u <= 0.0) {
              pick = q;
              break;
            }
          }
          gamma[t] = cand_v[pick];
        }
      }
    };

    // The sweep budget is split over independent restarts from diverse
    // deterministic corners of the hypothesis space; single chains can sit
    // in one association mode for a long time. Odd chains run on the
    // square-rooted conditionals, which roam the tail hypotheses that the
    // faithful chains rarely visit. Recorded weights are exact either way.
    const int chains = std::min(4, std::max(1, sweeps / 25));
    const int chain_sweeps = (sweeps + chains - 1) / chains;
    for (int chain = 0; chain < chains; ++chain) {
      std::vector<int> gamma(static_cast<std::size_t>(nt));
      switch (chain % 4) {
        case 0:  // persisting tracks missed, births unborn
          for (int t = 0; t < nt; ++t) gamma[t] = t < nl ? 0 : -1;
          break;
        case 1:  // nothing exists
          std::fill(gamma.begin(), gamma.end(), -1);
          break;
        case 2:  // everything exists and is missed
          std::fill(gamma.begin(), gamma.end(), 0);
          break;
        default: {  // greedy: each track takes its best admissible value
          std::vector<char> claimed(Z.size(), 0);
          for (int t = 0; t < nt; ++t) {
            int best_v = -1;
            double best_f = factor[t][0];
            if (factor[t][1] > best_f) {
              best_f = factor[t][1];
              best_v = 0;
            }
            for (int j = 0; j < m; ++j) {
              if (!claimed[j] && factor[t][2 + j] > best_f) {
                best_f = factor[t][2 + j];
                best_v = j + 1;
              }
            }
            gamma[t] = best_v;
            if (best_v > 0) claimed[best_v - 1] = 1;
          }
          break;
        }
      }
      RngStream rng(seed, "gibbs", static_cast<std::uint64_t>(ci) * 16 + chain);
      run_chain(std::move(gamma), rng, chain_sweeps, chain_sweeps / 10,
                chain % 2 == 0 ? 1.0 : 0.5);
    }

    const double log_parent = std::log(c.weight);
    for (const auto& g : samples) {
      const double lw = log_joint_weight(g);
      if (!std::isfinite(lw)) continue;
      detail::Hypothesis h;
      h.log_weight = log_parent + lw;
      for (int t = 0; t < nt; ++t) {
        if (g[t] < 0) continue;
        h.labels.push_back(labels[t]);
        h.meta.association.push_back(g[t]);
        if (g[t] == 0) {
          h.densities.push_back(base[t]);
        } else {
          h.densities.push_back(models::bayes_update_density(base[t], Z[g[t] - 1], s));
        }
      }
      h.meta.tag = st.meta[ci].tag + "|g:" + detail::assoc_string(g);
      hyps.push_back(std::move(h));
    }
  }

  if (opts.merge_identical) detail::merge_hypotheses(hyps, opts.merge_tol);
  return detail::finalize(k_new, std::move(hyps), opts, info);
}

/// Marginal-multitarget style estimate: pick the MAP cardinality, then the
/// heaviest component of that cardinality, and report each label's density
/// mode. Output ordering (and tie-breaking within the set) is by label.
inline LabeledStateSet estimate_states(const GlmbFilterState& st) {
  const auto card = labeled::glmb_cardinality(st.distribution);
  std::size_t n_star = 0;
  for (std::size_t n = 1; n < card.size(); ++n) {
    if (card[n] > card[n_star]) n_star = n;
  }
  const GlmbDistribution::Component* best = nullptr;
  for (const auto& c : st.distribution.components()) {
    if (c.labels.size() != n_star) continue;
    if (!best || c.weight > best->weight) best = &c;
  }
  if (!best || n_star == 0) return LabeledStateSet{};
  std::vector<LabeledState> out;
  for (std::size_t i = 0; i < best->labels.size(); ++i) {
    out.push_back({models::map_estimate(best->densities[i]), best->labels[i]});
  }
  return LabeledStateSet(std::move(out));
}

/// Semantic identity of a component for cross-checking update paths:
/// its label set together with the last-update association.
struct ComponentKey {
  std::vector<Label> labels;
  std::vector<int> association;

  auto operator<=>(const ComponentKey&) const = default;
};

inline ComponentKey component_key(const GlmbFilterState& st, std::size_t index) {
  return ComponentKey{st.distribution.components()[index].labels, st.meta[index].association};
}

}  // namespace rfstrack::glmb
