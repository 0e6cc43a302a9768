#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfstrack/config.hpp"
#include "rfstrack/glmb_filter.hpp"
#include "rfstrack/metrics.hpp"
#include "rfstrack/sim.hpp"
#include "rfstrack/verify.hpp"

namespace rfstrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

namespace detail {

inline nlohmann::json label_json(const labeled::Label& l) { return nlohmann::json{l.k, l.i}; }

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline std::string format_csv_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_artifact(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream out(dir / name, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write artifact: " + (dir / name).string());
  return out;
}

inline void write_manifest(const RunConfig& cfg) {
  auto out = open_artifact(cfg.out_dir, "manifest.json");
  out << cfg.resolved.dump(2) << "\n";
}

inline nlohmann::json frame_json(const sim::Frame& f) {
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& e : f.truth.elements()) {
    truth.push_back({{"label", label_json(e.label)}, {"state", vector_json(e.x)}});
  }
  nlohmann::json zs = nlohmann::json::array();
  for (const auto& z : f.measurements) zs.push_back(vector_json(z));
  return nlohmann::json{{"k", f.k}, {"truth", truth}, {"measurements", zs}};
}

inline nlohmann::json provenance_json(const sim::Frame& f) {
  nlohmann::json origins = nlohmann::json::array();
  for (const auto& o : f.provenance) {
    if (o) {
      origins.push_back(label_json(*o));
    } else {
      origins.push_back("clutter");
    }
  }
  return nlohmann::json{{"k", f.k}, {"origins", origins}};
}

/// Keep the `cap` measurements that some track density explains best; ranks
/// by the largest detection log-likelihood over the given densities. Only
/// invoked when a clutter spike pushes a scan past the exhaustive
/// association guard.
inline std::vector<models::Measurement> cap_scan(const std::vector<models::Measurement>& Z,
                                                 const std::vector<models::GaussianDensity>& tracks,
                                                 const models::SensorModel& s, std::size_t cap) {
  if (Z.size() <= cap) return Z;
  std::vector<double> score(Z.size(), -std::numeric_limits<double>::infinity());
  for (const auto& t : tracks) {
    const auto det = glmb::detail::detection_log_likelihoods(t, Z, s);
    for (std::size_t j = 0; j < Z.size(); ++j) score[j] = std::max(score[j], det[j]);
  }
  std::vector<std::size_t> order(Z.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  order.resize(cap);
  std::sort(order.begin(), order.end());  // keep the original scan order
  std::vector<models::Measurement> out;
  for (std::size_t j : order) out.push_back(Z[j]);
  return out;
}

inline void write_ospa_csv(const std::filesystem::path& dir, const std::vector<sim::Frame>& frames,
                           const std::vector<std::vector<models::StateVector>>& estimates,
                           const metrics::OspaParams& params) {
  auto out = open_artifact(dir, "ospa.csv");
  out << "k,ospa,cardinality_truth,cardinality_est\n";
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto truth_states = frames[k].truth.states();
    const double d = metrics::ospa(std::span(truth_states), std::span(estimates[k]), params);
    out << frames[k].k << "," << format_csv_value(d) << "," << truth_states.size() << ","
        << estimates[k].size() << "\n";
  }
}

}  // namespace detail

/// Simulate the configured scenario and run the selected GLMB filter over
/// it, writing frames, provenance, the filter trace, estimates, the OSPA
/// series, and a manifest that replays the run byte-identically.
inline int run_track(const std::filesystem::path& config_path, std::ostream& diag,
                     const CliOverrides& overrides = {}) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, RunMode::Track, overrides);
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::filesystem::create_directories(cfg.out_dir);
    detail::write_manifest(cfg);

    const sim::Scenario scenario{cfg.steps, cfg.births,   *cfg.motion,
                                 *cfg.sensor, *cfg.region, cfg.seed};
    const auto frames = sim::simulate(scenario);

    auto frames_out = detail::open_artifact(cfg.out_dir, "frames.jsonl");
    auto prov_out = detail::open_artifact(cfg.out_dir, "provenance.jsonl");
    for (const auto& f : frames) {
      frames_out << detail::frame_json(f).dump() << "\n";
      prov_out << detail::provenance_json(f).dump() << "\n";
    }

    glmb::FilterOptions opts;
    opts.max_components = cfg.max_components;
    opts.weight_floor = cfg.weight_floor;

    auto trace_out = detail::open_artifact(cfg.out_dir, "trace.jsonl");
    auto est_out = detail::open_artifact(cfg.out_dir, "estimates.jsonl");

    glmb::GlmbFilterState st = glmb::empty_prior_state(-1);
    RngStream gibbs_seeds(cfg.seed, "gibbs-step");
    std::vector<std::vector<models::StateVector>> est_states;
    for (const auto& frame : frames) {
      glmb::StepInfo info;
      bool capped = false;
      if (cfg.filter_name == "glmb-gibbs") {
        st = glmb::joint_update_gibbs(st, frame.measurements, *cfg.motion, cfg.filter_births,
                                      *cfg.sensor, cfg.gibbs_sweeps, gibbs_seeds.next_u64(), opts,
                                      &info);
      } else {
        st = glmb::predict(st, *cfg.motion, cfg.filter_births, opts);
        std::vector<models::Measurement> Z = frame.measurements;
        if (Z.size() > 8) {
          std::vector<models::GaussianDensity> densities;
          for (const auto& c : st.distribution.components()) {
            densities.insert(densities.end(), c.densities.begin(), c.densities.end());
          }
          Z = detail::cap_scan(Z, densities, *cfg.sensor, 8);
          capped = true;
        }
        st = glmb::update(st, Z, *cfg.sensor, opts, &info);
      }

      const auto est = glmb::estimate_states(st);
      est_states.emplace_back(est.states());

      nlohmann::json est_json = nlohmann::json::array();
      for (const auto& e : est.elements()) {
        est_json.push_back({{"label", detail::label_json(e.label)},
                            {"state", detail::vector_json(e.x)}});
      }
      est_out << nlohmann::json{{"k", frame.k}, {"estimates", est_json}}.dump() << "\n";

      trace_out << nlohmann::json{{"k", frame.k},
                                  {"components", st.distribution.components().size()},
                                  {"cardinality", labeled::glmb_cardinality(st.distribution)},
                                  {"estimates", est_json},
                                  {"dropped_mass", info.dropped_mass},
                                  {"capped_measurements", capped}}
                       .dump()
                << "\n";
    }

    auto final_out = detail::open_artifact(cfg.out_dir, "glmb_final.json");
    final_out << labeled::glmb_to_json(st.distribution).dump(2) << "\n";

    detail::write_ospa_csv(cfg.out_dir, frames, est_states, *cfg.ospa);
    return kExitOk;
  } catch (const std::exception& e) {
    diag << "track run failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

/// Fixed-track-count baseline: per frame, predict the track densities, pick
/// the MAP measurement-to-track association, and update the detected tracks
/// with their assigned measurements. No birth or death handling.
inline int run_mta_map(const std::filesystem::path& config_path, std::ostream& diag,
                       const CliOverrides& overrides = {}) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, RunMode::MtaMap, overrides);
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::filesystem::create_directories(cfg.out_dir);
    detail::write_manifest(cfg);

    const sim::Scenario scenario{cfg.steps, cfg.births,   *cfg.motion,
                                 *cfg.sensor, *cfg.region, cfg.seed};
    const auto frames = sim::simulate(scenario);

    auto frames_out = detail::open_artifact(cfg.out_dir, "frames.jsonl");
    auto prov_out = detail::open_artifact(cfg.out_dir, "provenance.jsonl");
    for (const auto& f : frames) {
      frames_out << detail::frame_json(f).dump() << "\n";
      prov_out << detail::provenance_json(f).dump() << "\n";
    }

    auto trace_out = detail::open_artifact(cfg.out_dir, "trace.jsonl");
    auto est_out = detail::open_artifact(cfg.out_dir, "estimates.jsonl");

    std::vector<models::GaussianDensity> tracks = cfg.tracker_tracks;
    std::vector<std::vector<models::StateVector>> est_states;
    for (const auto& frame : frames) {
      std::vector<models::GaussianDensity> predicted;
      predicted.reserve(tracks.size());
      for (const auto& t : tracks) predicted.push_back(models::predict_density(t, *cfg.motion));
      const association::TrackSet ts(predicted);

      bool capped = false;
      std::vector<models::Measurement> Z = frame.measurements;
      if (Z.size() > 8) {
        Z = detail::cap_scan(Z, predicted, *cfg.sensor, 8);
        capped = true;
      }

      const auto posterior = association::mta_posterior(Z, ts, *cfg.sensor);
      const auto best = association::map_mta(posterior);
      const auto updates = association::mta_state_estimate(best, Z, ts, *cfg.sensor);

      tracks = predicted;  // missed tracks coast on the prediction
      std::vector<models::StateVector> frame_est;
      nlohmann::json est_json = nlohmann::json::array();
      for (const auto& [idx, density] : updates) {
        tracks[static_cast<std::size_t>(idx)] = density;
        frame_est.push_back(models::map_estimate(density));
        est_json.push_back({{"track", idx}, {"state", detail::vector_json(frame_est.back())}});
      }
      est_states.push_back(std::move(frame_est));

      est_out << nlohmann::json{{"k", frame.k}, {"estimates", est_json}}.dump() << "\n";
      trace_out << nlohmann::json{{"k", frame.k},
                                  {"map_mta", best.second.assignments()},
                                  {"detections", best.second.detection_count()},
                                  {"capped_measurements", capped}}
                       .dump()
                << "\n";
    }

    detail::write_ospa_csv(cfg.out_dir, frames, est_states, *cfg.ospa);
    return kExitOk;
  } catch (const std::exception& e) {
    diag << "mta-map run failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

/// Run the numerical verification suite and write a JSON report. Nonzero
/// exit when any identity or normalization check exceeds its tolerance.
inline int run_verify(const std::filesystem::path& config_path, std::ostream& diag,
                      const CliOverrides& overrides = {}) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, RunMode::Verify, overrides);
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::filesystem::create_directories(cfg.out_dir);
    detail::write_manifest(cfg);

    const auto records = verify::run_verification_suite(cfg.verify_options);
    bool all_pass = true;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& r : records) {
      checks.push_back(verify::to_json(r));
      if (!r.pass) {
        all_pass = false;
        diag << "verification check failed: " << r.name << " (gap " << r.gap << " > tolerance "
             << r.tolerance << ")\n";
      }
    }
    auto report = detail::open_artifact(cfg.out_dir, "report.json");
    report << nlohmann::json{{"checks", checks}, {"all_pass", all_pass}}.dump(2) << "\n";
    return all_pass ? kExitOk : kExitFailure;
  } catch (const std::exception& e) {
    diag << "verify run failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace rfstrack::cli
