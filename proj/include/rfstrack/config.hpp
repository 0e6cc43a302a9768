#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfstrack/glmb_filter.hpp"
#include "rfstrack/metrics.hpp"
#include "rfstrack/models.hpp"
#include "rfstrack/sim.hpp"
#include "rfstrack/verify.hpp"

namespace rfstrack::cli {

/// Configuration failure that names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : "config key '" + key + "': " + message),
        key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class RunMode { Track, MtaMap, Verify };

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

struct RunConfig {
  RunMode mode = RunMode::Track;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;

  // track / mta-map
  int steps = 1;
  std::vector<sim::BirthScheduleEntry> births;
  std::optional<models::MotionModel> motion;
  std::optional<models::SensorModel> sensor;
  std::optional<models::Box> region;
  std::string filter_name;  // glmb-exhaustive | glmb-gibbs | map-mta-tracker
  glmb::BirthModel filter_births;
  std::size_t max_components = 100;
  double weight_floor = 0.0;
  int gibbs_sweeps = 500;
  std::vector<models::GaussianDensity> tracker_tracks;
  std::optional<metrics::OspaParams> ospa;

  // verify
  verify::VerifyOptions verify_options;

  nlohmann::json resolved;  // full manifest content
};

namespace detail {

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("", "cannot read config file: " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("", "config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("", "config file " + path.string() + " must hold a JSON object");
  }
  return j;
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(key, "missing required key");
  return *it;
}

inline double get_number(const nlohmann::json& j, const std::string& key) {
  const auto& v = require_key(j, key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

inline double get_number_or(const nlohmann::json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(key, "expected a number");
  return j.at(key).get<double>();
}

inline std::int64_t get_integer(const nlohmann::json& j, const std::string& key) {
  const auto& v = require_key(j, key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError(key, "expected an integer");
  }
  return v.get<std::int64_t>();
}

inline std::string get_string(const nlohmann::json& j, const std::string& key) {
  const auto& v = require_key(j, key);
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

inline Eigen::VectorXd parse_vector(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a nonempty array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v.at(i).is_number()) throw ConfigError(key, "expected a nonempty array of numbers");
    out[static_cast<Eigen::Index>(i)] = v.at(i).get<double>();
  }
  return out;
}

inline Eigen::MatrixXd parse_matrix(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected an array of array rows");
  const std::size_t cols = v.at(0).is_array() ? v.at(0).size() : 0;
  if (cols == 0) throw ConfigError(key, "expected an array of array rows");
  Eigen::MatrixXd out(v.size(), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (!v.at(r).is_array() || v.at(r).size() != cols) {
      throw ConfigError(key, "rows must all have the same length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v.at(r).at(c).is_number()) throw ConfigError(key, "matrix entries must be numbers");
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v.at(r).at(c).get<double>();
    }
  }
  return out;
}

inline models::Box parse_box(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected [[lo, hi], ...]");
  Eigen::VectorXd lo(v.size()), hi(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) {
    if (!v.at(d).is_array() || v.at(d).size() != 2) throw ConfigError(key, "expected [[lo, hi], ...]");
    lo[static_cast<Eigen::Index>(d)] = v.at(d).at(0).get<double>();
    hi[static_cast<Eigen::Index>(d)] = v.at(d).at(1).get<double>();
  }
  try {
    return models::Box(lo, hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

inline void check_allowed_keys(const nlohmann::json& j, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(key, "unknown key");
  }
}

inline nlohmann::json density_to_json(const models::GaussianDensity& d) {
  nlohmann::json out;
  out["mean"] = std::vector<double>(d.mean().data(), d.mean().data() + d.dim());
  nlohmann::json cov = nlohmann::json::array();
  for (int r = 0; r < d.dim(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(d.dim()));
    for (int c = 0; c < d.dim(); ++c) row[static_cast<std::size_t>(c)] = d.cov()(r, c);
    cov.push_back(row);
  }
  out["cov"] = cov;
  return out;
}

}  // namespace detail

inline RunConfig load_config(const std::filesystem::path& path, RunMode mode,
                             const CliOverrides& overrides = {}) {
  using namespace detail;
  nlohmann::json j = load_json_file(path);
  if (overrides.seed) j["seed"] = *overrides.seed;
  if (overrides.out_dir) j["out_dir"] = *overrides.out_dir;

  RunConfig cfg;
  cfg.mode = mode;

  static const std::set<std::string> common_keys{"seed", "out_dir"};
  static const std::set<std::string> scenario_keys{
      "scenario.steps", "scenario.region",  "scenario.births",    "motion.F",
      "motion.Q",       "motion.ps",        "sensor.H",           "sensor.R",
      "sensor.pd",      "sensor.lambda",    "sensor.clutter_box", "sensor.clutter_density",
      "ospa.cutoff",    "ospa.order",       "filter.name"};

  if (mode == RunMode::Verify) {
    std::set<std::string> allowed = common_keys;
    allowed.insert("verify.grid_points");
    allowed.insert("verify.clutter_density_scale");
    check_allowed_keys(j, allowed);
  } else {
    std::set<std::string> allowed = common_keys;
    allowed.insert(scenario_keys.begin(), scenario_keys.end());
    if (mode == RunMode::Track) {
      allowed.insert({"filter.max_components", "filter.weight_floor", "filter.gibbs_sweeps",
                      "filter.births"});
    } else {
      allowed.insert("tracker.tracks");
    }
    check_allowed_keys(j, allowed);
  }

  const std::int64_t seed = get_integer(j, "seed");
  if (seed < 0) throw ConfigError("seed", "must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.out_dir = get_string(j, "out_dir");

  if (mode == RunMode::Verify) {
    cfg.verify_options.seed = cfg.seed;
    const std::int64_t pts = j.contains("verify.grid_points")
                                 ? get_integer(j, "verify.grid_points")
                                 : 400;
    if (pts < 10 || pts > 100000) throw ConfigError("verify.grid_points", "must lie in [10, 100000]");
    cfg.verify_options.grid_points = static_cast<int>(pts);
    cfg.verify_options.clutter_density_scale =
        get_number_or(j, "verify.clutter_density_scale", 1.0);
    if (!(cfg.verify_options.clutter_density_scale > 0.0)) {
      throw ConfigError("verify.clutter_density_scale", "must be positive");
    }
    j["verify.grid_points"] = cfg.verify_options.grid_points;
    j["verify.clutter_density_scale"] = cfg.verify_options.clutter_density_scale;
    cfg.resolved = j;
    return cfg;
  }

  // Shared scenario block.
  const std::int64_t steps = get_integer(j, "scenario.steps");
  if (steps < 1 || steps > 1000000) throw ConfigError("scenario.steps", "must lie in [1, 1e6]");
  cfg.steps = static_cast<int>(steps);

  const Eigen::MatrixXd F = parse_matrix(require_key(j, "motion.F"), "motion.F");
  const Eigen::MatrixXd Q = parse_matrix(require_key(j, "motion.Q"), "motion.Q");
  const double ps = get_number(j, "motion.ps");
  try {
    cfg.motion.emplace(F, Q, ps);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("motion.F", e.what());
  }

  const Eigen::MatrixXd H = parse_matrix(require_key(j, "sensor.H"), "sensor.H");
  const Eigen::MatrixXd R = parse_matrix(require_key(j, "sensor.R"), "sensor.R");
  const double pd = get_number(j, "sensor.pd");
  const double lambda = get_number(j, "sensor.lambda");
  const models::Box clutter_box = parse_box(require_key(j, "sensor.clutter_box"), "sensor.clutter_box");
  try {
    if (j.contains("sensor.clutter_density")) {
      cfg.sensor.emplace(models::SensorModel::with_clutter_density(
          H, R, pd, lambda, clutter_box, get_number(j, "sensor.clutter_density")));
    } else {
      cfg.sensor.emplace(H, R, pd, lambda, clutter_box);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sensor.H", e.what());
  }
  if (cfg.motion->state_dim() != cfg.sensor->state_dim()) {
    throw ConfigError("sensor.H", "observation matrix does not match the motion state dimension");
  }

  cfg.region.emplace(parse_box(require_key(j, "scenario.region"), "scenario.region"));
  if (cfg.region->dim() != cfg.motion->state_dim()) {
    throw ConfigError("scenario.region", "region dimension does not match the state dimension");
  }

  const auto& jb = require_key(j, "scenario.births");
  if (!jb.is_array()) throw ConfigError("scenario.births", "expected an array");
  for (const auto& e : jb) {
    sim::BirthScheduleEntry entry;
    entry.time = e.at("time").get<int>();
    entry.index = e.at("index").get<int>();
    entry.state = parse_vector(e.at("state"), "scenario.births");
    if (entry.time < 0 || entry.time >= cfg.steps) {
      throw ConfigError("scenario.births", "birth time outside the scenario horizon");
    }
    if (entry.index < 1) throw ConfigError("scenario.births", "birth index must be >= 1");
    cfg.births.push_back(std::move(entry));
  }

  cfg.ospa.emplace(get_number(j, "ospa.cutoff"), get_number(j, "ospa.order"));

  cfg.filter_name = get_string(j, "filter.name");
  if (mode == RunMode::Track) {
    if (cfg.filter_name != "glmb-exhaustive" && cfg.filter_name != "glmb-gibbs") {
      throw ConfigError("filter.name", "track mode expects glmb-exhaustive or glmb-gibbs");
    }
    const std::int64_t cap = j.contains("filter.max_components")
                                 ? get_integer(j, "filter.max_components")
                                 : 100;
    if (cap < 1) throw ConfigError("filter.max_components", "must be >= 1");
    cfg.max_components = static_cast<std::size_t>(cap);
    cfg.weight_floor = get_number_or(j, "filter.weight_floor", 0.0);
    if (cfg.weight_floor < 0.0 || cfg.weight_floor >= 1.0) {
      throw ConfigError("filter.weight_floor", "must lie in [0, 1)");
    }
    const std::int64_t sweeps =
        j.contains("filter.gibbs_sweeps") ? get_integer(j, "filter.gibbs_sweeps") : 500;
    if (sweeps < 1) throw ConfigError("filter.gibbs_sweeps", "must be >= 1");
    cfg.gibbs_sweeps = static_cast<int>(sweeps);

    const auto& jfb = require_key(j, "filter.births");
    if (!jfb.is_array()) throw ConfigError("filter.births", "expected an array");
    for (const auto& e : jfb) {
      const int index = e.at("index").get<int>();
      const double existence = e.at("r").get<double>();
      if (existence < 0.0 || existence > 1.0) {
        throw ConfigError("filter.births", "existence probability must lie in [0,1]");
      }
      try {
        cfg.filter_births.entries.push_back(
            {index, existence,
             models::GaussianDensity(parse_vector(e.at("mean"), "filter.births"),
                                     parse_matrix(e.at("cov"), "filter.births"))});
      } catch (const std::invalid_argument& err) {
        throw ConfigError("filter.births", err.what());
      }
    }
    std::sort(cfg.filter_births.entries.begin(), cfg.filter_births.entries.end(),
              [](const glmb::BirthEntry& a, const glmb::BirthEntry& b) { return a.index < b.index; });
    j["filter.max_components"] = cap;
    j["filter.weight_floor"] = cfg.weight_floor;
    j["filter.gibbs_sweeps"] = cfg.gibbs_sweeps;
  } else {
    if (cfg.filter_name != "map-mta-tracker") {
      throw ConfigError("filter.name", "mta-map mode expects map-mta-tracker");
    }
    const auto& jt = require_key(j, "tracker.tracks");
    if (!jt.is_array() || jt.empty()) {
      throw ConfigError("tracker.tracks", "expected a nonempty array (fixed known track count)");
    }
    for (const auto& e : jt) {
      try {
        cfg.tracker_tracks.emplace_back(parse_vector(e.at("mean"), "tracker.tracks"),
                                        parse_matrix(e.at("cov"), "tracker.tracks"));
      } catch (const std::invalid_argument& err) {
        throw ConfigError("tracker.tracks", err.what());
      }
    }
  }

  cfg.resolved = j;
  return cfg;
}

}  // namespace rfstrack::cli
