#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rfstrack/labeled.hpp"
#include "rfstrack/models.hpp"
#include "rfstrack/random.hpp"

namespace rfstrack::sim {

using labeled::Label;
using labeled::LabeledState;
using labeled::LabeledStateSet;
using models::Box;
using models::Measurement;
using models::MotionModel;
using models::SensorModel;
using models::StateVector;

struct BirthScheduleEntry {
  int time = 0;
  int index = 1;
  StateVector state;
};

/// Ground-truth scenario. All randomness flows from the seed through named
/// streams (truth, detections, clutter), so each part can be regenerated
/// independently.
struct Scenario {
  int steps = 1;
  std::vector<BirthScheduleEntry> births;
  MotionModel motion;
  SensorModel sensor;
  Box region;
  std::uint64_t seed = 0;
};

/// One simulated frame: the labeled truth, the scan, and (diagnostics only,
/// never visible to a filter) the origin of every measurement.
struct Frame {
  int k = 0;
  LabeledStateSet truth;
  std::vector<Measurement> measurements;
  std::vector<std::optional<Label>> provenance;  // aligned; nullopt = clutter
};

/// Propagates the birth schedule through the motion model. Targets die when
/// they leave the surveillance region. Deterministic for a fixed seed.
inline std::vector<LabeledStateSet> generate_truth(const Scenario& sc) {
  if (sc.steps < 1) throw std::invalid_argument("generate_truth: need at least one step");
  for (const auto& b : sc.births) {
    if (!sc.region.contains(b.state)) {
      throw std::invalid_argument("generate_truth: birth state outside the region");
    }
  }
  RngStream rng(sc.seed, "truth");
  const Eigen::MatrixXd sqrtQ = sc.motion.process_noise_sqrt();
  const int dim = sc.motion.state_dim();

  std::map<Label, StateVector> alive;
  std::vector<LabeledStateSet> out;
  for (int k = 0; k < sc.steps; ++k) {
    // Propagate survivors; death on region exit.
    std::map<Label, StateVector> next;
    for (const auto& [label, x] : alive) {
      Eigen::VectorXd w(dim);
      for (int d = 0; d < dim; ++d) w[d] = rng.normal();
      const StateVector xp = sc.motion.transition() * x + sqrtQ * w;
      if (sc.region.contains(xp)) next.emplace(label, xp);
    }
    alive = std::move(next);
    for (const auto& b : sc.births) {
      if (b.time == k) alive.emplace(Label{b.time, b.index}, b.state);
    }
    std::vector<LabeledState> frame;
    for (const auto& [label, x] : alive) frame.push_back({x, label});
    out.emplace_back(std::move(frame));
  }
  return out;
}

/// Draws one scan from the standard measurement model: each target yields at
/// most one detection (probability p_D, noise through H, R); clutter count is
/// Poisson with locations i.i.d. from the clutter density.
inline Frame generate_measurements(int k, const LabeledStateSet& truth, const SensorModel& s,
                                   RngStream& detections, RngStream& clutter) {
  Frame frame;
  frame.k = k;
  frame.truth = truth;
  const Eigen::MatrixXd& H = s.observation();
  const Eigen::LLT<Eigen::MatrixXd> lltR(s.noise());
  const int dz = s.measurement_dim();
  for (const auto& e : truth.elements()) {
    if (detections.uniform() < s.detection_probability()) {
      Eigen::VectorXd v(dz);
      for (int d = 0; d < dz; ++d) v[d] = detections.normal();
      frame.measurements.push_back(H * e.x + lltR.matrixL() * v);
      frame.provenance.push_back(e.label);
    }
  }
  const int n_clutter = clutter.poisson(s.clutter_rate());
  const Box& box = s.clutter_box();
  for (int j = 0; j < n_clutter; ++j) {
    Eigen::VectorXd z(dz);
    for (int d = 0; d < dz; ++d) z[d] = clutter.uniform_range(box.lo[d], box.hi[d]);
    frame.measurements.push_back(z);
    frame.provenance.push_back(std::nullopt);
  }
  return frame;
}

inline std::vector<Frame> simulate(const Scenario& sc) {
  const auto truth = generate_truth(sc);
  RngStream detections(sc.seed, "detections");
  RngStream clutter(sc.seed, "clutter");
  std::vector<Frame> frames;
  frames.reserve(truth.size());
  for (int k = 0; k < sc.steps; ++k) {
    frames.push_back(generate_measurements(k, truth[k], sc.sensor, detections, clutter));
  }
  return frames;
}

}  // namespace rfstrack::sim
