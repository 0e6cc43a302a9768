#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>

namespace rfstrack::models {

using StateVector = Eigen::VectorXd;
using Measurement = Eigen::VectorXd;

inline constexpr double kSymmetryTol = 1e-12;

/// Axis-aligned box, used both as the clutter support and as the
/// surveillance region in simulations.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size() || lo.size() == 0) {
      throw std::invalid_argument("Box: lo/hi dimension mismatch");
    }
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
      if (!(lo[d] < hi[d])) throw std::invalid_argument("Box: need lo < hi in every dimension");
    }
  }

  int dim() const { return static_cast<int>(lo.size()); }

  double volume() const {
    double v = 1.0;
    for (Eigen::Index d = 0; d < lo.size(); ++d) v *= hi[d] - lo[d];
    return v;
  }

  bool contains(const Eigen::VectorXd& x) const {
    if (x.size() != lo.size()) return false;
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
      if (x[d] < lo[d] || x[d] > hi[d]) return false;
    }
    return true;
  }
};

/// Gaussian track density. Validated at construction: the covariance must be
/// symmetric to 1e-12 relative and admit a Cholesky factorization, which is
/// cached for density evaluation. Immutable afterwards.
class GaussianDensity {
 public:
  GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0 || cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
      throw std::invalid_argument("GaussianDensity: mean/covariance dimension mismatch");
    }
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
      throw std::invalid_argument("GaussianDensity: covariance is not symmetric");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose().eval());
    llt_.compute(cov_);
    if (llt_.info() != Eigen::Success) {
      throw std::invalid_argument("GaussianDensity: covariance is not positive definite");
    }
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < mean_.size(); ++i) log_det += std::log(llt_.matrixL()(i, i));
    log_det *= 2.0;
    log_norm_ = -0.5 * (mean_.size() * std::log(2.0 * std::numbers::pi) + log_det);
  }

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  int dim() const { return static_cast<int>(mean_.size()); }

  double log_pdf(const Eigen::VectorXd& x) const {
    if (x.size() != mean_.size()) {
      throw std::invalid_argument("GaussianDensity::log_pdf: dimension mismatch");
    }
    const Eigen::VectorXd d = x - mean_;
    const double q = llt_.matrixL().solve(d).squaredNorm();
    return log_norm_ - 0.5 * q;
  }

  double pdf(const Eigen::VectorXd& x) const { return std::exp(log_pdf(x)); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_norm_ = 0.0;
};

inline double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                           const Eigen::LLT<Eigen::MatrixXd>& llt, double log_norm) {
  const Eigen::VectorXd d = x - mean;
  return log_norm - 0.5 * llt.matrixL().solve(d).squaredNorm();
}

/// Linear-Gaussian motion: x' = F x + w, w ~ N(0, Q), plus the survival
/// probability used by the multitarget filter's time update.
class MotionModel {
 public:
  MotionModel(Eigen::MatrixXd transition, Eigen::MatrixXd process_noise, double survival_probability)
      : F_(std::move(transition)), Q_(std::move(process_noise)), ps_(survival_probability) {
    if (F_.rows() != F_.cols() || Q_.rows() != Q_.cols() || F_.rows() != Q_.rows() || F_.rows() == 0) {
      throw std::invalid_argument("MotionModel: F/Q dimension mismatch");
    }
    const double scale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
    if ((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
      throw std::invalid_argument("MotionModel: Q is not symmetric");
    }
    Q_ = 0.5 * (Q_ + Q_.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q_);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw std::invalid_argument("MotionModel: Q is not positive semidefinite");
    }
    if (!(ps_ >= 0.0 && ps_ <= 1.0)) {
      throw std::invalid_argument("MotionModel: survival probability must lie in [0,1]");
    }
  }

  const Eigen::MatrixXd& transition() const { return F_; }
  const Eigen::MatrixXd& process_noise() const { return Q_; }
  double survival_probability() const { return ps_; }
  int state_dim() const { return static_cast<int>(F_.rows()); }

  /// Square root of Q for sampling; PSD-safe (Q may be singular or zero).
  Eigen::MatrixXd process_noise_sqrt() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q_);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
  }

 private:
  Eigen::MatrixXd F_;
  Eigen::MatrixXd Q_;
  double ps_;
};

/// Sensor: linear-Gaussian detection channel z = H x + v, v ~ N(0, R),
/// constant detection probability, and Poisson clutter uniform over a box.
/// The default constructor normalizes the spatial density to 1/volume;
/// `with_clutter_density` admits an explicit (possibly unnormalized) value so
/// the verification suite can exercise its clutter-normalization check as a
/// negative control.
class SensorModel {
 public:
  SensorModel(Eigen::MatrixXd observation, Eigen::MatrixXd noise, double detection_probability,
              double clutter_rate, Box clutter_box)
      : SensorModel(std::move(observation), std::move(noise), detection_probability, clutter_rate,
                    std::move(clutter_box), 0.0, true) {}

  static SensorModel with_clutter_density(Eigen::MatrixXd observation, Eigen::MatrixXd noise,
                                          double detection_probability, double clutter_rate,
                                          Box clutter_box, double density) {
    return SensorModel(std::move(observation), std::move(noise), detection_probability, clutter_rate,
                       std::move(clutter_box), density, false);
  }

  const Eigen::MatrixXd& observation() const { return H_; }
  const Eigen::MatrixXd& noise() const { return R_; }
  double detection_probability() const { return pd_; }
  double clutter_rate() const { return lambda_; }
  const Box& clutter_box() const { return box_; }
  double clutter_density_value() const { return density_; }
  int state_dim() const { return static_cast<int>(H_.cols()); }
  int measurement_dim() const { return static_cast<int>(H_.rows()); }

  /// Spatial clutter density c(z): `density` inside the box, 0 outside.
  double clutter_spatial_density(const Measurement& z) const {
    return box_.contains(z) ? density_ : 0.0;
  }

  /// Clutter intensity kappa(z) = lambda * c(z).
  double clutter_intensity(const Measurement& z) const {
    return lambda_ * clutter_spatial_density(z);
  }

  double log_measurement_likelihood(const Measurement& z, const StateVector& x) const {
    if (z.size() != H_.rows() || x.size() != H_.cols()) {
      throw std::invalid_argument("SensorModel: measurement/state dimension mismatch");
    }
    return log_gaussian(z, H_ * x, llt_R_, log_norm_R_);
  }

 private:
  SensorModel(Eigen::MatrixXd observation, Eigen::MatrixXd noise, double detection_probability,
              double clutter_rate, Box clutter_box, double density, bool normalize_density)
      : H_(std::move(observation)),
        R_(std::move(noise)),
        pd_(detection_probability),
        lambda_(clutter_rate),
        box_(std::move(clutter_box)),
        density_(normalize_density ? 1.0 / box_.volume() : density) {
    if (H_.rows() == 0 || H_.cols() == 0 || R_.rows() != H_.rows() || R_.cols() != H_.rows()) {
      throw std::invalid_argument("SensorModel: H/R dimension mismatch");
    }
    if (box_.dim() != H_.rows()) {
      throw std::invalid_argument("SensorModel: clutter box dimension must match measurement dimension");
    }
    const double scale = std::max(1.0, R_.cwiseAbs().maxCoeff());
    if ((R_ - R_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
      throw std::invalid_argument("SensorModel: R is not symmetric");
    }
    R_ = 0.5 * (R_ + R_.transpose().eval());
    llt_R_.compute(R_);
    if (llt_R_.info() != Eigen::Success) {
      throw std::invalid_argument("SensorModel: R is not positive definite");
    }
    if (!(pd_ >= 0.0 && pd_ <= 1.0)) {
      throw std::invalid_argument("SensorModel: detection probability must lie in [0,1]");
    }
    if (!(lambda_ >= 0.0)) {
      throw std::invalid_argument("SensorModel: clutter rate must be >= 0");
    }
    if (density_ < 0.0) {
      throw std::invalid_argument("SensorModel: clutter density must be >= 0");
    }
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < R_.rows(); ++i) log_det += std::log(llt_R_.matrixL()(i, i));
    log_norm_R_ = -0.5 * (R_.rows() * std::log(2.0 * std::numbers::pi) + 2.0 * log_det);
  }

  Eigen::MatrixXd H_;
  Eigen::MatrixXd R_;
  double pd_;
  double lambda_;
  Box box_;
  double density_;
  Eigen::LLT<Eigen::MatrixXd> llt_R_;
  double log_norm_R_ = 0.0;
};

/// Single-target likelihood f(z|x) = N(z; Hx, R).
inline double log_single_likelihood(const Measurement& z, const StateVector& x, const SensorModel& s) {
  return s.log_measurement_likelihood(z, x);
}

inline double single_likelihood(const Measurement& z, const StateVector& x, const SensorModel& s) {
  return std::exp(log_single_likelihood(z, x, s));
}

/// Chapman-Kolmogorov prediction of a Gaussian through the linear motion
/// model. The result is symmetrized before validation; indefinite output is
/// a hard error.
inline GaussianDensity predict_density(const GaussianDensity& prior, const MotionModel& mm) {
  if (prior.dim() != mm.state_dim()) {
    throw std::invalid_argument("predict_density: dimension mismatch");
  }
  const Eigen::MatrixXd& F = mm.transition();
  Eigen::MatrixXd cov = F * prior.cov() * F.transpose() + mm.process_noise();
  cov = 0.5 * (cov + cov.transpose().eval());
  return GaussianDensity(F * prior.mean(), std::move(cov));
}

/// Conjugate (Kalman) measurement update, Joseph-form covariance.
inline GaussianDensity bayes_update_density(const GaussianDensity& prior, const Measurement& z,
                                            const SensorModel& s) {
  if (prior.dim() != s.state_dim() || z.size() != s.measurement_dim()) {
    throw std::invalid_argument("bayes_update_density: dimension mismatch");
  }
  const Eigen::MatrixXd& H = s.observation();
  const Eigen::MatrixXd& P = prior.cov();
  Eigen::MatrixXd innov_cov = H * P * H.transpose() + s.noise();
  innov_cov = 0.5 * (innov_cov + innov_cov.transpose().eval());
  Eigen::LLT<Eigen::MatrixXd> llt(innov_cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("bayes_update_density: singular innovation covariance");
  }
  const Eigen::MatrixXd K = llt.solve(H * P).transpose();
  const Eigen::VectorXd mean = prior.mean() + K * (z - H * prior.mean());
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(prior.dim(), prior.dim()) - K * H;
  Eigen::MatrixXd cov = A * P * A.transpose() + K * s.noise() * K.transpose();
  cov = 0.5 * (cov + cov.transpose().eval());
  return GaussianDensity(mean, std::move(cov));
}

/// Gaussian mode = mean.
inline StateVector map_estimate(const GaussianDensity& d) { return d.mean(); }

/// Poisson-process density of a clutter-only measurement set:
/// exp(-lambda) * prod kappa(z). Empty set gives exp(-lambda).
inline double log_clutter_set_density(std::span<const Measurement> Z, const SensorModel& s) {
  double acc = -s.clutter_rate();
  for (const Measurement& z : Z) acc += std::log(s.clutter_intensity(z));
  return acc;
}

inline double clutter_set_density(std::span<const Measurement> Z, const SensorModel& s) {
  double acc = std::exp(-s.clutter_rate());
  for (const Measurement& z : Z) acc *= s.clutter_intensity(z);
  return acc;
}

}  // namespace rfstrack::models
