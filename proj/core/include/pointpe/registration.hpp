#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "pointpe/encoder.hpp"
#include "pointpe/point_cloud.hpp"
#include "pointpe/pooling.hpp"
#include "pointpe/rng.hpp"

namespace pointpe {

/// SE(3) element. rotation stays orthonormal with det +1; compose() and the
/// solver re-orthonormalize periodically via polar decomposition.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation * x + translation; }
  PointCloud apply(const PointCloud& pc) const;
  RigidTransform compose(const RigidTransform& rhs) const;  // this ∘ rhs
  RigidTransform inverse() const;
};

/// Twist (w, v): rotation generator in radians, then translation.
using Twist = Eigen::Matrix<double, 6, 1>;

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

/// Rodrigues rotation plus the closed-form V matrix for the translation.
RigidTransform se3_exp(const Twist& xi);

/// Inverse of se3_exp for rotation angles strictly below pi; the angle-pi
/// case is rejected.
Twist se3_log(const RigidTransform& t);

/// Nearest rotation in Frobenius norm (polar decomposition, det +1).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

/// Relative rotation angle between two rotations, in degrees.
double rotation_error_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

/// pool(encode_cloud(pc), kind) — the feature the solver matches.
PooledFeature global_feature(const PointCloud& pc, const Encoder& encoder,
                             PoolKind pooling);

/// K x 6 central-difference Jacobian of the global feature over the six
/// twist generators: column j = [f(exp(+s e_j) pc) - f(exp(-s e_j) pc)] / 2s.
Eigen::MatrixXd feature_jacobian(const PointCloud& pc, const Encoder& encoder,
                                 PoolKind pooling, double step);

struct RegisterOptions {
  int max_iters = 60;
  double tol = 1e-7;       // stop when the accepted step norm falls below
  double step = 1e-3;      // finite-difference step
  double damping = 1e-6;   // initial Levenberg damping; x10 on reject, /10 on accept
  double damping_floor = 1e-9;
  int max_rejects = 12;    // consecutive rejected steps before giving up
};

struct RegistrationResult {
  RigidTransform estimate;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::string status;  // converged | max_iters | stalled | singular | non_finite
  std::optional<double> rotation_err_deg;
  std::optional<double> translation_err;
};

/// Estimates T with feature(T source) ≈ feature(target) by damped
/// Gauss-Newton on the twist: solve (J'J + lambda I) dxi = J' r, compose
/// exp(dxi) on the left, accept only residual-non-increasing steps.
RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const Encoder& encoder, PoolKind pooling,
                                   const RegisterOptions& opts = {},
                                   const RigidTransform* ground_truth = nullptr);

struct NoiseSweepRow {
  PoolKind pooling = PoolKind::mean;
  double sigma = 0.0;
  int trials = 0;
  int successes = 0;
  double mean_rot_err_deg = 0.0;
  double mean_trans_err = 0.0;
};

struct NoiseSweepOptions {
  int trials_per_level = 50;
  double max_angle_deg = 30.0;      // perturbation angle uniform in [0, max]
  double max_translation = 0.3;     // per-axis uniform in [-max, max]
  double success_rot_deg = 5.0;     // success: rot err < 5 deg AND trans err < 0.05
  double success_trans = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  RegisterOptions reg;
};

/// One row per (pooling, sigma): ground-truth poses drawn from the documented
/// perturbation distribution, Gaussian noise of the given sigma added to the
/// target, success counted under the pinned criterion.
std::vector<NoiseSweepRow> noise_sweep(const Dataset& dataset, const Encoder& encoder,
                                       const std::vector<PoolKind>& poolings,
                                       const std::vector<double>& noise_levels,
                                       const NoiseSweepOptions& opts);

/// Random rigid perturbation: axis uniform on the sphere, angle uniform in
/// [0, max_angle_deg], translation uniform per axis.
RigidTransform random_transform(double max_angle_deg, double max_translation,
                                SeededRng& rng);

/// Registration test cloud: a mixture of Gaussian blobs at random anchors,
/// normalized. Unlike the synthetic surfaces (all rotationally symmetric to
/// some degree), these clouds pin the pose uniquely.
PointCloud make_asymmetric_cloud(std::size_t points, SeededRng& rng);

}  // namespace pointpe
