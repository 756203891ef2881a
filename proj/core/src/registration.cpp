#include "pointpe/registration.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "pointpe/errors.hpp"
#include "pointpe/parallel.hpp"

namespace pointpe {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kRad2Deg = 180.0 / kPi;
}  // namespace

PointCloud RigidTransform::apply(const PointCloud& pc) const {
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(pc.size());
  for (const auto& p : pc.points) out.points.push_back(rotation * p + translation);
  return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  return {rotation.transpose(), -(rotation.transpose() * translation)};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

RigidTransform se3_exp(const Twist& xi) {
  const Eigen::Vector3d w = xi.head<3>();
  const Eigen::Vector3d v = xi.tail<3>();
  const double theta = w.norm();
  const Eigen::Matrix3d wx = skew(w);
  const Eigen::Matrix3d wx2 = wx * wx;

  // Rodrigues coefficients with Taylor fallbacks near zero.
  double a, b, c;
  if (theta < 1e-8) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }

  RigidTransform t;
  t.rotation = Eigen::Matrix3d::Identity() + a * wx + b * wx2;
  const Eigen::Matrix3d vmat = Eigen::Matrix3d::Identity() + b * wx + c * wx2;
  t.translation = vmat * v;
  return t;
}

Twist se3_log(const RigidTransform& t) {
  const double cos_theta =
      std::clamp((t.rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (kPi - theta < 1e-6)
    throw NumericalError("se3_log: rotation angle at pi is outside the domain");

  Eigen::Vector3d w;
  const Eigen::Matrix3d anti = 0.5 * (t.rotation - t.rotation.transpose());
  const Eigen::Vector3d vee(anti(2, 1), anti(0, 2), anti(1, 0));
  if (theta < 1e-8) {
    w = vee * (1.0 + theta * theta / 6.0);
  } else {
    w = vee * (theta / std::sin(theta));
  }

  const Eigen::Matrix3d wx = skew(w);
  const Eigen::Matrix3d wx2 = wx * wx;
  double coeff;
  if (theta < 1e-8) {
    coeff = 1.0 / 12.0;
  } else {
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    coeff = (1.0 - a / (2.0 * b)) / (theta * theta);
  }
  const Eigen::Matrix3d v_inv = Eigen::Matrix3d::Identity() - 0.5 * wx + coeff * wx2;

  Twist xi;
  xi.head<3>() = w;
  xi.tail<3>() = v_inv * t.translation;
  return xi;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * svd.matrixV().transpose();
}

double rotation_error_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double cos_theta = std::clamp(((a.transpose() * b).trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(cos_theta) * kRad2Deg;
}

PooledFeature global_feature(const PointCloud& pc, const Encoder& encoder,
                             PoolKind pooling) {
  return pool(encoder.encode_cloud(pc), pooling);
}

Eigen::MatrixXd feature_jacobian(const PointCloud& pc, const Encoder& encoder,
                                 PoolKind pooling, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("feature_jacobian: step must be > 0");
  Eigen::MatrixXd jac(encoder.dim_out(), 6);
  for (int j = 0; j < 6; ++j) {
    Twist xi = Twist::Zero();
    xi[j] = step;
    const Eigen::VectorXd plus =
        global_feature(se3_exp(xi).apply(pc), encoder, pooling).values;
    xi[j] = -step;
    const Eigen::VectorXd minus =
        global_feature(se3_exp(xi).apply(pc), encoder, pooling).values;
    if (!plus.allFinite() || !minus.allFinite())
      throw NumericalError("feature_jacobian: non-finite feature");
    jac.col(j) = (plus - minus) / (2.0 * step);
  }
  return jac;
}

RegistrationResult register_clouds(const PointCloud& source, const PointCloud& target,
                                   const Encoder& encoder, PoolKind pooling,
                                   const RegisterOptions& opts,
                                   const RigidTransform* ground_truth) {
  if (opts.max_iters < 1 || !(opts.tol > 0.0))
    throw std::invalid_argument("register_clouds: bad options");

  RegistrationResult result;
  const Eigen::VectorXd target_feature = global_feature(target, encoder, pooling).values;

  RigidTransform estimate;
  PointCloud moved = source;
  Eigen::VectorXd residual = target_feature - global_feature(moved, encoder, pooling).values;
  double residual_norm = residual.norm();
  double lambda = opts.damping;
  int accepted_since_fix = 0;
  result.status = "max_iters";

  if (residual_norm < 1e-9) {
    result.converged = true;
    result.status = "converged";
  }

  for (int iter = 0; iter < opts.max_iters && !result.converged; ++iter) {
    result.iterations = iter + 1;
    const Eigen::MatrixXd jac = feature_jacobian(moved, encoder, pooling, opts.step);
    const Eigen::Matrix<double, 6, 6> normal = jac.transpose() * jac;
    const Eigen::Matrix<double, 6, 1> rhs = jac.transpose() * residual;

    bool accepted = false;
    for (int reject = 0; reject <= opts.max_rejects; ++reject) {
      const Eigen::Matrix<double, 6, 6> damped =
          normal + lambda * Eigen::Matrix<double, 6, 6>::Identity();
      const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(rhs);
      if (!delta.allFinite()) {
        if (lambda == 0.0) {
          result.status = "singular";
          result.final_residual = residual_norm;
          return result;
        }
        lambda *= 10.0;
        continue;
      }

      const RigidTransform candidate = se3_exp(delta).compose(estimate);
      const PointCloud candidate_moved = candidate.apply(source);
      const Eigen::VectorXd candidate_residual =
          target_feature - global_feature(candidate_moved, encoder, pooling).values;
      const double candidate_norm = candidate_residual.norm();
      if (!std::isfinite(candidate_norm)) {
        result.status = "non_finite";
        result.final_residual = residual_norm;
        return result;
      }

      if (candidate_norm <= residual_norm) {
        estimate = candidate;
        moved = candidate_moved;
        residual = candidate_residual;
        residual_norm = candidate_norm;
        lambda = std::max(lambda / 10.0, opts.damping_floor);
        accepted = true;
        if (++accepted_since_fix >= 10) {
          estimate.rotation = orthonormalize(estimate.rotation);
          moved = estimate.apply(source);
          accepted_since_fix = 0;
        }
        if (delta.norm() < opts.tol) {
          result.converged = true;
          result.status = "converged";
        }
        break;
      }
      lambda = lambda == 0.0 ? 1e-6 : lambda * 10.0;
    }
    if (!accepted && !result.converged) {
      result.status = "stalled";
      break;
    }
  }

  estimate.rotation = orthonormalize(estimate.rotation);
  result.estimate = estimate;
  result.final_residual = residual_norm;
  if (ground_truth) {
    result.rotation_err_deg = rotation_error_deg(estimate.rotation, ground_truth->rotation);
    result.translation_err = (estimate.translation - ground_truth->translation).norm();
  }
  return result;
}

PointCloud make_asymmetric_cloud(std::size_t points, SeededRng& rng) {
  if (points == 0) throw std::invalid_argument("make_asymmetric_cloud: points >= 1");
  constexpr int kBlobs = 6;
  Eigen::Matrix<double, 3, kBlobs> anchors;
  for (int b = 0; b < kBlobs; ++b)
    for (int a = 0; a < 3; ++a) anchors(a, b) = rng.uniform(-1.0, 1.0);
  PointCloud pc;
  pc.points.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const auto blob = rng.index(kBlobs);
    Eigen::Vector3d p = anchors.col(static_cast<int>(blob));
    for (int a = 0; a < 3; ++a) p[a] += rng.normal(0.0, 0.15);
    pc.points.push_back(p);
  }
  return normalize(pc);
}

RigidTransform random_transform(double max_angle_deg, double max_translation,
                                SeededRng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Eigen::Vector3d axis(r * std::cos(phi), r * std::sin(phi), z);
  const double angle = rng.uniform(0.0, max_angle_deg / kRad2Deg);

  Twist xi = Twist::Zero();
  xi.head<3>() = axis * angle;
  RigidTransform t = se3_exp(xi);
  t.translation = {rng.uniform(-max_translation, max_translation),
                   rng.uniform(-max_translation, max_translation),
                   rng.uniform(-max_translation, max_translation)};
  return t;
}

std::vector<NoiseSweepRow> noise_sweep(const Dataset& dataset, const Encoder& encoder,
                                       const std::vector<PoolKind>& poolings,
                                       const std::vector<double>& noise_levels,
                                       const NoiseSweepOptions& opts) {
  if (dataset.clouds.empty()) throw DataError("noise_sweep: empty dataset");
  if (opts.trials_per_level < 1)
    throw std::invalid_argument("noise_sweep: trials_per_level >= 1");

  const SeededRng base(opts.seed);
  std::vector<NoiseSweepRow> rows;
  rows.reserve(poolings.size() * noise_levels.size());

  for (std::size_t pi = 0; pi < poolings.size(); ++pi) {
    for (std::size_t li = 0; li < noise_levels.size(); ++li) {
      const double sigma = noise_levels[li];
      const int trials = opts.trials_per_level;
      std::vector<double> rot_errs(static_cast<std::size_t>(trials), 0.0);
      std::vector<double> trans_errs(static_cast<std::size_t>(trials), 0.0);
      std::vector<char> ok(static_cast<std::size_t>(trials), 0);

      parallel_for(
          static_cast<std::size_t>(trials),
          [&](std::size_t trial) {
            // All randomness for a trial hangs off one forked stream, so the
            // sweep is reproducible regardless of thread scheduling. The same
            // trial stream is reused across pooling kinds to pair the
            // comparisons.
            SeededRng trial_rng =
                base.fork(li * 1000003ULL + trial);
            const PointCloud& source =
                dataset.clouds[trial % dataset.clouds.size()];
            const RigidTransform truth =
                random_transform(opts.max_angle_deg, opts.max_translation, trial_rng);
            PointCloud target = truth.apply(source);
            if (sigma > 0.0)
              for (auto& p : target.points)
                for (int a = 0; a < 3; ++a) p[a] += trial_rng.normal(0.0, sigma);

            const RegistrationResult reg = register_clouds(
                source, target, encoder, poolings[pi], opts.reg, &truth);
            rot_errs[trial] = reg.rotation_err_deg.value_or(180.0);
            trans_errs[trial] = reg.translation_err.value_or(1e9);
            ok[trial] = (rot_errs[trial] < opts.success_rot_deg &&
                         trans_errs[trial] < opts.success_trans)
                            ? 1
                            : 0;
          },
          static_cast<unsigned>(std::max(1, opts.threads)));

      NoiseSweepRow row;
      row.pooling = poolings[pi];
      row.sigma = sigma;
      row.trials = trials;
      for (int t = 0; t < trials; ++t) {
        row.successes += ok[static_cast<std::size_t>(t)];
        row.mean_rot_err_deg += rot_errs[static_cast<std::size_t>(t)];
        row.mean_trans_err += trans_errs[static_cast<std::size_t>(t)];
      }
      row.mean_rot_err_deg /= trials;
      row.mean_trans_err /= trials;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace pointpe
