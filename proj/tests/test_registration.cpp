#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "pointpe/errors.hpp"
#include "pointpe/registration.hpp"

using namespace pointpe;

namespace {
constexpr double kPi = std::numbers::pi;

PointCloud blob_cloud(std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  return make_asymmetric_cloud(n, rng);
}
}  // namespace

TEST_CASE("se3_exp: zero twist is the identity") {
  const RigidTransform t = se3_exp(Twist::Zero());
  CHECK(t.rotation == Eigen::Matrix3d::Identity());
  CHECK(t.translation == Eigen::Vector3d::Zero());
}

TEST_CASE("se3_exp: quarter turn about z") {
  Twist xi = Twist::Zero();
  xi[2] = kPi / 2;
  const RigidTransform t = se3_exp(xi);
  const Eigen::Vector3d mapped = t.apply(Eigen::Vector3d(1, 0, 0));
  CHECK((mapped - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
  CHECK((t.rotation * t.rotation.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(t.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("se3 log(exp) round trip on 1000 random twists") {
  SeededRng rng(1);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Twist xi;
    Eigen::Vector3d w(rng.normal(), rng.normal(), rng.normal());
    if (w.norm() > 0) w *= rng.uniform(0.0, 2.0) / w.norm();  // |w| < 2 < pi
    xi.head<3>() = w;
    xi.tail<3>() = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Twist back = se3_log(se3_exp(xi));
    worst = std::max(worst, (back - xi).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("se3_log: rotation at pi rejected") {
  Twist xi = Twist::Zero();
  xi[0] = kPi;
  const RigidTransform t = se3_exp(xi);
  CHECK_THROWS_AS(se3_log(t), NumericalError);
}

TEST_CASE("compose, inverse, orthonormalize") {
  SeededRng rng(2);
  Twist a, b;
  for (int i = 0; i < 6; ++i) {
    a[i] = rng.uniform(-0.5, 0.5);
    b[i] = rng.uniform(-0.5, 0.5);
  }
  const RigidTransform ta = se3_exp(a), tb = se3_exp(b);
  const RigidTransform tab = ta.compose(tb);
  const Eigen::Vector3d p(0.3, -0.2, 0.9);
  CHECK((tab.apply(p) - ta.apply(tb.apply(p))).norm() < 1e-12);

  const RigidTransform id = ta.compose(ta.inverse());
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(id.translation.norm() < 1e-12);

  Eigen::Matrix3d drifted = ta.rotation * 1.001;
  const Eigen::Matrix3d fixed = orthonormalize(drifted);
  CHECK((fixed * fixed.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(fixed.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rotation_error_deg(fixed, ta.rotation) < 1e-6);
}

TEST_CASE("global_feature: invariant under the identity, sensitive to rotation") {
  const PointCloud pc = blob_cloud(128, 3);
  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 256, 0.5, 4);
  const PooledFeature f = global_feature(pc, encoder, PoolKind::mean);
  const PooledFeature g = global_feature(RigidTransform{}.apply(pc), encoder, PoolKind::mean);
  CHECK(f.values == g.values);

  // Feature distance grows monotonically with the rotation angle on [0, 30] deg.
  double previous = 0.0;
  for (const double angle_deg : {5.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
    Twist xi = Twist::Zero();
    xi.head<3>() = Eigen::Vector3d(0.2, 1.0, -0.4).normalized() * (angle_deg * kPi / 180.0);
    const PooledFeature h = global_feature(se3_exp(xi).apply(pc), encoder, PoolKind::mean);
    const double dist = (h.values - f.values).norm();
    CHECK(dist > previous);
    previous = dist;
  }
}

TEST_CASE("feature_jacobian: translation columns match the analytic derivative") {
  const PointCloud pc = blob_cloud(96, 5);
  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 256, 0.5, 6);
  const auto& w = std::get<RffParams>(encoder.params()).weights;
  const Eigen::Index half = w.rows();

  const Eigen::MatrixXd jac = feature_jacobian(pc, encoder, PoolKind::mean, 1e-3);

  // d/dt mean_i [cos(W x_i); sin(W x_i)] along axis a
  //   = mean_i [-sin(W x_i) .* W(:,a); cos(W x_i) .* W(:,a)].
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::VectorXd analytic = Eigen::VectorXd::Zero(2 * half);
    for (const auto& p : pc.points) {
      const Eigen::VectorXd phase = w * p;
      analytic.head(half) -=
          (phase.array().sin() * w.col(axis).array()).matrix();
      analytic.tail(half) +=
          (phase.array().cos() * w.col(axis).array()).matrix();
    }
    analytic /= static_cast<double>(pc.size());
    const double rel = (jac.col(3 + axis) - analytic).norm() / analytic.norm();
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("feature_jacobian: central differences are second order (Richardson)") {
  const PointCloud pc = blob_cloud(64, 7);
  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 128, 0.5, 8);
  const auto& w = std::get<RffParams>(encoder.params()).weights;
  const Eigen::Index half = w.rows();

  Eigen::MatrixXd exact(2 * half, 3);
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::VectorXd analytic = Eigen::VectorXd::Zero(2 * half);
    for (const auto& p : pc.points) {
      const Eigen::VectorXd phase = w * p;
      analytic.head(half) -= (phase.array().sin() * w.col(axis).array()).matrix();
      analytic.tail(half) += (phase.array().cos() * w.col(axis).array()).matrix();
    }
    exact.col(axis) = analytic / static_cast<double>(pc.size());
  }

  const double e1 = (feature_jacobian(pc, encoder, PoolKind::mean, 1e-2).rightCols<3>() -
                     exact).norm();
  const double e2 = (feature_jacobian(pc, encoder, PoolKind::mean, 2e-2).rightCols<3>() -
                     exact).norm();
  CHECK(e2 / e1 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("feature_jacobian: a cloud on the rotation axis has a null column") {
  // Points on the z axis are fixed by any rotation about z, so the
  // z-rotation column vanishes identically.
  PointCloud pc;
  for (int i = 0; i < 16; ++i) pc.points.emplace_back(0.0, 0.0, -0.8 + 0.1 * i);
  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 128, 0.5, 9);
  const Eigen::MatrixXd jac = feature_jacobian(pc, encoder, PoolKind::mean, 1e-3);
  CHECK(jac.col(2).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("register_clouds: source equals target") {
  const PointCloud pc = blob_cloud(128, 10);
  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 256, 0.5, 11);
  const RegistrationResult r = register_clouds(pc, pc, encoder, PoolKind::mean);
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
  CHECK(r.final_residual < 1e-9);
  CHECK(rotation_error_deg(r.estimate.rotation, Eigen::Matrix3d::Identity()) < 1e-9);
}

TEST_CASE("register_clouds: recovers a known 10-degree rotation") {
  const PointCloud source = blob_cloud(200, 12);
  Twist xi = Twist::Zero();
  xi.head<3>() = Eigen::Vector3d(0.3, 0.9, -0.2).normalized() * (10.0 * kPi / 180.0);
  RigidTransform truth = se3_exp(xi);
  truth.translation = {0.05, -0.08, 0.02};
  const PointCloud target = truth.apply(source);

  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 256, 0.5, 13);
  RegisterOptions opts;
  opts.max_iters = 30;
  const RegistrationResult r =
      register_clouds(source, target, encoder, PoolKind::mean, opts, &truth);
  CHECK(r.converged);
  CHECK(r.iterations <= 30);
  CHECK(*r.rotation_err_deg < 0.5);
  CHECK(*r.translation_err < 0.01);
  // All orthonormality drift stays controlled.
  CHECK((r.estimate.rotation * r.estimate.rotation.transpose() -
         Eigen::Matrix3d::Identity()).norm() < 1e-6);
}

TEST_CASE("register_clouds: gauge consistency over random perturbations") {
  const PointCloud source = blob_cloud(150, 14);
  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 256, 0.5, 15);
  SeededRng rng(16);
  int recovered = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    SeededRng trial_rng = rng.fork(t);
    const RigidTransform truth = random_transform(30.0, 0.3, trial_rng);
    const RegistrationResult r = register_clouds(source, truth.apply(source), encoder,
                                                 PoolKind::mean, {}, &truth);
    if (*r.rotation_err_deg < 0.5 && *r.translation_err < 0.05) ++recovered;
  }
  CHECK(recovered >= 9);
}

TEST_CASE("noise_sweep: row shape and clean dominance") {
  Dataset ds;
  for (int c = 0; c < 2; ++c) ds.clouds.push_back(blob_cloud(120, 20 + c));
  ds.num_classes = 1;
  const Encoder encoder = build_encoder(EncoderKind::rff, 3, 128, 0.5, 21);

  NoiseSweepOptions opts;
  opts.trials_per_level = 6;
  opts.seed = 22;
  opts.threads = 2;
  const auto rows = noise_sweep(ds, encoder, {PoolKind::mean, PoolKind::max},
                                {0.0, 0.05}, opts);
  REQUIRE(rows.size() == 4);  // |poolings| x |levels|
  for (const auto& row : rows) CHECK(row.trials == 6);
  //

  // Clean success rate bounds the noisy one for each pooling.
  CHECK(rows[0].successes >= rows[1].successes);  // mean: sigma 0 vs 0.05
  CHECK(rows[2].successes >= rows[3].successes);  // max
}

TEST_CASE("random_transform: bounds hold") {
  SeededRng rng(23);
  for (int t = 0; t < 200; ++t) {
    const RigidTransform x = random_transform(30.0, 0.3, rng);
    CHECK(rotation_error_deg(x.rotation, Eigen::Matrix3d::Identity()) <= 30.0 + 1e-9);
    CHECK(x.translation.lpNorm<Eigen::Infinity>() <= 0.3);
    CHECK((x.rotation * x.rotation.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("make_asymmetric_cloud: normalized and deterministic") {
  SeededRng a(24), b(24);
  const PointCloud pa = make_asymmetric_cloud(100, a);
  const PointCloud pb = make_asymmetric_cloud(100, b);
  REQUIRE(pa.size() == 100);
  CHECK(pa.centroid().norm() < 1e-9);
  CHECK(std::abs(pa.max_norm() - 1.0) < 1e-9);
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa.points[i] == pb.points[i]);
}
