#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "pointpe/corruption.hpp"
#include "pointpe/errors.hpp"
#include "pointpe/point_cloud.hpp"

using namespace pointpe;

namespace {

PointCloud test_cloud(std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  return make_shape(ShapeKind::torus, n, rng);
}

bool originals_unmoved(const PointCloud& before, const PointCloud& after) {
  if (after.size() < before.size()) return false;
  for (std::size_t i = 0; i < before.size(); ++i)
    if (after.points[i] != before.points[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("severity_table: ladders") {
  CHECK(severity_table(CorruptionKind::gaussian_noise) ==
        std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10});
  CHECK(severity_table(CorruptionKind::ball_outliers).front() == 0.3);
  CHECK(severity_table(CorruptionKind::ball_outliers).back() == 3.0);
  CHECK(severity_table(CorruptionKind::impulse_noise).front() == 0.02);
  CHECK(severity_table(CorruptionKind::impulse_noise).back() == 1.0);
  CHECK(severity_table(CorruptionKind::upsampling_outliers) ==
        std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  CHECK_THROWS_AS(severity_table(CorruptionKind::rotation), std::invalid_argument);
  CHECK_THROWS_AS(severity_table(CorruptionKind::shear), std::invalid_argument);
}

TEST_CASE("corrupt: zero gaussian noise is the identity") {
  const PointCloud pc = test_cloud(128, 1);
  CorruptionSpec spec{CorruptionKind::gaussian_noise, 0, 0.0, {}, 9};
  const PointCloud out = corrupt(pc, spec);
  REQUIRE(out.size() == pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) CHECK(out.points[i] == pc.points[i]);
}

TEST_CASE("corrupt: uniform noise stays within the severity box") {
  const PointCloud pc = test_cloud(256, 2);
  for (int level = 1; level <= 10; ++level) {
    CorruptionSpec spec{CorruptionKind::uniform_noise, level, 0.0, {}, 11};
    const double s = severity_table(spec.kind)[level - 1];
    const PointCloud out = corrupt(pc, spec);
    REQUIRE(out.size() == pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i)
      for (int a = 0; a < 3; ++a)
        CHECK(std::abs(out.points[i][a] - pc.points[i][a]) <= s);
  }
}

TEST_CASE("corrupt: impulse moves selected points by exactly 0.1*(±1,±1,±1)") {
  const PointCloud pc = test_cloud(200, 3);
  CorruptionSpec spec{CorruptionKind::impulse_noise, 0, 0.25, {}, 21};
  const PointCloud out = corrupt(pc, spec);
  REQUIRE(out.size() == pc.size());
  std::size_t moved = 0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Eigen::Vector3d d = out.points[i] - pc.points[i];
    if (d.norm() == 0.0) continue;
    ++moved;
    const bool plus = (d - 0.1 * Eigen::Vector3d::Ones()).norm() < 1e-15;
    const bool minus = (d + 0.1 * Eigen::Vector3d::Ones()).norm() < 1e-15;
    CHECK((plus || minus));
  }
  CHECK(moved == 50);  // floor(0.25 * 200)
}

TEST_CASE("corrupt: impulse level 10 hits every point") {
  const PointCloud pc = test_cloud(64, 4);
  CorruptionSpec spec{CorruptionKind::impulse_noise, 10, 0.0, {}, 5};
  const PointCloud out = corrupt(pc, spec);
  for (std::size_t i = 0; i < pc.size(); ++i)
    CHECK((out.points[i] - pc.points[i]).norm() > 0.0);
}

TEST_CASE("corrupt: background outliers append inside [-1,1]^3") {
  const PointCloud pc = test_cloud(1024, 5);
  CorruptionSpec spec{CorruptionKind::background_outliers, 0, 0.1, {}, 31};
  const PointCloud out = corrupt(pc, spec);
  CHECK(out.size() == 1126);  // 1024 + floor(0.1 * 1024)
  CHECK(originals_unmoved(pc, out));
  for (std::size_t i = pc.size(); i < out.size(); ++i)
    for (int a = 0; a < 3; ++a) {
      CHECK(out.points[i][a] >= -1.0);
      CHECK(out.points[i][a] <= 1.0);
    }
}

TEST_CASE("corrupt: ball outliers sit on the sphere of the given radius") {
  const PointCloud pc = test_cloud(1024, 6);
  CorruptionSpec spec{CorruptionKind::ball_outliers, 0, 0.5, {{"fraction", 0.5}}, 41};
  const PointCloud out = corrupt(pc, spec);
  CHECK(out.size() == 1024 + 512);
  CHECK(originals_unmoved(pc, out));
  for (std::size_t i = pc.size(); i < out.size(); ++i)
    CHECK(std::abs(out.points[i].norm() - 0.5) < 1e-9);
}

TEST_CASE("corrupt: upsampling outliers are jittered copies") {
  const PointCloud pc = test_cloud(300, 7);
  CorruptionSpec spec{CorruptionKind::upsampling_outliers, 3, 0.0, {}, 51};  // 30%
  const PointCloud out = corrupt(pc, spec);
  CHECK(out.size() == 390);
  CHECK(originals_unmoved(pc, out));
  for (std::size_t i = pc.size(); i < out.size(); ++i) {
    // Every appended point is within the jitter box of some original.
    double best = 1e9;
    for (std::size_t j = 0; j < pc.size(); ++j)
      best = std::min(best, (out.points[i] - pc.points[j]).lpNorm<Eigen::Infinity>());
    CHECK(best <= 0.05 + 1e-12);
  }
}

TEST_CASE("corrupt: label preserved and noise kinds keep N") {
  PointCloud pc = test_cloud(100, 8);
  pc.label = 4;
  for (const CorruptionKind kind : {CorruptionKind::uniform_noise,
                                    CorruptionKind::gaussian_noise,
                                    CorruptionKind::impulse_noise}) {
    CorruptionSpec spec{kind, 5, 0.0, {}, 61};
    const PointCloud out = corrupt(pc, spec);
    CHECK(out.size() == pc.size());
    CHECK(out.label == 4);
  }
}

TEST_CASE("corrupt: determinism in the spec seed") {
  const PointCloud pc = test_cloud(128, 9);
  for (int kind_idx = 0; kind_idx <= static_cast<int>(CorruptionKind::ball_outliers);
       ++kind_idx) {
    CorruptionSpec spec;
    spec.kind = static_cast<CorruptionKind>(kind_idx);
    spec.level = 4;
    spec.seed = 1234;
    if (spec.kind == CorruptionKind::ball_outliers) spec.extra["fraction"] = 0.3;
    const PointCloud a = corrupt(pc, spec);
    const PointCloud b = corrupt(pc, spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);

    spec.seed = 1235;
    const PointCloud c = corrupt(pc, spec);
    bool identical = a.size() == c.size();
    if (identical)
      for (std::size_t i = 0; i < a.size(); ++i) identical &= a.points[i] == c.points[i];
    CHECK_FALSE(identical);
  }
}

TEST_CASE("corrupt: invalid severity rejected") {
  const PointCloud pc = test_cloud(32, 10);
  CorruptionSpec bad_level{CorruptionKind::gaussian_noise, 11, 0.0, {}, 0};
  CHECK_THROWS_AS(corrupt(pc, bad_level), std::invalid_argument);
  CorruptionSpec bad_fraction{CorruptionKind::impulse_noise, 0, 1.5, {}, 0};
  CHECK_THROWS_AS(corrupt(pc, bad_fraction), std::invalid_argument);
}

TEST_CASE("rotate: identity at 0 and 2*pi, distances preserved") {
  const PointCloud pc = test_cloud(64, 11);
  const Eigen::Vector3d axis(0, 0, 1);

  const PointCloud zero = rotate(pc, axis, 0.0);
  for (std::size_t i = 0; i < pc.size(); ++i)
    CHECK((zero.points[i] - pc.points[i]).norm() == 0.0);

  const PointCloud full = rotate(pc, axis, 2.0 * M_PI);
  for (std::size_t i = 0; i < pc.size(); ++i)
    CHECK((full.points[i] - pc.points[i]).norm() < 1e-12);

  const PointCloud turned = rotate(pc, Eigen::Vector3d(1, 1, 0).normalized(), 0.7);
  for (std::size_t i = 1; i < pc.size(); ++i) {
    const double before = (pc.points[i] - pc.points[0]).norm();
    const double after = (turned.points[i] - turned.points[0]).norm();
    CHECK(std::abs(before - after) < 1e-12);
  }

  CHECK_THROWS_AS(rotate(pc, Eigen::Vector3d::Zero(), 0.3), std::invalid_argument);
}

TEST_CASE("shear: formula, identity, unit volume") {
  PointCloud pc;
  pc.points = {{0, 0, 1}};
  const PointCloud out = shear(pc, 0.5);
  CHECK(out.points[0] == Eigen::Vector3d(0.5, 0.5, 1));

  const PointCloud same = shear(pc, 0.0);
  CHECK(same.points[0] == pc.points[0]);

  // The map is upper-triangular with unit diagonal: determinant 1.
  Eigen::Matrix3d m;
  m << 1, 0, 0.5, 0, 1, 0.5, 0, 0, 1;
  CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cutout: hole_size 0 is the identity; emptying errors") {
  const PointCloud pc = test_cloud(64, 12);
  SeededRng rng(13);
  const PointCloud same = cutout(pc, 3, 0, rng);
  CHECK(same.size() == pc.size());

  SeededRng rng2(14);
  const PointCloud holed = cutout(pc, 2, 10, rng2);
  CHECK(holed.size() == 44);

  SeededRng rng3(15);
  CHECK_THROWS_AS(cutout(pc, 1, 64, rng3), DataError);
}

TEST_CASE("density_decrease: subset contract") {
  const PointCloud pc = test_cloud(1024, 16);
  SeededRng rng(17);
  const PointCloud half = density_decrease(pc, 0.5, rng);
  CHECK(half.size() == 512);
  std::set<std::array<double, 3>> originals;
  for (const auto& p : pc.points) originals.insert({p.x(), p.y(), p.z()});
  for (const auto& p : half.points)
    CHECK(originals.count({p.x(), p.y(), p.z()}) == 1);

  SeededRng rng2(18);
  const PointCloud all = density_decrease(pc, 1.0, rng2);
  REQUIRE(all.size() == pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) CHECK(all.points[i] == pc.points[i]);

  SeededRng rng3(19);
  CHECK_THROWS_AS(density_decrease(pc, 0.0, rng3), DataError);
}

TEST_CASE("CorruptionSpec: JSON round trip") {
  CorruptionSpec spec;
  spec.kind = CorruptionKind::ball_outliers;
  spec.level = 0;
  spec.parameter = 0.5;
  spec.extra["fraction"] = 0.25;
  spec.seed = 777;
  const CorruptionSpec back = CorruptionSpec::from_json_string(spec.to_json_string());
  CHECK(back.kind == spec.kind);
  CHECK(back.level == spec.level);
  CHECK(back.parameter == spec.parameter);
  CHECK(back.extra.at("fraction") == 0.25);
  CHECK(back.seed == 777);
}
