#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pointpe/point_cloud.hpp"
#include "pointpe/rng.hpp"

namespace pointpe {

enum class CorruptionKind {
  uniform_noise,
  gaussian_noise,
  impulse_noise,
  upsampling_outliers,
  background_outliers,
  ball_outliers,
  rotation,
  shear,
  cutout,
  density_decrease,
};

const char* to_string(CorruptionKind kind);
CorruptionKind corruption_kind_from_string(const std::string& name);

/// A deterministic, parameterized corruption. Severity is either a 1-based
/// level into severity_table(kind) or an explicit `parameter` (level 0).
/// `extra` carries kind-specific values:
///   ball_outliers:    fraction (default 0.1)
///   rotation:         axis_x/axis_y/axis_z (default: random unit axis)
///   cutout:           n_holes, hole_size
/// Serialized as JSON {kind, level, parameter, extra, seed}.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::gaussian_noise;
  int level = 0;
  double parameter = 0.0;
  std::map<std::string, double> extra;
  std::uint64_t seed = 0;

  /// Level resolved through the ladder, or `parameter` when level == 0.
  double severity_value() const;

  std::string to_json_string() const;
  static CorruptionSpec from_json_string(const std::string& doc);
};

/// The 10-level severity ladder:
///   uniform_noise / gaussian_noise : 0.01 .. 0.10 step 0.01
///   impulse_noise / background     : {0.02,0.05,0.1,0.2,0.3,0.4,0.5,0.7,0.85,1.0}
///   upsampling_outliers            : 0.1 .. 1.0 step 0.1
///   ball_outliers (radius)         : 0.3 .. 3.0 step 0.3
/// Other kinds take explicit parameters and are an error here.
std::vector<double> severity_table(CorruptionKind kind);

/// Applies the corruption; a pure function of (pc, spec). Noise kinds keep N
/// and the point order; outlier kinds append floor(fraction * N) points at
/// the end and never move originals. The label is preserved.
PointCloud corrupt(const PointCloud& pc, const CorruptionSpec& spec);

/// Rigid rotation about a unit axis (Rodrigues). A zero axis is an error;
/// non-unit axes are normalized.
PointCloud rotate(const PointCloud& pc, const Eigen::Vector3d& axis, double angle);

/// x' = x + factor * z, y' = y + factor * z, z' = z (unit determinant).
PointCloud shear(const PointCloud& pc, double factor);

/// Removes the hole_size nearest neighbors (anchor included) of each of
/// n_holes anchors picked uniformly from the remaining points. Erroring out
/// rather than returning an empty cloud.
PointCloud cutout(const PointCloud& pc, int n_holes, int hole_size, SeededRng& rng);

/// Keeps a uniform random subset of floor(keep_fraction * N) points in their
/// original order. keep_fraction 1 is the identity.
PointCloud density_decrease(const PointCloud& pc, double keep_fraction, SeededRng& rng);

}  // namespace pointpe
