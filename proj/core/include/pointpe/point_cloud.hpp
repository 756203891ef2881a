#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pointpe/rng.hpp"

namespace pointpe {

/// An ordered list of 3-D points with an optional class label. Immutable by
/// convention: operations return new clouds.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::optional<int> label;

  std::size_t size() const { return points.size(); }
  Eigen::Vector3d centroid() const;
  double max_norm() const;
};

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  double face_area(std::size_t f) const;
  double total_area() const;
};

/// XYZ text: one point per line, three whitespace-separated decimal floats.
/// Lines starting with '#' are comments. Parse failures report the 1-based
/// line number. An input with no points is an error.
PointCloud load_xyz(const std::filesystem::path& path);

/// Writes with 17 significant digits so load_xyz(save_xyz(pc)) round-trips
/// coordinates exactly.
void save_xyz(const PointCloud& pc, const std::filesystem::path& path);

/// OFF reader. Accepts the header fused with the counts line ("OFF 8 6 12"),
/// skips '#' comments, and fan-triangulates polygons from vertex 0:
/// a quad (0 1 2 3) becomes (0,1,2) and (0,2,3).
TriangleMesh load_off(const std::filesystem::path& path);
TriangleMesh parse_off(std::istream& in, const std::string& origin);

/// n surface points: triangles picked with probability proportional to area,
/// then a uniform barycentric draw inside the triangle. Two raw uniforms per
/// point plus one for the triangle pick.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, SeededRng& rng);

/// Centers on the centroid, then scales so the farthest point has norm 1.
/// A cloud whose points all coincide is centered but not rescaled.
PointCloud normalize(const PointCloud& pc);

enum class ShapeKind { sphere, cube, torus, cylinder, cone, helix };
inline constexpr int kShapeClassCount = 6;

const char* to_string(ShapeKind kind);
ShapeKind shape_from_string(const std::string& name);

/// n points sampled uniformly on the named surface in canonical pose: the
/// surface centroid sits at the origin and the farthest surface point at
/// norm 1, both computed analytically so e.g. sphere samples have norm 1
/// exactly. Label is set to the shape's class index (enum order).
///
/// Shape constants before rescaling: torus radii 0.7/0.3; cylinder and cone
/// height 2, radius 0.7; helix 2 turns, radius 0.7, pitch 0.5.
PointCloud make_shape(ShapeKind kind, std::size_t n, SeededRng& rng);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  int label = 0;
};

/// The dataset manifest is a JSON array of {path, label} records.
void save_manifest(const std::vector<ManifestEntry>& entries,
                   const std::filesystem::path& path);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

struct Dataset {
  std::vector<PointCloud> clouds;
  int num_classes = 0;
};

Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Deterministic synthetic suite: `per_class` clouds for each of the six
/// shapes, `points` points each. Cloud (c, i) uses rng.fork(c * 100003 + i).
/// With `random_pose` each cloud gets a per-axis stretch (uniform in
/// [0.6, 1]) and a random rotation, then is rescaled to max norm 1 — the
/// unaligned, within-class-variable setting that makes classification
/// non-trivial, standing in for the variability of a scanned-object class.
Dataset make_synthetic_dataset(int per_class, std::size_t points, const SeededRng& rng,
                               bool random_pose = false);

}  // namespace pointpe
