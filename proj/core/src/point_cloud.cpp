#include "pointpe/point_cloud.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "pointpe/errors.hpp"
#include "pointpe/report.hpp"

namespace pointpe {

using json = nlohmann::json;

Eigen::Vector3d PointCloud::centroid() const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

double PointCloud::max_norm() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, p.norm());
  return m;
}

double TriangleMesh::face_area(std::size_t f) const {
  const auto& t = faces[f];
  const Eigen::Vector3d e1 = vertices[t[1]] - vertices[t[0]];
  const Eigen::Vector3d e2 = vertices[t[2]] - vertices[t[0]];
  return 0.5 * e1.cross(e2).norm();
}

double TriangleMesh::total_area() const {
  double a = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) a += face_area(f);
  return a;
}

PointCloud load_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  PointCloud pc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 floats, got '" + line + "'");
    }
    std::string trailing;
    if (ls >> trailing) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": trailing tokens after 3 floats");
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": non-finite coordinate");
    }
    pc.points.emplace_back(x, y, z);
  }
  if (pc.points.empty()) throw DataError(path.string() + ": no points");
  return pc;
}

void save_xyz(const PointCloud& pc, const std::filesystem::path& path) {
  std::string out;
  out.reserve(pc.points.size() * 64);
  char buf[96];
  for (const auto& p : pc.points) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out += buf;
  }
  atomic_write(path, out);
}

namespace {

// Pulls the next non-comment, non-blank token stream line.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

TriangleMesh parse_off(std::istream& in, const std::string& origin) {
  std::string line;
  if (!next_content_line(in, line)) throw DataError(origin + ": empty OFF file");

  // Header may be bare "OFF" or fused with the counts ("OFF 8 6 12").
  std::string rest;
  if (line.rfind("OFF", 0) != 0) throw DataError(origin + ": missing OFF header");
  rest = line.substr(3);
  std::size_t n_vertices = 0, n_faces = 0;
  long n_edges = 0;
  std::istringstream hs(rest);
  if (!(hs >> n_vertices >> n_faces >> n_edges)) {
    if (!next_content_line(in, line)) throw DataError(origin + ": missing counts line");
    std::istringstream cs(line);
    if (!(cs >> n_vertices >> n_faces >> n_edges))
      throw DataError(origin + ": malformed counts line '" + line + "'");
  }
  if (n_vertices == 0) throw DataError(origin + ": no vertices");

  TriangleMesh mesh;
  mesh.vertices.reserve(n_vertices);
  for (std::size_t v = 0; v < n_vertices; ++v) {
    if (!next_content_line(in, line)) throw DataError(origin + ": truncated vertex list");
    std::istringstream vs(line);
    double x, y, z;
    if (!(vs >> x >> y >> z))
      throw DataError(origin + ": malformed vertex line '" + line + "'");
    mesh.vertices.emplace_back(x, y, z);
  }

  mesh.faces.reserve(n_faces);
  for (std::size_t f = 0; f < n_faces; ++f) {
    if (!next_content_line(in, line)) throw DataError(origin + ": truncated face list");
    std::istringstream fs(line);
    std::size_t k = 0;
    if (!(fs >> k) || k < 3)
      throw DataError(origin + ": malformed face line '" + line + "'");
    std::vector<int> idx(k);
    for (std::size_t i = 0; i < k; ++i) {
      long v = -1;
      if (!(fs >> v)) throw DataError(origin + ": malformed face line '" + line + "'");
      if (v < 0 || static_cast<std::size_t>(v) >= n_vertices)
        throw DataError(origin + ": face index " + std::to_string(v) + " out of range");
      idx[i] = static_cast<int>(v);
    }
    // Fan triangulation from vertex 0.
    for (std::size_t i = 1; i + 1 < k; ++i)
      mesh.faces.push_back({idx[0], idx[i], idx[i + 1]});
  }
  return mesh;
}

TriangleMesh load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_off(in, path.string());
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, SeededRng& rng) {
  if (n == 0) throw std::invalid_argument("sample_surface: n must be >= 1");
  if (mesh.faces.empty()) throw DataError("sample_surface: mesh has no faces");

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw DataError("sample_surface: degenerate mesh, total area 0");

  PointCloud pc;
  pc.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t f = std::min<std::size_t>(it - cumulative.begin(),
                                                mesh.faces.size() - 1);
    const auto& t = mesh.faces[f];
    // Uniform barycentric draw: sqrt flattens the density toward the base.
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    pc.points.push_back((1.0 - r1) * mesh.vertices[t[0]] +
                        r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                        r1 * r2 * mesh.vertices[t[2]]);
  }
  return pc;
}

PointCloud normalize(const PointCloud& pc) {
  if (pc.points.empty()) throw std::invalid_argument("normalize: empty cloud");
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(pc.points.size());
  const Eigen::Vector3d c = pc.centroid();
  double max_norm = 0.0;
  for (const auto& p : pc.points) max_norm = std::max(max_norm, (p - c).norm());
  // All points coincident: center only.
  const double scale = max_norm > 1e-300 ? 1.0 / max_norm : 1.0;
  for (const auto& p : pc.points) out.points.push_back((p - c) * scale);
  return out;
}

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::cube: return "cube";
    case ShapeKind::torus: return "torus";
    case ShapeKind::cylinder: return "cylinder";
    case ShapeKind::cone: return "cone";
    case ShapeKind::helix: return "helix";
  }
  return "?";
}

ShapeKind shape_from_string(const std::string& name) {
  for (int i = 0; i < kShapeClassCount; ++i) {
    const auto kind = static_cast<ShapeKind>(i);
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown shape: " + name);
}

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d sphere_point(SeededRng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// Cube surface [-1,1]^3: equal-area faces, so the face pick is uniform.
Eigen::Vector3d cube_point(SeededRng& rng) {
  const auto face = rng.index(6);
  const double u = rng.uniform(-1.0, 1.0);
  const double v = rng.uniform(-1.0, 1.0);
  const double s = (face % 2 == 0) ? 1.0 : -1.0;
  switch (face / 2) {
    case 0: return {s, u, v};
    case 1: return {u, s, v};
    default: return {u, v, s};
  }
}

// Torus about the z axis: tube angle v needs density (R + r cos v), handled
// by rejection against the max at v = 0.
Eigen::Vector3d torus_point(double major, double minor, SeededRng& rng) {
  const double u = rng.uniform(0.0, 2.0 * kPi);
  double v = 0.0;
  for (;;) {
    v = rng.uniform(0.0, 2.0 * kPi);
    const double accept = (major + minor * std::cos(v)) / (major + minor);
    if (rng.uniform() < accept) break;
  }
  const double ring = major + minor * std::cos(v);
  return {ring * std::cos(u), ring * std::sin(u), minor * std::sin(v)};
}

// Closed cylinder, axis z, z in [-h/2, h/2]: lateral wall plus both caps,
// chosen by area.
Eigen::Vector3d cylinder_point(double radius, double height, SeededRng& rng) {
  const double lateral = 2.0 * kPi * radius * height;
  const double cap = kPi * radius * radius;
  const double pick = rng.uniform() * (lateral + 2.0 * cap);
  if (pick < lateral) {
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double z = rng.uniform(-0.5, 0.5) * height;
    return {radius * std::cos(phi), radius * std::sin(phi), z};
  }
  const double z = (pick < lateral + cap) ? height * 0.5 : -height * 0.5;
  const double rr = radius * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return {rr * std::cos(phi), rr * std::sin(phi), z};
}

// Cone with apex up, base disc at z = -h/2, apex at z = +h/2, before the
// canonical recentering below.
Eigen::Vector3d cone_point(double radius, double height, SeededRng& rng) {
  const double slant = std::sqrt(radius * radius + height * height);
  const double lateral = kPi * radius * slant;
  const double base = kPi * radius * radius;
  const double pick = rng.uniform() * (lateral + base);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  if (pick < lateral) {
    // Fraction from apex; area density grows linearly away from the apex.
    const double t = std::sqrt(rng.uniform());
    const double rr = t * radius;
    return {rr * std::cos(phi), rr * std::sin(phi), height * 0.5 - t * height};
  }
  const double rr = radius * std::sqrt(rng.uniform());
  return {rr * std::cos(phi), rr * std::sin(phi), -height * 0.5};
}

// Centroid offset of the cone surface (lateral wall + base) from the
// mid-height origin used above.
double cone_centroid_z(double radius, double height) {
  const double slant = std::sqrt(radius * radius + height * height);
  const double lateral = kPi * radius * slant;
  const double base = kPi * radius * radius;
  // Lateral centroid sits a third of the way up from the base.
  const double lateral_z = -height * 0.5 + height / 3.0;
  const double base_z = -height * 0.5;
  return (lateral * lateral_z + base * base_z) / (lateral + base);
}

// Uniform along arc length (constant speed parameterization).
Eigen::Vector3d helix_point(double radius, double turns, double pitch, SeededRng& rng) {
  const double t = rng.uniform() * turns * 2.0 * kPi;
  const double z = pitch * t / (2.0 * kPi) - 0.5 * pitch * turns;
  return {radius * std::cos(t), radius * std::sin(t), z};
}

}  // namespace

PointCloud make_shape(ShapeKind kind, std::size_t n, SeededRng& rng) {
  if (n == 0) throw std::invalid_argument("make_shape: n must be >= 1");
  PointCloud pc;
  pc.points.reserve(n);
  pc.label = static_cast<int>(kind);

  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double max_radius = 1.0;
  switch (kind) {
    case ShapeKind::sphere:
      max_radius = 1.0;
      break;
    case ShapeKind::cube:
      max_radius = std::sqrt(3.0);
      break;
    case ShapeKind::torus:
      max_radius = 0.7 + 0.3;
      break;
    case ShapeKind::cylinder:
      max_radius = std::hypot(0.7, 1.0);
      break;
    case ShapeKind::cone: {
      const double cz = cone_centroid_z(0.7, 2.0);
      center = {0.0, 0.0, cz};
      max_radius = std::max(std::abs(1.0 - cz), std::hypot(0.7, -1.0 - cz));
      break;
    }
    case ShapeKind::helix:
      // 2 turns at pitch 0.5 span z in [-0.5, 0.5].
      max_radius = std::hypot(0.7, 0.5);
      break;
  }

  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d p;
    switch (kind) {
      case ShapeKind::sphere: p = sphere_point(rng); break;
      case ShapeKind::cube: p = cube_point(rng); break;
      case ShapeKind::torus: p = torus_point(0.7, 0.3, rng); break;
      case ShapeKind::cylinder: p = cylinder_point(0.7, 2.0, rng); break;
      case ShapeKind::cone: p = cone_point(0.7, 2.0, rng); break;
      case ShapeKind::helix: p = helix_point(0.7, 2.0, 0.5, rng); break;
    }
    pc.points.push_back((p - center) / max_radius);
  }
  return pc;
}

void save_manifest(const std::vector<ManifestEntry>& entries,
                   const std::filesystem::path& path) {
  json doc = json::array();
  for (const auto& e : entries) doc.push_back({{"path", e.path}, {"label", e.label}});
  atomic_write(path, doc.dump(2) + "\n");
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError("manifest " + path.string() + ": not a JSON array");
  std::vector<ManifestEntry> entries;
  entries.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.contains("path") || !item.contains("label"))
      throw DataError("manifest " + path.string() + ": entry missing path/label");
    entries.push_back({item["path"].get<std::string>(), item["label"].get<int>()});
  }
  return entries;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const auto entries = load_manifest(manifest_path);
  if (entries.empty()) throw DataError("manifest " + manifest_path.string() + ": empty");
  const auto base = manifest_path.parent_path();
  Dataset ds;
  ds.clouds.reserve(entries.size());
  int max_label = 0;
  for (const auto& e : entries) {
    PointCloud pc = load_xyz(base / e.path);
    pc.label = e.label;
    max_label = std::max(max_label, e.label);
    ds.clouds.push_back(std::move(pc));
  }
  ds.num_classes = max_label + 1;
  return ds;
}

Dataset make_synthetic_dataset(int per_class, std::size_t points, const SeededRng& rng,
                               bool random_pose) {
  if (per_class < 1) throw std::invalid_argument("make_synthetic_dataset: per_class >= 1");
  Dataset ds;
  ds.num_classes = kShapeClassCount;
  ds.clouds.reserve(static_cast<std::size_t>(per_class) * kShapeClassCount);
  for (int c = 0; c < kShapeClassCount; ++c) {
    for (int i = 0; i < per_class; ++i) {
      SeededRng cloud_rng = rng.fork(static_cast<std::uint64_t>(c) * 100003 + i);
      PointCloud pc = make_shape(static_cast<ShapeKind>(c), points, cloud_rng);
      if (random_pose) {
        const Eigen::Vector3d stretch(cloud_rng.uniform(0.6, 1.0),
                                      cloud_rng.uniform(0.6, 1.0),
                                      cloud_rng.uniform(0.6, 1.0));
        const double z = cloud_rng.uniform(-1.0, 1.0);
        const double phi = cloud_rng.uniform(0.0, 2.0 * kPi);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Eigen::Vector3d axis(r * std::cos(phi), r * std::sin(phi), z);
        const double angle = cloud_rng.uniform(0.0, 2.0 * kPi);
        const double cos_a = std::cos(angle);
        const double sin_a = std::sin(angle);
        Eigen::Matrix3d cross;
        cross << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
        const Eigen::Matrix3d rot = cos_a * Eigen::Matrix3d::Identity() + sin_a * cross +
                                    (1.0 - cos_a) * (axis * axis.transpose());
        double max_norm = 0.0;
        for (auto& p : pc.points) {
          p = rot * p.cwiseProduct(stretch);
          max_norm = std::max(max_norm, p.norm());
        }
        for (auto& p : pc.points) p /= max_norm;
      }
      ds.clouds.push_back(std::move(pc));
    }
  }
  return ds;
}

}  // namespace pointpe
