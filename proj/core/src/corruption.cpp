#include "pointpe/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "pointpe/errors.hpp"

namespace pointpe {

using json = nlohmann::json;

const char* to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::uniform_noise: return "uniform_noise";
    case CorruptionKind::gaussian_noise: return "gaussian_noise";
    case CorruptionKind::impulse_noise: return "impulse_noise";
    case CorruptionKind::upsampling_outliers: return "upsampling_outliers";
    case CorruptionKind::background_outliers: return "background_outliers";
    case CorruptionKind::ball_outliers: return "ball_outliers";
    case CorruptionKind::rotation: return "rotation";
    case CorruptionKind::shear: return "shear";
    case CorruptionKind::cutout: return "cutout";
    case CorruptionKind::density_decrease: return "density_decrease";
  }
  return "?";
}

CorruptionKind corruption_kind_from_string(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(CorruptionKind::density_decrease); ++i) {
    const auto kind = static_cast<CorruptionKind>(i);
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown corruption kind: " + name);
}

std::vector<double> severity_table(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::uniform_noise:
    case CorruptionKind::gaussian_noise:
      return {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
    case CorruptionKind::impulse_noise:
    case CorruptionKind::background_outliers:
      return {0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.85, 1.0};
    case CorruptionKind::upsampling_outliers:
      return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    case CorruptionKind::ball_outliers:
      return {0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7, 3.0};
    default:
      throw std::invalid_argument(std::string("severity_table: no ladder for ") +
                                  to_string(kind));
  }
}

double CorruptionSpec::severity_value() const {
  if (level == 0) return parameter;
  const auto table = severity_table(kind);
  if (level < 1 || level > static_cast<int>(table.size()))
    throw std::invalid_argument("severity level " + std::to_string(level) +
                                " out of range for " + to_string(kind));
  return table[static_cast<std::size_t>(level - 1)];
}

std::string CorruptionSpec::to_json_string() const {
  json extra_doc = json::object();
  for (const auto& [k, v] : extra) extra_doc[k] = v;
  const json doc{{"kind", to_string(kind)}, {"level", level},      {"parameter", parameter},
                 {"extra", extra_doc},      {"seed", seed}};
  return doc.dump();
}

CorruptionSpec CorruptionSpec::from_json_string(const std::string& doc_str) {
  json doc;
  try {
    doc = json::parse(doc_str);
  } catch (const json::exception& e) {
    throw DataError(std::string("corruption document: ") + e.what());
  }
  CorruptionSpec spec;
  spec.kind = corruption_kind_from_string(doc.at("kind").get<std::string>());
  spec.level = doc.value("level", 0);
  spec.parameter = doc.value("parameter", 0.0);
  spec.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("extra"))
    for (const auto& [k, v] : doc["extra"].items()) spec.extra[k] = v.get<double>();
  return spec;
}

namespace {

constexpr double kPi = std::numbers::pi;

// First `count` indices of a partial Fisher-Yates shuffle: a uniform draw of
// `count` distinct indices from [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    SeededRng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count && i + 1 < n; ++i)
    std::swap(idx[i], idx[i + rng.index(n - i)]);
  idx.resize(count);
  return idx;
}

Eigen::Vector3d sphere_direction(SeededRng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

double extra_or(const CorruptionSpec& spec, const std::string& key, double fallback) {
  const auto it = spec.extra.find(key);
  return it == spec.extra.end() ? fallback : it->second;
}

}  // namespace

PointCloud corrupt(const PointCloud& pc, const CorruptionSpec& spec) {
  if (pc.points.empty()) throw std::invalid_argument("corrupt: empty cloud");
  SeededRng rng(spec.seed);
  const std::size_t n = pc.size();
  PointCloud out = pc;  // originals stay in place and in order

  switch (spec.kind) {
    case CorruptionKind::uniform_noise: {
      const double s = spec.severity_value();
      if (s < 0.0) throw std::invalid_argument("uniform_noise: negative severity");
      for (auto& p : out.points)
        for (int a = 0; a < 3; ++a) p[a] += rng.uniform(-s, s);
      return out;
    }
    case CorruptionKind::gaussian_noise: {
      const double sigma = spec.severity_value();
      if (sigma < 0.0) throw std::invalid_argument("gaussian_noise: negative severity");
      if (sigma == 0.0) return out;
      for (auto& p : out.points)
        for (int a = 0; a < 3; ++a) p[a] += rng.normal(0.0, sigma);
      return out;
    }
    case CorruptionKind::impulse_noise: {
      const double fraction = spec.severity_value();
      if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("impulse_noise: fraction outside [0,1]");
      const auto count = static_cast<std::size_t>(std::floor(fraction * n));
      const auto hit = sample_without_replacement(n, count, rng);
      for (const std::size_t i : hit) {
        const double direction = rng.uniform() < 0.5 ? 1.0 : -1.0;
        out.points[i] += 0.1 * direction * Eigen::Vector3d::Ones();
      }
      return out;
    }
    case CorruptionKind::upsampling_outliers: {
      const double fraction = spec.severity_value();
      if (fraction < 0.0) throw std::invalid_argument("upsampling_outliers: negative fraction");
      const auto count = static_cast<std::size_t>(std::floor(fraction * n));
      out.points.reserve(n + count);
      for (std::size_t i = 0; i < count; ++i) {
        Eigen::Vector3d p = pc.points[rng.index(n)];
        for (int a = 0; a < 3; ++a) p[a] += rng.uniform(-0.05, 0.05);
        out.points.push_back(p);
      }
      return out;
    }
    case CorruptionKind::background_outliers: {
      const double fraction = spec.severity_value();
      if (fraction < 0.0) throw std::invalid_argument("background_outliers: negative fraction");
      const auto count = static_cast<std::size_t>(std::floor(fraction * n));
      out.points.reserve(n + count);
      for (std::size_t i = 0; i < count; ++i)
        out.points.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                rng.uniform(-1.0, 1.0));
      return out;
    }
    case CorruptionKind::ball_outliers: {
      const double radius = spec.severity_value();
      if (radius <= 0.0) throw std::invalid_argument("ball_outliers: radius must be > 0");
      const double fraction = extra_or(spec, "fraction", 0.1);
      if (fraction < 0.0) throw std::invalid_argument("ball_outliers: negative fraction");
      const auto count = static_cast<std::size_t>(std::floor(fraction * n));
      out.points.reserve(n + count);
      // Ball centered at the origin of the normalized cloud.
      for (std::size_t i = 0; i < count; ++i)
        out.points.push_back(radius * sphere_direction(rng));
      return out;
    }
    case CorruptionKind::rotation: {
      Eigen::Vector3d axis;
      if (spec.extra.count("axis_x") || spec.extra.count("axis_y") ||
          spec.extra.count("axis_z")) {
        axis = {extra_or(spec, "axis_x", 0.0), extra_or(spec, "axis_y", 0.0),
                extra_or(spec, "axis_z", 0.0)};
      } else {
        axis = sphere_direction(rng);
      }
      return rotate(pc, axis, spec.severity_value());
    }
    case CorruptionKind::shear:
      return shear(pc, spec.severity_value());
    case CorruptionKind::cutout: {
      const int n_holes = static_cast<int>(extra_or(spec, "n_holes", 1.0));
      const int hole_size = static_cast<int>(extra_or(spec, "hole_size",
                                                      spec.severity_value()));
      return cutout(pc, n_holes, hole_size, rng);
    }
    case CorruptionKind::density_decrease:
      return density_decrease(pc, spec.severity_value(), rng);
  }
  throw std::invalid_argument("corrupt: unknown kind");
}

PointCloud rotate(const PointCloud& pc, const Eigen::Vector3d& axis, double angle) {
  const double norm = axis.norm();
  if (!(norm > 1e-12)) throw std::invalid_argument("rotate: zero axis");
  const Eigen::Vector3d u = axis / norm;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d cross;
  cross << 0, -u.z(), u.y(), u.z(), 0, -u.x(), -u.y(), u.x(), 0;
  const Eigen::Matrix3d r =
      c * Eigen::Matrix3d::Identity() + s * cross + (1.0 - c) * (u * u.transpose());
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(pc.size());
  for (const auto& p : pc.points) out.points.push_back(r * p);
  return out;
}

PointCloud shear(const PointCloud& pc, double factor) {
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(pc.size());
  for (const auto& p : pc.points)
    out.points.emplace_back(p.x() + factor * p.z(), p.y() + factor * p.z(), p.z());
  return out;
}

PointCloud cutout(const PointCloud& pc, int n_holes, int hole_size, SeededRng& rng) {
  if (n_holes < 0 || hole_size < 0)
    throw std::invalid_argument("cutout: negative hole parameters");
  std::vector<Eigen::Vector3d> remaining = pc.points;
  for (int h = 0; h < n_holes && hole_size > 0; ++h) {
    if (remaining.size() <= static_cast<std::size_t>(hole_size))
      throw DataError("cutout: would empty the cloud");
    const Eigen::Vector3d anchor = remaining[rng.index(remaining.size())];
    // Drop the hole_size points closest to the anchor (the anchor included).
    std::vector<std::size_t> order(remaining.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(), order.begin() + hole_size, order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return (remaining[a] - anchor).squaredNorm() <
                              (remaining[b] - anchor).squaredNorm();
                     });
    std::vector<bool> drop(remaining.size(), false);
    for (int i = 0; i < hole_size; ++i) drop[order[static_cast<std::size_t>(i)]] = true;
    std::vector<Eigen::Vector3d> next;
    next.reserve(remaining.size() - static_cast<std::size_t>(hole_size));
    for (std::size_t i = 0; i < remaining.size(); ++i)
      if (!drop[i]) next.push_back(remaining[i]);
    remaining = std::move(next);
  }
  PointCloud out;
  out.label = pc.label;
  out.points = std::move(remaining);
  return out;
}

PointCloud density_decrease(const PointCloud& pc, double keep_fraction, SeededRng& rng) {
  if (keep_fraction < 0.0 || keep_fraction > 1.0)
    throw std::invalid_argument("density_decrease: keep_fraction outside [0,1]");
  const auto keep = static_cast<std::size_t>(std::floor(keep_fraction * pc.size()));
  if (keep == 0) throw DataError("density_decrease: would empty the cloud");
  auto kept = sample_without_replacement(pc.size(), keep, rng);
  std::sort(kept.begin(), kept.end());  // preserve original order
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(keep);
  for (const std::size_t i : kept) out.points.push_back(pc.points[i]);
  return out;
}

}  // namespace pointpe
