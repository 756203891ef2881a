#include "pointpe/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "pointpe/errors.hpp"
#include "pointpe/report.hpp"

namespace pointpe {

using json = nlohmann::json;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

const char* to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::impulse: return "impulse";
    case EncoderKind::sinc1d: return "sinc1d";
    case EncoderKind::sinusoid_grid: return "sinusoid_grid";
    case EncoderKind::rff: return "rff";
    case EncoderKind::gaussian_pe: return "gaussian_pe";
    case EncoderKind::relu_mlp: return "relu_mlp";
    case EncoderKind::rff_attention: return "rff_attention";
  }
  return "?";
}

EncoderKind encoder_kind_from_string(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(EncoderKind::rff_attention); ++i) {
    const auto kind = static_cast<EncoderKind>(i);
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown encoder kind: " + name);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::vector<FrequencyTerm> expand_frequency_grid(int dim, int bandwidth,
                                                 std::size_t cap) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("expand_frequency_grid: dim must be in {1,2,3}");
  if (bandwidth < 1)
    throw std::invalid_argument("expand_frequency_grid: bandwidth must be >= 1");

  const double k = 2.0 * bandwidth;
  const double total = std::pow(k, dim);
  if (total > static_cast<double>(cap))
    throw std::length_error("expand_frequency_grid: (2B)^D = " +
                            std::to_string(static_cast<std::size_t>(total)) +
                            " exceeds cap " + std::to_string(cap));

  std::vector<FrequencyTerm> terms;
  terms.reserve(static_cast<std::size_t>(total));
  const int sign_patterns = 1 << (dim - 1);
  std::vector<int> tuple(dim, 0);
  for (;;) {
    for (int s = 0; s < sign_patterns; ++s) {
      Eigen::VectorXd freq(dim);
      freq[0] = tuple[0];
      for (int a = 1; a < dim; ++a)
        freq[a] = ((s >> (a - 1)) & 1) ? -tuple[a] : tuple[a];
      terms.push_back({freq, false});
      terms.push_back({freq, true});
    }
    int axis = dim - 1;
    while (axis >= 0 && ++tuple[axis] == bandwidth) tuple[axis--] = 0;
    if (axis < 0) break;
  }
  return terms;
}

std::pair<double, double> product_vs_rotated_basis(double u, double v, int i, int j) {
  const double product = std::cos(i * u) * std::cos(j * v);
  const double rotated = 0.5 * (std::cos(i * u + j * v) + std::cos(i * u - j * v));
  return {product, rotated};
}

Eigen::VectorXd encode_impulse(const std::vector<double>& points, int grid_size) {
  if (grid_size < 1) throw std::invalid_argument("encode_impulse: grid_size >= 1");
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(grid_size);
  for (const double x : points) {
    if (!(x > 0.0 && x < 1.0))
      throw std::domain_error("encode_impulse: point " + std::to_string(x) +
                              " outside (0,1)");
    const int bin = std::min(grid_size - 1, static_cast<int>(std::floor(x * grid_size)));
    hist[bin] += 1.0;
  }
  return hist;
}

Eigen::VectorXd encode_sinc(const std::vector<double>& points, int bandwidth) {
  if (bandwidth < 2) throw std::invalid_argument("encode_sinc: bandwidth >= 2");
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(bandwidth);
  for (int k = 0; k < bandwidth; ++k) {
    const double u = static_cast<double>(k) / bandwidth;
    double acc = 0.0;
    for (const double x : points) acc += sinc(bandwidth * (u - x));
    coeffs[k] = acc;
  }
  return coeffs;
}

double sinc_reconstruct(const Eigen::VectorXd& coeffs, int bandwidth, double t) {
  double acc = 0.0;
  for (int k = 0; k < coeffs.size(); ++k)
    acc += coeffs[k] * sinc(bandwidth * (t - static_cast<double>(k) / bandwidth));
  return acc;
}

double sinc_direct(const std::vector<double>& points, int bandwidth, double t) {
  double acc = 0.0;
  for (const double x : points) acc += sinc(bandwidth * (t - x));
  return acc;
}

namespace {

RffParams make_rff(int dim_in, int half_dim, double scale, SeededRng& rng) {
  RffParams p;
  p.weights.resize(half_dim, dim_in);
  for (int f = 0; f < half_dim; ++f)
    for (int d = 0; d < dim_in; ++d) p.weights(f, d) = rng.normal(0.0, scale);
  return p;
}

GaussianPeParams make_gaussian_pe(int dim_in, int dim_out, double scale) {
  // Smallest per-axis count whose lattice covers dim_out centers.
  int m = 1;
  while (std::pow(m, dim_in) < dim_out) ++m;
  GaussianPeParams p;
  p.sigma = scale;
  p.centers.resize(dim_out, dim_in);
  std::vector<int> idx(dim_in, 0);
  for (int row = 0; row < dim_out; ++row) {
    for (int a = 0; a < dim_in; ++a)
      p.centers(row, a) = m == 1 ? 0.0 : -1.0 + 2.0 * idx[a] / (m - 1);
    int axis = dim_in - 1;
    while (axis >= 0 && ++idx[axis] == m) idx[axis--] = 0;
  }
  return p;
}

ReluMlpParams make_relu_mlp(int dim_in, int dim_out, double scale, SeededRng& rng) {
  ReluMlpParams p;
  const std::vector<int> widths{64, 128, dim_out};
  int prev = dim_in;
  for (const int w : widths) {
    Eigen::MatrixXd weight(w, prev);
    for (int r = 0; r < w; ++r)
      for (int c = 0; c < prev; ++c) weight(r, c) = rng.normal(0.0, scale);
    p.weights.push_back(std::move(weight));
    p.biases.push_back(Eigen::VectorXd::Zero(w));
    prev = w;
  }
  return p;
}

AttentionParams make_attention(int dim_in, int dim_out, double scale, SeededRng& rng) {
  const int width = dim_out / 4;
  AttentionParams p;
  p.rff = make_rff(dim_in, width / 2, scale, rng);
  const double init_std = 1.0 / std::sqrt(static_cast<double>(width));
  for (int layer = 0; layer < 4; ++layer) {
    AttentionLayerParams lp;
    for (Eigen::MatrixXd* m : {&lp.wq, &lp.wk, &lp.wv}) {
      m->resize(width, width);
      for (int r = 0; r < width; ++r)
        for (int c = 0; c < width; ++c) (*m)(r, c) = rng.normal(0.0, init_std);
    }
    p.layers.push_back(std::move(lp));
  }
  return p;
}

}  // namespace

Encoder build_encoder(EncoderKind kind, int dim_in, int dim_out, double scale,
                      std::uint64_t seed) {
  if (dim_in < 1 || dim_out < 1)
    throw std::invalid_argument("build_encoder: dimensions must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("build_encoder: scale must be > 0");

  SeededRng rng(seed);
  switch (kind) {
    case EncoderKind::impulse:
      if (dim_in != 1) throw std::invalid_argument("impulse encoder requires dim_in = 1");
      return Encoder(kind, dim_in, dim_out, scale, seed, ImpulseParams{dim_out});
    case EncoderKind::sinc1d: {
      if (dim_in != 1) throw std::invalid_argument("sinc1d encoder requires dim_in = 1");
      if (dim_out < 2) throw std::invalid_argument("sinc1d encoder requires dim_out >= 2");
      SincParams p;
      p.bandwidth = dim_out;
      p.centers.resize(dim_out);
      for (int k = 0; k < dim_out; ++k)
        p.centers[k] = static_cast<double>(k) / dim_out;
      return Encoder(kind, dim_in, dim_out, scale, seed, std::move(p));
    }
    case EncoderKind::sinusoid_grid: {
      // dim_out must be (2B)^D for an integer bandwidth B.
      const double k = std::pow(static_cast<double>(dim_out), 1.0 / dim_in);
      const int bandwidth = static_cast<int>(std::llround(k / 2.0));
      if (bandwidth < 1 ||
          static_cast<double>(dim_out) !=
              std::pow(2.0 * bandwidth, static_cast<double>(dim_in)))
        throw std::invalid_argument(
            "sinusoid_grid: dim_out must equal (2B)^dim_in for integer B");
      SinusoidGridParams p;
      p.bandwidth = bandwidth;
      p.terms = expand_frequency_grid(dim_in, bandwidth);
      return Encoder(kind, dim_in, dim_out, scale, seed, std::move(p));
    }
    case EncoderKind::rff: {
      if (dim_out % 2 != 0)
        throw std::invalid_argument("rff encoder requires an even dim_out");
      return Encoder(kind, dim_in, dim_out, scale, seed,
                     make_rff(dim_in, dim_out / 2, scale, rng));
    }
    case EncoderKind::gaussian_pe:
      return Encoder(kind, dim_in, dim_out, scale, seed,
                     make_gaussian_pe(dim_in, dim_out, scale));
    case EncoderKind::relu_mlp:
      return Encoder(kind, dim_in, dim_out, scale, seed,
                     make_relu_mlp(dim_in, dim_out, scale, rng));
    case EncoderKind::rff_attention: {
      if (dim_out % 4 != 0 || (dim_out / 4) % 2 != 0)
        throw std::invalid_argument(
            "rff_attention requires dim_out divisible by 4 with an even quarter");
      return Encoder(kind, dim_in, dim_out, scale, seed,
                     make_attention(dim_in, dim_out, scale, rng));
    }
  }
  throw std::invalid_argument("build_encoder: unknown kind");
}

namespace {

// Sum with the addends sorted ascending first: the result depends only on the
// value multiset, which keeps attention outputs bit-identical under any input
// permutation.
double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (const double v : values) acc += v;
  return acc;
}

Eigen::VectorXd rff_encode(const RffParams& p, const Eigen::VectorXd& x) {
  const Eigen::VectorXd phase = p.weights * x;
  Eigen::VectorXd out(2 * phase.size());
  out.head(phase.size()) = phase.array().cos();
  out.tail(phase.size()) = phase.array().sin();
  return out;
}

// Single-head scaled dot-product self-attention over per-point rows. Rows are
// kept as individual vectors so each row's arithmetic is identical no matter
// where it sits in the cloud; row-interacting reductions (softmax denominator,
// value aggregation) are ordered canonically rather than by input index.
std::vector<Eigen::VectorXd> attention_layer(const AttentionLayerParams& lp,
                                             const std::vector<Eigen::VectorXd>& rows) {
  const std::size_t n = rows.size();
  const int width = static_cast<int>(lp.wq.rows());
  const double inv_sqrt_width = 1.0 / std::sqrt(static_cast<double>(width));

  std::vector<Eigen::VectorXd> q(n), k(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = lp.wq.transpose() * rows[i];
    k[i] = lp.wk.transpose() * rows[i];
    v[i] = lp.wv.transpose() * rows[i];
  }

  std::vector<Eigen::VectorXd> out(n);
  std::vector<double> weights(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    double score_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = q[i].dot(k[j]) * inv_sqrt_width;
      score_max = std::max(score_max, weights[j]);
    }
    for (std::size_t j = 0; j < n; ++j) weights[j] = std::exp(weights[j] - score_max);

    std::vector<double> denom_terms = weights;
    const double denom = sorted_sum(denom_terms);
    for (std::size_t j = 0; j < n; ++j) weights[j] /= denom;

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (weights[a] != weights[b]) return weights[a] < weights[b];
      for (int c = 0; c < width; ++c)
        if (v[a][c] != v[b][c]) return v[a][c] < v[b][c];
      return false;
    });
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(width);
    for (const std::size_t j : order) acc += weights[j] * v[j];
    out[i] = std::move(acc);
  }
  return out;
}

Eigen::MatrixXd attention_encode_cloud(const AttentionParams& p,
                                       const PointCloud& pc) {
  const std::size_t n = pc.size();
  const int width = static_cast<int>(p.layers.front().wq.rows());
  std::vector<Eigen::VectorXd> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = rff_encode(p.rff, pc.points[i]);

  Eigen::MatrixXd out(n, 4 * width);
  for (std::size_t layer = 0; layer < p.layers.size(); ++layer) {
    rows = attention_layer(p.layers[layer], rows);
    for (std::size_t i = 0; i < n; ++i)
      out.block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(layer) * width,
                1, width) = rows[i].transpose();
  }
  return out;
}

}  // namespace

Eigen::VectorXd Encoder::encode(const Eigen::VectorXd& x) const {
  if (x.size() != dim_in_)
    throw std::invalid_argument("encode: expected dimension " + std::to_string(dim_in_) +
                                ", got " + std::to_string(x.size()));
  if (!x.allFinite()) throw std::invalid_argument("encode: non-finite input");

  switch (kind_) {
    case EncoderKind::impulse: {
      const auto& p = std::get<ImpulseParams>(params_);
      return encode_impulse({x[0]}, p.grid_size);
    }
    case EncoderKind::sinc1d: {
      const auto& p = std::get<SincParams>(params_);
      Eigen::VectorXd out(p.centers.size());
      for (int k = 0; k < p.centers.size(); ++k)
        out[k] = sinc(p.bandwidth * (p.centers[k] - x[0]));
      return out;
    }
    case EncoderKind::sinusoid_grid: {
      const auto& p = std::get<SinusoidGridParams>(params_);
      Eigen::VectorXd out(static_cast<Eigen::Index>(p.terms.size()));
      for (std::size_t t = 0; t < p.terms.size(); ++t) {
        const double arg = kTwoPi * p.terms[t].freq.dot(x);
        out[static_cast<Eigen::Index>(t)] = p.terms[t].is_sin ? std::sin(arg) : std::cos(arg);
      }
      return out;
    }
    case EncoderKind::rff:
      return rff_encode(std::get<RffParams>(params_), x);
    case EncoderKind::gaussian_pe: {
      const auto& p = std::get<GaussianPeParams>(params_);
      Eigen::VectorXd out(p.centers.rows());
      const double denom = 2.0 * p.sigma * p.sigma;
      for (int g = 0; g < p.centers.rows(); ++g)
        out[g] = std::exp(-(x - p.centers.row(g).transpose()).squaredNorm() / denom);
      return out;
    }
    case EncoderKind::relu_mlp: {
      const auto& p = std::get<ReluMlpParams>(params_);
      Eigen::VectorXd h = x;
      for (std::size_t l = 0; l < p.weights.size(); ++l)
        h = ((p.weights[l] * h + p.biases[l]).array().max(0.0)).matrix();
      return h;
    }
    case EncoderKind::rff_attention: {
      const auto& p = std::get<AttentionParams>(params_);
      const int width = static_cast<int>(p.layers.front().wq.rows());
      std::vector<Eigen::VectorXd> rows{rff_encode(p.rff, x)};
      Eigen::VectorXd out(dim_out_);
      for (std::size_t layer = 0; layer < p.layers.size(); ++layer) {
        rows = attention_layer(p.layers[layer], rows);
        out.segment(static_cast<Eigen::Index>(layer) * width, width) = rows[0];
      }
      return out;
    }
  }
  throw std::logic_error("encode: unknown kind");
}

Eigen::MatrixXd Encoder::encode_cloud(const PointCloud& pc) const {
  if (pc.points.empty()) throw std::invalid_argument("encode_cloud: empty cloud");
  if (kind_ == EncoderKind::rff_attention)
    return attention_encode_cloud(std::get<AttentionParams>(params_), pc);

  // Per-point encodes, one GEMV-sized computation per row, so each row's bits
  // are independent of its position in the cloud.
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pc.size()), dim_out_);
  for (std::size_t i = 0; i < pc.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = encode(pc.points[i]).transpose();
  return out;
}

std::string Encoder::to_json_string() const {
  const json doc{{"kind", to_string(kind_)},
                 {"dim_in", dim_in_},
                 {"dim_out", dim_out_},
                 {"scale", scale_},
                 {"seed", seed_}};
  return doc.dump();
}

Encoder Encoder::from_json_string(const std::string& doc_str) {
  json doc;
  try {
    doc = json::parse(doc_str);
  } catch (const json::exception& e) {
    throw DataError(std::string("encoder document: ") + e.what());
  }
  return build_encoder(encoder_kind_from_string(doc.at("kind").get<std::string>()),
                       doc.at("dim_in").get<int>(), doc.at("dim_out").get<int>(),
                       doc.at("scale").get<double>(),
                       doc.at("seed").get<std::uint64_t>());
}

namespace {

void append_bytes(std::string& buf, const void* data, std::size_t len) {
  buf.append(static_cast<const char*>(data), len);
}

void append_matrix(std::string& buf, const Eigen::MatrixXd& m) {
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      append_bytes(buf, &v, sizeof(v));
    }
}

void append_vector(std::string& buf, const Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    const double x = v[i];
    append_bytes(buf, &x, sizeof(x));
  }
}

}  // namespace

std::uint64_t Encoder::params_checksum() const {
  std::string buf;
  const int kind_tag = static_cast<int>(kind_);
  append_bytes(buf, &kind_tag, sizeof(kind_tag));
  append_bytes(buf, &dim_in_, sizeof(dim_in_));
  append_bytes(buf, &dim_out_, sizeof(dim_out_));
  append_bytes(buf, &scale_, sizeof(scale_));

  std::visit(
      [&buf](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ImpulseParams>) {
          append_bytes(buf, &p.grid_size, sizeof(p.grid_size));
        } else if constexpr (std::is_same_v<T, SincParams>) {
          append_vector(buf, p.centers);
        } else if constexpr (std::is_same_v<T, SinusoidGridParams>) {
          for (const auto& t : p.terms) {
            append_vector(buf, t.freq);
            const char s = t.is_sin ? 1 : 0;
            append_bytes(buf, &s, sizeof(s));
          }
        } else if constexpr (std::is_same_v<T, RffParams>) {
          append_matrix(buf, p.weights);
        } else if constexpr (std::is_same_v<T, GaussianPeParams>) {
          append_matrix(buf, p.centers);
          append_bytes(buf, &p.sigma, sizeof(p.sigma));
        } else if constexpr (std::is_same_v<T, ReluMlpParams>) {
          for (const auto& w : p.weights) append_matrix(buf, w);
          for (const auto& b : p.biases) append_vector(buf, b);
        } else if constexpr (std::is_same_v<T, AttentionParams>) {
          append_matrix(buf, p.rff.weights);
          for (const auto& l : p.layers) {
            append_matrix(buf, l.wq);
            append_matrix(buf, l.wk);
            append_matrix(buf, l.wv);
          }
        }
      },
      params_);
  return fnv1a64(buf);
}

}  // namespace pointpe
