#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pointpe/encoder.hpp"
#include "pointpe/rng.hpp"

using namespace pointpe;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::Vector3d v3(double x, double y, double z) { return {x, y, z}; }
}  // namespace

TEST_CASE("build_encoder: rff weight shapes") {
  const Encoder pe = build_encoder(EncoderKind::rff, 3, 1024, 0.09, 1);
  const auto& p = std::get<RffParams>(pe.params());
  CHECK(p.weights.rows() == 512);
  CHECK(p.weights.cols() == 3);

  const Encoder pe_at_front = build_encoder(EncoderKind::rff, 3, 256, 0.9, 1);
  const auto& q = std::get<RffParams>(pe_at_front.params());
  CHECK(q.weights.rows() == 128);
  CHECK(q.weights.cols() == 3);
}

TEST_CASE("build_encoder: odd rff dimension rejected") {
  CHECK_THROWS_AS(build_encoder(EncoderKind::rff, 3, 1025, 0.09, 1), std::invalid_argument);
}

TEST_CASE("build_encoder: impulse and sinc need one input dimension") {
  CHECK_THROWS_AS(build_encoder(EncoderKind::impulse, 3, 16, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_encoder(EncoderKind::sinc1d, 3, 16, 1.0, 1), std::invalid_argument);
  CHECK_NOTHROW(build_encoder(EncoderKind::impulse, 1, 16, 1.0, 1));
}

TEST_CASE("build_encoder: rff weight statistics match the scale") {
  const double sigma = 0.7;
  const Encoder enc = build_encoder(EncoderKind::rff, 3, 8192, sigma, 3);
  const auto& w = std::get<RffParams>(enc.params()).weights;
  REQUIRE(w.size() >= 10000);
  const double mean = w.mean();
  const double sq = (w.array() - mean).square().sum() / (w.size() - 1);
  CHECK(std::abs(std::sqrt(sq) - sigma) / sigma < 0.05);
}

TEST_CASE("build_encoder: identical seeds give identical parameter blocks") {
  for (const EncoderKind kind :
       {EncoderKind::rff, EncoderKind::relu_mlp, EncoderKind::rff_attention}) {
    const int dim = kind == EncoderKind::rff_attention ? 64 : 32;
    const Encoder a = build_encoder(kind, 3, dim, 0.5, 99);
    const Encoder b = build_encoder(kind, 3, dim, 0.5, 99);
    const Encoder c = build_encoder(kind, 3, dim, 0.5, 100);
    CHECK(a.params_checksum() == b.params_checksum());
    CHECK(a.params_checksum() != c.params_checksum());
  }
}

TEST_CASE("encode: rff at the origin is [1...1, 0...0]") {
  const Encoder enc = build_encoder(EncoderKind::rff, 3, 64, 1.0, 5);
  const Eigen::VectorXd out = enc.encode(v3(0, 0, 0));
  for (int i = 0; i < 32; ++i) {
    CHECK(out[i] == 1.0);
    CHECK(out[32 + i] == 0.0);
  }
}

TEST_CASE("encode: rff with a pinned frequency row") {
  Encoder enc = build_encoder(EncoderKind::rff, 3, 2, 1.0, 5);
  auto& p = std::get<RffParams>(enc.mutable_params());
  p.weights.row(0) = Eigen::RowVector3d(kPi, 0, 0);
  const Eigen::VectorXd out = enc.encode(v3(0.5, 0, 0));
  CHECK(std::abs(out[0] - std::cos(kPi / 2)) < 1e-12);
  CHECK(std::abs(out[1] - 1.0) < 1e-12);
}

TEST_CASE("encode: rff unit energy |G(x)|^2 = F") {
  const Encoder enc = build_encoder(EncoderKind::rff, 3, 512, 2.0, 6);
  SeededRng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK(std::abs(enc.encode(x).squaredNorm() - 256.0) < 1e-9);
  }
}

TEST_CASE("encode: rff kernel depends only on the displacement") {
  const Encoder enc = build_encoder(EncoderKind::rff, 3, 512, 1.3, 8);
  const auto& w = std::get<RffParams>(enc.params()).weights;
  SeededRng rng(9);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Vector3d x1(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Eigen::Vector3d x2(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double dot = enc.encode(x1).dot(enc.encode(x2));
    double kernel = 0.0;
    for (int f = 0; f < w.rows(); ++f)
      kernel += std::cos(w.row(f).dot(x1 - x2));  // cos a cos b + sin a sin b
    CHECK(std::abs(dot - kernel) < 1e-9);
  }
}

TEST_CASE("encode: rff expected squared distance follows the kernel law") {
  // E ||G(x1) - G(x2)||^2 = 2F (1 - exp(-sigma^2 d^2 / 2)) over weight draws.
  const int half_dim = 2048;
  const double sigma = 0.5;
  const double d = 0.5;
  SeededRng rng(10);
  double acc = 0.0;
  const int draws = 50;
  for (int t = 0; t < draws; ++t) {
    const Encoder enc =
        build_encoder(EncoderKind::rff, 3, 2 * half_dim, sigma, rng.fork(t).seed());
    const Eigen::Vector3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Eigen::Vector3d y = x + d * Eigen::Vector3d::UnitX();
    acc += (enc.encode(x) - enc.encode(y)).squaredNorm();
  }
  const double expected = 2.0 * half_dim * (1.0 - std::exp(-sigma * sigma * d * d / 2.0));
  CHECK(std::abs(acc / draws - expected) / expected < 0.05);
}

TEST_CASE("encode: relu_mlp output is s^L-homogeneous in the weights") {
  const Encoder base = build_encoder(EncoderKind::relu_mlp, 3, 32, 0.1, 11);
  Encoder scaled = base;
  const double s = 1.7;
  auto& p = std::get<ReluMlpParams>(scaled.mutable_params());
  for (auto& w : p.weights) w *= s;
  SeededRng rng(12);
  const int layers = static_cast<int>(p.weights.size());
  for (int t = 0; t < 10; ++t) {
    const Eigen::Vector3d x(rng.normal(), rng.normal(), rng.normal());
    const Eigen::VectorXd a = base.encode(x) * std::pow(s, layers);
    const Eigen::VectorXd b = scaled.encode(x);
    CHECK((a - b).norm() < 1e-9 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("encode: dimension mismatch rejected") {
  const Encoder enc = build_encoder(EncoderKind::rff, 3, 16, 1.0, 13);
  Eigen::VectorXd wrong(2);
  wrong << 0, 0;
  CHECK_THROWS_AS(enc.encode(wrong), std::invalid_argument);
}

TEST_CASE("encode_cloud: per-point encoders map rows independently") {
  const Encoder enc = build_encoder(EncoderKind::rff, 3, 64, 0.8, 14);
  SeededRng rng(15);
  PointCloud pc;
  for (int i = 0; i < 24; ++i)
    pc.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Eigen::MatrixXd rows = enc.encode_cloud(pc);
  REQUIRE(rows.rows() == 24);

  PointCloud reversed;
  reversed.points.assign(pc.points.rbegin(), pc.points.rend());
  const Eigen::MatrixXd rev_rows = enc.encode_cloud(reversed);
  for (int i = 0; i < 24; ++i)
    CHECK(rev_rows.row(i) == rows.row(23 - i));  // bit-identical
}

TEST_CASE("encode_cloud: single point equals encode") {
  const Encoder enc = build_encoder(EncoderKind::relu_mlp, 3, 32, 0.1, 16);
  PointCloud pc;
  pc.points.emplace_back(0.3, -0.4, 0.9);
  const Eigen::MatrixXd rows = enc.encode_cloud(pc);
  REQUIRE(rows.rows() == 1);
  CHECK(rows.row(0).transpose() == enc.encode(pc.points[0]));
}

TEST_CASE("encode_cloud: attention is permutation-equivariant to the bit") {
  const Encoder enc = build_encoder(EncoderKind::rff_attention, 3, 64, 0.9, 17);
  SeededRng rng(18);
  PointCloud pc;
  for (int i = 0; i < 8; ++i)
    pc.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Eigen::MatrixXd rows = enc.encode_cloud(pc);

  const std::vector<int> perm{5, 2, 7, 0, 3, 6, 1, 4};
  PointCloud shuffled;
  for (const int i : perm) shuffled.points.push_back(pc.points[i]);
  const Eigen::MatrixXd shuffled_rows = enc.encode_cloud(shuffled);
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK(shuffled_rows.row(static_cast<int>(i)) == rows.row(perm[i]));
}

TEST_CASE("attention parameters: 4 layers, concat width = 4 x layer width") {
  const Encoder enc = build_encoder(EncoderKind::rff_attention, 3, 1024, 0.9, 19);
  const auto& p = std::get<AttentionParams>(enc.params());
  CHECK(p.layers.size() == 4);
  CHECK(p.layers[0].wq.rows() == 256);
  CHECK(p.rff.weights.rows() == 128);  // 256-dim RFF front end
  PointCloud pc;
  pc.points = {v3(0.1, 0.2, 0.3), v3(-0.4, 0.0, 0.2)};
  CHECK(enc.encode_cloud(pc).cols() == 1024);
}

TEST_CASE("encode_impulse: one-hot and additivity") {
  const Eigen::VectorXd single = encode_impulse({0.5}, 10);
  CHECK(single.sum() == 1.0);
  CHECK(single[5] == 1.0);

  const Eigen::VectorXd twice = encode_impulse({0.31, 0.31}, 10);
  CHECK(twice[3] == 2.0);
  CHECK(twice.sum() == 2.0);
}

TEST_CASE("encode_impulse: bin crossing jumps by sqrt(2) regardless of distance") {
  const int grid = 10;
  const Eigen::VectorXd base = encode_impulse({0.395}, grid);  // bin 3
  // Any shift that lands in a different bin changes the histogram by exactly
  // one removed and one added count.
  for (const double shifted : {0.405, 0.55, 0.96}) {
    const Eigen::VectorXd moved = encode_impulse({shifted}, grid);
    CHECK((moved - base).norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  // Within the bin: no change at all.
  CHECK((encode_impulse({0.341}, grid) - base).norm() == 0.0);
}

TEST_CASE("encode_impulse: domain is the open interval") {
  CHECK_THROWS_AS(encode_impulse({0.0}, 8), std::domain_error);
  CHECK_THROWS_AS(encode_impulse({1.0}, 8), std::domain_error);
  CHECK_THROWS_AS(encode_impulse({-0.2}, 8), std::domain_error);
}

TEST_CASE("encode_sinc: a grid-node point is a one-hot coefficient vector") {
  const int bw = 16;
  const int j = 5;
  const Eigen::VectorXd coeffs = encode_sinc({static_cast<double>(j) / bw}, bw);
  for (int k = 0; k < bw; ++k)
    CHECK(coeffs[k] == doctest::Approx(k == j ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("encode_sinc: reconstruction matches direct evaluation for on-grid points") {
  const int bw = 32;
  const std::vector<double> points{3.0 / bw, 11.0 / bw, 11.0 / bw, 24.0 / bw};
  const Eigen::VectorXd coeffs = encode_sinc(points, bw);
  SeededRng rng(20);
  for (int t = 0; t < 100; ++t) {
    const double x = rng.uniform(0.01, 0.99);
    CHECK(std::abs(sinc_reconstruct(coeffs, bw, x) - sinc_direct(points, bw, x)) < 1e-6);
  }
}

TEST_CASE("encode_sinc: coefficient distance grows then saturates with the shift") {
  const int bw = 32;
  const std::vector<double> base{0.4};
  const Eigen::VectorXd ref = encode_sinc(base, bw);
  std::vector<double> distances;
  for (const double delta : {0.002, 0.005, 0.01, 0.015, 0.2, 0.4}) {
    const Eigen::VectorXd shifted = encode_sinc({0.4 + delta}, bw);
    distances.push_back((shifted - ref).norm());
  }
  // Small shifts: monotone growth (about linear in delta at bandwidth 32).
  CHECK(distances[0] < distances[1]);
  CHECK(distances[1] < distances[2]);
  CHECK(distances[2] < distances[3]);
  // Large shifts: saturated near sqrt(2) x unit energy, not proportional.
  CHECK(distances[4] > 1.0);
  CHECK(distances[5] > 1.0);
  CHECK(std::abs(distances[5] - distances[4]) < 0.5 * distances[4]);
}

TEST_CASE("expand_frequency_grid: 1-D base case") {
  const auto terms = expand_frequency_grid(1, 4);
  REQUIRE(terms.size() == 8);  // frequencies 0..3, cos and sin each
  std::vector<int> cos_freqs, sin_freqs;
  for (const auto& t : terms) {
    REQUIRE(t.freq.size() == 1);
    (t.is_sin ? sin_freqs : cos_freqs).push_back(static_cast<int>(t.freq[0]));
  }
  std::sort(cos_freqs.begin(), cos_freqs.end());
  std::sort(sin_freqs.begin(), sin_freqs.end());
  CHECK(cos_freqs == std::vector<int>{0, 1, 2, 3});
  CHECK(sin_freqs == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("expand_frequency_grid: 2-D count splits into the four double sums") {
  const auto terms = expand_frequency_grid(2, 2);
  REQUIRE(terms.size() == 16);  // (2B)^2
  // Four groups of B^2 = 4: cos(iu+jv), cos(iu-jv), sin(iu+jv), sin(iu-jv).
  int cos_plus = 0, cos_minus = 0, sin_plus = 0, sin_minus = 0;
  for (const auto& t : terms) {
    const bool minus = t.freq[1] < 0.0 || (t.freq[1] == 0.0 && false);
    if (t.is_sin)
      (minus ? sin_minus : sin_plus) += 1;
    else
      (minus ? cos_minus : cos_plus) += 1;
  }
  // Sign patterns on j = 0 coincide; count them once each on the plus side.
  CHECK(cos_plus + cos_minus == 8);
  CHECK(sin_plus + sin_minus == 8);
  CHECK(cos_plus >= 4);
  CHECK(sin_plus >= 4);
}

TEST_CASE("expand_frequency_grid: full 3-D count and exact discrete moments") {
  const int b = 8;
  const auto terms = expand_frequency_grid(3, b);
  REQUIRE(terms.size() == 4096);  // (2B)^3 = 16^3

  // Signed sums i +/- j +/- k over the full grid: mean (B-1)/2 and variance
  // Var(i) + 2 E[i^2] with i uniform on {0..B-1}. (The continuous D B^2/3 law
  // is exercised by the Monte-Carlo frequency_law_check.)
  double mean = 0.0;
  for (const auto& t : terms) mean += t.freq.sum();
  mean /= static_cast<double>(terms.size());
  CHECK(std::abs(mean - (b - 1) / 2.0) < 1e-12);

  double var = 0.0;
  for (const auto& t : terms) var += std::pow(t.freq.sum() - mean, 2);
  var /= static_cast<double>(terms.size());
  const double var_i = (b * b - 1) / 12.0;
  const double e_i2 = (b - 1) * (2.0 * b - 1) / 6.0;
  CHECK(std::abs(var - (var_i + 2 * e_i2)) < 1e-9);
}

TEST_CASE("expand_frequency_grid: term cap guards the blow-up") {
  CHECK_THROWS_AS(expand_frequency_grid(3, 64, 1000000), std::length_error);
  CHECK_NOTHROW(expand_frequency_grid(3, 8, 1000000));
}

TEST_CASE("sinusoid_grid encoder: dimensions and value range") {
  const Encoder enc = build_encoder(EncoderKind::sinusoid_grid, 2, 16, 1.0, 21);
  const Eigen::VectorXd out = enc.encode(Eigen::Vector2d(0.3, 0.4));
  REQUIRE(out.size() == 16);
  for (int i = 0; i < out.size(); ++i) CHECK(std::abs(out[i]) <= 1.0 + 1e-12);
  CHECK_THROWS_AS(build_encoder(EncoderKind::sinusoid_grid, 2, 15, 1.0, 21),
                  std::invalid_argument);
}

TEST_CASE("product_vs_rotated_basis: the trig identity holds") {
  {
    const auto [lhs, rhs] = product_vs_rotated_basis(0.3, 0.7, 2, 5);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
  {
    const auto [lhs, rhs] = product_vs_rotated_basis(0.9, -2.4, 0, 0);
    CHECK(lhs == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rhs == doctest::Approx(1.0).epsilon(1e-15));
  }
  SeededRng rng(22);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double u = rng.uniform(-kPi, kPi);
    const double v = rng.uniform(-kPi, kPi);
    const int i = static_cast<int>(rng.index(16));
    const int j = static_cast<int>(rng.index(16));
    const auto [lhs, rhs] = product_vs_rotated_basis(u, v, i, j);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gaussian_pe: unit response at its own center") {
  const Encoder enc = build_encoder(EncoderKind::gaussian_pe, 3, 27, 0.5, 23);
  const auto& p = std::get<GaussianPeParams>(enc.params());
  const Eigen::VectorXd at_center = enc.encode(p.centers.row(13).transpose());
  CHECK(at_center[13] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at_center.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encoder serialization: weights regenerate exactly from the seed") {
  for (const EncoderKind kind : {EncoderKind::rff, EncoderKind::relu_mlp,
                                 EncoderKind::rff_attention, EncoderKind::gaussian_pe}) {
    const int dim = kind == EncoderKind::rff_attention ? 64 : 32;
    const Encoder original = build_encoder(kind, 3, dim, 0.42, 12345);
    const Encoder restored = Encoder::from_json_string(original.to_json_string());
    CHECK(restored.kind() == original.kind());
    CHECK(restored.params_checksum() == original.params_checksum());
    const std::string doc = original.to_json_string();
    CHECK(doc.find("weights") == std::string::npos);  // never stored
  }
}
