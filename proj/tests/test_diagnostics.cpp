#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pointpe/diagnostics.hpp"

using namespace pointpe;

namespace {

// Least-squares line fit; returns R^2.
double linear_fit_r2(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fit = slope * xs[i] + intercept;
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

TEST_CASE("distance_curve: zero displacement gives exactly zero for every kind") {
  const SeededRng rng(1);
  for (const EncoderKind kind : {EncoderKind::rff, EncoderKind::relu_mlp,
                                 EncoderKind::gaussian_pe}) {
    const auto rows = distance_curve(kind, 3, 32, 0.5, {0.0}, 5, rng);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_sq == 0.0);
    CHECK(rows[0].mean_l2 == 0.0);
  }
}

TEST_CASE("distance_curve: small-scale RFF follows the closed-form kernel") {
  const int dim_out = 4096;  // F = 2048
  const double sigma = 0.1;
  const SeededRng rng(2);
  const std::vector<double> ds{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto rows = distance_curve(EncoderKind::rff, 3, dim_out, sigma, ds, 64, rng);
  for (const auto& row : rows) {
    const double expected =
        dim_out * (1.0 - std::exp(-sigma * sigma * row.d * row.d / 2.0));
    CHECK(std::abs(row.mean_sq - expected) / expected < 0.02);
  }
}

TEST_CASE("distance_curve: large-scale RFF saturates near 2F") {
  const int dim_out = 4096;
  const SeededRng rng(3);
  const auto rows = distance_curve(EncoderKind::rff, 3, dim_out, 8.0, {1.0, 2.0}, 50, rng);
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(rows[0].mean_sq - rows[1].mean_sq) / rows[1].mean_sq < 0.05);
  CHECK(std::abs(rows[0].mean_sq - dim_out) / dim_out < 0.05);  // 2F = dim_out
}

TEST_CASE("single random ReLU layer: distance grows linearly in displacement") {
  // One layer, zero bias: phi(x) = ReLU(W x). Averaged encoding distance over
  // weight draws is nearly proportional to the displacement on [0, 1].
  SeededRng rng(4);
  const int width = 256;
  std::vector<double> xs, ys;
  for (double d = 0.1; d <= 1.0 + 1e-12; d += 0.1) {
    double acc = 0.0;
    const int draws = 60;
    for (int t = 0; t < draws; ++t) {
      Eigen::MatrixXd w(width, 3);
      for (int r = 0; r < width; ++r)
        for (int c = 0; c < 3; ++c) w(r, c) = rng.normal();
      const Eigen::Vector3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      Eigen::Vector3d u(rng.normal(), rng.normal(), rng.normal());
      u.normalize();
      const Eigen::VectorXd fa = (w * x).cwiseMax(0.0);
      const Eigen::VectorXd fb = (w * (x + d * u)).cwiseMax(0.0);
      acc += (fa - fb).norm();
    }
    xs.push_back(d);
    ys.push_back(acc / draws);
  }
  CHECK(linear_fit_r2(xs, ys) >= 0.99);
}

TEST_CASE("frequency_law_check: variance matches D*B^2/3") {
  SeededRng rng(5);
  const auto report = frequency_law_check(3, 8, 100000, rng);
  CHECK(report.target_variance == doctest::Approx(64.0));
  CHECK(std::abs(report.sample_variance - 64.0) / 64.0 < 0.05);
}

TEST_CASE("frequency_law_check: D=2 is triangular, D=4 is closer to normal") {
  // Direct triangle check on sums of two uniforms: density at 0 is about
  // twice the density at +/-B.
  SeededRng rng(6);
  const int samples = 200000;
  const double b = 8.0;
  int near_zero = 0, near_edge = 0;
  const double bin = 0.5;
  for (int i = 0; i < samples; ++i) {
    const double s = rng.uniform(-b, b) + rng.uniform(-b, b);
    if (std::abs(s) < bin) ++near_zero;
    if (std::abs(s - b) < bin || std::abs(s + b) < bin) ++near_edge;
  }
  // near_edge pools two windows; halve it for the one-sided density.
  const double ratio = static_cast<double>(near_zero) / (near_edge / 2.0);
  CHECK(std::abs(ratio - 2.0) < 0.2);

  SeededRng rng2(7);
  const auto d2 = frequency_law_check(2, 8, 100000, rng2);
  SeededRng rng4(8);
  const auto d4 = frequency_law_check(4, 8, 100000, rng4);
  CHECK(d4.ks_distance < d2.ks_distance);
}

TEST_CASE("frequency_law_check: Monte-Carlo rate, 4x samples halve the error") {
  const auto spread = [](int samples, std::uint64_t seed0) {
    std::vector<double> estimates;
    for (int rep = 0; rep < 10; ++rep) {
      SeededRng rng(seed0 + rep);
      estimates.push_back(frequency_law_check(3, 8, samples, rng).sample_variance);
    }
    double mean = 0;
    for (const double e : estimates) mean += e;
    mean /= estimates.size();
    double var = 0;
    for (const double e : estimates) var += (e - mean) * (e - mean);
    return std::sqrt(var / (estimates.size() - 1));
  };
  const double se_small = spread(20000, 100);
  const double se_large = spread(80000, 200);
  CHECK(se_small / se_large == doctest::Approx(2.0).epsilon(0.30));
}

TEST_CASE("encoding_illustration: impulse gap is offset-independent, sinc gap grows") {
  const std::vector<double> points{0.413};

  const auto l2_gap = [](const Curve1d& a, const Curve1d& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      acc += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    return std::sqrt(acc);
  };
  const auto find = [](const std::vector<Curve1d>& curves,
                       const std::string& name) -> const Curve1d& {
    for (const auto& c : curves)
      if (c.name == name) return c;
    FAIL(("missing curve " + name).c_str());
    return curves[0];
  };

  // Bin width is 1/32, so offsets of 0.04/0.08/0.12 all land in different
  // bins; the impulse gap is the same fixed jump each time.
  {
    const auto curves = encoding_illustration(points, {0.04, 0.08, 0.12}, 32);
    REQUIRE(curves.size() == 8);  // clean x2 + 3 offsets x2
    const auto& clean = find(curves, "impulse_clean");
    const double g1 = l2_gap(find(curves, "impulse_offset_0.04"), clean);
    const double g2 = l2_gap(find(curves, "impulse_offset_0.08"), clean);
    const double g3 = l2_gap(find(curves, "impulse_offset_0.12"), clean);
    CHECK(g1 == doctest::Approx(g2).epsilon(1e-12));
    CHECK(g2 == doctest::Approx(g3).epsilon(1e-12));
    CHECK(g1 > 0.0);
  }

  // Within the first sinc lobe (offset << 1/bandwidth) the gap grows with
  // the offset.
  {
    const auto curves = encoding_illustration(points, {0.004, 0.008, 0.012}, 32);
    const auto& clean = find(curves, "sinc_clean");
    const double s1 = l2_gap(find(curves, "sinc_offset_0.004"), clean);
    const double s2 = l2_gap(find(curves, "sinc_offset_0.008"), clean);
    const double s3 = l2_gap(find(curves, "sinc_offset_0.012"), clean);
    CHECK(s1 < s2);
    CHECK(s2 < s3);
  }
}

TEST_CASE("encoding_illustration: empty offsets give only the clean curves") {
  const auto curves = encoding_illustration({0.2, 0.6}, {}, 16);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].name == "impulse_clean");
  CHECK(curves[1].name == "sinc_clean");
}

TEST_CASE("scale_sweep: one row per scale") {
  const Dataset train_set = make_synthetic_dataset(4, 64, SeededRng(9));
  const Dataset test_set = make_synthetic_dataset(2, 64, SeededRng(10));
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 11;
  const auto rows = scale_sweep({0.5}, train_set, test_set, PoolKind::mean, cfg, 64, 12);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].scale == 0.5);
  CHECK(rows[0].train_acc >= 0.0);
  CHECK(rows[0].train_acc <= 1.0);
}

TEST_CASE("pooling_robustness_sweep: grid dimensions") {
  const Dataset train_set = make_synthetic_dataset(4, 64, SeededRng(13));
  const Dataset test_set = make_synthetic_dataset(2, 64, SeededRng(14));
  RobustnessSweepOptions opts;
  opts.dim_out = 64;
  opts.levels = {2, 5};
  opts.train.epochs = 3;
  opts.train.batch_size = 8;
  const auto cells = pooling_robustness_sweep(
      train_set, test_set, {PoolKind::max, PoolKind::mean},
      {CorruptionKind::background_outliers, CorruptionKind::gaussian_noise}, opts);
  // |pools| x (1 clean + |corruptions| x |levels|)
  REQUIRE(cells.size() == 2 * (1 + 2 * 2));
  CHECK(cells[0].corruption == "clean");
  for (const auto& cell : cells) {
    CHECK(cell.error_rate >= 0.0);
    CHECK(cell.error_rate <= 1.0);
  }
}
