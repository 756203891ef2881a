#include "pointpe/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pointpe/errors.hpp"

namespace pointpe {

std::vector<DistanceCurveRow> distance_curve(EncoderKind kind, int dim_in, int dim_out,
                                             double scale,
                                             const std::vector<double>& distances,
                                             int draws, const SeededRng& rng) {
  if (draws < 1) throw std::invalid_argument("distance_curve: draws >= 1");

  std::vector<DistanceCurveRow> rows;
  rows.reserve(distances.size());
  for (std::size_t di = 0; di < distances.size(); ++di) {
    const double d = distances[di];
    double sum_sq = 0.0, sum_sq2 = 0.0, sum_l2 = 0.0;
    for (int t = 0; t < draws; ++t) {
      SeededRng draw_rng = rng.fork(di * 1000003ULL + static_cast<std::uint64_t>(t));
      const Encoder encoder =
          build_encoder(kind, dim_in, dim_out, scale, draw_rng.fork(0).seed());

      Eigen::VectorXd x(dim_in);
      for (int a = 0; a < dim_in; ++a) x[a] = draw_rng.uniform(-1.0, 1.0);
      Eigen::VectorXd direction(dim_in);
      double norm = 0.0;
      do {
        for (int a = 0; a < dim_in; ++a) direction[a] = draw_rng.normal();
        norm = direction.norm();
      } while (norm < 1e-12);
      direction /= norm;

      const Eigen::VectorXd shifted = x + d * direction;
      const double sq = (encoder.encode(x) - encoder.encode(shifted)).squaredNorm();
      sum_sq += sq;
      sum_sq2 += sq * sq;
      sum_l2 += std::sqrt(sq);
    }
    DistanceCurveRow row;
    row.d = d;
    row.mean_sq = sum_sq / draws;
    const double var = std::max(0.0, sum_sq2 / draws - row.mean_sq * row.mean_sq);
    row.std_sq = std::sqrt(var);
    row.mean_l2 = sum_l2 / draws;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScaleSweepRow> scale_sweep(const std::vector<double>& scales,
                                       const Dataset& train_set, const Dataset& test_set,
                                       PoolKind pooling, const TrainConfig& cfg,
                                       int dim_out, std::uint64_t encoder_seed,
                                       unsigned threads) {
  if (scales.empty()) throw std::invalid_argument("scale_sweep: no scales");
  std::vector<ScaleSweepRow> rows;
  rows.reserve(scales.size());
  for (const double scale : scales) {
    const Encoder encoder = build_encoder(EncoderKind::rff, 3, dim_out, scale, encoder_seed);
    const TrainResult trained = fit(train_set, encoder, pooling, cfg, threads);
    const EvalResult test =
        evaluate(trained.model, encoder, pooling, test_set, std::nullopt, threads);
    rows.push_back({scale, trained.final_train_accuracy, test.accuracy});
  }
  return rows;
}

std::vector<RobustnessCell> pooling_robustness_sweep(
    const Dataset& train_set, const Dataset& test_set,
    const std::vector<PoolKind>& poolings,
    const std::vector<CorruptionKind>& corruptions,
    const RobustnessSweepOptions& opts) {
  if (poolings.empty()) throw std::invalid_argument("pooling_robustness_sweep: no poolings");

  std::vector<RobustnessCell> cells;
  for (const PoolKind pooling : poolings) {
    const auto scale_it = opts.scales.find(pooling);
    if (scale_it == opts.scales.end())
      throw std::invalid_argument("pooling_robustness_sweep: no scale for pooling kind");
    const Encoder encoder =
        build_encoder(EncoderKind::rff, 3, opts.dim_out, scale_it->second, opts.encoder_seed);
    const TrainResult trained = fit(train_set, encoder, pooling, opts.train, opts.threads);

    const EvalResult clean =
        evaluate(trained.model, encoder, pooling, test_set, std::nullopt, opts.threads);
    cells.push_back({pooling, "clean", 0, 0.0, clean.error_rate});

    for (const CorruptionKind kind : corruptions) {
      const auto ladder = severity_table(kind);
      std::vector<int> levels = opts.levels;
      if (levels.empty())
        for (int l = 1; l <= static_cast<int>(ladder.size()); ++l) levels.push_back(l);
      for (const int level : levels) {
        CorruptionSpec spec;
        spec.kind = kind;
        spec.level = level;
        spec.seed = opts.corruption_seed;
        const EvalResult corrupted =
            evaluate(trained.model, encoder, pooling, test_set, spec, opts.threads);
        cells.push_back({pooling, to_string(kind), level,
                         ladder[static_cast<std::size_t>(level - 1)], corrupted.error_rate});
      }
    }
  }
  return cells;
}

FrequencyLawReport frequency_law_check(int dim, int bandwidth, int samples,
                                       SeededRng& rng) {
  if (dim < 2 || dim > 4)
    throw std::invalid_argument("frequency_law_check: dim must be in {2,3,4}");
  if (samples < 10000)
    throw std::invalid_argument("frequency_law_check: need at least 1e4 samples");

  std::vector<double> sums(static_cast<std::size_t>(samples));
  double mean = 0.0;
  for (auto& s : sums) {
    double acc = 0.0;
    for (int a = 0; a < dim; ++a)
      acc += rng.uniform(-static_cast<double>(bandwidth), static_cast<double>(bandwidth));
    s = acc;
    mean += acc;
  }
  mean /= samples;

  double var = 0.0;
  for (const double s : sums) var += (s - mean) * (s - mean);
  var /= (samples - 1);

  FrequencyLawReport report;
  report.sample_variance = var;
  report.target_variance = dim * bandwidth * static_cast<double>(bandwidth) / 3.0;

  // KS distance against N(0, target): sup over sorted samples.
  std::sort(sums.begin(), sums.end());
  const double sd = std::sqrt(report.target_variance);
  double ks = 0.0;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sums[i] / (sd * std::sqrt(2.0)));
    const double lo = static_cast<double>(i) / samples;
    const double hi = static_cast<double>(i + 1) / samples;
    ks = std::max({ks, std::abs(cdf - lo), std::abs(cdf - hi)});
  }
  report.ks_distance = ks;
  return report;
}

std::vector<Curve1d> encoding_illustration(const std::vector<double>& points,
                                           const std::vector<double>& offsets,
                                           int grid) {
  if (points.empty()) throw std::invalid_argument("encoding_illustration: no points");
  if (grid < 2) throw std::invalid_argument("encoding_illustration: grid >= 2");
  for (const double p : points)
    if (!(p > 0.0 && p < 1.0))
      throw std::domain_error("encoding_illustration: point outside (0,1)");

  const int samples = 512;
  std::vector<double> ts(samples);
  for (int i = 0; i < samples; ++i) ts[i] = (i + 0.5) / samples;

  const auto impulse_curve = [&](const std::vector<double>& pts) {
    // Piecewise-constant histogram profile sampled on the t grid.
    const Eigen::VectorXd hist = encode_impulse(pts, grid);
    std::vector<double> values(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const int bin = std::min(grid - 1, static_cast<int>(ts[i] * grid));
      values[i] = hist[bin];
    }
    return values;
  };
  const auto sinc_curve = [&](const std::vector<double>& pts) {
    std::vector<double> values(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) values[i] = sinc_direct(pts, grid, ts[i]);
    return values;
  };
  const auto shifted = [&](double offset) {
    std::vector<double> pts = points;
    for (auto& p : pts) p = std::clamp(p + offset, 1e-9, 1.0 - 1e-9);
    return pts;
  };

  std::vector<Curve1d> curves;
  curves.push_back({"impulse_clean", ts, impulse_curve(points)});
  curves.push_back({"sinc_clean", ts, sinc_curve(points)});
  char tag[32];
  for (const double offset : offsets) {
    const auto pts = shifted(offset);
    std::snprintf(tag, sizeof(tag), "%g", offset);
    curves.push_back({std::string("impulse_offset_") + tag, ts, impulse_curve(pts)});
    curves.push_back({std::string("sinc_offset_") + tag, ts, sinc_curve(pts)});
  }
  return curves;
}

}  // namespace pointpe
