#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pointpe/classifier.hpp"
#include "pointpe/corruption.hpp"
#include "pointpe/encoder.hpp"
#include "pointpe/point_cloud.hpp"
#include "pointpe/pooling.hpp"
#include "pointpe/rng.hpp"

namespace pointpe {

struct DistanceCurveRow {
  double d = 0.0;        // point displacement
  double mean_sq = 0.0;  // mean ||enc(x) - enc(x + d u)||^2 over draws
  double std_sq = 0.0;
  double mean_l2 = 0.0;  // mean ||enc(x) - enc(x + d u)|| (not squared)
};

/// Encoding-distance-vs-point-distance curve: for each d, a fresh encoder is
/// drawn per trial (seed-forked), x uniform in [-1,1]^dim_in, u a random unit
/// direction. At d = 0 all entries are exactly 0.
std::vector<DistanceCurveRow> distance_curve(EncoderKind kind, int dim_in, int dim_out,
                                             double scale,
                                             const std::vector<double>& distances,
                                             int draws, const SeededRng& rng);

struct ScaleSweepRow {
  double scale = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

/// Retrains the head per scale on frozen RFF features; one row per scale.
/// Train accuracy is measured on the raw (unaugmented) training clouds.
std::vector<ScaleSweepRow> scale_sweep(const std::vector<double>& scales,
                                       const Dataset& train_set, const Dataset& test_set,
                                       PoolKind pooling, const TrainConfig& cfg,
                                       int dim_out, std::uint64_t encoder_seed,
                                       unsigned threads = 1);

struct RobustnessCell {
  PoolKind pooling = PoolKind::max;
  std::string corruption;  // "clean" or the corruption kind name
  int level = 0;           // 0 for clean
  double severity = 0.0;
  double error_rate = 0.0;
};

struct RobustnessSweepOptions {
  /// Encoder scale per pooling kind; the defaults follow the classification
  /// setup (0.09 for max, 0.9 for mean/median/sum).
  std::map<PoolKind, double> scales{{PoolKind::max, 0.09},
                                    {PoolKind::mean, 0.9},
                                    {PoolKind::median, 0.9},
                                    {PoolKind::sum, 0.9}};
  int dim_out = 1024;
  std::uint64_t encoder_seed = 1;
  std::uint64_t corruption_seed = 99;
  std::vector<int> levels;  // empty = all 10 ladder levels
  TrainConfig train;
  unsigned threads = 1;
};

/// Error-rate grid over pooling kinds x (clean + corruption levels); one
/// trained head per pooling kind, evaluated on the corrupted test set.
std::vector<RobustnessCell> pooling_robustness_sweep(
    const Dataset& train_set, const Dataset& test_set,
    const std::vector<PoolKind>& poolings,
    const std::vector<CorruptionKind>& corruptions,
    const RobustnessSweepOptions& opts);

struct FrequencyLawReport {
  double sample_variance = 0.0;
  double target_variance = 0.0;  // D * B^2 / 3
  double ks_distance = 0.0;      // sup |empirical CDF - N(0, target) CDF|
};

/// Monte-Carlo check of the projected-frequency law: samples sums of D
/// uniforms on [-B, B] and compares variance and shape against the matching
/// normal. dim in {2,3,4}; at least 1e4 samples.
FrequencyLawReport frequency_law_check(int dim, int bandwidth, int samples,
                                       SeededRng& rng);

struct Curve1d {
  std::string name;            // e.g. "impulse_clean", "sinc_offset_0.01"
  std::vector<double> ts;      // sample positions in (0,1)
  std::vector<double> values;  // phi(t)
};

/// Sampled impulse and sinc embeddings of a 1-D cloud, clean and with each
/// point shifted by every offset — the raw material for the 1-D encoding
/// illustration. Impulse uses `grid` bins; sinc uses bandwidth `grid`.
std::vector<Curve1d> encoding_illustration(const std::vector<double>& points,
                                           const std::vector<double>& offsets,
                                           int grid);

}  // namespace pointpe
