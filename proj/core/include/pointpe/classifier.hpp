#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pointpe/corruption.hpp"
#include "pointpe/encoder.hpp"
#include "pointpe/point_cloud.hpp"
#include "pointpe/pooling.hpp"
#include "pointpe/rng.hpp"

namespace pointpe {

/// Training protocol for the classification head. The encoder is frozen;
/// only the head below is optimized (SGD with momentum, cosine-annealed
/// learning rate, softmax cross-entropy).
struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 0.1;
  bool cosine_schedule = true;
  double momentum = 0.9;
  std::string optimizer = "sgd-momentum";
  bool augment_scale = false;      // uniform scale in [2/3, 3/2]
  bool augment_translate = false;  // uniform translation in [-0.2, 0.2]^3
  std::uint64_t seed = 0;

  std::string to_json_string() const;
  static TrainConfig from_json_string(const std::string& doc);
};

struct BatchNormParams {
  Eigen::VectorXd gamma, beta, running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// The classification head FC(K,512) -> BN -> ReLU -> FC(512,256) ->
/// Dropout(0.4) -> BN -> ReLU -> FC(256,C). In eval mode the forward pass is
/// a deterministic function of the input (no dropout, BN running stats); in
/// train mode BN uses batch statistics and dropout draws from the internal
/// stream.
struct ClassifierModel {
  enum class Mode { train, eval };

  Eigen::MatrixXd w1, w2, w3;  // 512 x K, 256 x 512, C x 256
  Eigen::VectorXd b1, b2, b3;
  BatchNormParams bn1, bn2;
  double dropout_prob = 0.4;
  Mode mode = Mode::eval;
  SeededRng dropout_rng{0};

  // Mask statistics from the most recent train-mode forward.
  std::size_t last_dropout_zeros = 0;
  std::size_t last_dropout_entries = 0;

  static ClassifierModel init(int dim_in, int num_classes, std::uint64_t seed);

  int dim_in() const { return static_cast<int>(w1.cols()); }
  int num_classes() const { return static_cast<int>(w3.rows()); }

  void set_mode(Mode m) { mode = m; }

  /// batch x C logits. Mutates running statistics (and the dropout stream)
  /// in train mode only.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& features);

  /// Eval-mode forward regardless of the mode flag; pure.
  Eigen::MatrixXd forward_eval(const Eigen::MatrixXd& features) const;

  std::string to_json_string() const;
  static ClassifierModel from_json_string(const std::string& doc);

  std::uint64_t params_checksum() const;
};

struct TrainResult {
  ClassifierModel model;
  std::vector<double> epoch_loss;      // mean cross-entropy per epoch
  double final_train_accuracy = 0.0;   // eval-mode pass over the training set
};

/// Trains the head on precomputed pooled features (one row per cloud).
/// Deterministic given cfg.seed. Fewer than two distinct labels is an error.
TrainResult train(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                  int num_classes, const TrainConfig& cfg);

/// DGCNN-style augmentation: scale uniform in [2/3, 3/2] (one factor per
/// cloud), translation uniform in [-0.2, 0.2] per axis.
PointCloud augment_cloud(const PointCloud& pc, bool scale, bool translate,
                         SeededRng& rng);

/// One pooled feature row per cloud. Rows are independent, so extraction may
/// fan out over `threads` workers without changing a single bit of output.
Eigen::MatrixXd extract_features(const Dataset& dataset, const Encoder& encoder,
                                 PoolKind pooling, unsigned threads = 1);
std::vector<int> dataset_labels(const Dataset& dataset);

/// Full pipeline: features from the frozen encoder, then train(). When
/// augmentation is enabled the features are re-extracted every epoch from
/// freshly augmented clouds (seed-derived, deterministic).
TrainResult fit(const Dataset& train_set, const Encoder& encoder, PoolKind pooling,
                const TrainConfig& cfg, unsigned threads = 1);

struct EvalResult {
  double accuracy = 0.0;
  double error_rate = 0.0;           // 1 - accuracy
  Eigen::MatrixXi confusion;         // rows: true class, cols: predicted
  std::size_t count = 0;
};

/// Corrupts (when a spec is given; cloud i uses spec.seed forked by i),
/// encodes, pools, and classifies every cloud. The model must be in eval mode.
/// Clouds are independent; `threads` only affects wall time.
EvalResult evaluate(const ClassifierModel& model, const Encoder& encoder,
                    PoolKind pooling, const Dataset& dataset,
                    const std::optional<CorruptionSpec>& spec = std::nullopt,
                    unsigned threads = 1);

/// Checkpoint document: model weights and BN statistics, the encoder spec
/// (regenerated from its seed on load), pooling kind, and the TrainConfig.
struct Checkpoint {
  ClassifierModel model;
  Encoder encoder;
  PoolKind pooling = PoolKind::max;
  TrainConfig config;

  /// Hash of the encoder spec + pooling; eval rejects mismatched flags.
  std::uint64_t config_hash() const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pointpe
