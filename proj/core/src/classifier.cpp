#include "pointpe/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "pointpe/errors.hpp"
#include "pointpe/parallel.hpp"
#include "pointpe/report.hpp"

namespace pointpe {

using json = nlohmann::json;

std::string TrainConfig::to_json_string() const {
  const json doc{{"epochs", epochs},
                 {"batch_size", batch_size},
                 {"learning_rate", learning_rate},
                 {"cosine_schedule", cosine_schedule},
                 {"momentum", momentum},
                 {"optimizer", optimizer},
                 {"augment_scale", augment_scale},
                 {"augment_translate", augment_translate},
                 {"seed", seed}};
  return doc.dump();
}

TrainConfig TrainConfig::from_json_string(const std::string& doc_str) {
  json doc;
  try {
    doc = json::parse(doc_str);
  } catch (const json::exception& e) {
    throw DataError(std::string("train config: ") + e.what());
  }
  TrainConfig cfg;
  cfg.epochs = doc.value("epochs", cfg.epochs);
  cfg.batch_size = doc.value("batch_size", cfg.batch_size);
  cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
  cfg.cosine_schedule = doc.value("cosine_schedule", cfg.cosine_schedule);
  cfg.momentum = doc.value("momentum", cfg.momentum);
  cfg.optimizer = doc.value("optimizer", cfg.optimizer);
  cfg.augment_scale = doc.value("augment_scale", cfg.augment_scale);
  cfg.augment_translate = doc.value("augment_translate", cfg.augment_translate);
  cfg.seed = doc.value("seed", cfg.seed);
  return cfg;
}

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, double stddev, SeededRng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, stddev);
  return m;
}

BatchNormParams make_bn(int width) {
  BatchNormParams bn;
  bn.gamma = Eigen::VectorXd::Ones(width);
  bn.beta = Eigen::VectorXd::Zero(width);
  bn.running_mean = Eigen::VectorXd::Zero(width);
  bn.running_var = Eigen::VectorXd::Ones(width);
  return bn;
}

}  // namespace

ClassifierModel ClassifierModel::init(int dim_in, int num_classes, std::uint64_t seed) {
  if (dim_in < 1 || num_classes < 2)
    throw std::invalid_argument("ClassifierModel::init: need dim_in >= 1, classes >= 2");
  SeededRng rng = SeededRng(seed).fork(1);
  ClassifierModel m;
  // He-style init: N(0, sqrt(2 / fan_in)); biases zero.
  m.w1 = random_matrix(512, dim_in, std::sqrt(2.0 / dim_in), rng);
  m.b1 = Eigen::VectorXd::Zero(512);
  m.w2 = random_matrix(256, 512, std::sqrt(2.0 / 512.0), rng);
  m.b2 = Eigen::VectorXd::Zero(256);
  m.w3 = random_matrix(num_classes, 256, std::sqrt(2.0 / 256.0), rng);
  m.b3 = Eigen::VectorXd::Zero(num_classes);
  m.bn1 = make_bn(512);
  m.bn2 = make_bn(256);
  m.dropout_rng = SeededRng(seed).fork(2);
  return m;
}

namespace {

// Everything the backward pass needs from one forward pass.
struct ForwardCache {
  Eigen::MatrixXd x;
  Eigen::MatrixXd xhat1, h1;  // BN1 normalized; post-ReLU1
  Eigen::VectorXd inv_std1;
  Eigen::MatrixXd drop_mask;  // scaled inverted-dropout mask
  Eigen::MatrixXd xhat2, h2;
  Eigen::VectorXd inv_std2;
};

Eigen::MatrixXd bn_forward_train(const Eigen::MatrixXd& a, BatchNormParams& bn,
                                 Eigen::MatrixXd& xhat, Eigen::VectorXd& inv_std) {
  const double m = static_cast<double>(a.rows());
  const Eigen::VectorXd mean = a.colwise().mean();
  const Eigen::MatrixXd centered = a.rowwise() - mean.transpose();
  const Eigen::VectorXd var = centered.array().square().colwise().sum() / m;
  inv_std = (var.array() + bn.eps).rsqrt();
  xhat = centered.array().rowwise() * inv_std.transpose().array();

  bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * mean;
  bn.running_var = (1.0 - bn.momentum) * bn.running_var + bn.momentum * var;

  return (xhat.array().rowwise() * bn.gamma.transpose().array()).rowwise() +
         bn.beta.transpose().array();
}

Eigen::MatrixXd bn_forward_eval(const Eigen::MatrixXd& a, const BatchNormParams& bn) {
  const Eigen::ArrayXd inv_std = (bn.running_var.array() + bn.eps).rsqrt();
  Eigen::MatrixXd xhat =
      (a.rowwise() - bn.running_mean.transpose()).array().rowwise() *
      inv_std.transpose();
  return (xhat.array().rowwise() * bn.gamma.transpose().array()).rowwise() +
         bn.beta.transpose().array();
}

// dX for the standard batch-norm backward; also accumulates dgamma/dbeta.
Eigen::MatrixXd bn_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& xhat,
                            const Eigen::VectorXd& inv_std, const BatchNormParams& bn,
                            Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta) {
  const double m = static_cast<double>(dy.rows());
  dbeta = dy.colwise().sum();
  dgamma = (dy.array() * xhat.array()).colwise().sum();
  const Eigen::MatrixXd dxhat = dy.array().rowwise() * bn.gamma.transpose().array();
  const Eigen::VectorXd sum_dxhat = dxhat.colwise().sum();
  const Eigen::VectorXd sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
  Eigen::MatrixXd dx =
      m * dxhat.array() - (Eigen::MatrixXd::Ones(dy.rows(), 1) * sum_dxhat.transpose()).array() -
      xhat.array() * (Eigen::MatrixXd::Ones(dy.rows(), 1) * sum_dxhat_xhat.transpose()).array();
  dx.array().rowwise() *= (inv_std / m).transpose().array();
  return dx;
}

Eigen::MatrixXd linear_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                               const Eigen::VectorXd& b) {
  return (x * w.transpose()).rowwise() + b.transpose();
}

Eigen::MatrixXd forward_train_cached(ClassifierModel& model, const Eigen::MatrixXd& x,
                                     ForwardCache& cache) {
  cache.x = x;
  const Eigen::MatrixXd a1 = linear_forward(x, model.w1, model.b1);
  Eigen::MatrixXd y1 = bn_forward_train(a1, model.bn1, cache.xhat1, cache.inv_std1);
  cache.h1 = y1.cwiseMax(0.0);

  const Eigen::MatrixXd a2 = linear_forward(cache.h1, model.w2, model.b2);
  const double keep = 1.0 - model.dropout_prob;
  cache.drop_mask.resize(a2.rows(), a2.cols());
  model.last_dropout_zeros = 0;
  for (Eigen::Index r = 0; r < a2.rows(); ++r)
    for (Eigen::Index c = 0; c < a2.cols(); ++c) {
      const bool kept = model.dropout_rng.uniform() < keep;
      cache.drop_mask(r, c) = kept ? 1.0 / keep : 0.0;
      if (!kept) ++model.last_dropout_zeros;
    }
  model.last_dropout_entries = static_cast<std::size_t>(a2.size());
  const Eigen::MatrixXd a2d = a2.cwiseProduct(cache.drop_mask);

  Eigen::MatrixXd y2 = bn_forward_train(a2d, model.bn2, cache.xhat2, cache.inv_std2);
  cache.h2 = y2.cwiseMax(0.0);
  return linear_forward(cache.h2, model.w3, model.b3);
}

}  // namespace

Eigen::MatrixXd ClassifierModel::forward_eval(const Eigen::MatrixXd& features) const {
  if (features.cols() != dim_in())
    throw std::invalid_argument("forward: feature dimension mismatch");
  if (!features.allFinite()) throw std::invalid_argument("forward: non-finite features");
  const Eigen::MatrixXd h1 =
      bn_forward_eval(linear_forward(features, w1, b1), bn1).cwiseMax(0.0);
  // Dropout is inactive in eval mode (inverted scaling at train time).
  const Eigen::MatrixXd h2 =
      bn_forward_eval(linear_forward(h1, w2, b2), bn2).cwiseMax(0.0);
  return linear_forward(h2, w3, b3);
}

Eigen::MatrixXd ClassifierModel::forward(const Eigen::MatrixXd& features) {
  if (mode == Mode::eval) return forward_eval(features);
  if (features.cols() != dim_in())
    throw std::invalid_argument("forward: feature dimension mismatch");
  if (!features.allFinite()) throw std::invalid_argument("forward: non-finite features");
  ForwardCache cache;
  return forward_train_cached(*this, features, cache);
}

namespace {

struct Gradients {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
  Eigen::VectorXd g1, be1, g2, be2;  // BN gamma/beta
};

double backward(ClassifierModel& model, const ForwardCache& cache,
                const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                const std::vector<std::size_t>& batch_idx, Gradients& grads) {
  const Eigen::Index m = logits.rows();
  const Eigen::Index c = logits.cols();

  // Softmax cross-entropy; dZ = (P - Y) / m.
  Eigen::MatrixXd p = logits;
  double loss = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const double row_max = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - row_max).exp();
    const double denom = p.row(r).sum();
    p.row(r) /= denom;
    const int y = labels[batch_idx[static_cast<std::size_t>(r)]];
    loss -= std::log(std::max(p(r, y), 1e-300));
  }
  loss /= static_cast<double>(m);
  Eigen::MatrixXd dz = p;
  for (Eigen::Index r = 0; r < m; ++r)
    dz(r, labels[batch_idx[static_cast<std::size_t>(r)]]) -= 1.0;
  dz /= static_cast<double>(m);
  (void)c;

  grads.w3 = dz.transpose() * cache.h2;
  grads.b3 = dz.colwise().sum();
  Eigen::MatrixXd dh2 = dz * model.w3;
  dh2 = (cache.h2.array() > 0.0).select(dh2, 0.0);

  Eigen::MatrixXd da2d =
      bn_backward(dh2, cache.xhat2, cache.inv_std2, model.bn2, grads.g2, grads.be2);
  const Eigen::MatrixXd da2 = da2d.cwiseProduct(cache.drop_mask);

  grads.w2 = da2.transpose() * cache.h1;
  grads.b2 = da2.colwise().sum();
  Eigen::MatrixXd dh1 = da2 * model.w2;
  dh1 = (cache.h1.array() > 0.0).select(dh1, 0.0);

  Eigen::MatrixXd da1 =
      bn_backward(dh1, cache.xhat1, cache.inv_std1, model.bn1, grads.g1, grads.be1);
  grads.w1 = da1.transpose() * cache.x;
  grads.b1 = da1.colwise().sum();
  return loss;
}

struct Momentum {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3, g1, be1, g2, be2;

  explicit Momentum(const ClassifierModel& m)
      : w1(Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols())),
        w2(Eigen::MatrixXd::Zero(m.w2.rows(), m.w2.cols())),
        w3(Eigen::MatrixXd::Zero(m.w3.rows(), m.w3.cols())),
        b1(Eigen::VectorXd::Zero(m.b1.size())),
        b2(Eigen::VectorXd::Zero(m.b2.size())),
        b3(Eigen::VectorXd::Zero(m.b3.size())),
        g1(Eigen::VectorXd::Zero(m.bn1.gamma.size())),
        be1(Eigen::VectorXd::Zero(m.bn1.beta.size())),
        g2(Eigen::VectorXd::Zero(m.bn2.gamma.size())),
        be2(Eigen::VectorXd::Zero(m.bn2.beta.size())) {}
};

void sgd_update(ClassifierModel& model, Momentum& vel, const Gradients& g,
                double lr, double momentum) {
  const auto step_m = [&](Eigen::MatrixXd& v, Eigen::MatrixXd& p, const Eigen::MatrixXd& grad) {
    v = momentum * v - lr * grad;
    p += v;
  };
  const auto step_v = [&](Eigen::VectorXd& v, Eigen::VectorXd& p, const Eigen::VectorXd& grad) {
    v = momentum * v - lr * grad;
    p += v;
  };
  step_m(vel.w1, model.w1, g.w1);
  step_m(vel.w2, model.w2, g.w2);
  step_m(vel.w3, model.w3, g.w3);
  step_v(vel.b1, model.b1, g.b1);
  step_v(vel.b2, model.b2, g.b2);
  step_v(vel.b3, model.b3, g.b3);
  step_v(vel.g1, model.bn1.gamma, g.g1);
  step_v(vel.be1, model.bn1.beta, g.be1);
  step_v(vel.g2, model.bn2.gamma, g.g2);
  step_v(vel.be2, model.bn2.beta, g.be2);
}

double epoch_pass(ClassifierModel& model, Momentum& vel, const Eigen::MatrixXd& features,
                  const std::vector<int>& labels, const TrainConfig& cfg, int epoch,
                  SeededRng& shuffle_rng) {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i + 1 < n; ++i)
    std::swap(order[i], order[i + shuffle_rng.index(n - i)]);

  double lr = cfg.learning_rate;
  if (cfg.cosine_schedule)
    lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / std::max(1, cfg.epochs)));

  double loss_sum = 0.0;
  std::size_t batches = 0;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t count = std::min(batch_size, n - start);
    if (count < 2) continue;  // batch statistics need at least two samples
    std::vector<std::size_t> batch_idx(order.begin() + static_cast<long>(start),
                                       order.begin() + static_cast<long>(start + count));
    Eigen::MatrixXd batch(static_cast<Eigen::Index>(count), features.cols());
    for (std::size_t r = 0; r < count; ++r)
      batch.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(batch_idx[r]));

    ForwardCache cache;
    const Eigen::MatrixXd logits = forward_train_cached(model, batch, cache);
    Gradients grads;
    loss_sum += backward(model, cache, logits, labels, batch_idx, grads);
    sgd_update(model, vel, grads, lr, cfg.momentum);
    ++batches;
  }
  return batches == 0 ? 0.0 : loss_sum / static_cast<double>(batches);
}

double accuracy_of(const ClassifierModel& model, const Eigen::MatrixXd& features,
                   const std::vector<int>& labels) {
  const Eigen::MatrixXd logits = model.forward_eval(features);
  std::size_t hits = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index pred = 0;
    logits.row(r).maxCoeff(&pred);
    if (static_cast<int>(pred) == labels[static_cast<std::size_t>(r)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

void check_labels(const std::vector<int>& labels, int num_classes, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(labels.size()) != rows)
    throw std::invalid_argument("train: labels/features size mismatch");
  std::set<int> distinct;
  for (const int y : labels) {
    if (y < 0 || y >= num_classes)
      throw std::invalid_argument("train: label out of range");
    distinct.insert(y);
  }
  if (distinct.size() < 2)
    throw DataError("train: degenerate dataset, fewer than two classes present");
}

}  // namespace

TrainResult train(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                  int num_classes, const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("train: epochs and batch_size must be >= 1");
  if (cfg.optimizer != "sgd-momentum")
    throw ConfigError("train: unsupported optimizer '" + cfg.optimizer + "'");
  check_labels(labels, num_classes, features.rows());

  TrainResult result{ClassifierModel::init(static_cast<int>(features.cols()),
                                           num_classes, cfg.seed),
                     {}, 0.0};
  result.model.set_mode(ClassifierModel::Mode::train);
  Momentum vel(result.model);
  SeededRng shuffle_rng = SeededRng(cfg.seed).fork(3);
  result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    result.epoch_loss.push_back(
        epoch_pass(result.model, vel, features, labels, cfg, epoch, shuffle_rng));

  result.model.set_mode(ClassifierModel::Mode::eval);
  result.final_train_accuracy = accuracy_of(result.model, features, labels);
  return result;
}

PointCloud augment_cloud(const PointCloud& pc, bool scale, bool translate,
                         SeededRng& rng) {
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(pc.size());
  const double factor = scale ? rng.uniform(2.0 / 3.0, 3.0 / 2.0) : 1.0;
  Eigen::Vector3d shift = Eigen::Vector3d::Zero();
  if (translate)
    shift = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
  for (const auto& p : pc.points) out.points.push_back(factor * p + shift);
  return out;
}

Eigen::MatrixXd extract_features(const Dataset& dataset, const Encoder& encoder,
                                 PoolKind pooling, unsigned threads) {
  if (dataset.clouds.empty()) throw DataError("extract_features: empty dataset");
  Eigen::MatrixXd features(static_cast<Eigen::Index>(dataset.clouds.size()),
                           encoder.dim_out());
  parallel_for(
      dataset.clouds.size(),
      [&](std::size_t i) {
        features.row(static_cast<Eigen::Index>(i)) =
            pool(encoder.encode_cloud(dataset.clouds[i]), pooling).values.transpose();
      },
      threads);
  return features;
}

std::vector<int> dataset_labels(const Dataset& dataset) {
  std::vector<int> labels;
  labels.reserve(dataset.clouds.size());
  for (const auto& pc : dataset.clouds) {
    if (!pc.label) throw DataError("dataset_labels: unlabeled cloud");
    labels.push_back(*pc.label);
  }
  return labels;
}

TrainResult fit(const Dataset& train_set, const Encoder& encoder, PoolKind pooling,
                const TrainConfig& cfg, unsigned threads) {
  const std::vector<int> labels = dataset_labels(train_set);
  const bool augmented = cfg.augment_scale || cfg.augment_translate;
  if (!augmented)
    return train(extract_features(train_set, encoder, pooling, threads), labels,
                 train_set.num_classes, cfg);

  // Augmentation changes the clouds per epoch, so features are re-extracted
  // inside the loop; everything else matches train().
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("fit: epochs and batch_size must be >= 1");
  Eigen::MatrixXd clean = extract_features(train_set, encoder, pooling, threads);
  check_labels(labels, train_set.num_classes, clean.rows());

  TrainResult result{ClassifierModel::init(encoder.dim_out(), train_set.num_classes,
                                           cfg.seed),
                     {}, 0.0};
  result.model.set_mode(ClassifierModel::Mode::train);
  Momentum vel(result.model);
  SeededRng shuffle_rng = SeededRng(cfg.seed).fork(3);
  const SeededRng augment_base = SeededRng(cfg.seed).fork(4);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Dataset epoch_set;
    epoch_set.num_classes = train_set.num_classes;
    epoch_set.clouds.reserve(train_set.clouds.size());
    for (std::size_t i = 0; i < train_set.clouds.size(); ++i) {
      SeededRng aug_rng = augment_base.fork(static_cast<std::uint64_t>(epoch) * 1000003 + i);
      epoch_set.clouds.push_back(augment_cloud(train_set.clouds[i], cfg.augment_scale,
                                               cfg.augment_translate, aug_rng));
    }
    const Eigen::MatrixXd features = extract_features(epoch_set, encoder, pooling, threads);
    result.epoch_loss.push_back(
        epoch_pass(result.model, vel, features, labels, cfg, epoch, shuffle_rng));
  }
  result.model.set_mode(ClassifierModel::Mode::eval);
  result.final_train_accuracy = accuracy_of(result.model, clean, labels);
  return result;
}

EvalResult evaluate(const ClassifierModel& model, const Encoder& encoder,
                    PoolKind pooling, const Dataset& dataset,
                    const std::optional<CorruptionSpec>& spec, unsigned threads) {
  if (model.mode != ClassifierModel::Mode::eval)
    throw std::invalid_argument("evaluate: model must be in eval mode");
  if (dataset.clouds.empty()) throw DataError("evaluate: empty dataset");

  const int classes = model.num_classes();
  const SeededRng corrupt_base = spec ? SeededRng(spec->seed) : SeededRng(0);
  std::vector<int> predictions(dataset.clouds.size());
  parallel_for(
      dataset.clouds.size(),
      [&](std::size_t i) {
        const PointCloud* cloud = &dataset.clouds[i];
        PointCloud corrupted;
        if (spec) {
          CorruptionSpec per_cloud = *spec;
          per_cloud.seed = corrupt_base.fork(i).seed();
          corrupted = corrupt(*cloud, per_cloud);
          cloud = &corrupted;
        }
        const Eigen::VectorXd feature = pool(encoder.encode_cloud(*cloud), pooling).values;
        const Eigen::MatrixXd logits = model.forward_eval(feature.transpose());
        Eigen::Index pred = 0;
        logits.row(0).maxCoeff(&pred);
        predictions[i] = static_cast<int>(pred);
      },
      threads);

  EvalResult result;
  result.confusion = Eigen::MatrixXi::Zero(classes, classes);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < dataset.clouds.size(); ++i) {
    const int truth = dataset.clouds[i].label.value_or(-1);
    if (truth < 0 || truth >= classes)
      throw DataError("evaluate: cloud " + std::to_string(i) + " has no valid label");
    result.confusion(truth, predictions[i]) += 1;
    if (predictions[i] == truth) ++hits;
  }
  result.count = dataset.clouds.size();
  result.accuracy = static_cast<double>(hits) / static_cast<double>(result.count);
  result.error_rate = 1.0 - result.accuracy;
  return result;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& doc) {
  const int rows = doc.at("rows").get<int>();
  const int cols = doc.at("cols").get<int>();
  const auto& data = doc.at("data");
  if (static_cast<int>(data.size()) != rows * cols)
    throw DataError("checkpoint: matrix size mismatch");
  Eigen::MatrixXd m(rows, cols);
  int i = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json data = json::array();
  for (int i = 0; i < v.size(); ++i) data.push_back(v[i]);
  return data;
}

Eigen::VectorXd vector_from_json(const json& doc) {
  Eigen::VectorXd v(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) v[static_cast<Eigen::Index>(i)] = doc[i].get<double>();
  return v;
}

json bn_to_json(const BatchNormParams& bn) {
  return json{{"gamma", vector_to_json(bn.gamma)},
              {"beta", vector_to_json(bn.beta)},
              {"running_mean", vector_to_json(bn.running_mean)},
              {"running_var", vector_to_json(bn.running_var)},
              {"momentum", bn.momentum},
              {"eps", bn.eps}};
}

BatchNormParams bn_from_json(const json& doc) {
  BatchNormParams bn;
  bn.gamma = vector_from_json(doc.at("gamma"));
  bn.beta = vector_from_json(doc.at("beta"));
  bn.running_mean = vector_from_json(doc.at("running_mean"));
  bn.running_var = vector_from_json(doc.at("running_var"));
  bn.momentum = doc.value("momentum", 0.1);
  bn.eps = doc.value("eps", 1e-5);
  return bn;
}

}  // namespace

std::string ClassifierModel::to_json_string() const {
  const json doc{{"w1", matrix_to_json(w1)}, {"b1", vector_to_json(b1)},
                 {"w2", matrix_to_json(w2)}, {"b2", vector_to_json(b2)},
                 {"w3", matrix_to_json(w3)}, {"b3", vector_to_json(b3)},
                 {"bn1", bn_to_json(bn1)},   {"bn2", bn_to_json(bn2)},
                 {"dropout", dropout_prob}};
  return doc.dump();
}

ClassifierModel ClassifierModel::from_json_string(const std::string& doc_str) {
  json doc;
  try {
    doc = json::parse(doc_str);
  } catch (const json::exception& e) {
    throw DataError(std::string("model document: ") + e.what());
  }
  ClassifierModel m;
  m.w1 = matrix_from_json(doc.at("w1"));
  m.b1 = vector_from_json(doc.at("b1"));
  m.w2 = matrix_from_json(doc.at("w2"));
  m.b2 = vector_from_json(doc.at("b2"));
  m.w3 = matrix_from_json(doc.at("w3"));
  m.b3 = vector_from_json(doc.at("b3"));
  m.bn1 = bn_from_json(doc.at("bn1"));
  m.bn2 = bn_from_json(doc.at("bn2"));
  m.dropout_prob = doc.value("dropout", 0.4);
  m.mode = Mode::eval;
  return m;
}

std::uint64_t ClassifierModel::params_checksum() const {
  return fnv1a64(to_json_string());
}

std::uint64_t Checkpoint::config_hash() const {
  return fnv1a64(encoder.to_json_string() + "|" + to_string(pooling));
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const json doc{{"format", "pointpe-checkpoint-v1"},
                 {"encoder", json::parse(ckpt.encoder.to_json_string())},
                 {"pooling", to_string(ckpt.pooling)},
                 {"train_config", json::parse(ckpt.config.to_json_string())},
                 {"config_hash", hash_hex(ckpt.config_hash())},
                 {"model", json::parse(ckpt.model.to_json_string())}};
  atomic_write(path, doc.dump());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "pointpe-checkpoint-v1")
    throw DataError("checkpoint " + path.string() + ": unknown format");
  Checkpoint ckpt{ClassifierModel::from_json_string(doc.at("model").dump()),
                  Encoder::from_json_string(doc.at("encoder").dump()),
                  pool_kind_from_string(doc.at("pooling").get<std::string>()),
                  TrainConfig::from_json_string(doc.at("train_config").dump())};
  const std::string stored = doc.value("config_hash", "");
  if (!stored.empty() && stored != hash_hex(ckpt.config_hash()))
    throw ConfigError("checkpoint " + path.string() + ": config hash mismatch");
  return ckpt;
}

}  // namespace pointpe
