#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "pointpe/point_cloud.hpp"

namespace pointpe {

enum class PoolKind { max, mean, median, sum };

const char* to_string(PoolKind kind);
PoolKind pool_kind_from_string(const std::string& name);

/// Permutation-invariant global descriptor of a cloud.
struct PooledFeature {
  Eigen::VectorXd values;
  PoolKind kind = PoolKind::max;
};

/// Column-wise reduction of an N x K embedding matrix. Median of an even
/// column averages the two middle values. Empty input is an error.
PooledFeature pool(const Eigen::MatrixXd& embeddings, PoolKind kind);

/// Mean pooling rewritten as sum pooling of h' = h / N; equals
/// pool(X, mean) up to summation order.
PooledFeature mean_as_sum(const Eigen::MatrixXd& embeddings);

/// Max pooling rewritten as sum pooling of the matrix with everything but
/// each column's maximum zero-masked. Ties keep the first occurrence.
/// Exactly equals pool(X, max).
PooledFeature max_as_masked_sum(const Eigen::MatrixXd& embeddings);

struct ReluMeanMaxForm {
  PooledFeature pooled;        // mean(ReLU((X - b) / c)), column-wise
  Eigen::VectorXd subtrahend;  // b, strictly between each column's top two values
  double gap_scale = 0.0;      // the common positive scalar c
};

/// Max pooling as mean(ReLU((X - b) / c)): b_i = m_i (1 - cN) with the common
/// c = min_i[(m_i - n_i) / (N m_i)] / 2, where m_i > n_i are the top two
/// values of column i. Requires every column maximum positive and
/// non-constant columns; otherwise a NumericalError.
ReluMeanMaxForm max_as_relu_mean(const Eigen::MatrixXd& embeddings);

/// Demonstrates why mean pooling collapses a linear per-point map: returns
/// (mean-pool of {A x_i + b}, A centroid + b). The two are equal.
std::pair<PooledFeature, PooledFeature> linear_ppe_mean_collapse(
    const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const PointCloud& pc);

}  // namespace pointpe
