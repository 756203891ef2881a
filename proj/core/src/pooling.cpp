#include "pointpe/pooling.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pointpe/errors.hpp"

namespace pointpe {

const char* to_string(PoolKind kind) {
  switch (kind) {
    case PoolKind::max: return "max";
    case PoolKind::mean: return "mean";
    case PoolKind::median: return "median";
    case PoolKind::sum: return "sum";
  }
  return "?";
}

PoolKind pool_kind_from_string(const std::string& name) {
  for (int i = 0; i <= static_cast<int>(PoolKind::sum); ++i) {
    const auto kind = static_cast<PoolKind>(i);
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown pooling kind: " + name);
}

PooledFeature pool(const Eigen::MatrixXd& embeddings, PoolKind kind) {
  if (embeddings.rows() == 0 || embeddings.cols() == 0)
    throw std::invalid_argument("pool: empty embedding matrix");

  PooledFeature out;
  out.kind = kind;
  switch (kind) {
    case PoolKind::max:
      out.values = embeddings.colwise().maxCoeff();
      break;
    case PoolKind::mean:
      out.values = embeddings.colwise().mean();
      break;
    case PoolKind::sum:
      out.values = embeddings.colwise().sum();
      break;
    case PoolKind::median: {
      const Eigen::Index n = embeddings.rows();
      out.values.resize(embeddings.cols());
      std::vector<double> column(static_cast<std::size_t>(n));
      for (Eigen::Index c = 0; c < embeddings.cols(); ++c) {
        for (Eigen::Index r = 0; r < n; ++r) column[static_cast<std::size_t>(r)] = embeddings(r, c);
        std::sort(column.begin(), column.end());
        out.values[c] = (n % 2 == 1)
                            ? column[static_cast<std::size_t>(n / 2)]
                            : 0.5 * (column[static_cast<std::size_t>(n / 2 - 1)] +
                                     column[static_cast<std::size_t>(n / 2)]);
      }
      break;
    }
  }
  return out;
}

PooledFeature mean_as_sum(const Eigen::MatrixXd& embeddings) {
  if (embeddings.rows() == 0 || embeddings.cols() == 0)
    throw std::invalid_argument("mean_as_sum: empty embedding matrix");
  const double inv_n = 1.0 / static_cast<double>(embeddings.rows());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(embeddings.cols());
  for (Eigen::Index r = 0; r < embeddings.rows(); ++r)
    acc += embeddings.row(r).transpose() * inv_n;  // h' = h / N, then sum
  return {acc, PoolKind::mean};
}

PooledFeature max_as_masked_sum(const Eigen::MatrixXd& embeddings) {
  if (embeddings.rows() == 0 || embeddings.cols() == 0)
    throw std::invalid_argument("max_as_masked_sum: empty embedding matrix");
  Eigen::MatrixXd masked = Eigen::MatrixXd::Zero(embeddings.rows(), embeddings.cols());
  for (Eigen::Index c = 0; c < embeddings.cols(); ++c) {
    Eigen::Index arg = 0;
    embeddings.col(c).maxCoeff(&arg);  // first occurrence on ties
    masked(arg, c) = embeddings(arg, c);
  }
  return {masked.colwise().sum(), PoolKind::max};
}

ReluMeanMaxForm max_as_relu_mean(const Eigen::MatrixXd& embeddings) {
  const Eigen::Index n = embeddings.rows();
  const Eigen::Index k = embeddings.cols();
  if (n == 0 || k == 0)
    throw std::invalid_argument("max_as_relu_mean: empty embedding matrix");
  if (n < 2)
    throw NumericalError("max_as_relu_mean: needs at least two rows");

  // Top two values per column; the construction needs m > n2 and m > 0.
  Eigen::VectorXd top(k), second(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    double m = -std::numeric_limits<double>::infinity();
    double s = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < n; ++r) {
      const double v = embeddings(r, c);
      if (v > m) {
        s = m;
        m = v;
      } else if (v > s) {
        s = v;
      }
    }
    if (!(m > 0.0))
      throw NumericalError("max_as_relu_mean: column " + std::to_string(c) +
                           " has non-positive maximum");
    if (m == s)
      throw NumericalError("max_as_relu_mean: column " + std::to_string(c) +
                           " is constant at its maximum");
    top[c] = m;
    second[c] = s;
  }

  // Common scalar c strictly below every column's feasible bound
  // (m - n2) / (N m); then b = m (1 - c N) lies strictly between n2 and m.
  const double n_rows = static_cast<double>(n);
  double gap_scale = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < k; ++c)
    gap_scale = std::min(gap_scale, (top[c] - second[c]) / (n_rows * top[c]));
  gap_scale *= 0.5;

  Eigen::VectorXd subtrahend(k);
  for (Eigen::Index c = 0; c < k; ++c) subtrahend[c] = top[c] * (1.0 - gap_scale * n_rows);

  Eigen::VectorXd pooled(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < n; ++r)
      acc += std::max(0.0, (embeddings(r, c) - subtrahend[c]) / gap_scale);
    pooled[c] = acc / n_rows;
  }
  return {{pooled, PoolKind::max}, subtrahend, gap_scale};
}

std::pair<PooledFeature, PooledFeature> linear_ppe_mean_collapse(
    const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const PointCloud& pc) {
  if (a.cols() != 3 || a.rows() != b.size())
    throw std::invalid_argument("linear_ppe_mean_collapse: A must be K x 3 with K = |b|");
  if (pc.points.empty())
    throw std::invalid_argument("linear_ppe_mean_collapse: empty cloud");

  Eigen::MatrixXd embedded(static_cast<Eigen::Index>(pc.size()), a.rows());
  for (std::size_t i = 0; i < pc.size(); ++i)
    embedded.row(static_cast<Eigen::Index>(i)) = (a * pc.points[i] + b).transpose();

  PooledFeature pooled = pool(embedded, PoolKind::mean);
  PooledFeature collapsed{a * pc.centroid() + b, PoolKind::mean};
  return {pooled, collapsed};
}

}  // namespace pointpe
