#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pointpe/point_cloud.hpp"

namespace pointpe {

enum class EncoderKind {
  impulse,
  sinc1d,
  sinusoid_grid,
  rff,
  gaussian_pe,
  relu_mlp,
  rff_attention,
};

const char* to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& name);

struct ImpulseParams {
  int grid_size = 0;
};

struct SincParams {
  Eigen::VectorXd centers;  // k / bandwidth for k = 0..bandwidth-1
  int bandwidth = 0;        // cycles per unit
};

/// One basis function trig(2*pi * freq . x) of the rotated tensor-product
/// expansion; `freq` carries the sign pattern.
struct FrequencyTerm {
  Eigen::VectorXd freq;
  bool is_sin = false;
};

struct SinusoidGridParams {
  std::vector<FrequencyTerm> terms;
  int bandwidth = 0;
};

struct RffParams {
  Eigen::MatrixXd weights;  // F x D, F = dim_out / 2, entries i.i.d. N(0, scale^2)
};

/// Experimental: the paper cites a Gaussian positional encoder without
/// defining it; this is exp(-|x - c|^2 / (2 sigma^2)) on a fixed lattice of
/// centers in [-1, 1]^D with sigma = scale.
struct GaussianPeParams {
  Eigen::MatrixXd centers;  // K x D
  double sigma = 1.0;
};

struct ReluMlpParams {
  std::vector<Eigen::MatrixXd> weights;  // layer widths 64, 128, dim_out
  std::vector<Eigen::VectorXd> biases;   // zero-initialized
};

struct AttentionLayerParams {
  Eigen::MatrixXd wq, wk, wv;  // width x width
};

/// RFF front end feeding 4 single-head self-attention layers whose outputs
/// are concatenated; layer width = dim_out / 4.
struct AttentionParams {
  RffParams rff;
  std::vector<AttentionLayerParams> layers;
};

using EncoderParams = std::variant<ImpulseParams, SincParams, SinusoidGridParams,
                                   RffParams, GaussianPeParams, ReluMlpParams,
                                   AttentionParams>;

/// A per-point embedding R^D -> R^K. All randomness is spent at build time;
/// encode() is a pure function afterwards. Weights are a deterministic
/// function of (kind, dim_in, dim_out, scale, seed), which is the entire
/// serialized form.
class Encoder {
 public:
  Encoder(EncoderKind kind, int dim_in, int dim_out, double scale,
          std::uint64_t seed, EncoderParams params)
      : kind_(kind), dim_in_(dim_in), dim_out_(dim_out), scale_(scale),
        seed_(seed), params_(std::move(params)) {}

  EncoderKind kind() const { return kind_; }
  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  double scale() const { return scale_; }
  std::uint64_t seed() const { return seed_; }

  const EncoderParams& params() const { return params_; }
  EncoderParams& mutable_params() { return params_; }

  /// Embed one point. For rff the layout is [cos(Wx); sin(Wx)].
  Eigen::VectorXd encode(const Eigen::VectorXd& x) const;

  /// N x K matrix, row i = encode(point i) — except rff_attention, whose rows
  /// pass through the attention stack together (permutation-equivariant, not
  /// per-point independent).
  Eigen::MatrixXd encode_cloud(const PointCloud& pc) const;

  /// {kind, dim_in, dim_out, scale, seed}; weights are never stored.
  std::string to_json_string() const;
  static Encoder from_json_string(const std::string& doc);

  /// FNV-1a over the parameter block bytes; used by the frozen-encoder tests.
  std::uint64_t params_checksum() const;

 private:
  EncoderKind kind_;
  int dim_in_;
  int dim_out_;
  double scale_;
  std::uint64_t seed_;
  EncoderParams params_;
};

/// Materializes the parameter block from the seed. Constraints: rff needs an
/// even dim_out; rff_attention needs dim_out divisible by 4 with an even
/// quarter; impulse/sinc1d need dim_in = 1; sinusoid_grid needs
/// dim_out = (2B)^dim_in for an integer bandwidth B.
Encoder build_encoder(EncoderKind kind, int dim_in, int dim_out, double scale,
                      std::uint64_t seed);

/// Normalized sinc: sin(pi x) / (pi x), sinc(0) = 1.
double sinc(double x);

/// Histogram of 1-D points on a uniform grid of `grid_size` bins over (0,1):
/// the discretized sum of impulses. Bin = floor(x * G) clamped to G-1.
/// Entries sum to the number of points. Points outside (0,1) are an error.
Eigen::VectorXd encode_impulse(const std::vector<double>& points, int grid_size);

/// Coefficients gamma_k = phi(u_k) of the bandwidth-K sinc expansion of
/// phi(t) = sum_i sinc(K (t - x_i)) at the Nyquist grid u_k = k / K.
Eigen::VectorXd encode_sinc(const std::vector<double>& points, int bandwidth);

/// Reconstruction sum_k gamma_k sinc(K (t - u_k)).
double sinc_reconstruct(const Eigen::VectorXd& coeffs, int bandwidth, double t);

/// Direct evaluation sum_i sinc(K (t - x_i)).
double sinc_direct(const std::vector<double>& points, int bandwidth, double t);

/// Full rotated-basis frequency set for dimension D in {1,2,3} and bandwidth
/// B: every lattice tuple in [0,B)^D, expanded over the 2^(D-1) sign patterns
/// on components 2..D, once as cos and once as sin — (2B)^D terms total.
/// Errors when (2B)^D exceeds `cap`.
std::vector<FrequencyTerm> expand_frequency_grid(int dim, int bandwidth,
                                                 std::size_t cap = 1000000);

/// Evaluates both sides of the product-to-sum identity:
/// (cos(iu)cos(jv), [cos(iu+jv) + cos(iu-jv)] / 2).
std::pair<double, double> product_vs_rotated_basis(double u, double v, int i, int j);

}  // namespace pointpe
