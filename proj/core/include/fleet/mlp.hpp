#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fleet/rng.hpp"

namespace fleet {

enum class Activation : std::uint8_t { kTanh = 0, kIdentity = 1 };

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully connected network: affine layers with `hidden` activation between
/// them and an identity output. All parameters live in one flat buffer, layer
/// by layer, each layer's weights (out x in, row-major) followed by its bias.
/// Batches are column-major: one sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // [0] = input, back() = output
    std::uint64_t generation = 0;
  };

  Mlp() = default;
  // Zero-initialised parameters.
  explicit Mlp(std::vector<std::size_t> layer_sizes,
               Activation hidden = Activation::kTanh);

  // U(-s, s) weights with s = 1/sqrt(fan_in), zero biases; the output layer's
  // weights are further multiplied by `output_scale`.
  static Mlp uniform(std::vector<std::size_t> layer_sizes, Rng& rng,
                     double output_scale = 1.0,
                     Activation hidden = Activation::kTanh);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache* cache = nullptr) const;
  std::vector<double> forward(std::span<const double> input) const;

  /// Writes dLoss/dparams into `grad` (parameter layout) given dLoss/doutput
  /// for the batch in `cache`. Throws if the parameters changed since the
  /// cached forward pass.
  void backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                std::span<double> grad) const;

  std::span<const double> parameters() const noexcept { return params_; }
  // Marks any outstanding forward caches as stale.
  std::span<double> mutable_parameters() noexcept;

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t layer_count() const noexcept { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t output_size() const noexcept { return sizes_.back(); }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  Activation hidden_activation() const noexcept { return hidden_; }

  Eigen::Map<const RowMajorMatrix> weight(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<RowMajorMatrix> weight(std::size_t layer);
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  std::vector<double> params_;
  Activation hidden_ = Activation::kTanh;
  std::uint64_t generation_ = 0;
};

}  // namespace fleet
