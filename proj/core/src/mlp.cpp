#include "fleet/mlp.hpp"

#include <cmath>

#include "fleet/error.hpp"

namespace fleet {

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation hidden)
    : sizes_(std::move(layer_sizes)), hidden_(hidden) {
  require(sizes_.size() >= 2, "an MLP needs at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    require(sizes_[l] > 0 && sizes_[l + 1] > 0, "layer sizes must be positive");
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::uniform(std::vector<std::size_t> layer_sizes, Rng& rng, double output_scale,
                 Activation hidden) {
  Mlp net(std::move(layer_sizes), hidden);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    std::uniform_real_distribution<double> dist(-s, s);
    auto w = net.weight(l);
    const double scale = l + 1 == net.layer_count() ? output_scale : 1.0;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = scale * dist(rng);
    }
  }
  return net;
}

Eigen::Map<const RowMajorMatrix> Mlp::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(sizes_[layer + 1]),
          static_cast<Eigen::Index>(sizes_[layer])};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
  return {params_.data() + offsets_[layer] + sizes_[layer + 1] * sizes_[layer],
          static_cast<Eigen::Index>(sizes_[layer + 1])};
}

Eigen::Map<RowMajorMatrix> Mlp::weight(std::size_t layer) {
  ++generation_;
  return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(sizes_[layer + 1]),
          static_cast<Eigen::Index>(sizes_[layer])};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t layer) {
  ++generation_;
  return {params_.data() + offsets_[layer] + sizes_[layer + 1] * sizes_[layer],
          static_cast<Eigen::Index>(sizes_[layer + 1])};
}

std::span<double> Mlp::mutable_parameters() noexcept {
  ++generation_;
  return params_;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Cache* cache) const {
  if (static_cast<std::size_t>(input.rows()) != input_size()) {
    fail(ErrorKind::kInvalidArgument, "MLP input has " + std::to_string(input.rows()) +
                                          " rows, expected " + std::to_string(input_size()));
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(input);
    cache->generation = generation_;
  }
  Eigen::MatrixXd h = input;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = weight(l) * h;
    z.colwise() += bias(l);
    if (l + 1 < layer_count() && hidden_ == Activation::kTanh) z = z.array().tanh();
    h = std::move(z);
    if (cache) cache->activations.push_back(h);
  }
  return h;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  Eigen::MatrixXd y = forward(x);
  return {y.data(), y.data() + y.size()};
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                   std::span<double> grad) const {
  if (cache.generation != generation_ || cache.activations.size() != layer_count() + 1) {
    fail(ErrorKind::kInvalidArgument, "stale forward cache: parameters changed since forward()");
  }
  require(grad.size() == params_.size(), "gradient buffer has the wrong size");
  require(grad_output.rows() == static_cast<Eigen::Index>(output_size()) &&
              grad_output.cols() == cache.activations.front().cols(),
          "output gradient shape does not match the cached batch");

  Eigen::MatrixXd delta = grad_output;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const Eigen::MatrixXd& in = cache.activations[l];
    Eigen::Map<RowMajorMatrix> gw(grad.data() + offsets_[l],
                                  static_cast<Eigen::Index>(sizes_[l + 1]),
                                  static_cast<Eigen::Index>(sizes_[l]));
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + sizes_[l + 1] * sizes_[l],
                                   static_cast<Eigen::Index>(sizes_[l + 1]));
    gw.noalias() = delta * in.transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = weight(l).transpose() * delta;
    if (hidden_ == Activation::kTanh) {
      back.array() *= 1.0 - in.array().square();
    }
    delta = std::move(back);
  }
}

}  // namespace fleet
