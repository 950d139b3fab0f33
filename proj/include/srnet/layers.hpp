#pragma once

#include <torch/torch.h>

namespace srnet {

struct SNConvOptions {
  int64_t in_channels;
  int64_t out_channels;
  int64_t kernel = 3;
  int64_t stride = 1;
  int64_t padding = 1;
  int64_t output_padding = 0;
  bool transposed = false;
  bool bias = true;
  int power_iterations = 1;
  int init_iterations = 20;
};

/// Convolution (or transposed convolution) whose weight is divided by a
/// power-iteration estimate of its largest singular value. The estimate
/// vectors are buffers: they advance on every training-mode forward and are
/// frozen in eval mode, so eval forwards are deterministic.
class SNConvImpl : public torch::nn::Module {
 public:
  explicit SNConvImpl(const SNConvOptions& options);

  torch::Tensor forward(const torch::Tensor& x);

  /// Current estimate u^T W v of the largest singular value.
  torch::Tensor sigma() const;
  /// W / sigma() as a (rows x cols) matrix, for audits.
  torch::Tensor normalized_matrix() const;

  const SNConvOptions& options() const { return options_; }

 private:
  torch::Tensor weight_matrix() const;
  void power_iterate(int iterations);

  SNConvOptions options_;
  torch::Tensor weight_, bias_, u_, v_;
};
TORCH_MODULE(SNConv);

/// SN conv -> batch norm -> leaky ReLU.
class ConvBlockImpl : public torch::nn::Module {
 public:
  ConvBlockImpl(int64_t in, int64_t out, int64_t kernel, int64_t stride, double slope,
                const SNConvOptions& sn);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  SNConv conv_{nullptr};
  torch::nn::BatchNorm2d norm_{nullptr};
  double slope_;
};
TORCH_MODULE(ConvBlock);

/// 3x3 stride-2 SN transposed conv (exact 2x upsampling) -> batch norm -> leaky ReLU.
class UpBlockImpl : public torch::nn::Module {
 public:
  UpBlockImpl(int64_t in, int64_t out, double slope, const SNConvOptions& sn);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  SNConv conv_{nullptr};
  torch::nn::BatchNorm2d norm_{nullptr};
  double slope_;
};
TORCH_MODULE(UpBlock);

/// x + BN(conv(lrelu(BN(conv(x))))).
class ResBlockImpl : public torch::nn::Module {
 public:
  ResBlockImpl(int64_t channels, double slope, const SNConvOptions& sn);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  SNConv conv1_{nullptr}, conv2_{nullptr};
  torch::nn::BatchNorm2d norm1_{nullptr}, norm2_{nullptr};
  double slope_;
};
TORCH_MODULE(ResBlock);

/// Collects every SNConv reachable from `module`.
std::vector<SNConv> spectral_layers(const torch::nn::Module& module);

}  // namespace srnet
