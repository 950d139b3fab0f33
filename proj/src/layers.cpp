#include "srnet/layers.hpp"

#include <cmath>

namespace srnet {

namespace F = torch::nn::functional;

SNConvImpl::SNConvImpl(const SNConvOptions& options) : options_(options) {
  const auto& o = options_;
  // Borrow the stock initialisation of the equivalent torch layer.
  if (o.transposed) {
    torch::nn::ConvTranspose2d ref(torch::nn::ConvTranspose2dOptions(o.in_channels, o.out_channels, o.kernel)
                                       .stride(o.stride)
                                       .padding(o.padding)
                                       .output_padding(o.output_padding)
                                       .bias(o.bias));
    weight_ = register_parameter("weight_orig", ref->weight.detach().clone());
    if (o.bias) bias_ = register_parameter("bias", ref->bias.detach().clone());
  } else {
    torch::nn::Conv2d ref(torch::nn::Conv2dOptions(o.in_channels, o.out_channels, o.kernel)
                              .stride(o.stride)
                              .padding(o.padding)
                              .bias(o.bias));
    weight_ = register_parameter("weight_orig", ref->weight.detach().clone());
    if (o.bias) bias_ = register_parameter("bias", ref->bias.detach().clone());
  }
  auto m = weight_matrix().detach();
  u_ = register_buffer("u", F::normalize(torch::randn({m.size(0)}), F::NormalizeFuncOptions().dim(0).eps(1e-12)));
  v_ = register_buffer("v", F::normalize(torch::mv(m.t(), u_), F::NormalizeFuncOptions().dim(0).eps(1e-12)));
  power_iterate(o.init_iterations);
}

torch::Tensor SNConvImpl::weight_matrix() const {
  // Rows index output channels for both layouts.
  if (options_.transposed) return weight_.transpose(0, 1).reshape({weight_.size(1), -1});
  return weight_.reshape({weight_.size(0), -1});
}

void SNConvImpl::power_iterate(int iterations) {
  torch::NoGradGuard no_grad;
  auto m = weight_matrix();
  const auto opts = F::NormalizeFuncOptions().dim(0).eps(1e-12);
  for (int i = 0; i < iterations; ++i) {
    v_.copy_(F::normalize(torch::mv(m.t(), u_), opts));
    u_.copy_(F::normalize(torch::mv(m, v_), opts));
  }
}

torch::Tensor SNConvImpl::sigma() const {
  return torch::dot(u_.clone(), torch::mv(weight_matrix(), v_.clone()));
}

torch::Tensor SNConvImpl::normalized_matrix() const { return weight_matrix() / sigma(); }

torch::Tensor SNConvImpl::forward(const torch::Tensor& x) {
  if (is_training()) power_iterate(options_.power_iterations);
  auto w = weight_ / sigma();
  const auto& o = options_;
  if (o.transposed) {
    return F::conv_transpose2d(x, w,
                               F::ConvTranspose2dFuncOptions()
                                   .bias(bias_)
                                   .stride(o.stride)
                                   .padding(o.padding)
                                   .output_padding(o.output_padding));
  }
  return F::conv2d(x, w, F::Conv2dFuncOptions().bias(bias_).stride(o.stride).padding(o.padding));
}

ConvBlockImpl::ConvBlockImpl(int64_t in, int64_t out, int64_t kernel, int64_t stride, double slope,
                             const SNConvOptions& sn)
    : slope_(slope) {
  SNConvOptions o = sn;
  o.in_channels = in;
  o.out_channels = out;
  o.kernel = kernel;
  o.stride = stride;
  o.padding = kernel / 2;
  o.bias = false;
  conv_ = register_module("conv", SNConv(o));
  norm_ = register_module("norm", torch::nn::BatchNorm2d(out));
}

torch::Tensor ConvBlockImpl::forward(const torch::Tensor& x) {
  return F::leaky_relu(norm_(conv_(x)), F::LeakyReLUFuncOptions().negative_slope(slope_));
}

UpBlockImpl::UpBlockImpl(int64_t in, int64_t out, double slope, const SNConvOptions& sn)
    : slope_(slope) {
  SNConvOptions o = sn;
  o.in_channels = in;
  o.out_channels = out;
  o.kernel = 3;
  o.stride = 2;
  o.padding = 1;
  o.output_padding = 1;
  o.transposed = true;
  o.bias = false;
  conv_ = register_module("conv", SNConv(o));
  norm_ = register_module("norm", torch::nn::BatchNorm2d(out));
}

torch::Tensor UpBlockImpl::forward(const torch::Tensor& x) {
  return F::leaky_relu(norm_(conv_(x)), F::LeakyReLUFuncOptions().negative_slope(slope_));
}

ResBlockImpl::ResBlockImpl(int64_t channels, double slope, const SNConvOptions& sn) : slope_(slope) {
  SNConvOptions o = sn;
  o.in_channels = channels;
  o.out_channels = channels;
  o.kernel = 3;
  o.stride = 1;
  o.padding = 1;
  o.bias = false;
  conv1_ = register_module("conv1", SNConv(o));
  norm1_ = register_module("norm1", torch::nn::BatchNorm2d(channels));
  conv2_ = register_module("conv2", SNConv(o));
  norm2_ = register_module("norm2", torch::nn::BatchNorm2d(channels));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  auto h = F::leaky_relu(norm1_(conv1_(x)), F::LeakyReLUFuncOptions().negative_slope(slope_));
  return x + norm2_(conv2_(h));
}

std::vector<SNConv> spectral_layers(const torch::nn::Module& module) {
  std::vector<SNConv> out;
  for (const auto& m : module.modules(/*include_self=*/true)) {
    if (auto sn = std::dynamic_pointer_cast<SNConvImpl>(m)) out.emplace_back(sn);
  }
  return out;
}

}  // namespace srnet
