#include "srnet/discriminator.hpp"

#include "srnet/errors.hpp"
#include "srnet/generator.hpp"

namespace srnet {

namespace F = torch::nn::functional;

PatchCriticImpl::PatchCriticImpl(const ModelConfig& config, int64_t image_channels)
    : slope_(config.leaky_slope) {
  const int64_t w = config.disc_base_channels;
  const std::array<int64_t, 6> widths = {2 * image_channels, w, 2 * w, 4 * w, 8 * w, 1};
  for (size_t k = 0; k < 5; ++k) {
    SNConvOptions o = sn_options(config);
    o.in_channels = widths[k];
    o.out_channels = widths[k + 1];
    if (k < 4) {
      o.kernel = 4;
      o.stride = 2;
      o.padding = 1;
    } else {
      o.kernel = 3;
      o.stride = 1;
      o.padding = 1;
    }
    convs_.push_back(register_module("conv" + std::to_string(k + 1), SNConv(o)));
  }
}

torch::Tensor PatchCriticImpl::forward(const torch::Tensor& condition, const torch::Tensor& candidate) {
  if (condition.dim() != 4 || condition.sizes() != candidate.sizes()) {
    throw ShapeError("patch critic: condition and candidate must have equal N x C x H x W shapes");
  }
  auto x = torch::cat({condition, candidate}, 1);
  const int64_t ph = (16 - x.size(2) % 16) % 16;
  const int64_t pw = (16 - x.size(3) % 16) % 16;
  if (ph || pw) x = F::pad(x, F::PadFuncOptions({0, pw, 0, ph}).mode(torch::kReplicate));
  for (size_t k = 0; k < convs_.size(); ++k) {
    x = convs_[k](x);
    if (k + 1 < convs_.size()) x = F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(slope_));
  }
  return x;
}

torch::Tensor critic_b(PatchCritic& d, const torch::Tensor& i_s, const torch::Tensor& candidate_b) {
  return d(i_s, candidate_b);
}

torch::Tensor critic_f(PatchCritic& d, const torch::Tensor& i_t, const torch::Tensor& candidate_f) {
  return d(i_t, candidate_f);
}

}  // namespace srnet
