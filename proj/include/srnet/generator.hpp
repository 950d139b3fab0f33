#pragma once

#include "srnet/config.hpp"
#include "srnet/layers.hpp"

#include <torch/torch.h>

#include <vector>

namespace srnet {

SNConvOptions sn_options(const ModelConfig& config);

/// 7x7 stem, three stride-2 3x3 convs (widths c, 2c, 4c), residual blocks at
/// 4c. Input height and width must be multiples of 8.
class EncoderImpl : public torch::nn::Module {
 public:
  struct Output {
    torch::Tensor features;             // 4c x H/8 x W/8
    std::vector<torch::Tensor> skips;   // c x H, c x H/2, 2c x H/4
  };

  EncoderImpl(int64_t in_channels, const ModelConfig& config);
  Output forward(const torch::Tensor& x);

 private:
  ConvBlock stem_{nullptr}, down1_{nullptr}, down2_{nullptr}, down3_{nullptr};
  torch::nn::Sequential res_{nullptr};
};
TORCH_MODULE(Encoder);

/// G_T. Separate encoders for the target-text image and the style image; a
/// skeleton branch (3 upsamplings + conv + sigmoid) and a text branch whose
/// features are concatenated with the skeleton map before the output block.
class TextConversionImpl : public torch::nn::Module {
 public:
  struct Output {
    torch::Tensor o_sk;  // N x 1 x H x W, [0,1]
    torch::Tensor o_t;   // N x 3 x H x W, [-1,1]
  };

  explicit TextConversionImpl(const ModelConfig& config);
  Output forward(const torch::Tensor& i_t, const torch::Tensor& i_s);

 private:
  Encoder text_encoder_{nullptr}, style_encoder_{nullptr};
  UpBlock t_up1_{nullptr}, t_up2_{nullptr}, t_up3_{nullptr};
  UpBlock sk_up1_{nullptr}, sk_up2_{nullptr}, sk_up3_{nullptr};
  SNConv sk_out_{nullptr};
  ConvBlock t_block_{nullptr};
  SNConv t_out_{nullptr};
};
TORCH_MODULE(TextConversion);

/// G_B. U-Net: encoder skips are concatenated onto the mirror-resolution
/// decoder maps. Also returns the three upsampling outputs for the fusion
/// decoder.
class BackgroundInpaintingImpl : public torch::nn::Module {
 public:
  struct Output {
    torch::Tensor o_b;                      // N x 3 x H x W, [-1,1]
    std::vector<torch::Tensor> dec_feats;   // 2c x H/4, c x H/2, c x H
  };

  explicit BackgroundInpaintingImpl(const ModelConfig& config);
  Output forward(const torch::Tensor& i_s);

 private:
  Encoder encoder_{nullptr};
  UpBlock up1_{nullptr}, up2_{nullptr}, up3_{nullptr};
  SNConv out_{nullptr};
};
TORCH_MODULE(BackgroundInpainting);

/// G_F. Encodes o_t; each background decoder map is concatenated onto the
/// fusion upsampling output of the same resolution.
class FusionImpl : public torch::nn::Module {
 public:
  explicit FusionImpl(const ModelConfig& config);
  torch::Tensor forward(const torch::Tensor& o_t, const std::vector<torch::Tensor>& dec_feats);

 private:
  int64_t c_;
  Encoder encoder_{nullptr};
  UpBlock up1_{nullptr}, up2_{nullptr}, up3_{nullptr};
  ConvBlock block_{nullptr};
  SNConv out_{nullptr};
};
TORCH_MODULE(Fusion);

struct GeneratorOutputs {
  torch::Tensor o_sk, o_t, o_b, o_f;
};

/// The full generator: G_T, G_B and G_F composed into one forward pass.
class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(const ModelConfig& config);

  GeneratorOutputs forward(const torch::Tensor& i_t, const torch::Tensor& i_s);

  TextConversion text_conversion{nullptr};
  BackgroundInpainting background{nullptr};
  Fusion fusion{nullptr};

  const ModelConfig& config() const { return config_; }

 private:
  ModelConfig config_;
};
TORCH_MODULE(Generator);

TextConversionImpl::Output text_conversion_forward(TextConversion& g, const torch::Tensor& i_t,
                                                   const torch::Tensor& i_s);
BackgroundInpaintingImpl::Output background_forward(BackgroundInpainting& g, const torch::Tensor& i_s);
torch::Tensor fusion_forward(Fusion& g, const torch::Tensor& o_t,
                             const std::vector<torch::Tensor>& dec_feats);
GeneratorOutputs srnet_forward(Generator& g, const torch::Tensor& i_t, const torch::Tensor& i_s);

/// Number of scalar parameters.
int64_t parameter_count(const torch::nn::Module& module);

}  // namespace srnet
