#include "srnet/generator.hpp"

#include "srnet/errors.hpp"

namespace srnet {

namespace {

void require_stride8(const torch::Tensor& x, const char* what) {
  if (x.dim() != 4 || x.size(2) % 8 != 0 || x.size(3) % 8 != 0) {
    throw ShapeError(std::string(what) + ": expected N x C x H x W with H, W multiples of 8");
  }
}

SNConvOptions head(const ModelConfig& config, int64_t in, int64_t out, int64_t kernel) {
  SNConvOptions o = sn_options(config);
  o.in_channels = in;
  o.out_channels = out;
  o.kernel = kernel;
  o.padding = kernel / 2;
  o.bias = true;
  return o;
}

}  // namespace

SNConvOptions sn_options(const ModelConfig& config) {
  SNConvOptions o{0, 0};
  o.power_iterations = config.sn_power_iterations;
  o.init_iterations = config.sn_init_iterations;
  return o;
}

EncoderImpl::EncoderImpl(int64_t in_channels, const ModelConfig& config) {
  const int64_t c = config.base_channels;
  const double slope = config.leaky_slope;
  const auto sn = sn_options(config);
  stem_ = register_module("stem", ConvBlock(in_channels, c, 7, 1, slope, sn));
  down1_ = register_module("down1", ConvBlock(c, c, 3, 2, slope, sn));
  down2_ = register_module("down2", ConvBlock(c, 2 * c, 3, 2, slope, sn));
  down3_ = register_module("down3", ConvBlock(2 * c, 4 * c, 3, 2, slope, sn));
  res_ = register_module("res", torch::nn::Sequential());
  for (int i = 0; i < config.res_blocks; ++i) res_->push_back(ResBlock(4 * c, slope, sn));
}

EncoderImpl::Output EncoderImpl::forward(const torch::Tensor& x) {
  require_stride8(x, "Encoder");
  Output out;
  auto s0 = stem_(x);
  auto s1 = down1_(s0);
  auto s2 = down2_(s1);
  auto h = down3_(s2);
  out.features = res_->size() ? res_->forward(h) : h;
  out.skips = {s0, s1, s2};
  return out;
}

TextConversionImpl::TextConversionImpl(const ModelConfig& config) {
  const int64_t c = config.base_channels;
  const double slope = config.leaky_slope;
  const auto sn = sn_options(config);
  text_encoder_ = register_module("text_encoder", Encoder(3, config));
  style_encoder_ = register_module("style_encoder", Encoder(3, config));
  t_up1_ = register_module("t_up1", UpBlock(8 * c, 2 * c, slope, sn));
  t_up2_ = register_module("t_up2", UpBlock(2 * c, c, slope, sn));
  t_up3_ = register_module("t_up3", UpBlock(c, c, slope, sn));
  sk_up1_ = register_module("sk_up1", UpBlock(8 * c, 2 * c, slope, sn));
  sk_up2_ = register_module("sk_up2", UpBlock(2 * c, c, slope, sn));
  sk_up3_ = register_module("sk_up3", UpBlock(c, c, slope, sn));
  sk_out_ = register_module("sk_out", SNConv(head(config, c, 1, 3)));
  t_block_ = register_module("t_block", ConvBlock(c + 1, c, 3, 1, slope, sn));
  t_out_ = register_module("t_out", SNConv(head(config, c, 3, 7)));
}

TextConversionImpl::Output TextConversionImpl::forward(const torch::Tensor& i_t,
                                                       const torch::Tensor& i_s) {
  if (i_t.sizes() != i_s.sizes()) throw ShapeError("text conversion: i_t and i_s differ in shape");
  auto e = torch::cat({text_encoder_(i_t).features, style_encoder_(i_s).features}, 1);
  Output out;
  out.o_sk = torch::sigmoid(sk_out_(sk_up3_(sk_up2_(sk_up1_(e)))));
  auto t = t_up3_(t_up2_(t_up1_(e)));
  out.o_t = torch::tanh(t_out_(t_block_(torch::cat({t, out.o_sk}, 1))));
  return out;
}

BackgroundInpaintingImpl::BackgroundInpaintingImpl(const ModelConfig& config) {
  const int64_t c = config.base_channels;
  const double slope = config.leaky_slope;
  const auto sn = sn_options(config);
  encoder_ = register_module("encoder", Encoder(3, config));
  up1_ = register_module("up1", UpBlock(4 * c, 2 * c, slope, sn));
  up2_ = register_module("up2", UpBlock(4 * c, c, slope, sn));
  up3_ = register_module("up3", UpBlock(2 * c, c, slope, sn));
  out_ = register_module("out", SNConv(head(config, 2 * c, 3, 7)));
}

BackgroundInpaintingImpl::Output BackgroundInpaintingImpl::forward(const torch::Tensor& i_s) {
  auto enc = encoder_(i_s);
  Output out;
  auto f1 = up1_(enc.features);
  auto f2 = up2_(torch::cat({f1, enc.skips[2]}, 1));
  auto f3 = up3_(torch::cat({f2, enc.skips[1]}, 1));
  out.o_b = torch::tanh(out_(torch::cat({f3, enc.skips[0]}, 1)));
  out.dec_feats = {f1, f2, f3};
  return out;
}

FusionImpl::FusionImpl(const ModelConfig& config) : c_(config.base_channels) {
  const int64_t c = config.base_channels;
  const double slope = config.leaky_slope;
  const auto sn = sn_options(config);
  encoder_ = register_module("encoder", Encoder(3, config));
  up1_ = register_module("up1", UpBlock(4 * c, 2 * c, slope, sn));
  up2_ = register_module("up2", UpBlock(4 * c, c, slope, sn));
  up3_ = register_module("up3", UpBlock(2 * c, c, slope, sn));
  block_ = register_module("block", ConvBlock(2 * c, c, 3, 1, slope, sn));
  out_ = register_module("out", SNConv(head(config, c, 3, 7)));
}

torch::Tensor FusionImpl::forward(const torch::Tensor& o_t, const std::vector<torch::Tensor>& dec_feats) {
  if (dec_feats.size() != 3) throw ShapeError("fusion: expected 3 background decoder maps");
  const int64_t n = o_t.size(0), h = o_t.size(2), w = o_t.size(3);
  const std::array<std::array<int64_t, 4>, 3> want = {{{n, 2 * c_, h / 4, w / 4},
                                                       {n, c_, h / 2, w / 2},
                                                       {n, c_, h, w}}};
  for (size_t k = 0; k < 3; ++k) {
    if (dec_feats[k].sizes() != torch::IntArrayRef(want[k])) {
      throw ShapeError("fusion: background decoder map " + std::to_string(k) +
                       " does not match the fusion decoder stage resolution");
    }
  }
  auto e = encoder_(o_t).features;
  auto f1 = up1_(e);
  auto f2 = up2_(torch::cat({f1, dec_feats[0]}, 1));
  auto f3 = up3_(torch::cat({f2, dec_feats[1]}, 1));
  return torch::tanh(out_(block_(torch::cat({f3, dec_feats[2]}, 1))));
}

GeneratorImpl::GeneratorImpl(const ModelConfig& config) : config_(config) {
  text_conversion = register_module("text_conversion", TextConversion(config));
  background = register_module("background", BackgroundInpainting(config));
  fusion = register_module("fusion", Fusion(config));
}

GeneratorOutputs GeneratorImpl::forward(const torch::Tensor& i_t, const torch::Tensor& i_s) {
  auto t = text_conversion(i_t, i_s);
  auto b = background(i_s);
  auto f = fusion(t.o_t, b.dec_feats);
  return {t.o_sk, t.o_t, b.o_b, f};
}

TextConversionImpl::Output text_conversion_forward(TextConversion& g, const torch::Tensor& i_t,
                                                   const torch::Tensor& i_s) {
  return g(i_t, i_s);
}

BackgroundInpaintingImpl::Output background_forward(BackgroundInpainting& g, const torch::Tensor& i_s) {
  return g(i_s);
}

torch::Tensor fusion_forward(Fusion& g, const torch::Tensor& o_t,
                             const std::vector<torch::Tensor>& dec_feats) {
  return g(o_t, dec_feats);
}

GeneratorOutputs srnet_forward(Generator& g, const torch::Tensor& i_t, const torch::Tensor& i_s) {
  return g(i_t, i_s);
}

int64_t parameter_count(const torch::nn::Module& module) {
  int64_t n = 0;
  for (const auto& p : module.parameters()) n += p.numel();
  return n;
}

}  // namespace srnet
