#include "srnet/losses.hpp"

#include "srnet/errors.hpp"

#include <fstream>
#include <iterator>

namespace srnet {

namespace F = torch::nn::functional;

// ---------------------------------------------------------------------------
// Feature extractor

FeatureExtractorImpl::FeatureExtractorImpl(const ExtractorConfig& config) : config_(config) {
  auto add_conv = [&](int64_t in, int64_t out) {
    auto conv = torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1));
    convs_.push_back(register_module("conv" + std::to_string(convs_.size()), conv));
  };

  if (config.kind == "vgg19") {
    // torchvision vgg19.features up to relu5_1.
    const std::vector<std::pair<int64_t, int64_t>> layout = {
        {3, 64},    {64, 64},   {64, 128},  {128, 128}, {128, 256}, {256, 256}, {256, 256},
        {256, 256}, {256, 512}, {512, 512}, {512, 512}, {512, 512}, {512, 512}};
    for (auto [in, out] : layout) add_conv(in, out);
    tap_after_ = {0, 2, 4, 8, 12};
    pool_before_.assign(convs_.size(), false);
    for (size_t k : {2, 4, 8, 12}) pool_before_[k] = true;
    imagenet_normalize_ = true;
    if (config.weights.empty()) throw ConfigError("extractor.kind=vgg19 requires extractor.weights");
    load_vgg19_weights(config.weights, {0, 2, 5, 7, 10, 12, 14, 16, 19, 21, 23, 25, 28});
  } else if (config.kind == "random") {
    if (config.random_widths.size() != 5) throw ConfigError("random extractor needs 5 widths");
    int64_t in = 3;
    for (int w : config.random_widths) {
      add_conv(in, w);
      in = w;
    }
    tap_after_ = {0, 1, 2, 3, 4};
    pool_before_ = {false, true, true, true, true};
    auto gen = at::detail::createCPUGenerator(config.seed);
    torch::NoGradGuard no_grad;
    for (auto& conv : convs_) {
      const double fan_in = static_cast<double>(conv->weight.size(1) * 9);
      conv->weight.copy_(at::randn(conv->weight.sizes(), gen) * std::sqrt(2.0 / fan_in));
      conv->bias.copy_(at::randn(conv->bias.sizes(), gen) * 0.01);
    }
  } else {
    throw ConfigError("unknown extractor kind '" + config.kind + "'");
  }

  for (auto& p : parameters()) p.set_requires_grad(false);
  eval();
}

void FeatureExtractorImpl::load_vgg19_weights(const std::string& path,
                                              const std::vector<int>& feature_indices) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open extractor weights " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  c10::IValue loaded;
  try {
    loaded = torch::pickle_load(bytes);
  } catch (const c10::Error& e) {
    throw ConfigError("cannot read extractor weights " + path + ": " + e.what_without_backtrace());
  }
  if (!loaded.isGenericDict()) throw ConfigError("extractor weights must be a dict of tensors");
  auto dict = loaded.toGenericDict();
  auto fetch = [&](const std::string& key) -> torch::Tensor {
    for (const auto& candidate : {key, "features." + key}) {
      if (dict.contains(candidate)) return dict.at(candidate).toTensor();
    }
    throw ConfigError("extractor weights missing '" + key + "'");
  };
  torch::NoGradGuard no_grad;
  for (size_t k = 0; k < convs_.size(); ++k) {
    const auto idx = std::to_string(feature_indices[k]);
    auto w = fetch(idx + ".weight");
    auto b = fetch(idx + ".bias");
    if (w.sizes() != convs_[k]->weight.sizes() || b.sizes() != convs_[k]->bias.sizes()) {
      throw ConfigError("extractor weight shape mismatch at features." + idx);
    }
    convs_[k]->weight.copy_(w);
    convs_[k]->bias.copy_(b);
  }
}

std::vector<torch::Tensor> FeatureExtractorImpl::forward(const torch::Tensor& x) {
  auto h = x;
  if (imagenet_normalize_) {
    auto opts = x.options();
    auto mean = torch::tensor({0.485, 0.456, 0.406}, opts).view({1, 3, 1, 1});
    auto std = torch::tensor({0.229, 0.224, 0.225}, opts).view({1, 3, 1, 1});
    h = ((x + 1) / 2 - mean) / std;
  }
  std::vector<torch::Tensor> taps;
  size_t next_tap = 0;
  for (size_t k = 0; k < convs_.size() && next_tap < tap_after_.size(); ++k) {
    if (pool_before_[k]) h = F::max_pool2d(h, F::MaxPool2dFuncOptions(2).stride(2).ceil_mode(true));
    h = torch::relu(convs_[k](h));
    if (k == tap_after_[next_tap]) {
      taps.push_back(h);
      ++next_tap;
    }
  }
  return taps;
}

// ---------------------------------------------------------------------------
// Losses

torch::Tensor dice_loss(const torch::Tensor& o_sk, const torch::Tensor& t_sk, double eps) {
  if (o_sk.sizes() != t_sk.sizes()) throw ShapeError("dice_loss: shape mismatch");
  auto o = o_sk.reshape({o_sk.size(0), -1});
  auto t = t_sk.reshape({t_sk.size(0), -1});
  auto inter = (o * t).sum(1);
  auto denom = t.sum(1) + o.sum(1) + eps;
  return (1 - 2 * inter / denom).mean();
}

torch::Tensor l1_loss(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw ShapeError("l1_loss: shape mismatch");
  return (a - b).abs().mean();
}

torch::Tensor text_conversion_loss(const torch::Tensor& o_t, const torch::Tensor& t_t,
                                   const torch::Tensor& o_sk, const torch::Tensor& t_sk,
                                   const LossWeights& weights) {
  return srnet::l1_loss(t_t, o_t) + weights.alpha * dice_loss(o_sk, t_sk, weights.dice_eps);
}

torch::Tensor critic_loss(const torch::Tensor& d_real_logits, const torch::Tensor& d_fake_logits,
                          double clamp) {
  auto real = d_real_logits.clamp(-clamp, clamp);
  auto fake = d_fake_logits.clamp(-clamp, clamp);
  return F::binary_cross_entropy_with_logits(real, torch::ones_like(real)) +
         F::binary_cross_entropy_with_logits(fake, torch::zeros_like(fake));
}

torch::Tensor generator_adversarial_loss(const torch::Tensor& d_fake_logits, double clamp) {
  auto fake = d_fake_logits.clamp(-clamp, clamp);
  return F::binary_cross_entropy_with_logits(fake, torch::ones_like(fake));
}

namespace {

AdversarialTerms adversarial_with_l1(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                                     const torch::Tensor& out, const torch::Tensor& target,
                                     double l1_weight, double clamp) {
  return {generator_adversarial_loss(d_fake, clamp) + l1_weight * srnet::l1_loss(target, out),
          critic_loss(d_real, d_fake, clamp)};
}

}  // namespace

AdversarialTerms background_loss(const torch::Tensor& d_real_logits, const torch::Tensor& d_fake_logits,
                                 const torch::Tensor& o_b, const torch::Tensor& t_b,
                                 const LossWeights& weights) {
  return adversarial_with_l1(d_real_logits, d_fake_logits, o_b, t_b, weights.beta, weights.logit_clamp);
}

AdversarialTerms fusion_adv_loss(const torch::Tensor& d_real_logits, const torch::Tensor& d_fake_logits,
                                 const torch::Tensor& o_f, const torch::Tensor& t_f,
                                 const LossWeights& weights) {
  return adversarial_with_l1(d_real_logits, d_fake_logits, o_f, t_f, weights.theta1, weights.logit_clamp);
}

torch::Tensor gram(const torch::Tensor& features, bool normalize) {
  if (features.dim() != 4) throw ShapeError("gram: expected N x C x H x W");
  const int64_t n = features.size(0), c = features.size(1);
  const int64_t m = features.size(2) * features.size(3);
  auto f = features.reshape({n, c, m});
  auto g = torch::bmm(f, f.transpose(1, 2));
  return normalize ? g / static_cast<double>(c * m) : g;
}

torch::Tensor perceptual_loss_from_features(const std::vector<torch::Tensor>& t_feats,
                                            const std::vector<torch::Tensor>& o_feats) {
  if (t_feats.size() != o_feats.size()) throw ShapeError("perceptual: tap count mismatch");
  auto total = torch::zeros({}, o_feats.front().options());
  for (size_t i = 0; i < t_feats.size(); ++i) total = total + srnet::l1_loss(t_feats[i], o_feats[i]);
  return total;
}

torch::Tensor style_loss_from_features(const std::vector<torch::Tensor>& t_feats,
                                       const std::vector<torch::Tensor>& o_feats, bool normalize) {
  if (t_feats.size() != o_feats.size()) throw ShapeError("style: tap count mismatch");
  auto total = torch::zeros({}, o_feats.front().options());
  for (size_t j = 0; j < t_feats.size(); ++j) {
    total = total + srnet::l1_loss(gram(t_feats[j], normalize), gram(o_feats[j], normalize));
  }
  return total;
}

torch::Tensor perceptual_loss(const torch::Tensor& t_f, const torch::Tensor& o_f, FeatureExtractor& extractor) {
  return perceptual_loss_from_features(extractor(t_f), extractor(o_f));
}

torch::Tensor style_loss(const torch::Tensor& t_f, const torch::Tensor& o_f, FeatureExtractor& extractor,
                         bool normalize) {
  return style_loss_from_features(extractor(t_f), extractor(o_f), normalize);
}

torch::Tensor total_generator_loss(const LossParts& p, const LossWeights& w) {
  return p.text_l1 + w.alpha * p.skeleton_dice + p.background_adv + w.beta * p.background_l1 +
         p.fusion_adv + w.theta1 * p.fusion_l1 + w.theta2 * p.perceptual + w.theta3 * p.style;
}

}  // namespace srnet
