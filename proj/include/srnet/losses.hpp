#pragma once

#include "srnet/config.hpp"

#include <torch/torch.h>

#include <vector>

namespace srnet {

/// Frozen perceptual feature network exposing five activation taps
/// (relu1_1 ... relu5_1 for the VGG-19 layout). Parameters never require grad.
class FeatureExtractorImpl : public torch::nn::Module {
 public:
  explicit FeatureExtractorImpl(const ExtractorConfig& config);

  /// `x` is an N x 3 x H x W image in [-1,1]; returns the five tap maps.
  std::vector<torch::Tensor> forward(const torch::Tensor& x);

  /// The conv layers in forward order (weights are [out, in, 3, 3]).
  const std::vector<torch::nn::Conv2d>& convs() const { return convs_; }
  /// Index into convs() after which each tap is taken (post-ReLU).
  const std::vector<size_t>& tap_after() const { return tap_after_; }
  /// Whether a 2x2 max pool (ceil mode) precedes convs()[k].
  const std::vector<bool>& pool_before() const { return pool_before_; }
  const ExtractorConfig& config() const { return config_; }

 private:
  void load_vgg19_weights(const std::string& path, const std::vector<int>& feature_indices);

  ExtractorConfig config_;
  std::vector<torch::nn::Conv2d> convs_;
  std::vector<size_t> tap_after_;
  std::vector<bool> pool_before_;
  bool imagenet_normalize_ = false;
};
TORCH_MODULE(FeatureExtractor);

/// 1 - 2 sum(t*o) / (sum t + sum o + eps), per sample, averaged over the batch.
torch::Tensor dice_loss(const torch::Tensor& o_sk, const torch::Tensor& t_sk, double eps = 1e-6);

/// Mean absolute error.
torch::Tensor l1_loss(const torch::Tensor& a, const torch::Tensor& b);

/// ||t_t - o_t||_1 + alpha * dice.
torch::Tensor text_conversion_loss(const torch::Tensor& o_t, const torch::Tensor& t_t,
                                   const torch::Tensor& o_sk, const torch::Tensor& t_sk,
                                   const LossWeights& weights);

struct AdversarialTerms {
  torch::Tensor g_term;  // -E log sigmoid(fake) + weight * L1
  torch::Tensor d_term;  // -[E log sigmoid(real) + E log(1 - sigmoid(fake))]
};

/// Critic loss on patch logits (clamped to +-clamp, averaged over patches).
torch::Tensor critic_loss(const torch::Tensor& d_real_logits, const torch::Tensor& d_fake_logits,
                          double clamp);
/// Non-saturating generator loss -E log sigmoid(fake).
torch::Tensor generator_adversarial_loss(const torch::Tensor& d_fake_logits, double clamp);

AdversarialTerms background_loss(const torch::Tensor& d_real_logits, const torch::Tensor& d_fake_logits,
                                 const torch::Tensor& o_b, const torch::Tensor& t_b,
                                 const LossWeights& weights);
AdversarialTerms fusion_adv_loss(const torch::Tensor& d_real_logits, const torch::Tensor& d_fake_logits,
                                 const torch::Tensor& o_f, const torch::Tensor& t_f,
                                 const LossWeights& weights);

/// F F^T for an N x C x H x W map, returned as N x C x C; divided by C*H*W
/// when `normalize`.
torch::Tensor gram(const torch::Tensor& features, bool normalize = true);

/// sum_i mean |phi_i(t) - phi_i(o)|.
torch::Tensor perceptual_loss_from_features(const std::vector<torch::Tensor>& t_feats,
                                            const std::vector<torch::Tensor>& o_feats);
/// sum_j mean |G(phi_j(t)) - G(phi_j(o))|.
torch::Tensor style_loss_from_features(const std::vector<torch::Tensor>& t_feats,
                                       const std::vector<torch::Tensor>& o_feats, bool normalize = true);

torch::Tensor perceptual_loss(const torch::Tensor& t_f, const torch::Tensor& o_f, FeatureExtractor& extractor);
torch::Tensor style_loss(const torch::Tensor& t_f, const torch::Tensor& o_f, FeatureExtractor& extractor,
                         bool normalize = true);

/// Unweighted loss components of one generator evaluation.
struct LossParts {
  torch::Tensor text_l1;        // ||T_t - O_t||_1
  torch::Tensor skeleton_dice;  // L_sk
  torch::Tensor background_adv; // -E log D_B(O_b, I_s)
  torch::Tensor background_l1;  // ||T_b - O_b||_1
  torch::Tensor fusion_adv;     // -E log D_F(O_f, I_t)
  torch::Tensor fusion_l1;      // ||T_f - O_f||_1
  torch::Tensor perceptual;
  torch::Tensor style;
};

/// L_T + L_B + L_F' + theta2 * L_per + theta3 * L_style (generator side).
torch::Tensor total_generator_loss(const LossParts& parts, const LossWeights& weights);

}  // namespace srnet
