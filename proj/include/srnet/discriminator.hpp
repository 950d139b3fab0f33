#pragma once

#include "srnet/config.hpp"
#include "srnet/layers.hpp"

#include <torch/torch.h>

namespace srnet {

/// Conditional patch critic. Five SN convs (4x4 stride 2 at widths w, 2w, 4w,
/// 8w, then a 3x3 stride-1 conv to one logit channel), leaky ReLU, no batch
/// norm. Condition and candidate are concatenated along depth; inputs are
/// edge-padded to multiples of 16 so the logit map is ceil(H/16) x ceil(W/16).
class PatchCriticImpl : public torch::nn::Module {
 public:
  explicit PatchCriticImpl(const ModelConfig& config, int64_t image_channels = 3);

  torch::Tensor forward(const torch::Tensor& condition, const torch::Tensor& candidate);

 private:
  double slope_;
  std::vector<SNConv> convs_;
};
TORCH_MODULE(PatchCritic);

/// D_B: condition i_s, candidate o_b or t_b.
torch::Tensor critic_b(PatchCritic& d, const torch::Tensor& i_s, const torch::Tensor& candidate_b);
/// D_F: condition i_t, candidate o_f or t_f.
torch::Tensor critic_f(PatchCritic& d, const torch::Tensor& i_t, const torch::Tensor& candidate_f);

}  // namespace srnet
