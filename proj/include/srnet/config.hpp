#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace srnet {

/// Generator / discriminator topology. Stored inside checkpoints; loading a
/// checkpoint into a model built from a different ModelConfig is an error.
struct ModelConfig {
  int base_channels = 32;       // c: encoder widths c, 2c, 4c
  int res_blocks = 4;
  int disc_base_channels = 64;  // patch critic widths w, 2w, 4w, 8w
  double leaky_slope = 0.2;
  int sn_power_iterations = 1;  // per training forward
  int sn_init_iterations = 20;  // at construction

  bool operator==(const ModelConfig&) const = default;
};

/// Frozen perceptual feature network. `vgg19` reads pretrained weights from
/// `weights`; `random` builds a light seeded 5-stage conv stack.
struct ExtractorConfig {
  std::string kind = "random";
  std::string weights;
  uint64_t seed = 7;
  std::vector<int> random_widths = {16, 32, 64, 64, 64};

  bool operator==(const ExtractorConfig&) const = default;
};

struct LossWeights {
  double alpha = 1.0;     // skeleton dice
  double beta = 10.0;     // background L1
  double theta1 = 10.0;   // fusion L1
  double theta2 = 1.0;    // perceptual
  double theta3 = 500.0;  // style
  double dice_eps = 1e-6;
  bool gram_normalize = true;  // divide F F^T by n*m
  double logit_clamp = 30.0;

  bool operator==(const LossWeights&) const = default;
};

struct TrainConfig {
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double lr_init = 2e-4;
  double lr_final = 2e-6;
  double decay_start_epoch = 30;
  std::string decay_shape = "linear";  // linear | step
  int epochs = 40;
  int64_t max_steps = 0;  // 0: no limit
  int batch_size = 8;
  int height = 64;
  uint64_t seed = 0;
  int64_t checkpoint_every = 1000;  // steps; 0 disables periodic checkpoints
  int64_t log_every = 10;
  int workers = 1;
  bool deterministic = true;

  void validate() const;
};

struct SynthConfig {
  std::string font_dir = "/usr/share/fonts/truetype/dejavu";
  std::string standard_font = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf";
  std::string word_list;       // empty: built-in list
  std::string background_dir;  // empty: procedural textures
  int procedural_backgrounds = 64;
  int height = 64;
  int standard_font_px = 36;
  int font_px_min = 30;
  int font_px_max = 42;
  double max_rotation_deg = 4.0;
  double max_perspective = 0.08;
  double max_curve_amplitude = 3.0;
  int max_stroke_width = 2;
  int spacing_min = 0;
  int spacing_max = 4;
  double outline_probability = 0.2;
  double shadow_probability = 0.2;
  int max_width = 512;
  int margin = 6;
  double min_contrast = 0.25;  // luma distance between fill colour and background mean

  void validate() const;
};

struct InferenceConfig {
  int feather_px = 0;
  int stride = 8;
};

/// Everything a run needs. One YAML file with optional sections `model`,
/// `extractor`, `loss`, `train`, `synth`, `inference`.
struct RunConfig {
  ModelConfig model;
  ExtractorConfig extractor;
  LossWeights loss;
  TrainConfig train;
  SynthConfig synth;
  InferenceConfig inference;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_yaml(const std::string& text);
  std::string to_yaml() const;
  void save(const std::filesystem::path& path) const;
};

std::string model_config_yaml(const ModelConfig& m);
ModelConfig model_config_from_yaml(const std::string& text);

}  // namespace srnet
