#include "srnet/config.hpp"

#include "srnet/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace srnet {

namespace {

template <typename T>
void get(const YAML::Node& node, const char* key, T& value) {
  if (!node || !node[key]) return;
  try {
    value = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const YAML::Node& node, const char* section,
                    std::initializer_list<const char*> known) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(std::string("section '") + section + "' must be a map");
  for (auto it = node.begin(); it != node.end(); ++it) {
    const auto key = it->first.as<std::string>();
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string("unknown key '") + key + "' in section '" + section + "'");
  }
}

void read_model(const YAML::Node& n, ModelConfig& m) {
  reject_unknown(n, "model", {"base_channels", "res_blocks", "disc_base_channels", "leaky_slope",
                              "sn_power_iterations", "sn_init_iterations"});
  get(n, "base_channels", m.base_channels);
  get(n, "res_blocks", m.res_blocks);
  get(n, "disc_base_channels", m.disc_base_channels);
  get(n, "leaky_slope", m.leaky_slope);
  get(n, "sn_power_iterations", m.sn_power_iterations);
  get(n, "sn_init_iterations", m.sn_init_iterations);
  if (m.base_channels < 1 || m.res_blocks < 0 || m.disc_base_channels < 1 ||
      m.sn_power_iterations < 1) {
    throw ConfigError("model: channel counts and power iterations must be positive");
  }
}

YAML::Node write_model(const ModelConfig& m) {
  YAML::Node n;
  n["base_channels"] = m.base_channels;
  n["res_blocks"] = m.res_blocks;
  n["disc_base_channels"] = m.disc_base_channels;
  n["leaky_slope"] = m.leaky_slope;
  n["sn_power_iterations"] = m.sn_power_iterations;
  n["sn_init_iterations"] = m.sn_init_iterations;
  return n;
}

}  // namespace

void TrainConfig::validate() const {
  if (lr_final > lr_init) throw ConfigError("train: lr_final must be <= lr_init");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (height < 8 || height % 8 != 0) throw ConfigError("train: height must be a multiple of 8");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (decay_shape != "linear" && decay_shape != "step") {
    throw ConfigError("train: decay_shape must be 'linear' or 'step'");
  }
}

void SynthConfig::validate() const {
  if (height < 8) throw ConfigError("synth: height too small");
  if (font_px_min < 4 || font_px_max < font_px_min) throw ConfigError("synth: bad font size range");
  if (max_rotation_deg < 0 || max_perspective < 0 || max_curve_amplitude < 0 ||
      max_stroke_width < 0 || spacing_max < spacing_min) {
    throw ConfigError("synth: deformation ranges must be non-negative and ordered");
  }
  if (max_width < 8) throw ConfigError("synth: max_width too small");
}

RunConfig RunConfig::from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  RunConfig c;
  if (!root || root.IsNull()) return c;
  reject_unknown(root, "<root>", {"model", "extractor", "loss", "train", "synth", "inference"});

  read_model(root["model"], c.model);

  const auto ex = root["extractor"];
  reject_unknown(ex, "extractor", {"kind", "weights", "seed", "random_widths"});
  get(ex, "kind", c.extractor.kind);
  get(ex, "weights", c.extractor.weights);
  get(ex, "seed", c.extractor.seed);
  get(ex, "random_widths", c.extractor.random_widths);
  if (c.extractor.kind != "random" && c.extractor.kind != "vgg19") {
    throw ConfigError("extractor.kind must be 'random' or 'vgg19'");
  }
  if (c.extractor.random_widths.size() != 5) throw ConfigError("extractor.random_widths needs 5 entries");

  const auto l = root["loss"];
  reject_unknown(l, "loss", {"alpha", "beta", "theta1", "theta2", "theta3", "dice_eps",
                             "gram_normalize", "logit_clamp"});
  get(l, "alpha", c.loss.alpha);
  get(l, "beta", c.loss.beta);
  get(l, "theta1", c.loss.theta1);
  get(l, "theta2", c.loss.theta2);
  get(l, "theta3", c.loss.theta3);
  get(l, "dice_eps", c.loss.dice_eps);
  get(l, "gram_normalize", c.loss.gram_normalize);
  get(l, "logit_clamp", c.loss.logit_clamp);
  if (c.loss.alpha < 0 || c.loss.beta < 0 || c.loss.theta1 < 0 || c.loss.theta2 < 0 ||
      c.loss.theta3 < 0) {
    throw ConfigError("loss weights must be non-negative");
  }

  const auto t = root["train"];
  reject_unknown(t, "train", {"adam_beta1", "adam_beta2", "lr_init", "lr_final",
                              "decay_start_epoch", "decay_shape", "epochs", "max_steps",
                              "batch_size", "height", "seed", "checkpoint_every", "log_every",
                              "workers", "deterministic"});
  get(t, "adam_beta1", c.train.adam_beta1);
  get(t, "adam_beta2", c.train.adam_beta2);
  get(t, "lr_init", c.train.lr_init);
  get(t, "lr_final", c.train.lr_final);
  get(t, "decay_start_epoch", c.train.decay_start_epoch);
  get(t, "decay_shape", c.train.decay_shape);
  get(t, "epochs", c.train.epochs);
  get(t, "max_steps", c.train.max_steps);
  get(t, "batch_size", c.train.batch_size);
  get(t, "height", c.train.height);
  get(t, "seed", c.train.seed);
  get(t, "checkpoint_every", c.train.checkpoint_every);
  get(t, "log_every", c.train.log_every);
  get(t, "workers", c.train.workers);
  get(t, "deterministic", c.train.deterministic);
  c.train.validate();

  const auto s = root["synth"];
  reject_unknown(s, "synth", {"font_dir", "standard_font", "word_list", "background_dir",
                              "procedural_backgrounds", "height", "standard_font_px",
                              "font_px_min", "font_px_max", "max_rotation_deg", "max_perspective",
                              "max_curve_amplitude", "max_stroke_width", "spacing_min",
                              "spacing_max", "outline_probability", "shadow_probability",
                              "max_width", "margin", "min_contrast"});
  get(s, "font_dir", c.synth.font_dir);
  get(s, "standard_font", c.synth.standard_font);
  get(s, "word_list", c.synth.word_list);
  get(s, "background_dir", c.synth.background_dir);
  get(s, "procedural_backgrounds", c.synth.procedural_backgrounds);
  get(s, "height", c.synth.height);
  get(s, "standard_font_px", c.synth.standard_font_px);
  get(s, "font_px_min", c.synth.font_px_min);
  get(s, "font_px_max", c.synth.font_px_max);
  get(s, "max_rotation_deg", c.synth.max_rotation_deg);
  get(s, "max_perspective", c.synth.max_perspective);
  get(s, "max_curve_amplitude", c.synth.max_curve_amplitude);
  get(s, "max_stroke_width", c.synth.max_stroke_width);
  get(s, "spacing_min", c.synth.spacing_min);
  get(s, "spacing_max", c.synth.spacing_max);
  get(s, "outline_probability", c.synth.outline_probability);
  get(s, "shadow_probability", c.synth.shadow_probability);
  get(s, "max_width", c.synth.max_width);
  get(s, "margin", c.synth.margin);
  get(s, "min_contrast", c.synth.min_contrast);
  c.synth.validate();

  const auto i = root["inference"];
  reject_unknown(i, "inference", {"feather_px", "stride"});
  get(i, "feather_px", c.inference.feather_px);
  get(i, "stride", c.inference.stride);
  if (c.inference.stride < 1 || c.inference.feather_px < 0) throw ConfigError("bad inference section");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_yaml(ss.str());
}

std::string RunConfig::to_yaml() const {
  YAML::Node root;
  root["model"] = write_model(model);

  root["extractor"]["kind"] = extractor.kind;
  root["extractor"]["weights"] = extractor.weights;
  root["extractor"]["seed"] = extractor.seed;
  root["extractor"]["random_widths"] = extractor.random_widths;

  root["loss"]["alpha"] = loss.alpha;
  root["loss"]["beta"] = loss.beta;
  root["loss"]["theta1"] = loss.theta1;
  root["loss"]["theta2"] = loss.theta2;
  root["loss"]["theta3"] = loss.theta3;
  root["loss"]["dice_eps"] = loss.dice_eps;
  root["loss"]["gram_normalize"] = loss.gram_normalize;
  root["loss"]["logit_clamp"] = loss.logit_clamp;

  auto t = root["train"];
  t["adam_beta1"] = train.adam_beta1;
  t["adam_beta2"] = train.adam_beta2;
  t["lr_init"] = train.lr_init;
  t["lr_final"] = train.lr_final;
  t["decay_start_epoch"] = train.decay_start_epoch;
  t["decay_shape"] = train.decay_shape;
  t["epochs"] = train.epochs;
  t["max_steps"] = train.max_steps;
  t["batch_size"] = train.batch_size;
  t["height"] = train.height;
  t["seed"] = train.seed;
  t["checkpoint_every"] = train.checkpoint_every;
  t["log_every"] = train.log_every;
  t["workers"] = train.workers;
  t["deterministic"] = train.deterministic;

  auto s = root["synth"];
  s["font_dir"] = synth.font_dir;
  s["standard_font"] = synth.standard_font;
  s["word_list"] = synth.word_list;
  s["background_dir"] = synth.background_dir;
  s["procedural_backgrounds"] = synth.procedural_backgrounds;
  s["height"] = synth.height;
  s["standard_font_px"] = synth.standard_font_px;
  s["font_px_min"] = synth.font_px_min;
  s["font_px_max"] = synth.font_px_max;
  s["max_rotation_deg"] = synth.max_rotation_deg;
  s["max_perspective"] = synth.max_perspective;
  s["max_curve_amplitude"] = synth.max_curve_amplitude;
  s["max_stroke_width"] = synth.max_stroke_width;
  s["spacing_min"] = synth.spacing_min;
  s["spacing_max"] = synth.spacing_max;
  s["outline_probability"] = synth.outline_probability;
  s["shadow_probability"] = synth.shadow_probability;
  s["max_width"] = synth.max_width;
  s["margin"] = synth.margin;
  s["min_contrast"] = synth.min_contrast;

  root["inference"]["feather_px"] = inference.feather_px;
  root["inference"]["stride"] = inference.stride;

  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

void RunConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_yaml();
}

std::string model_config_yaml(const ModelConfig& m) {
  YAML::Emitter out;
  out << write_model(m);
  return out.c_str();
}

ModelConfig model_config_from_yaml(const std::string& text) {
  ModelConfig m;
  read_model(YAML::Load(text), m);
  return m;
}

}  // namespace srnet
