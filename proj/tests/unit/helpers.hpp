#pragma once

#include "srnet/config.hpp"
#include "srnet/synthgen.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace srnet::test {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("srnet_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ModelConfig tiny_model() {
  ModelConfig m;
  m.base_channels = 8;
  m.res_blocks = 1;
  m.disc_base_channels = 8;
  return m;
}

inline RunConfig tiny_run() {
  RunConfig c;
  c.model = tiny_model();
  c.extractor.random_widths = {4, 8, 8, 8, 8};
  c.train.batch_size = 2;
  c.train.log_every = 0;
  c.train.checkpoint_every = 0;
  return c;
}

/// Small in-memory corpus rendered with the default fonts.
struct SynthFixture {
  SynthConfig cfg;
  FontLibrary fonts = FontLibrary::from_directory(cfg.font_dir);
  FontLibrary standard = FontLibrary::from_files({cfg.standard_font});
  BackgroundPool bgs = BackgroundPool::procedural(8, 5);
  std::vector<std::string> words = builtin_word_list();

  RenderedPair sample(size_t i, uint64_t seed = 42) {
    return generate_sample(i, seed, words, bgs, fonts, standard, cfg);
  }
};

}  // namespace srnet::test
