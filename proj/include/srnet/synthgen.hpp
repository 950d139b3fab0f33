#pragma once

#include "srnet/config.hpp"
#include "srnet/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace cv::freetype {
class FreeType2;
}

namespace srnet {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
  double luma() const { return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0; }
};

/// One random style draw. The same StyleSpec renders both the source and the
/// target word of a pair.
struct StyleSpec {
  int font_id = 0;
  int font_px = 36;
  Rgb fill;
  std::optional<Rgb> outline;
  int outline_width = 0;
  std::optional<Rgb> shadow;
  int shadow_dx = 0;
  int shadow_dy = 0;
  double rotation_deg = 0;
  double perspective_x = 0;  // horizontal keystone
  double perspective_y = 0;  // vertical keystone
  double curve_amplitude = 0;  // pixels
  double curve_phase = 0;
  int stroke_width = 0;  // grey dilation radius
  int spacing = 0;       // extra pixels between glyphs

  bool operator==(const StyleSpec&) const = default;
};

/// Loaded TrueType faces. Not thread-safe; each worker owns one.
class FontLibrary {
 public:
  /// Loads every .ttf/.otf in `dir`, sorted by file name.
  static FontLibrary from_directory(const std::filesystem::path& dir);
  static FontLibrary from_files(const std::vector<std::filesystem::path>& files);

  size_t size() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }
  const std::filesystem::path& path(size_t i) const { return paths_.at(i); }

  /// Anti-aliased glyph coverage (CV_32FC1, [0,1]) of `text`, `height` rows
  /// high, vertically centred on the face's cap/descender extent. Width is
  /// the text advance plus `margin` on each side.
  cv::Mat render_coverage(size_t font_id, const std::string& text, int font_px, int spacing,
                          int height, int margin);

 private:
  std::vector<std::filesystem::path> paths_;
  std::vector<cv::Ptr<cv::freetype::FreeType2>> faces_;
};

/// Layers of one styled word rendering on a canvas of the final sample size.
struct RenderLayers {
  cv::Mat color;      // CV_32FC3 premultiplied RGB in [0,1]
  cv::Mat alpha;      // CV_32FC1 in [0,1]
  cv::Mat text_mask;  // CV_8UC1 {0,1}: alpha > 0
  cv::Mat skeleton;   // CV_8UC1 {0,1}: thinning of the fill glyphs at alpha > 0.5
};

/// Porter-Duff "over" of a layer onto an 8-bit RGB image of the same size.
cv::Mat composite_over(const RenderLayers& layer, const cv::Mat& background_rgb);

/// Deterministic style draw. Throws Error when `font_count` is zero.
StyleSpec draw_style(uint64_t seed, const SynthConfig& config, size_t font_count);

/// The fixed-font rendering of `text` (black on a byte-127 field) used as the
/// network's target-text input. The canvas grows beyond `width` when the
/// glyphs plus a 2px margin on each side do not fit.
cv::Mat render_standard_text(FontLibrary& standard_font, const std::string& text, int width,
                             int height, int font_px);

struct RenderedPair {
  PairedSample sample;
  RenderLayers source;
  RenderLayers target;
  cv::Mat background;  // 8-bit RGB, equals t_b
};

/// Renders a paired sample: both words with `style`, composited over a
/// centred crop of `background`, plus the standard-font target image.
/// Throws Error if a text is empty, the canvas would exceed
/// config.max_width, or the background is smaller than the canvas.
RenderedPair render_pair(const StyleSpec& style, const std::string& source_text,
                         const std::string& target_text, const cv::Mat& background,
                         FontLibrary& fonts, FontLibrary& standard_font,
                         const SynthConfig& config);

/// Pool of 8-bit RGB background images.
struct BackgroundPool {
  std::vector<cv::Mat> images;

  static BackgroundPool from_directory(const std::filesystem::path& dir);
  static BackgroundPool procedural(int count, uint64_t seed, int height = 128, int width = 640);
};

std::vector<std::string> builtin_word_list();
std::vector<std::string> read_word_list(const std::filesystem::path& path);

/// Writes `count` samples plus manifest.tsv under `out`. Sample i depends
/// only on (seed, i, config, inputs), so the output does not depend on
/// `workers`.
DatasetManifest generate_corpus(size_t count, uint64_t seed, const std::vector<std::string>& words,
                                const BackgroundPool& backgrounds, const SynthConfig& config,
                                const std::filesystem::path& out, int workers = 1);

/// Same as one iteration of generate_corpus, without touching the disk.
RenderedPair generate_sample(size_t index, uint64_t seed, const std::vector<std::string>& words,
                             const BackgroundPool& backgrounds, FontLibrary& fonts,
                             FontLibrary& standard_font, const SynthConfig& config);

}  // namespace srnet
