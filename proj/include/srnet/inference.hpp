#pragma once

#include "srnet/config.hpp"
#include "srnet/generator.hpp"
#include "srnet/image.hpp"
#include "srnet/synthgen.hpp"

#include <filesystem>
#include <opencv2/core.hpp>
#include <string>
#include <vector>

namespace srnet {

/// Axis-aligned word box in pixel coordinates.
struct BBox {
  int x = 0, y = 0, w = 0, h = 0;
  cv::Rect rect() const { return {x, y, w, h}; }
};

struct WordEdit {
  BBox box;
  std::string text;
};

/// Reads "x,y,w,h,text" lines. The text may itself contain commas; for erase
/// boxes it may be empty. Blank lines and lines starting with '#' are skipped.
std::vector<WordEdit> read_boxes(const std::filesystem::path& path);

struct EditorOptions {
  std::filesystem::path standard_font = "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf";
  int standard_font_px = 36;
  int height = 64;
  int stride = 8;
  int feather_px = 0;  // 0: hard rectangular paste

  static EditorOptions from_config(const RunConfig& config);
};

/// Crop-edit-paste pipeline around a trained generator. Images are 8-bit RGB
/// (CV_8UC3). Every output pixel outside the edited boxes is copied from the
/// input unchanged.
class Editor {
 public:
  Editor(Generator generator, EditorOptions options = {});
  static Editor from_checkpoint(const std::filesystem::path& path, EditorOptions options = {});

  /// `text` in the standard font, centred on a byte-127 field; the canvas
  /// widens when the glyphs do not fit.
  ImageTensor render_target_text(const std::string& text, int width, int height = 64);

  cv::Mat edit_word(const cv::Mat& image, const BBox& box, const std::string& target_text);
  cv::Mat erase_word(const cv::Mat& image, const BBox& box);
  /// Applies edit_word for each entry in order; later boxes overwrite earlier ones.
  cv::Mat edit_many(const cv::Mat& image, const std::vector<WordEdit>& edits);
  cv::Mat erase_many(const cv::Mat& image, const std::vector<BBox>& boxes);

  /// Network outputs for an already prepared word crop (C×64×W, any W >= 1).
  GeneratorOutputs run(const torch::Tensor& i_t, const torch::Tensor& i_s);

  int64_t forward_count() const { return forwards_; }
  Generator& generator() { return generator_; }
  const EditorOptions& options() const { return options_; }

 private:
  enum class Head { Fusion, Background };
  cv::Mat process(const cv::Mat& image, const BBox& box, const std::string* text, Head head);

  Generator generator_;
  EditorOptions options_;
  FontLibrary standard_;
  int64_t forwards_ = 0;
};

/// Throws Error for an empty box or one not fully inside a `width` x `height` image.
void check_bbox(const BBox& box, int width, int height);

/// Pastes `patch` (box-sized, CV_8UC3) into a copy of `image`. With
/// feather_px > 0 the patch is blended in with a linear ramp that stays
/// inside the box.
cv::Mat paste(const cv::Mat& image, const cv::Mat& patch, const BBox& box, int feather_px);

}  // namespace srnet
