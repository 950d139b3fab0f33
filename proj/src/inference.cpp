#include "srnet/inference.hpp"

#include "srnet/checkpoint.hpp"
#include "srnet/errors.hpp"

#include <fstream>
#include <opencv2/imgproc.hpp>
#include <sstream>

namespace srnet {

std::vector<WordEdit> read_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open box file " + path.string());
  std::vector<WordEdit> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    WordEdit e;
    std::string field;
    int* dst[4] = {&e.box.x, &e.box.y, &e.box.w, &e.box.h};
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(ss, field, ',')) {
        throw Error(path.string() + ":" + std::to_string(lineno) + ": expected x,y,w,h,text");
      }
      try {
        *dst[k] = std::stoi(field);
      } catch (const std::exception&) {
        throw Error(path.string() + ":" + std::to_string(lineno) + ": bad integer '" + field + "'");
      }
    }
    std::getline(ss, e.text);
    out.push_back(std::move(e));
  }
  return out;
}

EditorOptions EditorOptions::from_config(const RunConfig& config) {
  EditorOptions o;
  o.standard_font = config.synth.standard_font;
  o.standard_font_px = config.synth.standard_font_px;
  o.height = config.synth.height;
  o.stride = config.inference.stride;
  o.feather_px = config.inference.feather_px;
  return o;
}

Editor::Editor(Generator generator, EditorOptions options)
    : generator_(std::move(generator)),
      options_(std::move(options)),
      standard_(FontLibrary::from_files({options_.standard_font})) {
  generator_->eval();
}

Editor Editor::from_checkpoint(const std::filesystem::path& path, EditorOptions options) {
  return Editor(load_generator(path), std::move(options));
}

ImageTensor Editor::render_target_text(const std::string& text, int width, int height) {
  if (text.empty()) throw Error("render_target_text: empty text");
  cv::Mat img = render_standard_text(standard_, text, width, height, options_.standard_font_px);
  return ImageTensor::from_u8(img, ValueRange::Signed);
}

void check_bbox(const BBox& b, int width, int height) {
  if (b.w <= 0 || b.h <= 0) throw Error("degenerate bounding box (zero area)");
  if (b.x < 0 || b.y < 0 || b.x + b.w > width || b.y + b.h > height) {
    throw Error("bounding box " + std::to_string(b.x) + "," + std::to_string(b.y) + "," +
                std::to_string(b.w) + "," + std::to_string(b.h) + " lies outside the " +
                std::to_string(width) + "x" + std::to_string(height) + " image");
  }
}

cv::Mat paste(const cv::Mat& image, const cv::Mat& patch, const BBox& box, int feather_px) {
  cv::Mat out = image.clone();
  cv::Mat roi = out(box.rect());
  if (feather_px <= 0) {
    patch.copyTo(roi);
    return out;
  }
  const cv::Mat orig = image(box.rect());
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      const int d = std::min({x, y, box.w - 1 - x, box.h - 1 - y});
      const float a = std::min(1.f, (d + 1) / static_cast<float>(feather_px + 1));
      const auto& p = patch.at<cv::Vec3b>(y, x);
      const auto& o = orig.at<cv::Vec3b>(y, x);
      auto& r = roi.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c) r[c] = cv::saturate_cast<uint8_t>(a * p[c] + (1.f - a) * o[c]);
    }
  }
  return out;
}

GeneratorOutputs Editor::run(const torch::Tensor& i_t, const torch::Tensor& i_s) {
  torch::NoGradGuard no_grad;
  generator_->eval();
  auto [t_pad, rec] = pad_to_stride(i_t.unsqueeze(0), options_.stride);
  auto s_pad = pad_to_stride(i_s.unsqueeze(0), options_.stride).first;
  auto out = generator_(t_pad, s_pad);
  ++forwards_;
  auto crop = [&](const torch::Tensor& t) { return crop_to_record(t, rec).squeeze(0); };
  return {crop(out.o_sk), crop(out.o_t), crop(out.o_b), crop(out.o_f)};
}

cv::Mat Editor::process(const cv::Mat& image, const BBox& box, const std::string* text, Head head) {
  if (image.type() != CV_8UC3) throw ShapeError("editor expects an 8-bit RGB image");
  check_bbox(box, image.cols, image.rows);
  const int h = options_.height;
  const int w = std::max<int>(1, static_cast<int>(std::lround(double(box.w) * h / box.h)));

  auto i_s = resize_bilinear(ImageTensor::from_u8(image(box.rect()).clone(), ValueRange::Signed).tensor(), h, w);
  torch::Tensor i_t;
  if (text && !text->empty()) {
    i_t = render_target_text(*text, w, h).tensor();
    if (i_t.size(2) != w) i_t = resize_bilinear(i_t, h, w);
  } else {
    // Erasure only reads o_b, which does not depend on i_t.
    i_t = torch::zeros({3, h, w});
  }

  auto out = run(i_t, i_s);
  const auto& result = head == Head::Fusion ? out.o_f : out.o_b;
  auto back = resize_bilinear(result, box.h, box.w).clamp(-1.0, 1.0);
  cv::Mat patch = ImageTensor(back, ValueRange::Signed).to_u8();
  return paste(image, patch, box, options_.feather_px);
}

cv::Mat Editor::edit_word(const cv::Mat& image, const BBox& box, const std::string& target_text) {
  if (target_text.empty()) throw Error("edit_word: empty target text");
  return process(image, box, &target_text, Head::Fusion);
}

cv::Mat Editor::erase_word(const cv::Mat& image, const BBox& box) {
  return process(image, box, nullptr, Head::Background);
}

cv::Mat Editor::edit_many(const cv::Mat& image, const std::vector<WordEdit>& edits) {
  cv::Mat out = image.clone();
  for (const auto& e : edits) out = edit_word(out, e.box, e.text);
  return out;
}

cv::Mat Editor::erase_many(const cv::Mat& image, const std::vector<BBox>& boxes) {
  cv::Mat out = image.clone();
  for (const auto& b : boxes) out = erase_word(out, b);
  return out;
}

}  // namespace srnet
