#include "srnet/image.hpp"

#include "srnet/errors.hpp"

#include <cmath>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace srnet {

namespace {

std::pair<float, float> bounds(ValueRange range) {
  return range == ValueRange::Signed ? std::pair{-1.f, 1.f} : std::pair{0.f, 1.f};
}

}  // namespace

void check_range(const torch::Tensor& t, ValueRange range, const char* what) {
  if (t.numel() == 0) return;
  auto [lo, hi] = bounds(range);
  auto mn = t.min().item<double>();
  auto mx = t.max().item<double>();
  if (!(mn >= lo && mx <= hi)) {
    throw ShapeError(std::string(what) + ": values [" + std::to_string(mn) + ", " +
                     std::to_string(mx) + "] outside declared range");
  }
}

ImageTensor::ImageTensor(torch::Tensor chw, ValueRange range) : range_(range) {
  if (chw.dim() != 3) throw ShapeError("ImageTensor expects C x H x W");
  if (chw.size(0) != 1 && chw.size(0) != 3) throw ShapeError("ImageTensor channels must be 1 or 3");
  if (chw.size(1) <= 0 || chw.size(2) <= 0) throw ShapeError("ImageTensor must be non-empty");
  data_ = chw.to(torch::kFloat32).contiguous();
  check_range(data_, range_, "ImageTensor");
}

float normalize_byte(uint8_t value, ValueRange range) {
  return range == ValueRange::Signed ? static_cast<float>(value) / 127.5f - 1.f
                                     : static_cast<float>(value) / 255.f;
}

uint8_t denormalize_value(float value, ValueRange range) {
  float u = range == ValueRange::Signed ? (value + 1.f) * 127.5f : value * 255.f;
  return static_cast<uint8_t>(std::clamp(std::lround(u), 0L, 255L));
}

ImageTensor ImageTensor::from_u8(const cv::Mat& image, ValueRange range) {
  if (image.depth() != CV_8U || (image.channels() != 1 && image.channels() != 3)) {
    throw ShapeError("from_u8 expects an 8-bit 1- or 3-channel image");
  }
  std::array<float, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = normalize_byte(static_cast<uint8_t>(v), range);

  const int c = image.channels();
  auto out = torch::empty({c, image.rows, image.cols}, torch::kFloat32);
  auto acc = out.accessor<float, 3>();
  for (int y = 0; y < image.rows; ++y) {
    const uint8_t* row = image.ptr<uint8_t>(y);
    for (int x = 0; x < image.cols; ++x) {
      for (int ch = 0; ch < c; ++ch) acc[ch][y][x] = lut[row[x * c + ch]];
    }
  }
  return ImageTensor(out, range);
}

cv::Mat ImageTensor::to_u8() const {
  const int c = static_cast<int>(channels());
  const int h = static_cast<int>(height());
  const int w = static_cast<int>(width());
  cv::Mat out(h, w, c == 3 ? CV_8UC3 : CV_8UC1);
  auto acc = data_.accessor<float, 3>();
  for (int y = 0; y < h; ++y) {
    uint8_t* row = out.ptr<uint8_t>(y);
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) row[x * c + ch] = denormalize_value(acc[ch][y][x], range_);
    }
  }
  return out;
}

std::pair<torch::Tensor, PadRecord> pad_to_stride(const torch::Tensor& image, int64_t stride) {
  if (stride < 1) throw ShapeError("pad_to_stride: stride must be >= 1");
  const int64_t w = image.size(-1);
  const int64_t padded = (w + stride - 1) / stride * stride;
  PadRecord rec{w, padded};
  if (padded == w) return {image, rec};
  auto last = image.narrow(-1, w - 1, 1);
  std::vector<int64_t> rep(image.dim(), 1);
  rep.back() = padded - w;
  return {torch::cat({image, last.repeat(rep)}, -1), rec};
}

std::pair<ImageTensor, PadRecord> pad_to_stride(const ImageTensor& image, int64_t stride) {
  auto [t, rec] = pad_to_stride(image.tensor(), stride);
  return {ImageTensor(t, image.range()), rec};
}

torch::Tensor crop_to_record(const torch::Tensor& image, const PadRecord& record) {
  if (image.size(-1) != record.padded_width) throw ShapeError("crop_to_record: width mismatch");
  return image.narrow(-1, 0, record.original_width);
}

ImageTensor crop_to_record(const ImageTensor& image, const PadRecord& record) {
  return ImageTensor(crop_to_record(image.tensor(), record).contiguous(), image.range());
}

cv::Mat read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("missing file " + path.string());
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw Error("cannot decode image " + path.string());
  if (raw.depth() != CV_8U) throw Error("unsupported bit depth in " + path.string());
  cv::Mat out;
  switch (raw.channels()) {
    case 1: out = raw; break;
    case 3: cv::cvtColor(raw, out, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(raw, out, cv::COLOR_BGRA2RGB); break;
    default: throw Error("unsupported channel count in " + path.string());
  }
  return out;
}

void write_png(const std::filesystem::path& path, const cv::Mat& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  cv::Mat bgr;
  if (image.channels() == 3) {
    cv::cvtColor(image, bgr, cv::COLOR_RGB2BGR);
  } else {
    bgr = image;
  }
  if (!cv::imwrite(path.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw Error("cannot write " + path.string());
  }
}

torch::Tensor resize_bilinear(const torch::Tensor& chw, int64_t height, int64_t width) {
  if (chw.size(-2) == height && chw.size(-1) == width) return chw;
  namespace F = torch::nn::functional;
  auto batched = chw.dim() == 3 ? chw.unsqueeze(0) : chw;
  auto out = F::interpolate(batched, F::InterpolateFuncOptions()
                                         .size(std::vector<int64_t>{height, width})
                                         .mode(torch::kBilinear)
                                         .align_corners(false));
  return chw.dim() == 3 ? out.squeeze(0) : out;
}

}  // namespace srnet
