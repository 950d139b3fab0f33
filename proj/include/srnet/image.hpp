#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <opencv2/core.hpp>

namespace srnet {

/// Declared numeric range of an image tensor. Network images live in [-1,1]
/// (tanh heads); masks and skeletons live in [0,1] (sigmoid head).
enum class ValueRange { Signed, Unit };

/// A C×H×W float32 image with a declared value range. Construction checks the
/// shape (C in {1,3}, H,W > 0) and that every element lies within the range.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(torch::Tensor chw, ValueRange range);

  /// Converts an 8-bit RGB (CV_8UC3) or gray (CV_8UC1) matrix.
  /// Signed: u/127.5 - 1. Unit: u/255.
  static ImageTensor from_u8(const cv::Mat& image, ValueRange range);

  /// Inverse of from_u8 (rounding to nearest, clamped to [0,255]).
  cv::Mat to_u8() const;

  const torch::Tensor& tensor() const noexcept { return data_; }
  ValueRange range() const noexcept { return range_; }
  int64_t channels() const { return data_.size(0); }
  int64_t height() const { return data_.size(1); }
  int64_t width() const { return data_.size(2); }
  bool defined() const noexcept { return data_.defined(); }

 private:
  torch::Tensor data_;
  ValueRange range_ = ValueRange::Signed;
};

/// Throws ShapeError unless every element of `t` is within `range`.
void check_range(const torch::Tensor& t, ValueRange range, const char* what);

float normalize_byte(uint8_t value, ValueRange range);
uint8_t denormalize_value(float value, ValueRange range);

/// Original width of an image before right-side padding.
struct PadRecord {
  int64_t original_width = 0;
  int64_t padded_width = 0;
};

/// Pads the width on the right, replicating the last column, to the smallest
/// multiple of `stride` that is >= the current width. Works on C×H×W and
/// N×C×H×W tensors.
std::pair<torch::Tensor, PadRecord> pad_to_stride(const torch::Tensor& image, int64_t stride);
std::pair<ImageTensor, PadRecord> pad_to_stride(const ImageTensor& image, int64_t stride);

torch::Tensor crop_to_record(const torch::Tensor& image, const PadRecord& record);
ImageTensor crop_to_record(const ImageTensor& image, const PadRecord& record);

/// Reads a PNG as RGB (CV_8UC3) or gray (CV_8UC1). Throws Error on failure.
cv::Mat read_png(const std::filesystem::path& path);
/// Writes RGB / gray 8-bit data losslessly.
void write_png(const std::filesystem::path& path, const cv::Mat& image);

/// Bilinear resize of a C×H×W tensor.
torch::Tensor resize_bilinear(const torch::Tensor& chw, int64_t height, int64_t width);

}  // namespace srnet
