#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <opencv2/core.hpp>
#include <optional>
#include <string>
#include <vector>

namespace srnet {

/// 8-bit RGB or gray image to a float64 C×H×W tensor in [0,1].
torch::Tensor to_unit(const cv::Mat& image);

/// Mean squared error on the [0,1] scale.
double l2_error(const torch::Tensor& a, const torch::Tensor& b);

inline constexpr double kPsnrCap = 100.0;

/// 10·log10(1/MSE); identical images give kPsnrCap.
double psnr(const torch::Tensor& a, const torch::Tensor& b);

/// SSIM on BT.601 luma (gray inputs are used as is), 11×11 Gaussian window
/// with sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1, averaged over the
/// valid (unpadded) window positions. Images smaller than 11 px throw.
double ssim(const torch::Tensor& a, const torch::Tensor& b);

double l2_error(const cv::Mat& a, const cv::Mat& b);
double psnr(const cv::Mat& a, const cv::Mat& b);
double ssim(const cv::Mat& a, const cv::Mat& b);

/// Exact-match rate. Throws on an empty set or mismatched lengths.
double seq_acc(const std::vector<std::string>& predictions, const std::vector<std::string>& labels,
               bool case_insensitive = false);

/// Image file in, predicted string out.
class RecognizerAdapter {
 public:
  using Fn = std::function<std::string(const std::filesystem::path&)>;
  explicit RecognizerAdapter(Fn fn) : fn_(std::move(fn)) {}

  /// Runs `command <image path>` through the shell and takes its trimmed
  /// standard output as the prediction.
  static RecognizerAdapter from_command(std::string command);

  std::string operator()(const std::filesystem::path& image) const { return fn_(image); }

 private:
  Fn fn_;
};

struct EvalRow {
  std::string id;
  double l2 = 0, psnr = 0, ssim = 0;
  std::optional<std::string> prediction;
  std::optional<std::string> label;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_l2 = 0, mean_psnr = 0, mean_ssim = 0;
  std::optional<double> seq_acc;
  std::vector<std::string> warnings;

  size_t count() const { return rows.size(); }
  /// One JSON object per sample followed by an aggregate footer object.
  std::string to_jsonl() const;
  void write(const std::filesystem::path& path) const;
};

/// Pairs `<id>.png` files of `pred_dir` with the ground truth. When
/// `gt_dir/manifest.tsv` exists the ground truth is each record's t_f image
/// and its target text is the label; otherwise `gt_dir/<id>.png` with labels
/// from an optional `gt_dir/labels.tsv` (id<TAB>text). Throws Error listing
/// ids present on only one side.
EvalReport evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                    const std::optional<RecognizerAdapter>& recognizer = std::nullopt,
                    bool case_insensitive = false);

}  // namespace srnet
