#pragma once

#include <opencv2/core.hpp>

namespace srnet {

/// Zhang-Suen thinning. Input: CV_8UC1 where nonzero is foreground. Output:
/// CV_8UC1 with values {0,1}. Pixels outside the image count as background.
/// Any 2x2 square left by the classic passes is reduced to three pixels when
/// that keeps the local neighbourhood connected.
/// The result is a subset of the input and skeletonize(skeletonize(m)) equals
/// skeletonize(m).
cv::Mat skeletonize(const cv::Mat& mask);

/// True if some 2x2 window is entirely foreground.
bool has_full_2x2_block(const cv::Mat& mask);

}  // namespace srnet
