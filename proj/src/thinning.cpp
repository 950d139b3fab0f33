#include "srnet/thinning.hpp"

#include "srnet/errors.hpp"

#include <vector>

namespace srnet {

namespace {

// Neighbourhood in Zhang-Suen order:
//   p9 p2 p3
//   p8 p1 p4
//   p7 p6 p5
struct Neighbours {
  int p[8];  // p2..p9

  int count() const {
    int n = 0;
    for (int v : p) n += v;
    return n;
  }

  // number of 0 -> 1 transitions in p2, p3, ..., p9, p2
  int transitions() const {
    int a = 0;
    for (int i = 0; i < 8; ++i) a += (p[i] == 0 && p[(i + 1) % 8] == 1);
    return a;
  }
};

Neighbours gather(const cv::Mat& img, int y, int x) {
  auto at = [&](int yy, int xx) -> int {
    if (yy < 0 || xx < 0 || yy >= img.rows || xx >= img.cols) return 0;
    return img.at<uint8_t>(yy, xx) != 0;
  };
  return {{at(y - 1, x), at(y - 1, x + 1), at(y, x + 1), at(y + 1, x + 1), at(y + 1, x),
           at(y + 1, x - 1), at(y, x - 1), at(y - 1, x - 1)}};
}

bool thinning_pass(cv::Mat& img, int subiteration) {
  std::vector<cv::Point> marked;
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      if (!img.at<uint8_t>(y, x)) continue;
      const auto n = gather(img, y, x);
      const int b = n.count();
      if (b < 2 || b > 6 || n.transitions() != 1) continue;
      const int p2 = n.p[0], p4 = n.p[2], p6 = n.p[4], p8 = n.p[6];
      const bool keep = subiteration == 0 ? (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0)
                                          : (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0);
      if (!keep) marked.emplace_back(x, y);
    }
  }
  for (const auto& pt : marked) img.at<uint8_t>(pt) = 0;
  return !marked.empty();
}

// Zhang-Suen can leave a full 2x2 square where strokes meet. A corner of
// the square can go when its outward diagonal neighbour is background or is
// still reachable through one of the two outward edge neighbours; the other
// three square pixels keep everything else connected.
bool clear_squares(cv::Mat& img) {
  auto on = [&](int y, int x) {
    return y >= 0 && x >= 0 && y < img.rows && x < img.cols && img.at<uint8_t>(y, x) != 0;
  };
  bool changed = false;
  for (int y = 0; y + 1 < img.rows; ++y) {
    for (int x = 0; x + 1 < img.cols; ++x) {
      if (!(on(y, x) && on(y, x + 1) && on(y + 1, x) && on(y + 1, x + 1))) continue;
      for (int dy : {0, 1}) {
        bool removed = false;
        for (int dx : {0, 1}) {
          const int cy = y + dy, cx = x + dx;
          const int oy = dy ? 1 : -1, ox = dx ? 1 : -1;  // outward direction
          if (!on(cy + oy, cx + ox) || on(cy + oy, cx) || on(cy, cx + ox)) {
            img.at<uint8_t>(cy, cx) = 0;
            changed = removed = true;
            break;
          }
        }
        if (removed) break;
      }
    }
  }
  return changed;
}

}  // namespace

cv::Mat skeletonize(const cv::Mat& mask) {
  if (mask.type() != CV_8UC1) throw ShapeError("skeletonize expects CV_8UC1");
  cv::Mat img = (mask != 0) / 255;
  bool changed = true;
  while (changed) {
    changed = thinning_pass(img, 0);
    changed = thinning_pass(img, 1) || changed;
    if (!changed) changed = clear_squares(img);
  }
  return img;
}

bool has_full_2x2_block(const cv::Mat& mask) {
  for (int y = 0; y + 1 < mask.rows; ++y) {
    for (int x = 0; x + 1 < mask.cols; ++x) {
      if (mask.at<uint8_t>(y, x) && mask.at<uint8_t>(y, x + 1) && mask.at<uint8_t>(y + 1, x) &&
          mask.at<uint8_t>(y + 1, x + 1)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace srnet
