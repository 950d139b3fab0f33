#pragma once

// Brute-force reference implementations used by the loss tests.

#include "srnet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace srnet::oracle {

using Map = std::vector<std::vector<std::vector<double>>>;  // C x H x W

inline Map to_map(const torch::Tensor& chw) {
  auto t = chw.to(torch::kFloat64).contiguous();
  auto a = t.accessor<double, 3>();
  Map m(t.size(0), std::vector<std::vector<double>>(t.size(1), std::vector<double>(t.size(2))));
  for (int64_t c = 0; c < t.size(0); ++c)
    for (int64_t y = 0; y < t.size(1); ++y)
      for (int64_t x = 0; x < t.size(2); ++x) m[c][y][x] = a[c][y][x];
  return m;
}

// 3x3 convolution with zero padding 1, followed by ReLU.
inline Map naive_conv_relu(const Map& in, const torch::Tensor& weight, const torch::Tensor& bias) {
  auto w = weight.to(torch::kFloat64).contiguous();
  auto b = bias.to(torch::kFloat64).contiguous();
  auto wa = w.accessor<double, 4>();
  auto ba = b.accessor<double, 1>();
  const int64_t co = w.size(0), ci = w.size(1);
  const int64_t h = in[0].size(), wd = in[0][0].size();
  Map out(co, std::vector<std::vector<double>>(h, std::vector<double>(wd)));
  for (int64_t o = 0; o < co; ++o)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < wd; ++x) {
        double s = ba[o];
        for (int64_t i = 0; i < ci; ++i)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int64_t yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || xx < 0 || yy >= h || xx >= wd) continue;
              s += wa[o][i][ky][kx] * in[i][yy][xx];
            }
        out[o][y][x] = std::max(0.0, s);
      }
  return out;
}

// 2x2 stride-2 max pool keeping partial windows at the border.
inline Map naive_pool(const Map& in) {
  const size_t h = in[0].size(), w = in[0][0].size();
  const size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  Map out(in.size(), std::vector<std::vector<double>>(oh, std::vector<double>(ow)));
  for (size_t c = 0; c < in.size(); ++c)
    for (size_t y = 0; y < oh; ++y)
      for (size_t x = 0; x < ow; ++x) {
        double m = -INFINITY;
        for (size_t dy = 0; dy < 2; ++dy)
          for (size_t dx = 0; dx < 2; ++dx)
            if (2 * y + dy < h && 2 * x + dx < w) m = std::max(m, in[c][2 * y + dy][2 * x + dx]);
        out[c][y][x] = m;
      }
  return out;
}

inline std::vector<Map> naive_features(FeatureExtractor& ex, const torch::Tensor& chw) {
  std::vector<Map> taps;
  Map h = to_map(chw);
  for (size_t k = 0; k < ex->convs().size(); ++k) {
    if (ex->pool_before()[k]) h = naive_pool(h);
    h = naive_conv_relu(h, ex->convs()[k]->weight, ex->convs()[k]->bias);
    taps.push_back(h);
  }
  return taps;
}

inline double naive_mean_abs(const Map& a, const Map& b) {
  double s = 0;
  size_t n = 0;
  for (size_t c = 0; c < a.size(); ++c)
    for (size_t y = 0; y < a[c].size(); ++y)
      for (size_t x = 0; x < a[c][y].size(); ++x, ++n) s += std::abs(a[c][y][x] - b[c][y][x]);
  return s / n;
}

inline std::vector<std::vector<double>> naive_gram(const Map& f) {
  const size_t c = f.size(), h = f[0].size(), w = f[0][0].size();
  std::vector<std::vector<double>> g(c, std::vector<double>(c, 0.0));
  for (size_t i = 0; i < c; ++i)
    for (size_t j = 0; j < c; ++j) {
      for (size_t y = 0; y < h; ++y)
        for (size_t x = 0; x < w; ++x) g[i][j] += f[i][y][x] * f[j][y][x];
      g[i][j] /= double(c * h * w);
    }
  return g;
}

inline double naive_style_term(const Map& a, const Map& b) {
  auto ga = naive_gram(a), gb = naive_gram(b);
  double s = 0;
  for (size_t i = 0; i < ga.size(); ++i)
    for (size_t j = 0; j < ga.size(); ++j) s += std::abs(ga[i][j] - gb[i][j]);
  return s / double(ga.size() * ga.size());
}

inline ExtractorConfig small_extractor() {
  ExtractorConfig e;
  e.random_widths = {4, 5, 6, 6, 7};
  return e;
}


// Relative error of central differences against autodiff at `samples`
// random coordinates of `x`.
inline double worst_relative_error(const std::function<torch::Tensor(const torch::Tensor&)>& f, torch::Tensor x,
                            int samples, uint64_t seed) {
  x = x.detach().clone().set_requires_grad(true);
  f(x).backward();
  auto grad = x.grad().detach().clone();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64_t> pick(0, x.numel() - 1);
  const double h = 1e-6;
  double worst = 0;
  torch::NoGradGuard ng;
  auto flat = x.detach().view(-1);
  for (int k = 0; k < samples; ++k) {
    const auto i = pick(rng);
    const double orig = flat[i].item<double>();
    flat[i] = orig + h;
    const double up = f(x.detach()).item<double>();
    flat[i] = orig - h;
    const double down = f(x.detach()).item<double>();
    flat[i] = orig;
    const double fd = (up - down) / (2 * h);
    const double ad = grad.view(-1)[i].item<double>();
    const double scale = std::max({std::abs(fd), std::abs(ad), 1e-7});
    worst = std::max(worst, std::abs(fd - ad) / scale);
  }
  return worst;
}


}  // namespace srnet::oracle
