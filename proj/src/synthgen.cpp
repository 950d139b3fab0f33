#include "srnet/synthgen.hpp"

#include "srnet/errors.hpp"
#include "srnet/rng.hpp"
#include "srnet/thinning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <opencv2/freetype.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace srnet {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_utf8(const std::string& text) {
  std::vector<std::string> out;
  for (size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
    } else if (c >= 0xE0) {
      len = 3;
    } else if (c >= 0xC0) {
      len = 2;
    }
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

cv::Mat centre_in_width(const cv::Mat& src, int width) {
  cv::Mat out = cv::Mat::zeros(src.rows, width, src.type());
  const int off = (width - src.cols) / 2;
  src.copyTo(out(cv::Rect(off, 0, src.cols, src.rows)));
  return out;
}

cv::Mat grey_dilate(const cv::Mat& a, int radius) {
  if (radius <= 0) return a.clone();
  cv::Mat out;
  auto kernel = cv::getStructuringElement(cv::MORPH_ELLIPSE, {2 * radius + 1, 2 * radius + 1});
  cv::dilate(a, out, kernel, {-1, -1}, 1, cv::BORDER_CONSTANT, cv::Scalar(0));
  return out;
}

cv::Mat shift(const cv::Mat& a, int dx, int dy) {
  cv::Mat out = cv::Mat::zeros(a.size(), a.type());
  const int w = a.cols - std::abs(dx);
  const int h = a.rows - std::abs(dy);
  if (w <= 0 || h <= 0) return out;
  a(cv::Rect(std::max(0, -dx), std::max(0, -dy), w, h))
      .copyTo(out(cv::Rect(std::max(0, dx), std::max(0, dy), w, h)));
  return out;
}

// Geometric deformation shared by source and target words: sinusoidal
// baseline curve, rotation about the canvas centre, then keystone.
cv::Mat deform(const cv::Mat& coverage, const StyleSpec& style) {
  if (style.rotation_deg == 0 && style.perspective_x == 0 && style.perspective_y == 0 &&
      style.curve_amplitude == 0) {
    return coverage.clone();
  }
  const int w = coverage.cols;
  const int h = coverage.rows;
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double theta = style.rotation_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double period = std::max<double>(w, 2.0 * h);
  cv::Mat map_x(h, w, CV_32FC1), map_y(h, w, CV_32FC1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double u = x - cx;
      double v = y - cy;
      v -= style.curve_amplitude * std::sin(2.0 * std::numbers::pi * x / period + style.curve_phase);
      const double ur = ct * u + st * v;
      const double vr = -st * u + ct * v;
      const double us = ur * (1.0 + style.perspective_y * vr / (h / 2.0));
      const double vs = vr * (1.0 + style.perspective_x * ur / (w / 2.0));
      map_x.at<float>(y, x) = static_cast<float>(us + cx);
      map_y.at<float>(y, x) = static_cast<float>(vs + cy);
    }
  }
  cv::Mat out;
  cv::remap(coverage, out, map_x, map_y, cv::INTER_LINEAR, cv::BORDER_CONSTANT, cv::Scalar(0));
  return out;
}

void over_layer(cv::Mat& color, cv::Mat& alpha, const cv::Mat& layer_alpha, Rgb rgb) {
  const float c[3] = {rgb.r / 255.f, rgb.g / 255.f, rgb.b / 255.f};
  for (int y = 0; y < alpha.rows; ++y) {
    auto* col = color.ptr<cv::Vec3f>(y);
    auto* a = alpha.ptr<float>(y);
    const auto* la = layer_alpha.ptr<float>(y);
    for (int x = 0; x < alpha.cols; ++x) {
      const float t = std::clamp(la[x], 0.f, 1.f);
      for (int k = 0; k < 3; ++k) col[x][k] = c[k] * t + col[x][k] * (1.f - t);
      a[x] = t + a[x] * (1.f - t);
    }
  }
}

RenderLayers build_layers(const cv::Mat& coverage, const StyleSpec& style) {
  cv::Mat fill = deform(grey_dilate(coverage, style.stroke_width), style);
  cv::threshold(fill, fill, 1.0, 1.0, cv::THRESH_TRUNC);
  cv::threshold(fill, fill, 0.0, 0.0, cv::THRESH_TOZERO);

  RenderLayers layers;
  layers.color = cv::Mat::zeros(fill.size(), CV_32FC3);
  layers.alpha = cv::Mat::zeros(fill.size(), CV_32FC1);
  cv::Mat body = fill;
  if (style.outline) body = grey_dilate(fill, std::max(1, style.outline_width));
  if (style.shadow) {
    over_layer(layers.color, layers.alpha, shift(body, style.shadow_dx, style.shadow_dy),
               *style.shadow);
  }
  if (style.outline) over_layer(layers.color, layers.alpha, body, *style.outline);
  over_layer(layers.color, layers.alpha, fill, style.fill);

  layers.text_mask = (layers.alpha > 0.f) / 255;
  cv::Mat glyphs = fill > 0.5f;
  layers.skeleton = skeletonize(glyphs);
  return layers;
}

cv::Mat constant_rgb(int h, int w, uint8_t value) {
  return cv::Mat(h, w, CV_8UC3, cv::Scalar(value, value, value));
}

double mean_luma(const cv::Mat& rgb) {
  auto m = cv::mean(rgb);
  return (0.299 * m[0] + 0.587 * m[1] + 0.114 * m[2]) / 255.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// FontLibrary

FontLibrary FontLibrary::from_files(const std::vector<fs::path>& files) {
  FontLibrary lib;
  for (const auto& f : files) {
    auto face = cv::freetype::createFreeType2();
    try {
      face->loadFontData(f.string(), 0);
    } catch (const cv::Exception& e) {
      throw Error("cannot load font " + f.string() + ": " + e.what());
    }
    lib.paths_.push_back(f);
    lib.faces_.push_back(face);
  }
  return lib;
}

FontLibrary FontLibrary::from_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("font directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (e.is_regular_file() && (ext == ".ttf" || ext == ".otf")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return from_files(files);
}

cv::Mat FontLibrary::render_coverage(size_t font_id, const std::string& text, int font_px,
                                     int spacing, int height, int margin) {
  if (font_id >= faces_.size()) throw Error("font id out of range");
  auto& face = faces_[font_id];

  // Ink extent of a reference string fixes the baseline so every word in a
  // face/size shares it.
  const int probe_h = 4 * font_px;
  const int probe_base = 3 * font_px;
  cv::Mat probe = cv::Mat::zeros(probe_h, 4 * font_px + 8, CV_8UC3);
  face->putText(probe, "Hgjy", {4, probe_base}, font_px, cv::Scalar::all(255), -1, cv::LINE_AA, true);
  cv::Mat probe_gray;
  cv::extractChannel(probe, probe_gray, 0);
  int top = probe_h, bottom = 0;
  for (int y = 0; y < probe_h; ++y) {
    if (cv::countNonZero(probe_gray.row(y)) > 0) {
      top = std::min(top, y);
      bottom = std::max(bottom, y);
    }
  }
  if (top > bottom) top = bottom = probe_base;
  const int baseline = height / 2 + (probe_base - (top + bottom) / 2);

  const auto chars = split_utf8(text);
  std::vector<int> advance;
  int total = 0;
  for (const auto& ch : chars) {
    int base = 0;
    int w = face->getTextSize(ch, font_px, -1, &base).width;
    if (w <= 0) w = font_px / 3;
    advance.push_back(w);
    total += w;
  }
  total += spacing * static_cast<int>(std::max<size_t>(chars.size(), 1) - 1);
  const int width = std::max(1, total + 2 * margin);

  cv::Mat canvas = cv::Mat::zeros(height, width, CV_8UC3);
  int x = margin;
  for (size_t i = 0; i < chars.size(); ++i) {
    face->putText(canvas, chars[i], {x, baseline}, font_px, cv::Scalar::all(255), -1, cv::LINE_AA,
                  true);
    x += advance[i] + spacing;
  }
  cv::Mat gray, out;
  cv::extractChannel(canvas, gray, 0);
  gray.convertTo(out, CV_32FC1, 1.0 / 255.0);
  return out;
}

// ---------------------------------------------------------------------------

cv::Mat composite_over(const RenderLayers& layer, const cv::Mat& background_rgb) {
  if (background_rgb.type() != CV_8UC3 || background_rgb.size() != layer.alpha.size()) {
    throw ShapeError("composite_over: background must be 8-bit RGB of the layer size");
  }
  cv::Mat out(background_rgb.size(), CV_8UC3);
  for (int y = 0; y < out.rows; ++y) {
    const auto* col = layer.color.ptr<cv::Vec3f>(y);
    const auto* a = layer.alpha.ptr<float>(y);
    const auto* bg = background_rgb.ptr<cv::Vec3b>(y);
    auto* dst = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < out.cols; ++x) {
      for (int k = 0; k < 3; ++k) {
        const float v = col[x][k] * 255.f + static_cast<float>(bg[x][k]) * (1.f - a[x]);
        dst[x][k] = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

StyleSpec draw_style(uint64_t seed, const SynthConfig& config, size_t font_count) {
  if (font_count == 0) throw Error("draw_style: empty font library");
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto uint = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto colour = [&](int lo, int hi) {
    return Rgb{static_cast<uint8_t>(uint(lo, hi)), static_cast<uint8_t>(uint(lo, hi)),
               static_cast<uint8_t>(uint(lo, hi))};
  };

  StyleSpec s;
  s.font_id = static_cast<int>(std::uniform_int_distribution<size_t>(0, font_count - 1)(rng));
  s.font_px = uint(config.font_px_min, config.font_px_max);
  s.fill = colour(0, 255);
  if (uni(0, 1) < config.outline_probability) {
    s.outline = colour(0, 255);
    s.outline_width = uint(1, 2);
  }
  if (uni(0, 1) < config.shadow_probability) {
    s.shadow = colour(0, 80);
    s.shadow_dx = uint(-3, 3);
    s.shadow_dy = uint(1, 3);
  }
  s.rotation_deg = uni(-config.max_rotation_deg, config.max_rotation_deg);
  s.perspective_x = uni(-config.max_perspective, config.max_perspective);
  s.perspective_y = uni(-config.max_perspective, config.max_perspective);
  s.curve_amplitude = uni(-config.max_curve_amplitude, config.max_curve_amplitude);
  s.curve_phase = config.max_curve_amplitude > 0 ? uni(0, 2 * std::numbers::pi) : 0.0;
  s.stroke_width = uint(0, config.max_stroke_width);
  s.spacing = uint(config.spacing_min, config.spacing_max);
  return s;
}

cv::Mat render_standard_text(FontLibrary& standard_font, const std::string& text, int width,
                             int height, int font_px) {
  if (text.empty()) throw Error("render_standard_text: empty text");
  cv::Mat cov = standard_font.render_coverage(0, text, font_px, 0, height, 2);
  const int w = std::max(width, cov.cols);
  cov = centre_in_width(cov, w);
  cv::Mat out(height, w, CV_8UC3);
  for (int y = 0; y < height; ++y) {
    const auto* a = cov.ptr<float>(y);
    auto* dst = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<uint8_t>(std::lround(127.f * (1.f - a[x])));
      dst[x] = {v, v, v};
    }
  }
  return out;
}

RenderedPair render_pair(const StyleSpec& style, const std::string& source_text,
                         const std::string& target_text, const cv::Mat& background,
                         FontLibrary& fonts, FontLibrary& standard_font,
                         const SynthConfig& config) {
  if (source_text.empty() || target_text.empty()) throw Error("render_pair: empty text");
  const int h = config.height;
  cv::Mat src_cov = fonts.render_coverage(style.font_id, source_text, style.font_px, style.spacing,
                                          h, config.margin);
  cv::Mat tgt_cov = fonts.render_coverage(style.font_id, target_text, style.font_px, style.spacing,
                                          h, config.margin);
  cv::Mat std_cov = standard_font.render_coverage(0, target_text, config.standard_font_px, 0, h, 2);
  const int width = std::max({src_cov.cols, tgt_cov.cols, std_cov.cols});
  if (width > config.max_width) {
    throw Error("render_pair: rendered text width " + std::to_string(width) +
                " exceeds max_width " + std::to_string(config.max_width));
  }
  if (background.type() != CV_8UC3 || background.rows < h || background.cols < width) {
    throw Error("render_pair: background smaller than the rendered text extent");
  }

  RenderedPair out;
  out.background = background(cv::Rect((background.cols - width) / 2, (background.rows - h) / 2,
                                       width, h))
                       .clone();
  out.source = build_layers(centre_in_width(src_cov, width), style);
  out.target = build_layers(centre_in_width(tgt_cov, width), style);

  cv::Mat i_s = composite_over(out.source, out.background);
  cv::Mat t_f = composite_over(out.target, out.background);
  cv::Mat t_t = composite_over(out.target, constant_rgb(h, width, 127));
  cv::Mat i_t = render_standard_text(standard_font, target_text, width, h, config.standard_font_px);

  auto& s = out.sample;
  s.i_s = ImageTensor::from_u8(i_s, ValueRange::Signed);
  s.i_t = ImageTensor::from_u8(i_t, ValueRange::Signed);
  s.t_sk = ImageTensor::from_u8(out.target.skeleton * 255, ValueRange::Unit);
  s.t_t = ImageTensor::from_u8(t_t, ValueRange::Signed);
  s.t_b = ImageTensor::from_u8(out.background, ValueRange::Signed);
  s.t_f = ImageTensor::from_u8(t_f, ValueRange::Signed);
  s.source_text = source_text;
  s.target_text = target_text;
  validate_sample(s);
  return out;
}

// ---------------------------------------------------------------------------
// Backgrounds and words

BackgroundPool BackgroundPool::from_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("background directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  BackgroundPool pool;
  for (const auto& f : files) {
    cv::Mat bgr = cv::imread(f.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw Error("cannot decode background " + f.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    pool.images.push_back(rgb);
  }
  if (pool.images.empty()) throw Error("no background images in " + dir.string());
  return pool;
}

BackgroundPool BackgroundPool::procedural(int count, uint64_t seed, int height, int width) {
  BackgroundPool pool;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(i)));
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    cv::Vec3f c0(uni(0, 255), uni(0, 255), uni(0, 255));
    cv::Vec3f c1(uni(0, 255), uni(0, 255), uni(0, 255));
    const double angle = uni(0, 2 * std::numbers::pi);
    const double noise_amp = uni(0, 50);
    const double stripe_amp = uni(0, 1) < 0.5 ? uni(5, 30) : 0.0;
    const double stripe_freq = uni(0.02, 0.25);
    const double stripe_angle = uni(0, std::numbers::pi);
    const double grain = uni(0, 6);

    cv::Mat coarse(4, 16, CV_32FC3);
    for (int y = 0; y < coarse.rows; ++y) {
      for (int x = 0; x < coarse.cols; ++x) {
        coarse.at<cv::Vec3f>(y, x) = cv::Vec3f(uni(-1, 1), uni(-1, 1), uni(-1, 1));
      }
    }
    cv::Mat smooth;
    cv::resize(coarse, smooth, {width, height}, 0, 0, cv::INTER_CUBIC);

    std::normal_distribution<double> gauss(0.0, 1.0);
    cv::Mat img(height, width, CV_8UC3);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double cs = std::cos(stripe_angle), ss = std::sin(stripe_angle);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double t = 0.5 + 0.5 * ((x - width / 2.0) * ca + (y - height / 2.0) * sa) /
                                   (0.5 * std::hypot(width, height));
        const double stripe = stripe_amp * std::sin(stripe_freq * (x * cs + y * ss));
        const auto n = smooth.at<cv::Vec3f>(y, x);
        const double g = grain * gauss(rng);
        cv::Vec3b px;
        for (int k = 0; k < 3; ++k) {
          const double v = c0[k] * (1 - t) + c1[k] * t + noise_amp * n[k] + stripe + g;
          px[k] = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
        img.at<cv::Vec3b>(y, x) = px;
      }
    }
    pool.images.push_back(img);
  }
  return pool;
}

std::vector<std::string> builtin_word_list() {
  return {"the",    "and",     "for",     "are",    "but",     "not",    "you",     "all",
          "any",    "can",     "her",     "was",    "one",     "our",    "out",     "day",
          "get",    "has",     "him",     "his",    "how",     "man",    "new",     "now",
          "old",    "see",     "two",     "way",    "who",     "boy",    "did",     "its",
          "let",    "put",     "say",     "she",    "too",     "use",    "Hotel",   "Coffee",
          "Street", "Market",  "Bakery",  "OPEN",   "CLOSED",  "SALE",   "Exit",    "Park",
          "Road",   "Avenue",  "Station", "Bank",   "Pizza",   "Books",  "Music",   "Garden",
          "Museum", "Theatre", "Cinema",  "Police", "Taxi",    "Stop",   "North",   "South",
          "East",   "West",    "Center",  "Store",  "Shop",    "Food",   "Drink",   "Water",
          "Fresh",  "Daily",   "Menu",    "Lunch",  "Dinner",  "Hours",  "Welcome", "Service",
          "Office", "School",  "Library", "Hospital", "Pharmacy", "Parking", "Entrance", "Toilet",
          "Sports", "Games",   "Fashion", "Beauty", "Salon",   "Hair",   "Repair",  "Motors",
          "Tower",  "Plaza",   "Square",  "Bridge", "Harbor",  "Beach",  "River",   "Lake",
          "Green",  "Red",     "Blue",    "Gold",   "Silver",  "Royal",  "Grand",   "City",
          "Union",  "Central", "Express", "Metro",  "Airport", "Ticket", "Office",  "London",
          "Paris",  "Tokyo",   "Berlin",  "Rome",   "Madrid",  "Vienna", "Prague",  "Boston",
          "Denver", "Dallas",  "2019",    "24",     "100",     "365",    "ABC",     "XYZ",
          "Coca",   "Cola",    "Mobile",  "Phone",  "Digital", "Camera", "Photo",   "Print",
          "Wine",   "Beer",    "Bar",     "Grill",  "House",   "Home",   "Garage",  "Auto",
          "Tire",   "Oil",     "Gas",     "Diesel", "Inn",     "Motel",  "Lodge",   "Spa"};
}

std::vector<std::string> read_word_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word list " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line.find('\t') == std::string::npos) words.push_back(line);
  }
  if (words.empty()) throw Error("word list is empty: " + path.string());
  return words;
}

// ---------------------------------------------------------------------------
// Corpus

RenderedPair generate_sample(size_t index, uint64_t seed, const std::vector<std::string>& words,
                             const BackgroundPool& backgrounds, FontLibrary& fonts,
                             FontLibrary& standard_font, const SynthConfig& config) {
  if (words.empty()) throw Error("generate_sample: empty word list");
  if (backgrounds.images.empty()) throw Error("generate_sample: empty background pool");
  std::mt19937_64 rng(derive_seed(seed, index));
  auto pick = [&](size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); };

  constexpr int kAttempts = 32;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    StyleSpec style = draw_style(rng(), config, fonts.size());
    const auto& src = words[pick(words.size())];
    const auto& tgt = words[pick(words.size())];

    const cv::Mat& bg = backgrounds.images[pick(backgrounds.images.size())];
    const int h = config.height;
    const int w = config.max_width;
    cv::Mat scaled = bg;
    const double scale = std::max({1.0, static_cast<double>(h) / bg.rows,
                                   static_cast<double>(w) / bg.cols});
    if (scale > 1.0) {
      cv::resize(bg, scaled,
                 {static_cast<int>(std::ceil(bg.cols * scale)), static_cast<int>(std::ceil(bg.rows * scale))},
                 0, 0, cv::INTER_LINEAR);
    }
    const int ox = static_cast<int>(pick(static_cast<size_t>(scaled.cols - w + 1)));
    const int oy = static_cast<int>(pick(static_cast<size_t>(scaled.rows - h + 1)));
    cv::Mat crop = scaled(cv::Rect(ox, oy, w, h)).clone();

    // Keep the fill readable against the crop.
    const double bg_luma = mean_luma(crop);
    if (std::abs(style.fill.luma() - bg_luma) < config.min_contrast) {
      auto push = [&](uint8_t v) {
        return static_cast<uint8_t>(bg_luma > 0.5 ? v / 5 : 255 - (255 - v) / 5);
      };
      style.fill = {push(style.fill.r), push(style.fill.g), push(style.fill.b)};
    }

    try {
      return render_pair(style, src, tgt, crop, fonts, standard_font, config);
    } catch (const Error& e) {
      if (std::string(e.what()).find("exceeds max_width") == std::string::npos) throw;
    }
  }
  throw Error("sample " + std::to_string(index) + ": no rendering fits max_width");
}

DatasetManifest generate_corpus(size_t count, uint64_t seed, const std::vector<std::string>& words,
                                const BackgroundPool& backgrounds, const SynthConfig& config,
                                const fs::path& out, int workers) {
  config.validate();
  if (words.empty()) throw Error("generate_corpus: empty word list");
  if (backgrounds.images.empty()) throw Error("generate_corpus: empty background pool");

  DatasetManifest manifest;
  manifest.root = out;
  manifest.records.resize(count);
  fs::create_directories(out);

  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto work = [&] {
    FontLibrary fonts = FontLibrary::from_directory(config.font_dir);
    FontLibrary standard = FontLibrary::from_files({config.standard_font});
    for (size_t i = next++; i < count; i = next++) {
      try {
        auto rendered = generate_sample(i, seed, words, backgrounds, fonts, standard, config);
        auto record = make_record(format_sample_id(i), rendered.sample.source_text,
                                  rendered.sample.target_text);
        save_sample(out, record, rendered.sample);
        manifest.records[i] = std::move(record);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (first_error.empty()) first_error = "sample " + std::to_string(i) + ": " + e.what();
        next = count;
      }
    }
  };

  const int n = std::max(1, workers);
  if (n == 1 || count < 2) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty()) throw Error(first_error);
  manifest.write();
  return manifest;
}

}  // namespace srnet
