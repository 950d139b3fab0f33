#include "srnet/errors.hpp"
#include "srnet/synthgen.hpp"
#include "srnet/thinning.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>
#include <opencv2/imgproc.hpp>

using namespace srnet;

TEST(Synth, DrawStyleDeterministicAndInBounds) {
  SynthConfig cfg;
  int outlines = 0, shadows = 0;
  for (uint64_t seed = 0; seed < 10000; ++seed) {
    auto s = draw_style(seed, cfg, 5);
    ASSERT_EQ(s, draw_style(seed, cfg, 5));
    ASSERT_LT(s.font_id, 5);
    ASSERT_GE(s.font_px, cfg.font_px_min);
    ASSERT_LE(s.font_px, cfg.font_px_max);
    ASSERT_LE(std::abs(s.rotation_deg), cfg.max_rotation_deg);
    ASSERT_LE(std::abs(s.perspective_x), cfg.max_perspective);
    ASSERT_LE(std::abs(s.perspective_y), cfg.max_perspective);
    ASSERT_LE(std::abs(s.curve_amplitude), cfg.max_curve_amplitude);
    ASSERT_GE(s.stroke_width, 0);
    ASSERT_LE(s.stroke_width, cfg.max_stroke_width);
    ASSERT_GE(s.spacing, cfg.spacing_min);
    ASSERT_LE(s.spacing, cfg.spacing_max);
    outlines += s.outline.has_value();
    shadows += s.shadow.has_value();
  }
  // Bernoulli(0.2) over 10k draws: 5 sigma is about 200.
  EXPECT_NEAR(outlines, 2000, 200);
  EXPECT_NEAR(shadows, 2000, 200);
}

TEST(Synth, ZeroedRangesGiveUndeformedStyle) {
  SynthConfig cfg;
  cfg.max_rotation_deg = 0;
  cfg.max_perspective = 0;
  cfg.max_curve_amplitude = 0;
  cfg.max_stroke_width = 0;
  cfg.outline_probability = 0;
  cfg.shadow_probability = 0;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    auto s = draw_style(seed, cfg, 3);
    EXPECT_EQ(s.rotation_deg, 0);
    EXPECT_EQ(s.perspective_x, 0);
    EXPECT_EQ(s.curve_amplitude, 0);
    EXPECT_EQ(s.stroke_width, 0);
    EXPECT_FALSE(s.outline || s.shadow);
  }
  EXPECT_THROW(draw_style(1, cfg, 0), Error);
}

TEST(Synth, CompositingIdentities) {
  test::SynthFixture fx;
  for (size_t i = 0; i < 10; ++i) {
    auto p = fx.sample(i);
    EXPECT_EQ(cv::norm(p.sample.i_s.to_u8(), composite_over(p.source, p.background), cv::NORM_INF), 0);
    EXPECT_EQ(cv::norm(p.sample.t_f.to_u8(), composite_over(p.target, p.background), cv::NORM_INF), 0);
    EXPECT_EQ(cv::norm(p.sample.t_b.to_u8(), p.background, cv::NORM_INF), 0);
    EXPECT_EQ(p.sample.height(), 64);
  }
}

TEST(Synth, TransparentLayerLeavesBackground) {
  RenderLayers l;
  l.color = cv::Mat::zeros(4, 5, CV_32FC3);
  l.alpha = cv::Mat::zeros(4, 5, CV_32FC1);
  cv::Mat bg(4, 5, CV_8UC3);
  cv::randu(bg, 0, 256);
  EXPECT_EQ(cv::norm(composite_over(l, bg), bg, cv::NORM_INF), 0);
  EXPECT_THROW(composite_over(l, cv::Mat(3, 5, CV_8UC3)), ShapeError);
}

TEST(Synth, SkeletonInvariants) {
  test::SynthFixture fx;
  for (size_t i = 0; i < 10; ++i) {
    auto p = fx.sample(i, 77);
    const auto& t = p.target;
    EXPECT_FALSE(has_full_2x2_block(t.skeleton));
    cv::Mat outside = t.skeleton & (t.text_mask == 0);
    EXPECT_EQ(cv::countNonZero(outside), 0);
    EXPECT_GT(cv::countNonZero(t.skeleton), 0);
    // The stored skeleton image is binary.
    auto sk = p.sample.t_sk.tensor();
    EXPECT_TRUE(torch::logical_or(sk == 0, sk == 1).all().item<bool>());
  }
}

TEST(Synth, SeedDeterminism) {
  test::SynthFixture a, b;
  for (size_t i = 0; i < 4; ++i) {
    auto x = a.sample(i, 123), y = b.sample(i, 123);
    EXPECT_TRUE(torch::equal(x.sample.i_s.tensor(), y.sample.i_s.tensor()));
    EXPECT_TRUE(torch::equal(x.sample.t_f.tensor(), y.sample.t_f.tensor()));
    EXPECT_EQ(x.sample.target_text, y.sample.target_text);
  }
  auto c = a.sample(0, 124), d = a.sample(0, 123);
  EXPECT_FALSE(c.sample.i_s.tensor().sizes() == d.sample.i_s.tensor().sizes() &&
               torch::equal(c.sample.i_s.tensor(), d.sample.i_s.tensor()));
}

TEST(Synth, StandardTextFitsOrExpands) {
  test::SynthFixture fx;
  auto a = render_standard_text(fx.standard, "Hello", 200, 64, 36);
  auto b = render_standard_text(fx.standard, "Hello", 200, 64, 36);
  EXPECT_EQ(cv::norm(a, b, cv::NORM_INF), 0);
  EXPECT_EQ(a.cols, 200);
  // Ink stays 2px clear of the left and right edges.
  cv::Mat ink;
  cv::extractChannel(a, ink, 0);
  ink = ink < 127;
  cv::Rect box = cv::boundingRect(ink);
  EXPECT_GE(box.x, 2);
  EXPECT_LE(box.x + box.width, a.cols - 2);
  auto wide = render_standard_text(fx.standard, "Extraordinarily", 16, 64, 36);
  EXPECT_GT(wide.cols, 16);
  EXPECT_THROW(render_standard_text(fx.standard, "", 64, 64, 36), Error);
}

TEST(Synth, RenderPairErrors) {
  test::SynthFixture fx;
  auto style = draw_style(3, fx.cfg, fx.fonts.size());
  EXPECT_THROW(render_pair(style, "", "x", fx.bgs.images[0], fx.fonts, fx.standard, fx.cfg), Error);
  SynthConfig narrow = fx.cfg;
  narrow.max_width = 40;
  EXPECT_THROW(render_pair(style, "Internationalization", "x", fx.bgs.images[0], fx.fonts, fx.standard, narrow),
               Error);
  cv::Mat small(64, 20, CV_8UC3, cv::Scalar::all(100));
  EXPECT_THROW(render_pair(style, "Hello", "World", small, fx.fonts, fx.standard, fx.cfg), Error);
}

TEST(Synth, CorpusWritesManifestIndependentOfWorkers) {
  SynthConfig cfg;
  auto words = builtin_word_list();
  auto bgs = BackgroundPool::procedural(4, 1);
  auto d1 = test::temp_dir("corpus1"), d2 = test::temp_dir("corpus2");
  auto m1 = generate_corpus(6, 5, words, bgs, cfg, d1, 1);
  auto m2 = generate_corpus(6, 5, words, bgs, cfg, d2, 3);
  ASSERT_EQ(m1.records.size(), 6u);
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(m1.records[i].target_text, m2.records[i].target_text);
    auto a = read_png(d1 / m1.records[i].paths[0]);
    auto b = read_png(d2 / m2.records[i].paths[0]);
    EXPECT_EQ(cv::norm(a, b, cv::NORM_INF), 0);
  }
  auto empty = generate_corpus(0, 5, words, bgs, cfg, test::temp_dir("corpus0"), 1);
  EXPECT_TRUE(empty.records.empty());
}
