#include "srnet/errors.hpp"
#include "srnet/losses.hpp"

#include "helpers.hpp"
#include "naive_oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

using namespace srnet;
using namespace srnet::oracle;

TEST(Losses, DiceReferenceExample) {
  auto t = torch::tensor({1.0, 0.0, 0.0, 1.0}, torch::kFloat64).view({1, 1, 2, 2});
  auto o = torch::tensor({1.0, 0.0, 0.0, 0.0}, torch::kFloat64).view({1, 1, 2, 2});
  // 1 - 2*1/(2+1), from tests/oracles/reference_values.py.
  EXPECT_NEAR(dice_loss(o, t, 0.0).item<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(dice_loss(t, t, 1e-6).item<double>(), 0.0, 1e-6);
  EXPECT_THROW(dice_loss(o, torch::zeros({1, 1, 2, 3})), ShapeError);
}

TEST(Losses, DiceMatchesNaivePerSampleMean) {
  torch::manual_seed(0);
  auto o = torch::rand({3, 1, 4, 4}, torch::kFloat64);
  auto t = (torch::rand({3, 1, 4, 4}, torch::kFloat64) > 0.5).to(torch::kFloat64);
  double expect = 0;
  for (int n = 0; n < 3; ++n) {
    double inter = 0, so = 0, st = 0;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        const double a = o[n][0][y][x].item<double>(), b = t[n][0][y][x].item<double>();
        inter += a * b;
        so += a;
        st += b;
      }
    expect += 1 - 2 * inter / (so + st + 1e-6);
  }
  EXPECT_NEAR(dice_loss(o, t, 1e-6).item<double>(), expect / 3, 1e-6);
  // Empty target and empty prediction: no division by zero.
  auto z = torch::zeros({1, 1, 4, 4});
  EXPECT_TRUE(std::isfinite(dice_loss(z, z, 1e-6).item<double>()));
}

TEST(Losses, L1MatchesNaive) {
  torch::manual_seed(1);
  auto a = torch::rand({1, 3, 4, 4}, torch::kFloat64), b = torch::rand({1, 3, 4, 4}, torch::kFloat64);
  EXPECT_NEAR(srnet::l1_loss(a, b).item<double>(), naive_mean_abs(to_map(a[0]), to_map(b[0])), 1e-12);
}

TEST(Losses, ExtractorMatchesNaiveConvStack) {
  torch::manual_seed(2);
  FeatureExtractor ex(small_extractor());
  auto x = torch::rand({1, 3, 4, 4}) * 2 - 1;
  auto taps = ex(x);
  auto ref = naive_features(ex, x[0]);
  ASSERT_EQ(taps.size(), 5u);
  for (size_t k = 0; k < 5; ++k) {
    auto got = to_map(taps[k][0]);
    ASSERT_EQ(got.size(), ref[k].size());
    ASSERT_EQ(got[0].size(), ref[k][0].size());
    EXPECT_NEAR(naive_mean_abs(got, ref[k]), 0.0, 1e-6) << "tap " << k;
  }
  for (auto& p : ex->parameters()) EXPECT_FALSE(p.requires_grad());
}

TEST(Losses, ExtractorIsSeeded) {
  FeatureExtractor a(small_extractor()), b(small_extractor());
  for (size_t k = 0; k < a->convs().size(); ++k) {
    EXPECT_TRUE(torch::equal(a->convs()[k]->weight, b->convs()[k]->weight));
  }
  auto other = small_extractor();
  other.seed = 8;
  EXPECT_FALSE(torch::equal(FeatureExtractor(other)->convs()[0]->weight, a->convs()[0]->weight));
}

TEST(Losses, PerceptualAndStyleMatchNaive) {
  torch::manual_seed(3);
  FeatureExtractor ex(small_extractor());
  auto t = torch::rand({1, 3, 4, 4}) * 2 - 1, o = torch::rand({1, 3, 4, 4}) * 2 - 1;
  auto ft = naive_features(ex, t[0]), fo = naive_features(ex, o[0]);
  double per = 0, sty = 0;
  for (size_t k = 0; k < 5; ++k) {
    per += naive_mean_abs(ft[k], fo[k]);
    sty += naive_style_term(ft[k], fo[k]);
  }
  EXPECT_NEAR(perceptual_loss(t, o, ex).item<double>(), per, 1e-6);
  EXPECT_NEAR(style_loss(t, o, ex).item<double>(), sty, 1e-6);
  EXPECT_NEAR(perceptual_loss(t, t, ex).item<double>(), 0.0, 1e-12);
}

TEST(Losses, GramMatchesNaiveAndIsPsd) {
  torch::manual_seed(4);
  auto f = torch::randn({1, 5, 3, 4}, torch::kFloat64);
  auto g = gram(f);
  auto ref = naive_gram(to_map(f[0]));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(g[0][i][j].item<double>(), ref[i][j], 1e-12);
  EXPECT_TRUE(torch::allclose(g, g.transpose(1, 2)));
  auto eig = torch::linalg_eigvalsh(g[0]);
  EXPECT_GE(eig.min().item<double>(), -1e-12);
  auto unnorm = gram(f, false);
  EXPECT_TRUE(torch::allclose(unnorm / (5.0 * 12.0), g));
}

TEST(Losses, GramInvariantToSpatialPermutation) {
  torch::manual_seed(5);
  auto f = torch::randn({2, 4, 3, 5}, torch::kFloat64);
  auto perm = torch::randperm(15, torch::kLong);
  auto shuffled = f.reshape({2, 4, 15}).index_select(2, perm).reshape({2, 4, 3, 5});
  EXPECT_TRUE(torch::allclose(gram(f), gram(shuffled), 1e-12, 1e-12));
}

TEST(Losses, AdversarialTermsMatchNaive) {
  auto real = torch::tensor({0.5, -1.0, 2.0, 40.0}, torch::kFloat64).view({1, 1, 2, 2});
  auto fake = torch::tensor({-0.3, 0.7, -50.0, 0.0}, torch::kFloat64).view({1, 1, 2, 2});
  auto sig = [](double x) { return 1 / (1 + std::exp(-x)); };
  auto clamp = [](double x) { return std::clamp(x, -30.0, 30.0); };
  double lr = 0, lf = 0, lg = 0;
  for (int i = 0; i < 4; ++i) {
    const double r = clamp(real.view(-1)[i].item<double>()), f = clamp(fake.view(-1)[i].item<double>());
    lr += -std::log(sig(r));
    lf += -std::log(1 - sig(f));
    lg += -std::log(sig(f));
  }
  EXPECT_NEAR(critic_loss(real, fake, 30).item<double>(), (lr + lf) / 4, 1e-9);
  EXPECT_NEAR(generator_adversarial_loss(fake, 30).item<double>(), lg / 4, 1e-9);

  LossWeights w;
  auto out = torch::zeros({1, 3, 2, 2}, torch::kFloat64), tgt = torch::full({1, 3, 2, 2}, 0.5, torch::kFloat64);
  auto b = background_loss(real, fake, out, tgt, w);
  EXPECT_NEAR(b.g_term.item<double>(), lg / 4 + w.beta * 0.5, 1e-9);
  EXPECT_NEAR(b.d_term.item<double>(), (lr + lf) / 4, 1e-9);
  auto f = fusion_adv_loss(real, fake, out, tgt, w);
  EXPECT_NEAR(f.g_term.item<double>(), lg / 4 + w.theta1 * 0.5, 1e-9);
}

TEST(Losses, ClampKeepsExtremeLogitsFinite) {
  auto huge = torch::full({1, 1, 2, 2}, 1e6);
  EXPECT_TRUE(std::isfinite(critic_loss(-huge, huge, 30).item<double>()));
  EXPECT_TRUE(std::isfinite(generator_adversarial_loss(-huge, 30).item<double>()));
}

TEST(Losses, TotalIsWeightedSum) {
  LossWeights w;
  w.alpha = 2;
  w.beta = 3;
  w.theta1 = 5;
  w.theta2 = 7;
  w.theta3 = 11;
  auto s = [](double v) { return torch::tensor(v, torch::kFloat64); };
  LossParts p{s(0.1), s(0.2), s(0.3), s(0.4), s(0.5), s(0.6), s(0.7), s(0.8)};
  const double expect = 0.1 + 2 * 0.2 + 0.3 + 3 * 0.4 + 0.5 + 5 * 0.6 + 7 * 0.7 + 11 * 0.8;
  EXPECT_NEAR(total_generator_loss(p, w).item<double>(), expect, 1e-12);
  auto o_t = torch::zeros({1, 3, 2, 2}), t_t = torch::full({1, 3, 2, 2}, 0.25);
  auto o_sk = torch::ones({1, 1, 2, 2}), t_sk = torch::ones({1, 1, 2, 2});
  EXPECT_NEAR(text_conversion_loss(o_t, t_t, o_sk, t_sk, w).item<double>(), 0.25, 1e-6);
}


TEST(Losses, DiceGradientMatchesFiniteDifferences) {
  torch::manual_seed(6);
  auto t = (torch::rand({2, 1, 8, 8}, torch::kFloat64) > 0.7).to(torch::kFloat64);
  auto o = torch::rand({2, 1, 8, 8}, torch::kFloat64) * 0.8 + 0.1;
  auto err = worst_relative_error([&](const torch::Tensor& x) { return dice_loss(x, t, 1e-6); }, o, 100, 1);
  EXPECT_LT(err, 1e-3);
}

TEST(Losses, PerceptualGradientMatchesFiniteDifferences) {
  torch::manual_seed(7);
  FeatureExtractor ex(small_extractor());
  ex->to(torch::kFloat64);
  auto t = torch::rand({1, 3, 8, 8}, torch::kFloat64) * 2 - 1;
  auto o = torch::rand({1, 3, 8, 8}, torch::kFloat64) * 2 - 1;
  auto err = worst_relative_error([&](const torch::Tensor& x) { return perceptual_loss(t, x, ex); }, o, 100, 2);
  EXPECT_LT(err, 1e-3);
}

TEST(Losses, Vgg19WeightsLoadFromTorchSaveDict) {
  const std::vector<std::pair<int, std::pair<int64_t, int64_t>>> layout = {
      {0, {3, 64}},     {2, {64, 64}},    {5, {64, 128}},   {7, {128, 128}},  {10, {128, 256}},
      {12, {256, 256}}, {14, {256, 256}}, {16, {256, 256}}, {19, {256, 512}}, {21, {512, 512}},
      {23, {512, 512}}, {25, {512, 512}}, {28, {512, 512}}};
  torch::manual_seed(9);
  c10::Dict<std::string, torch::Tensor> dict;
  for (auto [idx, io] : layout) {
    dict.insert("features." + std::to_string(idx) + ".weight", torch::randn({io.second, io.first, 3, 3}) * 0.01);
    dict.insert("features." + std::to_string(idx) + ".bias", torch::randn({io.second}) * 0.01);
  }
  auto dir = test::temp_dir("vgg19");
  auto path = dir / "vgg19.pt";
  {
    auto bytes = torch::pickle_save(c10::IValue(dict));
    std::ofstream(path, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  ExtractorConfig cfg;
  cfg.kind = "vgg19";
  cfg.weights = path.string();
  FeatureExtractor ex(cfg);
  ASSERT_EQ(ex->convs().size(), layout.size());
  EXPECT_TRUE(torch::equal(ex->convs()[4]->weight, dict.at("features.10.weight")));
  EXPECT_TRUE(torch::equal(ex->convs()[12]->bias, dict.at("features.28.bias")));

  auto taps = ex(torch::zeros({1, 3, 16, 16}));
  ASSERT_EQ(taps.size(), 5u);
  const std::vector<std::vector<int64_t>> want = {
      {1, 64, 16, 16}, {1, 128, 8, 8}, {1, 256, 4, 4}, {1, 512, 2, 2}, {1, 512, 1, 1}};
  for (size_t k = 0; k < 5; ++k) EXPECT_EQ(taps[k].sizes().vec(), want[k]) << "tap " << k;

  dict.erase("features.28.bias");
  {
    auto bytes = torch::pickle_save(c10::IValue(dict));
    std::ofstream(path, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  EXPECT_THROW(FeatureExtractor{cfg}, ConfigError);
  cfg.weights.clear();
  EXPECT_THROW(FeatureExtractor{cfg}, ConfigError);
}
