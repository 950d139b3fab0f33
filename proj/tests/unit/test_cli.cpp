#include "srnet/cli.hpp"
#include "srnet/dataset.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace srnet;

namespace {

int run(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = dispatch(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  std::string err;
  EXPECT_EQ(run({"frobnicate"}, nullptr, &err), 2);
  EXPECT_NE(err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"synth", "--count", "3"}), 2);
}

TEST(Cli, SynthZeroCountWritesEmptyManifest) {
  auto dir = test::temp_dir("cli_synth0");
  EXPECT_EQ(run({"synth", "--out", dir.string(), "--count", "0"}), 0);
  EXPECT_TRUE(DatasetManifest::read(dir).records.empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "resolved_config.yaml"));
}

TEST(Cli, SynthIsDeterministic) {
  auto a = test::temp_dir("cli_synth_a"), b = test::temp_dir("cli_synth_b");
  ASSERT_EQ(run({"synth", "--out", a.string(), "--count", "2", "--seed", "4"}), 0);
  ASSERT_EQ(run({"--seed", "4", "--workers", "2", "synth", "--out", b.string(), "--count", "2"}), 0);
  auto ma = DatasetManifest::read(a), mb = DatasetManifest::read(b);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(ma.records[i].target_text, mb.records[i].target_text);
    EXPECT_EQ(cv::norm(read_png(a / ma.records[i].paths[5]), read_png(b / mb.records[i].paths[5]), cv::NORM_INF), 0);
  }
}

TEST(Cli, TrainMissingDataNamesPath) {
  std::string err;
  EXPECT_EQ(run({"train", "--data", "/nonexistent/corpus", "--out", test::temp_dir("cli_t").string()}, nullptr, &err), 1);
  EXPECT_NE(err.find("/nonexistent/corpus"), std::string::npos);
}

TEST(Cli, BadConfigIsUsageError) {
  auto dir = test::temp_dir("cli_cfg");
  std::ofstream(dir / "bad.yaml") << "model:\n  widht: 3\n";
  EXPECT_EQ(run({"--config", (dir / "bad.yaml").string(), "synth", "--out", dir.string(), "--count", "0"}), 2);
}

TEST(Cli, TrainEditEraseEvalDemo) {
  auto dir = test::temp_dir("cli_e2e");
  std::ofstream(dir / "tiny.yaml") << "model: {base_channels: 8, res_blocks: 1, disc_base_channels: 8}\n"
                                      "extractor: {random_widths: [4, 8, 8, 8, 8]}\n"
                                      "train: {batch_size: 2, max_steps: 2, log_every: 1, checkpoint_every: 0}\n";
  const auto cfg = (dir / "tiny.yaml").string();
  ASSERT_EQ(run({"--config", cfg, "synth", "--out", (dir / "data").string(), "--count", "3"}), 0);
  ASSERT_EQ(run({"--config", cfg, "train", "--data", (dir / "data").string(), "--out", (dir / "run").string()}), 0);
  const auto ckpt = (dir / "run" / "final.pt").string();
  ASSERT_TRUE(std::filesystem::exists(ckpt));

  auto manifest = DatasetManifest::read(dir / "data");
  const auto image = (dir / "data" / manifest.records[0].paths[0]).string();
  std::ofstream(dir / "boxes.txt") << "0,0,16,16,Hi\n";
  EXPECT_EQ(run({"edit", "--image", image, "--boxes", (dir / "boxes.txt").string(), "--ckpt", ckpt, "--out",
                 (dir / "edit" / "000000.png").string()}),
            0);
  EXPECT_EQ(run({"erase", "--image", image, "--boxes", (dir / "boxes.txt").string(), "--ckpt", ckpt, "--out",
                 (dir / "erase.png").string()}),
            0);
  EXPECT_EQ(read_png(dir / "edit" / "000000.png").size(), read_png(image).size());
  std::string err;
  EXPECT_EQ(run({"eval", "--pred", (dir / "edit").string(), "--gt", (dir / "data").string(), "--report",
                 (dir / "report.jsonl").string()},
                nullptr, &err),
            1);
  EXPECT_NE(err.find("000001"), std::string::npos);
  EXPECT_EQ(run({"demo-grid", "--data", (dir / "data").string(), "--ckpt", ckpt, "--out",
                 (dir / "grid.png").string(), "--count", "2"}),
            0);
  EXPECT_GE(read_png(dir / "grid.png").cols, 4 * read_png(image).cols);
}
