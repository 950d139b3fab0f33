#include "srnet/dataset.hpp"
#include "srnet/errors.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace srnet;

TEST(Dataset, SampleIdsAreZeroPadded) {
  EXPECT_EQ(format_sample_id(0), "000000");
  EXPECT_EQ(format_sample_id(1234), "001234");
}

TEST(Dataset, SaveLoadRoundTrip) {
  test::SynthFixture fx;
  auto pair = fx.sample(3);
  auto dir = test::temp_dir("dataset_rt");
  auto rec = make_record(format_sample_id(3), pair.sample.source_text, pair.sample.target_text);
  save_sample(dir, rec, pair.sample);
  DatasetManifest m{dir, {rec}};
  m.write();

  auto back = DatasetManifest::read(dir);
  ASSERT_EQ(back.records.size(), 1u);
  EXPECT_EQ(back.records[0].source_text, pair.sample.source_text);
  EXPECT_EQ(back.records[0].target_text, pair.sample.target_text);
  auto s = load_sample(dir, back.records[0]);
  EXPECT_TRUE(torch::equal(s.i_s.tensor(), pair.sample.i_s.tensor()));
  EXPECT_TRUE(torch::equal(s.t_sk.tensor(), pair.sample.t_sk.tensor()));
  EXPECT_TRUE(torch::equal(s.t_f.tensor(), pair.sample.t_f.tensor()));
  EXPECT_EQ(s.t_sk.channels(), 1);
}

TEST(Dataset, DimensionMismatchNamesRecord) {
  test::SynthFixture fx;
  auto pair = fx.sample(0);
  auto dir = test::temp_dir("dataset_bad");
  auto rec = make_record("000007", "a", "b");
  save_sample(dir, rec, pair.sample);
  write_png(dir / rec.paths[4], cv::Mat(64, 10, CV_8UC3, cv::Scalar::all(0)));
  try {
    load_sample(dir, rec);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.record_id(), "000007");
  }
}

TEST(Dataset, MissingFileIsDatasetError) {
  auto dir = test::temp_dir("dataset_missing");
  EXPECT_THROW(load_sample(dir, make_record("000001", "a", "b")), DatasetError);
}

TEST(Dataset, ValidateRejectsMismatchedSizes) {
  PairedSample s;
  auto img = [](int64_t w) { return ImageTensor(torch::zeros({3, 64, w}), ValueRange::Signed); };
  s.i_s = img(40);
  s.i_t = img(40);
  s.t_sk = ImageTensor(torch::zeros({1, 64, 40}), ValueRange::Unit);
  s.t_t = img(40);
  s.t_b = img(48);
  s.t_f = img(40);
  EXPECT_THROW(validate_sample(s), ShapeError);
  s.t_b = img(40);
  EXPECT_NO_THROW(validate_sample(s));
}

TEST(Dataset, ManifestRejectsMalformedLines) {
  auto dir = test::temp_dir("dataset_manifest");
  std::ofstream(dir / "manifest.tsv") << "only\ttwo\n";
  EXPECT_THROW(DatasetManifest::read(dir), Error);
  EXPECT_THROW(DatasetManifest::read(dir / "nope"), Error);
}
