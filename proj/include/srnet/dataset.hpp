#pragma once

#include "srnet/image.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace srnet {

/// One training example: source style image, rendered target text, target
/// skeleton, styled target text on the gray field, clean background and the
/// edited ground truth.
struct PairedSample {
  ImageTensor i_s;
  ImageTensor i_t;
  ImageTensor t_sk;  // 1 channel, [0,1]
  ImageTensor t_t;
  ImageTensor t_b;
  ImageTensor t_f;
  std::string source_text;
  std::string target_text;

  int64_t height() const { return i_s.height(); }
  int64_t width() const { return i_s.width(); }
};

/// Throws ShapeError naming the offending image if the six images disagree in
/// size or channel count.
void validate_sample(const PairedSample& sample);

inline constexpr std::array<std::string_view, 6> kSampleImageDirs = {"i_s", "i_t", "t_sk",
                                                                      "t_t", "t_b", "t_f"};

struct ManifestRecord {
  std::string id;
  std::array<std::string, 6> paths;  // relative to the dataset root, in kSampleImageDirs order
  std::string source_text;
  std::string target_text;
};

/// Dataset root plus its records. On disk: root/manifest.tsv with one
/// tab-separated line per record (six relative paths, source text, target text).
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestRecord> records;

  static DatasetManifest read(const std::filesystem::path& root);
  void write() const;
};

ManifestRecord make_record(std::string id, std::string source_text, std::string target_text);

PairedSample load_sample(const std::filesystem::path& root, const ManifestRecord& record);
void save_sample(const std::filesystem::path& root, const ManifestRecord& record,
                 const PairedSample& sample);

std::string format_sample_id(size_t index);

}  // namespace srnet
