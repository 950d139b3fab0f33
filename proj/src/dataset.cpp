#include "srnet/dataset.hpp"

#include "srnet/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace srnet {

namespace fs = std::filesystem;

void validate_sample(const PairedSample& s) {
  const std::array<std::pair<const ImageTensor*, const char*>, 6> images = {{{&s.i_s, "i_s"},
                                                                            {&s.i_t, "i_t"},
                                                                            {&s.t_sk, "t_sk"},
                                                                            {&s.t_t, "t_t"},
                                                                            {&s.t_b, "t_b"},
                                                                            {&s.t_f, "t_f"}}};
  for (auto [img, name] : images) {
    if (!img->defined()) throw ShapeError(std::string(name) + " is empty");
    const int64_t want_c = img == &s.t_sk ? 1 : 3;
    if (img->channels() != want_c) throw ShapeError(std::string(name) + " has wrong channel count");
    if (img->height() != s.i_s.height() || img->width() != s.i_s.width()) {
      throw ShapeError("dimension mismatch: " + std::string(name) + " is " +
                       std::to_string(img->height()) + "x" + std::to_string(img->width()) +
                       ", i_s is " + std::to_string(s.i_s.height()) + "x" +
                       std::to_string(s.i_s.width()));
    }
  }
}

std::string format_sample_id(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return buf;
}

ManifestRecord make_record(std::string id, std::string source_text, std::string target_text) {
  ManifestRecord r;
  for (size_t k = 0; k < kSampleImageDirs.size(); ++k) {
    r.paths[k] = std::string(kSampleImageDirs[k]) + "/" + id + ".png";
  }
  r.id = std::move(id);
  r.source_text = std::move(source_text);
  r.target_text = std::move(target_text);
  return r;
}

namespace {

void check_text_field(const std::string& text, const std::string& id) {
  if (text.find_first_of("\t\n\r") != std::string::npos) {
    throw DatasetError(id, "text contains tab or newline");
  }
}

std::string id_from_path(const std::string& rel) {
  return fs::path(rel).stem().string();
}

}  // namespace

DatasetManifest DatasetManifest::read(const fs::path& root) {
  const auto path = root / "manifest.tsv";
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  DatasetManifest m;
  m.root = root;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() == 7 && line.back() == '\t') fields.emplace_back();
    if (fields.size() != 8) {
      throw DatasetError("line " + std::to_string(line_no),
                         "expected 8 tab-separated fields, got " + std::to_string(fields.size()));
    }
    ManifestRecord r;
    for (size_t k = 0; k < 6; ++k) r.paths[k] = fields[k];
    r.id = id_from_path(fields[0]);
    r.source_text = fields[6];
    r.target_text = fields[7];
    m.records.push_back(std::move(r));
  }
  return m;
}

void DatasetManifest::write() const {
  fs::create_directories(root);
  std::ofstream out(root / "manifest.tsv", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write manifest in " + root.string());
  for (const auto& r : records) {
    check_text_field(r.source_text, r.id);
    check_text_field(r.target_text, r.id);
    for (const auto& p : r.paths) out << p << '\t';
    out << r.source_text << '\t' << r.target_text << '\n';
  }
}

PairedSample load_sample(const fs::path& root, const ManifestRecord& record) {
  std::array<cv::Mat, 6> raw;
  for (size_t k = 0; k < 6; ++k) {
    try {
      raw[k] = read_png(root / record.paths[k]);
    } catch (const Error& e) {
      throw DatasetError(record.id, e.what());
    }
  }
  for (size_t k = 1; k < 6; ++k) {
    if (raw[k].size() != raw[0].size()) {
      throw DatasetError(record.id, "dimension mismatch: " + record.paths[k] + " is " +
                                        std::to_string(raw[k].rows) + "x" +
                                        std::to_string(raw[k].cols) + ", " + record.paths[0] +
                                        " is " + std::to_string(raw[0].rows) + "x" +
                                        std::to_string(raw[0].cols));
    }
  }
  auto rgb = [&](size_t k) {
    if (raw[k].channels() != 3) throw DatasetError(record.id, record.paths[k] + " is not RGB");
    return ImageTensor::from_u8(raw[k], ValueRange::Signed);
  };
  PairedSample s;
  try {
    s.i_s = rgb(0);
    s.i_t = rgb(1);
    if (raw[2].channels() != 1) throw DatasetError(record.id, record.paths[2] + " is not gray");
    s.t_sk = ImageTensor::from_u8(raw[2], ValueRange::Unit);
    s.t_t = rgb(3);
    s.t_b = rgb(4);
    s.t_f = rgb(5);
    validate_sample(s);
  } catch (const ShapeError& e) {
    throw DatasetError(record.id, e.what());
  }
  s.source_text = record.source_text;
  s.target_text = record.target_text;
  return s;
}

void save_sample(const fs::path& root, const ManifestRecord& record, const PairedSample& sample) {
  validate_sample(sample);
  const std::array<const ImageTensor*, 6> images = {&sample.i_s, &sample.i_t, &sample.t_sk,
                                                    &sample.t_t, &sample.t_b, &sample.t_f};
  for (size_t k = 0; k < 6; ++k) write_png(root / record.paths[k], images[k]->to_u8());
}

}  // namespace srnet
