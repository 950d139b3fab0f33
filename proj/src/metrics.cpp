#include "srnet/metrics.hpp"

#include "srnet/dataset.hpp"
#include "srnet/errors.hpp"
#include "srnet/image.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace srnet {

namespace fs = std::filesystem;

torch::Tensor to_unit(const cv::Mat& image) {
  if (image.depth() != CV_8U || (image.channels() != 1 && image.channels() != 3)) {
    throw ShapeError("metrics expect 8-bit gray or RGB images");
  }
  cv::Mat c = image.isContinuous() ? image : image.clone();
  auto t = torch::from_blob(c.data, {c.rows, c.cols, c.channels()}, torch::kUInt8);
  return t.permute({2, 0, 1}).to(torch::kFloat64) / 255.0;
}

namespace {

void check_same(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw ShapeError("metric inputs differ in shape");
  if (a.numel() == 0) throw ShapeError("metric inputs are empty");
}

torch::Tensor luma(const torch::Tensor& t) {
  auto x = t.to(torch::kFloat64);
  if (x.dim() == 2) return x;
  if (x.dim() != 3) throw ShapeError("expected an H×W or C×H×W image");
  if (x.size(0) == 1) return x[0];
  if (x.size(0) != 3) throw ShapeError("expected 1 or 3 channels");
  return 0.299 * x[0] + 0.587 * x[1] + 0.114 * x[2];
}

torch::Tensor gaussian_window(int size, double sigma) {
  auto r = torch::arange(size, torch::kFloat64) - (size - 1) / 2.0;
  auto g = torch::exp(-(r * r) / (2 * sigma * sigma));
  g = g / g.sum();
  return torch::outer(g, g);
}

}  // namespace

double l2_error(const torch::Tensor& a, const torch::Tensor& b) {
  check_same(a, b);
  auto d = a.to(torch::kFloat64) - b.to(torch::kFloat64);
  return (d * d).mean().item<double>();
}

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
  const double mse = l2_error(a, b);
  if (mse <= 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const torch::Tensor& a, const torch::Tensor& b) {
  check_same(a, b);
  constexpr int kWin = 11;
  auto x = luma(a), y = luma(b);
  if (x.size(0) < kWin || x.size(1) < kWin) {
    throw ShapeError("ssim needs images of at least 11×11 pixels");
  }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  auto w = gaussian_window(kWin, 1.5).view({1, 1, kWin, kWin});
  auto filt = [&](const torch::Tensor& t) { return torch::conv2d(t.view({1, 1, t.size(0), t.size(1)}), w); };
  auto mx = filt(x), my = filt(y);
  auto sxx = filt(x * x) - mx * mx;
  auto syy = filt(y * y) - my * my;
  auto sxy = filt(x * y) - mx * my;
  auto map = ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean().item<double>();
}

double l2_error(const cv::Mat& a, const cv::Mat& b) { return l2_error(to_unit(a), to_unit(b)); }
double psnr(const cv::Mat& a, const cv::Mat& b) { return psnr(to_unit(a), to_unit(b)); }
double ssim(const cv::Mat& a, const cv::Mat& b) { return ssim(to_unit(a), to_unit(b)); }

double seq_acc(const std::vector<std::string>& predictions, const std::vector<std::string>& labels,
               bool case_insensitive) {
  if (labels.empty()) throw Error("seq_acc: empty test set");
  if (predictions.size() != labels.size()) throw Error("seq_acc: prediction/label count mismatch");
  auto fold = [&](std::string s) {
    if (case_insensitive) {
      std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    }
    return s;
  };
  size_t hits = 0;
  for (size_t i = 0; i < labels.size(); ++i) hits += fold(predictions[i]) == fold(labels[i]);
  return static_cast<double>(hits) / labels.size();
}

RecognizerAdapter RecognizerAdapter::from_command(std::string command) {
  return RecognizerAdapter([command = std::move(command)](const fs::path& image) {
    std::string quoted = "'";
    for (char ch : image.string()) quoted += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    quoted += "'";
    const std::string cmd = command + " " + quoted;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) throw Error("cannot run recognizer: " + command);
    std::string out;
    std::array<char, 256> buf;
    while (fgets(buf.data(), buf.size(), pipe.get())) out += buf.data();
    const auto first = out.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::string();
    const auto last = out.find_last_not_of(" \t\r\n");
    return out.substr(first, last - first + 1);
  });
}

std::string EvalReport::to_jsonl() const {
  std::ostringstream os;
  for (const auto& r : rows) {
    nlohmann::json j = {{"id", r.id}, {"l2", r.l2}, {"psnr", r.psnr}, {"ssim", r.ssim}};
    if (r.prediction) j["prediction"] = *r.prediction;
    if (r.label) j["label"] = *r.label;
    os << j.dump() << '\n';
  }
  nlohmann::json footer = {{"aggregate", true},    {"count", rows.size()},  {"l2", mean_l2},
                           {"psnr", mean_psnr},    {"ssim", mean_ssim}};
  footer["seq_acc"] = seq_acc ? nlohmann::json(*seq_acc) : nlohmann::json(nullptr);
  if (!warnings.empty()) footer["warnings"] = warnings;
  os << footer.dump() << '\n';
  return os.str();
}

void EvalReport::write(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write report " + path.string());
  out << to_jsonl();
}

namespace {

struct GroundTruth {
  fs::path image;
  std::optional<std::string> label;
};

std::map<std::string, GroundTruth> ground_truth(const fs::path& gt_dir) {
  std::map<std::string, GroundTruth> gt;
  if (fs::exists(gt_dir / "manifest.tsv")) {
    auto manifest = DatasetManifest::read(gt_dir);
    for (const auto& r : manifest.records) gt[r.id] = {gt_dir / r.paths[5], r.target_text};
    return gt;
  }
  if (!fs::is_directory(gt_dir)) throw Error("ground-truth directory not found: " + gt_dir.string());
  for (const auto& e : fs::directory_iterator(gt_dir)) {
    if (e.path().extension() == ".png") gt[e.path().stem().string()] = {e.path(), std::nullopt};
  }
  std::ifstream labels(gt_dir / "labels.tsv");
  std::string line;
  while (std::getline(labels, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    auto it = gt.find(line.substr(0, tab));
    if (it != gt.end()) it->second.label = line.substr(tab + 1);
  }
  return gt;
}

}  // namespace

EvalReport evaluate(const fs::path& pred_dir, const fs::path& gt_dir,
                    const std::optional<RecognizerAdapter>& recognizer, bool case_insensitive) {
  if (!fs::is_directory(pred_dir)) throw Error("prediction directory not found: " + pred_dir.string());
  std::map<std::string, fs::path> preds;
  for (const auto& e : fs::directory_iterator(pred_dir)) {
    if (e.path().extension() == ".png") preds[e.path().stem().string()] = e.path();
  }
  const auto gt = ground_truth(gt_dir);

  std::vector<std::string> missing_pred, missing_gt;
  for (const auto& [id, _] : gt) if (!preds.count(id)) missing_pred.push_back(id);
  for (const auto& [id, _] : preds) if (!gt.count(id)) missing_gt.push_back(id);
  if (!missing_pred.empty() || !missing_gt.empty()) {
    std::string msg = "prediction and ground-truth ids differ;";
    auto list = [&](const char* what, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg += std::string(" ") + what + ":";
      for (const auto& id : ids) msg += " " + id;
      msg += ";";
    };
    list("missing predictions", missing_pred);
    list("missing ground truth", missing_gt);
    throw Error(msg);
  }
  if (preds.empty()) throw Error("no .png predictions in " + pred_dir.string());

  EvalReport report;
  std::vector<std::string> predictions, labels;
  for (const auto& [id, pred_path] : preds) {
    const auto& g = gt.at(id);
    cv::Mat p = read_png(pred_path), t = read_png(g.image);
    if (p.size() != t.size() || p.channels() != t.channels()) {
      throw ShapeError("sample " + id + ": prediction and ground truth differ in size");
    }
    EvalRow row{id, l2_error(p, t), psnr(p, t), ssim(p, t), std::nullopt, g.label};
    if (recognizer && g.label) {
      row.prediction = (*recognizer)(pred_path);
      predictions.push_back(*row.prediction);
      labels.push_back(*g.label);
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& r : report.rows) {
    report.mean_l2 += r.l2;
    report.mean_psnr += r.psnr;
    report.mean_ssim += r.ssim;
  }
  const double n = static_cast<double>(report.rows.size());
  report.mean_l2 /= n;
  report.mean_psnr /= n;
  report.mean_ssim /= n;
  if (!recognizer) {
    report.warnings.push_back("no recognizer configured; seq_acc skipped");
  } else if (labels.empty()) {
    report.warnings.push_back("no labels available; seq_acc skipped");
  } else {
    report.seq_acc = seq_acc(predictions, labels, case_insensitive);
  }
  return report;
}

}  // namespace srnet
