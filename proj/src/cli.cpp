#include "srnet/cli.hpp"

#include "srnet/config.hpp"
#include "srnet/dataset.hpp"
#include "srnet/errors.hpp"
#include "srnet/inference.hpp"
#include "srnet/metrics.hpp"
#include "srnet/synthgen.hpp"
#include "srnet/trainer.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <opencv2/imgproc.hpp>
#include <optional>

namespace srnet {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<uint64_t> seed;
  bool deterministic = false;
  std::optional<int> workers;
};

RunConfig resolve(const GlobalOptions& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : RunConfig::load(g.config);
  if (g.seed) cfg.train.seed = *g.seed;
  if (g.deterministic) cfg.train.deterministic = true;
  if (g.workers) cfg.train.workers = *g.workers;
  configure_runtime(cfg.train.deterministic, cfg.train.workers);
  return cfg;
}

fs::path output_dir_of(const fs::path& file) {
  return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

void write_resolved(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  cfg.save(dir / "resolved_config.yaml");
}

cv::Mat stack_rows(const std::vector<cv::Mat>& rows, int gap) {
  int width = 0, height = 0;
  for (const auto& r : rows) {
    width = std::max(width, r.cols);
    height += r.rows + gap;
  }
  cv::Mat grid(std::max(height - gap, 1), std::max(width, 1), CV_8UC3, cv::Scalar(255, 255, 255));
  int y = 0;
  for (const auto& r : rows) {
    r.copyTo(grid(cv::Rect(0, y, r.cols, r.rows)));
    y += r.rows + gap;
  }
  return grid;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scene text editing: synthetic data, training, editing, erasure and evaluation", "srnet"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions g;
  app.add_option("--config", g.config, "YAML run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Global seed (overrides train.seed)");
  app.add_flag("--deterministic", g.deterministic, "Single-threaded deterministic kernels");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a paired synthetic corpus");
  std::string synth_out, words_path, bg_dir, font_dir;
  size_t count = 0;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--count", count, "Number of samples")->required();
  synth->add_option("--words", words_path, "Word list file (one per line)");
  synth->add_option("--backgrounds", bg_dir, "Directory of background images");
  synth->add_option("--fonts", font_dir, "Directory of .ttf/.otf fonts");

  // train
  auto* train = app.add_subcommand("train", "Train the generator and critics");
  std::string data_dir, train_out, resume;
  int64_t steps = -1;
  train->add_option("--data", data_dir, "Corpus directory containing manifest.tsv")->required();
  train->add_option("--out", train_out, "Checkpoint / log directory")->required();
  train->add_option("--steps", steps, "Stop after this many steps (overrides train.max_steps)");
  train->add_option("--resume", resume, "Checkpoint to resume from");

  // edit / erase
  std::string image_path, boxes_path, ckpt, out_path;
  auto add_edit_opts = [&](CLI::App* cmd) {
    cmd->add_option("--image", image_path, "Input image")->required();
    cmd->add_option("--boxes", boxes_path, "Box file: x,y,w,h,text per line")->required();
    cmd->add_option("--ckpt", ckpt, "Checkpoint")->required();
    cmd->add_option("--out", out_path, "Output image")->required();
  };
  auto* edit = app.add_subcommand("edit", "Replace the words inside the given boxes");
  add_edit_opts(edit);
  auto* erase = app.add_subcommand("erase", "Erase the words inside the given boxes");
  add_edit_opts(erase);

  // eval
  auto* eval = app.add_subcommand("eval", "Compute l2 / PSNR / SSIM / seq_acc");
  std::string pred_dir, gt_dir, recognizer, report_path;
  bool case_insensitive = false;
  eval->add_option("--pred", pred_dir, "Directory of <id>.png predictions")->required();
  eval->add_option("--gt", gt_dir, "Ground-truth corpus or image directory")->required();
  eval->add_option("--recognizer", recognizer, "Command printing the text read from an image");
  eval->add_option("--report", report_path, "Report file (JSON lines)")->required();
  eval->add_flag("--case-insensitive", case_insensitive, "Ignore case in seq_acc");

  // demo-grid
  auto* demo = app.add_subcommand("demo-grid", "Render a before/after grid for corpus samples");
  std::string demo_data, demo_out;
  size_t demo_count = 8;
  demo->add_option("--data", demo_data, "Corpus directory")->required();
  demo->add_option("--ckpt", ckpt, "Checkpoint")->required();
  demo->add_option("--out", demo_out, "Output PNG")->required();
  demo->add_option("--count", demo_count, "Number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  RunConfig cfg;
  try {
    cfg = resolve(g);
    cfg.train.validate();
    cfg.synth.validate();
  } catch (const std::exception& e) {
    err << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*synth) {
      if (!font_dir.empty()) cfg.synth.font_dir = font_dir;
      if (!words_path.empty()) cfg.synth.word_list = words_path;
      if (!bg_dir.empty()) cfg.synth.background_dir = bg_dir;
      const auto words =
          cfg.synth.word_list.empty() ? builtin_word_list() : read_word_list(cfg.synth.word_list);
      const auto bgs = cfg.synth.background_dir.empty()
                           ? BackgroundPool::procedural(cfg.synth.procedural_backgrounds, cfg.train.seed)
                           : BackgroundPool::from_directory(cfg.synth.background_dir);
      write_resolved(cfg, synth_out);
      auto manifest = generate_corpus(count, cfg.train.seed, words, bgs, cfg.synth, synth_out, cfg.train.workers);
      out << "wrote " << manifest.records.size() << " samples to " << synth_out << "\n";
    } else if (*train) {
      if (!fs::exists(fs::path(data_dir) / "manifest.tsv")) {
        throw Error("training data not found: " + (fs::path(data_dir) / "manifest.tsv").string());
      }
      if (steps >= 0) cfg.train.max_steps = steps;
      auto manifest = DatasetManifest::read(data_dir);
      write_resolved(cfg, train_out);
      Trainer trainer(cfg);
      if (!resume.empty()) trainer.resume(resume);
      std::ofstream log(fs::path(train_out) / "train_log.jsonl", std::ios::app);
      trainer.fit(SampleSource::from_manifest(manifest), train_out, log);
      out << "trained " << trainer.step() << " steps; checkpoint " << (fs::path(train_out) / "final.pt").string()
          << "\n";
    } else if (*edit || *erase) {
      cv::Mat image = read_png(image_path);
      if (image.channels() == 1) cv::cvtColor(image, image, cv::COLOR_GRAY2RGB);
      auto boxes = read_boxes(boxes_path);
      Editor editor = Editor::from_checkpoint(ckpt, EditorOptions::from_config(cfg));
      cv::Mat result;
      if (*edit) {
        result = editor.edit_many(image, boxes);
      } else {
        std::vector<BBox> bb;
        for (const auto& b : boxes) bb.push_back(b.box);
        result = editor.erase_many(image, bb);
      }
      write_png(out_path, result);
      write_resolved(cfg, output_dir_of(out_path));
      out << "wrote " << out_path << " (" << editor.forward_count() << " words)\n";
    } else if (*eval) {
      std::optional<RecognizerAdapter> rec;
      if (!recognizer.empty()) rec = RecognizerAdapter::from_command(recognizer);
      auto report = evaluate(pred_dir, gt_dir, rec, case_insensitive);
      for (const auto& w : report.warnings) err << "warning: " << w << "\n";
      report.write(report_path);
      write_resolved(cfg, output_dir_of(report_path));
      out << "l2 " << report.mean_l2 << " psnr " << report.mean_psnr << " ssim " << report.mean_ssim;
      if (report.seq_acc) out << " seq_acc " << *report.seq_acc;
      out << " (" << report.count() << " samples)\n";
    } else if (*demo) {
      auto manifest = DatasetManifest::read(demo_data);
      Editor editor = Editor::from_checkpoint(ckpt, EditorOptions::from_config(cfg));
      std::vector<cv::Mat> rows;
      const size_t n = std::min(demo_count, manifest.records.size());
      for (size_t i = 0; i < n; ++i) {
        const auto& rec = manifest.records[i];
        cv::Mat i_s = read_png(fs::path(demo_data) / rec.paths[0]);
        cv::Mat t_f = read_png(fs::path(demo_data) / rec.paths[5]);
        const BBox whole{0, 0, i_s.cols, i_s.rows};
        cv::Mat edited = editor.edit_word(i_s, whole, rec.target_text);
        cv::Mat erased = editor.erase_word(i_s, whole);
        cv::Mat row;
        cv::hconcat(std::vector<cv::Mat>{i_s, edited, erased, t_f}, row);
        rows.push_back(row);
      }
      write_png(demo_out, stack_rows(rows, 4));
      write_resolved(cfg, output_dir_of(demo_out));
      out << "wrote " << demo_out << " (" << n << " rows: source | edited | erased | target)\n";
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"srnet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace srnet
