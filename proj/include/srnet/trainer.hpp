#pragma once

#include "srnet/checkpoint.hpp"
#include "srnet/config.hpp"
#include "srnet/dataset.hpp"
#include "srnet/discriminator.hpp"
#include "srnet/generator.hpp"
#include "srnet/losses.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace srnet {

/// lr_init before decay_start_epoch, then decays to lr_final at the final
/// epoch (epochs - 1), linearly or as a single step depending on decay_shape.
double lr_schedule(double epoch, const TrainConfig& config);

/// A stacked, width-homogeneous batch (N x C x H x W tensors).
struct Batch {
  torch::Tensor i_s, i_t, t_sk, t_t, t_b, t_f;
  std::vector<size_t> indices;
  int64_t size() const { return i_s.size(0); }
};

/// Random-access view of a dataset.
struct SampleSource {
  size_t count = 0;
  std::function<PairedSample(size_t)> load;

  static SampleSource from_manifest(const DatasetManifest& manifest);
  static SampleSource from_samples(std::vector<PairedSample> samples);
};

/// Batch-average width rounded to the nearest multiple of `stride` (>= stride).
int64_t batch_width(const std::vector<int64_t>& widths, int64_t stride = 8);

/// Resizes every sample (bilinear) to `height` x `width` and stacks them.
/// Skeletons are re-binarised at 0.5 after resizing.
Batch collate(const std::vector<PairedSample>& samples, int64_t height, int64_t width);

/// Shuffled epochs of batches. Every epoch visits each sample exactly once;
/// the order of epoch e depends only on (seed, e).
class BatchStream {
 public:
  BatchStream(SampleSource source, int batch_size, uint64_t seed, int height = 64, int workers = 1);

  Batch next();
  int64_t epoch() const { return epoch_; }
  size_t batches_per_epoch() const;
  /// Positions the stream at the start of `epoch`, batch `batch_index`.
  void seek(int64_t epoch, size_t batch_index);

  static std::vector<std::vector<size_t>> epoch_batches(size_t count, int batch_size, uint64_t seed,
                                                        int64_t epoch);

 private:
  SampleSource source_;
  int batch_size_;
  uint64_t seed_;
  int height_;
  int workers_;
  int64_t epoch_ = 0;
  size_t cursor_ = 0;
  std::vector<std::vector<size_t>> order_;
};

BatchStream make_batches(const DatasetManifest& manifest, int batch_size, uint64_t seed);

/// Scalar values of every loss component of one step.
struct LossScalars {
  double text_l1 = 0, dice = 0, background_adv = 0, background_l1 = 0, fusion_adv = 0,
         fusion_l1 = 0, perceptual = 0, style = 0, generator_total = 0, critic_b = 0,
         critic_f = 0;

  bool finite() const;
  std::string to_json(int64_t step, double lr) const;
};

/// Owns the networks, the frozen extractor and both optimizers, and performs
/// alternating critic / generator updates.
class Trainer {
 public:
  explicit Trainer(const RunConfig& config);

  /// One critic update (D_B and D_F) followed by one generator update.
  /// Throws TrainingDiverged if any loss is not finite.
  LossScalars train_step(const Batch& batch);

  /// Eval-mode reconstruction losses (text/background/fusion L1 and dice),
  /// one sample at a time at its own width padded to a multiple of 8.
  LossScalars evaluate(const std::vector<PairedSample>& samples);

  void set_learning_rate(double lr);
  double learning_rate() const { return lr_; }
  int64_t step() const { return step_; }

  void save(const std::filesystem::path& path);
  void resume(const std::filesystem::path& path);

  /// Full training loop: epochs of shuffled batches, schedule, line-delimited
  /// JSON log records, periodic and final checkpoints.
  void fit(const SampleSource& data, const std::filesystem::path& out_dir, std::ostream& log);

  Generator& generator() { return generator_; }
  PatchCritic& critic_b() { return critic_b_; }
  PatchCritic& critic_f() { return critic_f_; }
  FeatureExtractor& extractor() { return extractor_; }
  const RunConfig& config() const { return config_; }

 private:
  void set_critics_trainable(bool on);

  RunConfig config_;
  Generator generator_{nullptr};
  PatchCritic critic_b_{nullptr}, critic_f_{nullptr};
  FeatureExtractor extractor_{nullptr};
  std::unique_ptr<torch::optim::Adam> g_opt_, d_opt_;
  double lr_ = 0;
  int64_t step_ = 0;
};

struct OverfitReport {
  LossScalars initial;        // eval mode, native widths, before training
  LossScalars final;          // eval mode, native widths, after training
  LossScalars train_initial;  // mean training-step losses over the first epoch
  LossScalars train_final;    // mean training-step losses over the last epoch
  int64_t steps = 0;
  int64_t steps_per_epoch = 0;
  std::vector<LossScalars> trace;
  /// train_initial.fusion_l1 / train_final.fusion_l1.
  double fusion_l1_reduction() const;
};

/// Trains on a tiny in-memory set for `steps` steps. Records the training
/// objective's losses (train mode, batch-average widths) for the first and
/// last epoch, and eval-mode losses before and after.
OverfitReport overfit_smoke(Trainer& trainer, const std::vector<PairedSample>& samples, int64_t steps,
                            std::ostream* progress = nullptr);

/// Applies the global determinism knobs (thread count, deterministic kernels).
void configure_runtime(bool deterministic, int threads);

}  // namespace srnet
